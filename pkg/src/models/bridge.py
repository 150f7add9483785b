"""
Bridge to a classifier running in a child process.

Line protocol over the child's stdin/stdout (UTF-8, newline-delimited):

    parent: HELLO cpath/1          child: OK <g>
    parent: PREDICT <n> <p>        child: n lines, one integer label in 1..g each
            n lines of p floats           END

Requests are serialized: one in-flight request per child. A protocol error during a request
leaves the session unusable; later requests fail fast.
"""
import hashlib
import queue
import shlex
import subprocess
import threading
from typing import List, Optional, Sequence, Union

import numpy as np
from loguru import logger

from ..config.settings import get_settings
from ..data.tabular import Dataset
from ..exceptions import ProtocolError
from .blackbox import BlackBoxModel

PROTOCOL_VERSION = "cpath/1"
_EOF = object()


def format_row(row: np.ndarray) -> str:
    return ",".join(format(float(v), ".17g") for v in row)


class ExternalModel(BlackBoxModel):
    """A BlackBoxModel whose predictions come from a child process."""

    kind = "external"

    def __init__(
        self,
        command: Sequence[str],
        p: Optional[int] = None,
        handshake_timeout: Optional[float] = None,
        request_timeout: Optional[float] = None
    ):
        settings = get_settings()
        self.command = list(command)
        self.handshake_timeout = handshake_timeout or settings.CPATH_HANDSHAKE_TIMEOUT
        self.request_timeout = request_timeout or settings.CPATH_REQUEST_TIMEOUT
        self._lock = threading.Lock()
        self._broken: Optional[str] = None
        self._lines: "queue.Queue[object]" = queue.Queue()
        self._process = self._spawn()
        g = self._handshake()
        # p is learned from the first request when not given
        super().__init__(p=p if p is not None else -1, g=g)

    def _spawn(self) -> subprocess.Popen:
        try:
            process = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1
            )
        except OSError as e:
            raise ProtocolError(f"failed to spawn {shlex.join(self.command)}: {e}")
        threading.Thread(target=self._pump_stdout, args=(process,), daemon=True).start()
        threading.Thread(target=self._pump_stderr, args=(process,), daemon=True).start()
        return process

    def _pump_stdout(self, process: subprocess.Popen) -> None:
        for line in process.stdout:
            self._lines.put(line.rstrip("\r\n"))
        self._lines.put(_EOF)

    def _pump_stderr(self, process: subprocess.Popen) -> None:
        for line in process.stderr:
            logger.warning(f"external model stderr: {line.rstrip()}")

    def _read_line(self, timeout: float, what: str) -> str:
        try:
            line = self._lines.get(timeout=timeout)
        except queue.Empty:
            raise ProtocolError(f"timed out after {timeout:g}s waiting for {what}")
        if line is _EOF:
            code = self._process.poll()
            raise ProtocolError(f"child exited (code {code}) while waiting for {what}")
        return line

    def _write(self, text: str) -> None:
        try:
            self._process.stdin.write(text)
            self._process.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            raise ProtocolError(f"child closed its input: {e}")

    def _handshake(self) -> int:
        self._write(f"HELLO {PROTOCOL_VERSION}\n")
        try:
            reply = self._read_line(self.handshake_timeout, "handshake")
        except ProtocolError:
            self._process.kill()
            self._process.wait()
            raise
        parts = reply.split()
        if len(parts) != 2 or parts[0] != "OK":
            self.close()
            raise ProtocolError(f"malformed handshake reply {reply!r}")
        try:
            g = int(parts[1])
        except ValueError:
            self.close()
            raise ProtocolError(f"malformed class count in handshake reply {reply!r}")
        if g < 2:
            self.close()
            raise ProtocolError(f"child reported g={g}; at least two classes are required")
        logger.debug(f"Handshake with {self.command[0]} complete: g={g}")
        return g

    def _check_columns(self, dataset: Dataset) -> None:
        if self.p < 0:
            self.p = dataset.p
        super()._check_columns(dataset)

    def _predict(self, dataset: Dataset) -> np.ndarray:
        n, p = dataset.values.shape
        lines: List[str] = [f"PREDICT {n} {p}"]
        lines.extend(format_row(row) for row in dataset.values)
        with self._lock:
            if self._broken is not None:
                raise ProtocolError(f"session is broken after an earlier error: {self._broken}")
            try:
                self._reject_stray_output()
                self._write("\n".join(lines) + "\n")
                return self._read_labels(n)
            except ProtocolError as e:
                self._broken = e.message
                raise

    def _reject_stray_output(self) -> None:
        try:
            stray = self._lines.get_nowait()
        except queue.Empty:
            return
        if stray is _EOF:
            raise ProtocolError(f"child exited (code {self._process.poll()}) between requests")
        raise ProtocolError(f"unexpected output {stray!r} between requests")

    def _read_labels(self, n: int) -> np.ndarray:
        labels = np.empty(n, dtype=np.int64)
        for i in range(n):
            reply = self._read_line(self.request_timeout, f"label {i + 1} of {n}")
            if reply == "END":
                raise ProtocolError(f"malformed response: got {i} labels for {n} rows")
            try:
                label = int(reply)
            except ValueError:
                raise ProtocolError(f"malformed response line {reply!r}")
            if not 1 <= label <= self.g:
                raise ProtocolError(f"label {label} outside 1..{self.g}")
            labels[i] = label
        trailer = self._read_line(self.request_timeout, "END")
        if trailer != "END":
            raise ProtocolError(f"malformed response: expected END, got {trailer!r}")
        return labels

    def fingerprint(self) -> str:
        return hashlib.sha256(shlex.join(self.command).encode("utf-8")).hexdigest()

    def close(self) -> None:
        process = getattr(self, "_process", None)
        if process is None or process.poll() is not None:
            return
        try:
            process.stdin.close()
            process.wait(timeout=5)
        except (OSError, subprocess.TimeoutExpired):
            process.kill()
            process.wait()

    def __del__(self):
        self.close()


def spawn_external_model(command: Union[str, Sequence[str]], p: Optional[int] = None) -> ExternalModel:
    """
    Start a child process and complete the HELLO handshake.

    Args:
        command: executable and arguments (a string is split shell-style)
        p: expected feature count, or None to take it from the first request

    Returns:
        ExternalModel: a BlackBoxModel backed by the child
    """
    if isinstance(command, str):
        command = shlex.split(command)
    if not command:
        raise ProtocolError("empty command")
    return ExternalModel(command, p=p)
