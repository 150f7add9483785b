"""
Child side of the external-model line protocol.

    python -m src.models.serve forest.json

serves a dumped forest so any process speaking the protocol can use it.
"""
import argparse
import sys
from pathlib import Path
from typing import TextIO

import numpy as np

from ..data.tabular import Dataset
from .blackbox import BlackBoxModel
from .bridge import PROTOCOL_VERSION
from .forest import load_forest


def serve(model: BlackBoxModel, stdin: TextIO = sys.stdin, stdout: TextIO = sys.stdout) -> None:
    """Answer HELLO and PREDICT requests until stdin closes."""
    hello = stdin.readline().strip()
    if hello != f"HELLO {PROTOCOL_VERSION}":
        raise SystemExit(f"unexpected greeting {hello!r}")
    stdout.write(f"OK {model.g}\n")
    stdout.flush()

    columns = tuple(f"X{j + 1}" for j in range(model.p))
    for line in stdin:
        parts = line.split()
        if not parts:
            continue
        if parts[0] != "PREDICT" or len(parts) != 3:
            raise SystemExit(f"unexpected request {line.strip()!r}")
        n, p = int(parts[1]), int(parts[2])
        rows = [stdin.readline() for _ in range(n)]
        values = np.array([[float(v) for v in row.split(",")] for row in rows], dtype=np.float64).reshape(n, p)
        labels = model.predict(Dataset(columns=columns[:p], values=values)).labels
        stdout.write("".join(f"{int(label)}\n" for label in labels) + "END\n")
        stdout.flush()


def main() -> None:
    parser = argparse.ArgumentParser(description="Serve a dumped forest over the cpath line protocol")
    parser.add_argument("model", type=Path, help="forest JSON written by dump_forest")
    args = parser.parse_args()
    serve(load_forest(args.model.read_text(encoding="utf-8")))


if __name__ == "__main__":
    main()
