from setuptools import setup, find_packages

setup(
    name="cpath",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "pydantic",
        "pydantic-settings",
        "python-dotenv",
        "pandas",
        "numpy",
        "scipy",
        "networkx",
        "graphviz",
        "loguru"
    ],
    extras_require={
        "test": ["pytest", "pytest-asyncio"]
    },
    entry_points={
        "console_scripts": [
            "cpath=src.main:main"
        ]
    },
)
