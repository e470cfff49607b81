"""Golden CLI corpus: run cases in-process and compare byte for byte.

Regenerate the expected files with ``python3 tests/golden_cases.py``.
"""

from __future__ import annotations

import contextlib
import io
import os
import shlex
from pathlib import Path

from exactcat.cli import main

GOLDEN = Path(__file__).parent / "golden"


def cases() -> list[tuple[str, list[str]]]:
    out = []
    for line in (GOLDEN / "cases.txt").read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        name, args = (s.strip() for s in line.split("|", 1))
        out.append((name, shlex.split(args)))
    return out


def render(args: list[str]) -> str:
    """stdout, stderr and exit status of one invocation, as one text block."""
    out, err = io.StringIO(), io.StringIO()
    cwd = os.getcwd()
    os.chdir(GOLDEN)
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            status = main(args)
    finally:
        os.chdir(cwd)
    text = out.getvalue()
    if err.getvalue():
        text += "--- stderr\n" + err.getvalue()
    return text + f"--- exit {status}\n"


def expected_path(name: str) -> Path:
    return GOLDEN / f"{name}.out"


if __name__ == "__main__":
    for name, args in cases():
        expected_path(name).write_text(render(args))
        print("wrote", name)
