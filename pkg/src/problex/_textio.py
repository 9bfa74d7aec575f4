"""Shared helpers for the package's line-oriented text formats.

All files are UTF-8 with LF line endings; lines starting with '#' are
comments. Floats are printed with 17 significant digits so that a 64-bit
value survives a write/read round trip exactly.
"""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Iterator


def fmt17(x: float) -> str:
    return format(float(x), ".17g")


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def data_lines(path) -> Iterator[tuple[int, str]]:
    """Yield (line_no, stripped line), skipping blanks and '#' comments."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield line_no, line


def write_text(path, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")
