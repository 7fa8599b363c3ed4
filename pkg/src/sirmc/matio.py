"""CSV matrix and coordinate-mask file I/O.

Matrix files are dense CSV, one row per line; the token `nan` (any case)
marks a missing entry when loading without a mask file. Mask files list
observed positions as 0-based `i,j` pairs, one per line. Values are written
with 17 significant digits so save/load round-trips exactly.
"""

from __future__ import annotations

import math

import numpy as np

from .completion import ObservedMatrix
from .errors import (
    DuplicateCoordinate,
    EmptyObservation,
    IndexOutOfRange,
    IoError,
    ParseError,
)


def _read_lines(path) -> list[str]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise IoError(f"{path}: {exc}") from exc
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    while lines and lines[-1] == "":
        lines.pop()
    return lines


def _parse_matrix(path):
    """Returns (values, missing_mask); missing cells hold 0 in values."""
    lines = _read_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty file")
    rows, missing_rows = [], []
    width = None
    for lineno, line in enumerate(lines, start=1):
        if line.strip() == "":
            raise ParseError(f"{path}:{lineno}: blank line inside matrix")
        tokens = line.split(",")
        if width is None:
            width = len(tokens)
        elif len(tokens) != width:
            raise ParseError(
                f"{path}:{lineno}: row has {len(tokens)} columns, expected {width}"
            )
        row, miss = [], []
        for col, tok in enumerate(tokens, start=1):
            tok = tok.strip()
            if tok.lower() == "nan":
                row.append(0.0)
                miss.append(True)
                continue
            try:
                val = float(tok)
            except ValueError:
                raise ParseError(f"{path}:{lineno}:{col}: bad number {tok!r}") from None
            if math.isnan(val):
                row.append(0.0)
                miss.append(True)
            else:
                row.append(val)
                miss.append(False)
        rows.append(row)
        missing_rows.append(miss)
    return np.array(rows, dtype=float), np.array(missing_rows, dtype=bool)


def _parse_mask(path, shape) -> np.ndarray:
    lines = _read_lines(path)
    mask = np.zeros(shape, dtype=bool)
    m, n = shape
    for lineno, line in enumerate(lines, start=1):
        if line.strip() == "":
            raise ParseError(f"{path}:{lineno}: blank line inside mask")
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected `i,j`, got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: bad coordinate {line!r}") from None
        if not (0 <= i < m and 0 <= j < n):
            raise IndexOutOfRange(
                f"{path}:{lineno}: ({i},{j}) outside {m}x{n} matrix (0-based)"
            )
        if mask[i, j]:
            raise DuplicateCoordinate(f"{path}:{lineno}: ({i},{j}) listed twice")
        mask[i, j] = True
    return mask


def load_observed(matrix_path, mask_path=None) -> ObservedMatrix:
    """Load an observed matrix from a CSV file, optionally with a mask file.

    Without a mask, `nan` tokens mark the unobserved positions. With a mask
    file, the coordinates define the observed set, entries outside it are
    zeroed, and `nan` tokens are only legal outside the mask.
    """
    values, missing = _parse_matrix(matrix_path)
    if mask_path is None:
        mask = ~missing
    else:
        mask = _parse_mask(mask_path, values.shape)
        if np.any(missing & mask):
            i, j = np.argwhere(missing & mask)[0]
            raise ParseError(
                f"{matrix_path}: nan at observed position ({i},{j})"
            )
    if not mask.any():
        raise EmptyObservation(f"{matrix_path}: no observed entries")
    return ObservedMatrix(values, mask)


def save_matrix(matrix, path) -> None:
    """Write a dense matrix as CSV with LF endings and 17 significant digits."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.size == 0:
        raise ValueError(f"expected a nonempty 2-d matrix, got shape {matrix.shape}")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for row in matrix:
                f.write(",".join(f"{v:.17g}" for v in row))
                f.write("\n")
    except OSError as exc:
        raise IoError(f"{path}: {exc}") from exc
