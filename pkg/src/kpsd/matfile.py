"""Plain-text matrix files.

Format: optional ``#`` comment lines, then a line holding n, then n rows of
n whitespace-separated decimals. Blank lines are ignored.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .symmat import SymMatrix

ASYMMETRY_TOL = 1e-9


class MatrixFormatError(ValueError):
    pass


def parse_matrix(text: str) -> SymMatrix:
    lines = [ln.strip() for ln in text.splitlines()]
    data = [ln for ln in lines if ln and not ln.startswith("#")]
    if not data:
        raise MatrixFormatError("no data lines")
    try:
        n = int(data[0])
    except ValueError:
        raise MatrixFormatError(f"first data line must be the dimension, got {data[0]!r}") from None
    if n < 1:
        raise MatrixFormatError(f"dimension must be positive, got {n}")
    if len(data) != n + 1:
        raise MatrixFormatError(f"expected {n} rows after the dimension, got {len(data) - 1}")
    rows = []
    for r, line in enumerate(data[1:]):
        try:
            row = [float(tok) for tok in line.split()]
        except ValueError:
            raise MatrixFormatError(f"row {r}: non-numeric entry in {line!r}") from None
        if len(row) != n:
            raise MatrixFormatError(f"row {r}: expected {n} entries, got {len(row)}")
        rows.append(row)
    a = np.array(rows)
    if not np.all(np.isfinite(a)):
        raise MatrixFormatError("entries must be finite")
    scale = max(1.0, float(np.max(np.abs(a))))
    asym = float(np.max(np.abs(a - a.T)))
    if asym > ASYMMETRY_TOL * scale:
        raise MatrixFormatError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    return SymMatrix(0.5 * (a + a.T))


def read_matrix(path) -> SymMatrix:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MatrixFormatError(f"cannot read {path}: {exc}") from None
    return parse_matrix(text)


def format_matrix(M, comment: str | None = None) -> str:
    a = np.asarray(M, dtype=float)
    out = []
    if comment:
        out.extend(f"# {line}" for line in comment.splitlines())
    out.append(str(a.shape[0]))
    out.extend(" ".join(repr(float(x)) for x in row) for row in a)
    return "\n".join(out) + "\n"
