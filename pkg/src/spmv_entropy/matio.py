"""Matrix Market I/O and the COO/CSR storage formats."""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import IO, Iterator

import numpy as np

_FIELDS = ("real", "integer", "pattern")
_SYMMETRIES = ("general", "symmetric")


class MatrixMarketError(ValueError):
    """Malformed Matrix Market content, with the offending 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


@dataclass(frozen=True, eq=False)
class CooMatrix:
    """Coordinate-list sparse matrix: parallel (row, col, value) arrays.

    Indices are 0-based. Entries may be stored in any order but (row, col)
    pairs must be unique; duplicates are rejected at construction. Arrays
    are never copied on access, so treat a constructed matrix as read-only.
    """

    n_rows: int
    n_cols: int
    row_idx: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        row = np.asarray(self.row_idx, dtype=np.int64)
        col = np.asarray(self.col_idx, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "row_idx", row)
        object.__setattr__(self, "col_idx", col)
        object.__setattr__(self, "values", val)
        if self.n_rows < 0 or self.n_cols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        if not (row.ndim == col.ndim == val.ndim == 1):
            raise ValueError("row_idx, col_idx, values must be 1-D arrays")
        if not (row.size == col.size == val.size):
            raise ValueError("row_idx, col_idx, values must have identical length")
        if row.size:
            if row.min() < 0 or row.max() >= self.n_rows:
                raise ValueError("row index outside [0, n_rows)")
            if col.min() < 0 or col.max() >= self.n_cols:
                raise ValueError("column index outside [0, n_cols)")
            order = np.lexsort((col, row))
            r, c = row[order], col[order]
            dup = np.flatnonzero((r[1:] == r[:-1]) & (c[1:] == c[:-1]))
            if dup.size:
                k = dup[0]
                raise ValueError(f"duplicate entry at ({r[k]}, {c[k]})")

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CooMatrix):
            return NotImplemented
        return (
            self.n_rows == other.n_rows
            and self.n_cols == other.n_cols
            and np.array_equal(self.row_idx, other.row_idx)
            and np.array_equal(self.col_idx, other.col_idx)
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True, eq=False)
class CsrMatrix:
    """Compressed sparse row matrix: row pointer plus column/value arrays.

    row_ptr has n_rows + 1 entries; columns are strictly increasing within
    each row. Immutable by convention, like CooMatrix.
    """

    n_rows: int
    n_cols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ptr = np.asarray(self.row_ptr, dtype=np.int64)
        col = np.asarray(self.col_idx, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "row_ptr", ptr)
        object.__setattr__(self, "col_idx", col)
        object.__setattr__(self, "values", val)
        if self.n_rows < 0 or self.n_cols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        if ptr.ndim != 1 or ptr.size != self.n_rows + 1:
            raise ValueError("row_ptr must have n_rows + 1 entries")
        if col.size != val.size:
            raise ValueError("col_idx and values must have identical length")
        if ptr[0] != 0 or ptr[-1] != col.size:
            raise ValueError("row_ptr must start at 0 and end at nnz")
        if np.any(np.diff(ptr) < 0):
            raise ValueError("row_ptr must be non-decreasing")
        if col.size:
            if col.min() < 0 or col.max() >= self.n_cols:
                raise ValueError("column index outside [0, n_cols)")
            # strictly increasing columns within each row; row starts are exempt
            boundary = np.zeros(col.size, dtype=bool)
            starts = ptr[1:-1]
            boundary[starts[starts < col.size]] = True
            bad = (col[1:] <= col[:-1]) & ~boundary[1:]
            if bad.any():
                raise ValueError("columns must be strictly increasing within each row")

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CsrMatrix):
            return NotImplemented
        return (
            self.n_rows == other.n_rows
            and self.n_cols == other.n_cols
            and np.array_equal(self.row_ptr, other.row_ptr)
            and np.array_equal(self.col_idx, other.col_idx)
            and np.array_equal(self.values, other.values)
        )


def _text_lines(source) -> Iterator[str]:
    if isinstance(source, bytes):
        return iter(io.StringIO(source.decode("utf-8")))
    if isinstance(source, str):
        return iter(io.StringIO(source))
    read = getattr(source, "read", None)
    if read is not None and isinstance(read(0), bytes):
        return iter(io.TextIOWrapper(source, encoding="utf-8"))
    return iter(source)


def parse_matrix_market(source) -> CooMatrix:
    """Parse a Matrix Market coordinate stream into a CooMatrix.

    `source` is a text or byte stream (or the file content as str/bytes).
    Supported banner: `%%MatrixMarket matrix coordinate {real|integer|pattern}
    {general|symmetric}`. Indices are converted to 0-based; `pattern` entries
    get value 1.0; `symmetric` off-diagonal entries are mirrored. Duplicate
    entries, out-of-range indices, and a wrong declared nnz are hard errors.
    """
    lines = _text_lines(source)
    try:
        banner = next(lines)
    except StopIteration:
        raise MatrixMarketError("empty input") from None
    tokens = banner.split()
    if len(tokens) != 5 or tokens[0].lower() != "%%matrixmarket" or tokens[1].lower() != "matrix":
        raise MatrixMarketError(f"malformed banner: {banner.strip()!r}", 1)
    layout, field, symmetry = (t.lower() for t in tokens[2:5])
    if layout == "array":
        raise MatrixMarketError("'array' format is not supported (coordinate only)", 1)
    if layout != "coordinate":
        raise MatrixMarketError(f"unknown format {layout!r}", 1)
    if field == "complex":
        raise MatrixMarketError("'complex' field is not supported", 1)
    if field not in _FIELDS:
        raise MatrixMarketError(f"unknown field {field!r}", 1)
    if symmetry in ("skew-symmetric", "hermitian"):
        raise MatrixMarketError(f"{symmetry!r} symmetry is not supported", 1)
    if symmetry not in _SYMMETRIES:
        raise MatrixMarketError(f"unknown symmetry {symmetry!r}", 1)

    n_rows = n_cols = declared = None
    line_no = 1
    for line_no, line in enumerate(lines, start=2):
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        parts = stripped.split()
        if len(parts) != 3:
            raise MatrixMarketError("size line must be 'rows cols nnz'", line_no)
        try:
            n_rows, n_cols, declared = (int(p) for p in parts)
        except ValueError:
            raise MatrixMarketError("size line must be 'rows cols nnz'", line_no) from None
        if n_rows < 1 or n_cols < 1 or declared < 0:
            raise MatrixMarketError("size line values out of range", line_no)
        break
    if declared is None:
        raise MatrixMarketError("missing size line")

    want = 2 if field == "pattern" else 3
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for line_no, line in enumerate(lines, start=line_no + 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        if len(rows) >= declared:
            raise MatrixMarketError(f"more than the declared {declared} entries", line_no)
        parts = stripped.split()
        if len(parts) != want:
            raise MatrixMarketError(f"entry must have {want} fields", line_no)
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise MatrixMarketError(f"malformed indices: {stripped!r}", line_no) from None
        if not (1 <= i <= n_rows):
            raise MatrixMarketError(f"row index {i} outside [1, {n_rows}]", line_no)
        if not (1 <= j <= n_cols):
            raise MatrixMarketError(f"column index {j} outside [1, {n_cols}]", line_no)
        if field == "pattern":
            v = 1.0
        elif field == "integer":
            try:
                v = float(int(parts[2]))
            except ValueError:
                raise MatrixMarketError(f"malformed integer value: {parts[2]!r}", line_no) from None
        else:
            try:
                v = float(parts[2])
            except ValueError:
                raise MatrixMarketError(f"malformed value: {parts[2]!r}", line_no) from None
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)
    if len(rows) != declared:
        raise MatrixMarketError(f"declared {declared} entries but found {len(rows)}")

    row_arr = np.asarray(rows, dtype=np.int64)
    col_arr = np.asarray(cols, dtype=np.int64)
    val_arr = np.asarray(vals, dtype=np.float64)
    if symmetry == "symmetric" and row_arr.size:
        off = row_arr != col_arr
        mirrored_rows = col_arr[off]
        mirrored_cols = row_arr[off]
        row_arr = np.concatenate((row_arr, mirrored_rows))
        col_arr = np.concatenate((col_arr, mirrored_cols))
        val_arr = np.concatenate((val_arr, val_arr[off]))
    try:
        return CooMatrix(n_rows, n_cols, row_arr, col_arr, val_arr)
    except ValueError as exc:
        raise MatrixMarketError(str(exc)) from None


def load_matrix_market(path: str | os.PathLike) -> CooMatrix:
    """Parse a Matrix Market file from disk."""
    with open(path, "r", encoding="utf-8") as f:
        return parse_matrix_market(f)


def write_matrix_market(m: CooMatrix, sink: str | os.PathLike | IO[str]) -> None:
    """Write `m` in coordinate/real/general form, 1-based, 17 significant digits.

    The output re-parses to a matrix equal to `m`, including entry order.
    """
    if hasattr(sink, "write"):
        _write_mm(m, sink)
    else:
        with open(sink, "w", encoding="utf-8") as f:
            _write_mm(m, f)


def _write_mm(m: CooMatrix, f: IO[str]) -> None:
    f.write("%%MatrixMarket matrix coordinate real general\n")
    f.write(f"{m.n_rows} {m.n_cols} {m.nnz}\n")
    for i, j, v in zip(m.row_idx, m.col_idx, m.values):
        f.write(f"{i + 1} {j + 1} {v:.17g}\n")


def coo_to_csr(m: CooMatrix) -> CsrMatrix:
    """Convert COO to CSR; values are reordered (row-major, columns ascending) but
    otherwise bit-identical. Duplicate (row, col) pairs are an error, never summed."""
    order = np.lexsort((m.col_idx, m.row_idx))
    r = m.row_idx[order]
    c = m.col_idx[order]
    v = m.values[order]
    dup = np.flatnonzero((r[1:] == r[:-1]) & (c[1:] == c[:-1]))
    if dup.size:
        k = dup[0]
        raise ValueError(f"duplicate entry at ({r[k]}, {c[k]})")
    row_ptr = np.zeros(m.n_rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(r, minlength=m.n_rows), out=row_ptr[1:])
    return CsrMatrix(m.n_rows, m.n_cols, row_ptr, c, v)


def csr_to_coo(m: CsrMatrix) -> CooMatrix:
    """Expand CSR back to COO; coo_to_csr(csr_to_coo(m)) reproduces m exactly."""
    row_idx = np.repeat(np.arange(m.n_rows, dtype=np.int64), np.diff(m.row_ptr))
    return CooMatrix(m.n_rows, m.n_cols, row_idx, m.col_idx.copy(), m.values.copy())
