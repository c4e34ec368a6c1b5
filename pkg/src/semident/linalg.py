"""Small backend-generic linear algebra layer.

Matrices live in numpy arrays with one of two element types:

* ``float`` backend: ordinary ``float64`` arrays, numpy/LAPACK routines.
* ``rational`` backend: ``object`` arrays holding ``fractions.Fraction``,
  with exact Gaussian elimination.

The rational backend exists because the inverse of the covariance
parametrization is a rational map, so exact round-trips are possible on
rational inputs and serve as ground truth when float tolerances are in doubt.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import SemidentError

BACKENDS = ("float", "rational")

#: relative singular-value threshold for numeric rank decisions
RANK_REL_TOL = 1e-10


def check_backend(backend: str) -> str:
    if backend not in BACKENDS:
        raise SemidentError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    return backend


def backend_of(a: np.ndarray) -> str:
    """Infer the backend from an array's dtype."""
    return "rational" if a.dtype == object else "float"


def parse_entry(value, backend: str):
    """Convert a scalar (int, float, Fraction, or 'p/q' string) to the backend type."""
    if backend == "rational":
        if isinstance(value, str):
            return Fraction(value)
        return Fraction(value)
    if isinstance(value, str):
        return float(Fraction(value))
    return float(value)


def entry_to_json(value):
    """JSON-friendly form of a matrix entry ('p/q' string for Fractions)."""
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else str(value.numerator)
    return float(value)


def to_array(rows, backend: str) -> np.ndarray:
    """Build a backend matrix (or vector) from nested scalars."""
    check_backend(backend)
    rows = list(rows)
    nested = bool(rows) and isinstance(rows[0], (list, tuple, np.ndarray))
    if backend == "rational":
        if nested:
            arr = np.empty((len(rows), len(rows[0])), dtype=object)
            for i, row in enumerate(rows):
                for j, v in enumerate(row):
                    arr[i, j] = parse_entry(v, "rational")
        else:
            arr = np.empty(len(rows), dtype=object)
            for i, v in enumerate(rows):
                arr[i] = parse_entry(v, "rational")
        return arr
    if nested:
        return np.array([[parse_entry(v, "float") for v in row] for row in rows])
    return np.array([parse_entry(v, "float") for v in rows])


def zeros(nrows: int, ncols: int, backend: str) -> np.ndarray:
    if backend == "rational":
        a = np.empty((nrows, ncols), dtype=object)
        a[:] = Fraction(0)
        return a
    return np.zeros((nrows, ncols))


def identity(n: int, backend: str) -> np.ndarray:
    a = zeros(n, n, backend)
    one = Fraction(1) if backend == "rational" else 1.0
    for i in range(n):
        a[i, i] = one
    return a


def as_float(a: np.ndarray) -> np.ndarray:
    if a.ndim == 1:
        return np.array([float(v) for v in a], dtype=float)
    return np.array([[float(v) for v in row] for row in a], dtype=float)


def max_abs(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(as_float(np.atleast_2d(a)))))


def max_abs_diff(a: np.ndarray, b: np.ndarray) -> float:
    return max_abs(np.atleast_2d(a) - np.atleast_2d(b))


def mat_inv(a: np.ndarray) -> np.ndarray:
    """Matrix inverse; exact Gauss-Jordan for the rational backend."""
    if backend_of(a) == "float":
        return np.linalg.inv(a)
    n = a.shape[0]
    work = a.copy()
    inv = identity(n, "rational")
    for col in range(n):
        pivot_row = next((r for r in range(col, n) if work[r, col] != 0), None)
        if pivot_row is None:
            raise SemidentError("matrix is singular")
        if pivot_row != col:
            work[[col, pivot_row]] = work[[pivot_row, col]]
            inv[[col, pivot_row]] = inv[[pivot_row, col]]
        p = work[col, col]
        work[col] = work[col] / p
        inv[col] = inv[col] / p
        for r in range(n):
            if r != col and work[r, col] != 0:
                f = work[r, col]
                work[r] = work[r] - f * work[col]
                inv[r] = inv[r] - f * inv[col]
    return inv


def matrix_rank(a: np.ndarray, rel_tol: float = RANK_REL_TOL) -> int:
    """Rank of a matrix: SVD threshold (float) or exact elimination (rational)."""
    if a.size == 0:
        return 0
    if backend_of(a) == "float":
        sv = np.linalg.svd(a, compute_uv=False)
        if sv.size == 0 or sv[0] == 0.0:
            return 0
        return int(np.sum(sv > rel_tol * sv[0]))
    echelon, pivots = _row_echelon(a.copy())
    return len(pivots)


def _row_echelon(m: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """In-place fraction row echelon form; returns (matrix, pivot column list)."""
    nrows, ncols = m.shape
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        pivot_row = next((r for r in range(row, nrows) if m[r, col] != 0), None)
        if pivot_row is None:
            continue
        if pivot_row != row:
            m[[row, pivot_row]] = m[[pivot_row, row]]
        m[row] = m[row] / m[row, col]
        for r in range(nrows):
            if r != row and m[r, col] != 0:
                m[r] = m[r] - m[r, col] * m[row]
        pivots.append(col)
        row += 1
        if row == nrows:
            break
    return m, pivots


@dataclass
class SolveResult:
    """Outcome of solving A x = b in the least structured sense.

    Attributes:
        solution: a particular solution (free variables set to zero), or None
            when the system is inconsistent (rational backend only; the float
            backend always returns the least-squares solution).
        rank: rank of A.
        nullspace: basis vectors of the kernel of A.
        residual: max-norm of A x - b at the returned solution.
    """

    solution: np.ndarray | None
    rank: int
    nullspace: list[np.ndarray]
    residual: float


def solve_linear(a: np.ndarray, b: np.ndarray) -> SolveResult:
    """Solve a (possibly non-square, possibly singular) linear system."""
    nrows, ncols = a.shape
    if backend_of(a) == "float":
        if ncols == 0:
            res = float(np.max(np.abs(b))) if b.size else 0.0
            return SolveResult(np.zeros(0), 0, [], res)
        u, sv, vt = np.linalg.svd(a, full_matrices=True)
        rank = int(np.sum(sv > RANK_REL_TOL * sv[0])) if sv.size and sv[0] > 0 else 0
        x = np.zeros(ncols)
        for k in range(rank):
            x += (u[:, k] @ b) / sv[k] * vt[k]
        null = [vt[k] for k in range(rank, ncols)]
        residual = float(np.max(np.abs(a @ x - b))) if nrows else 0.0
        return SolveResult(x, rank, null, residual)

    aug = zeros(nrows, ncols + 1, "rational")
    aug[:, :ncols] = a
    aug[:, ncols] = b
    ech, pivots = _row_echelon(aug)
    if ncols in pivots:
        # a pivot in the b column means 0 = nonzero: inconsistent
        rank = len(pivots) - 1
        return SolveResult(None, rank, [], float("inf"))
    rank = len(pivots)
    x = np.empty(ncols, dtype=object)
    x[:] = Fraction(0)
    for r, col in enumerate(pivots):
        x[col] = ech[r, ncols]
    free_cols = [c for c in range(ncols) if c not in pivots]
    null: list[np.ndarray] = []
    for fc in free_cols:
        v = np.empty(ncols, dtype=object)
        v[:] = Fraction(0)
        v[fc] = Fraction(1)
        for r, col in enumerate(pivots):
            v[col] = -ech[r, fc]
        null.append(v)
    return SolveResult(x, rank, null, 0.0)


def is_pd(a: np.ndarray) -> bool:
    """Positive definiteness: Cholesky (float) or exact pivot signs (rational)."""
    n = a.shape[0]
    if n == 0:
        return True
    if backend_of(a) == "float":
        try:
            np.linalg.cholesky(a)
            return True
        except np.linalg.LinAlgError:
            return False
    work = a.copy()
    for k in range(n):
        if work[k, k] <= 0:
            return False
        for r in range(k + 1, n):
            if work[r, k] != 0:
                f = work[r, k] / work[k, k]
                work[r, k:] = work[r, k:] - f * work[k, k:]
    return True


def symmetrize(a: np.ndarray) -> np.ndarray:
    return (a + a.T) / 2 if backend_of(a) == "float" else (a + a.T) / Fraction(2)
