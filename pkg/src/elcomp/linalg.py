"""Sparse kernels: CSR utilities, LU solves, dense inversion, power iteration.

Storage and factorization lean on scipy (CSR + SuperLU); the certified
Perron root machinery (shifted power iteration with Collatz-Wielandt
enclosures) is implemented here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    DimMismatch,
    NoConvergence,
    NotNonnegative,
    SingularMatrix,
    TooLarge,
)

PIVOT_RTOL = 1e-14


def from_coo(n_rows: int, n_cols: int, rows, cols, vals) -> sp.csr_matrix:
    """Canonical CSR from triplets: duplicates summed, indices sorted."""
    a = sp.csr_matrix(
        (np.asarray(vals, dtype=float), (rows, cols)), shape=(n_rows, n_cols)
    )
    a.sum_duplicates()
    a.sort_indices()
    return a


def matvec(a: sp.spmatrix, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (a.shape[1],):
        raise DimMismatch(f"matvec: matrix is {a.shape}, vector is {x.shape}")
    return a @ x


def transpose(a: sp.spmatrix) -> sp.csr_matrix:
    at = a.T.tocsr()
    at.sort_indices()
    return at


def inf_norm(a: sp.spmatrix) -> float:
    if a.nnz == 0:
        return 0.0
    return float(np.abs(a).sum(axis=1).max())


class LuFactor:
    """LU with partial pivoting by magnitude; rejects near-singular pivots."""

    def __init__(self, a: sp.spmatrix):
        if a.shape[0] != a.shape[1]:
            raise DimMismatch(f"lu_factor needs a square matrix, got {a.shape}")
        self.n = a.shape[0]
        self.norm = inf_norm(a)
        try:
            self._lu = spla.splu(a.tocsc())
        except RuntimeError as err:
            raise SingularMatrix(f"factorization failed: {err}") from None
        pivots = np.abs(self._lu.U.diagonal())
        if pivots.size and float(pivots.min()) < PIVOT_RTOL * max(self.norm, 1e-300):
            raise SingularMatrix(
                f"pivot {pivots.min():.3e} below {PIVOT_RTOL:.0e} * |A|"
            )

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.n:
            raise DimMismatch(f"solve: matrix is {self.n}x{self.n}, rhs is {b.shape}")
        return self._lu.solve(b)


def lu_factor(a: sp.spmatrix) -> LuFactor:
    return LuFactor(a)


def lu_solve(a: sp.spmatrix, b: np.ndarray) -> np.ndarray:
    return LuFactor(a).solve(b)


def dense_inverse(a: sp.spmatrix, max_dof: int = 2500) -> np.ndarray:
    """Full inverse by LU solves against unit vectors; refuses big systems."""
    n = a.shape[0]
    if n > max_dof:
        raise TooLarge(f"dense inverse of {n} dof exceeds budget {max_dof}")
    lu = LuFactor(a)
    return lu.solve(np.eye(n))


@dataclass
class PowerResult:
    rho: float
    vector: np.ndarray
    cw: tuple
    iterations: int
    history: list | None = None

    def __iter__(self):
        # unpacks as (rho, vector, cw)
        return iter((self.rho, self.vector, self.cw))


def _collatz_power(b: sp.spmatrix, width_target, max_iter: int, collect_history=False):
    """Shared Perron-root loop with certified Collatz-Wielandt enclosures.

    Iterates with b + t*I (t = max row sum) so the iteration is primitive and
    the negative tail of the shifted spectrum cannot stall convergence; the
    ratio bounds for b itself are recovered exactly by subtracting t.
    Enclosures are intersected across iterates, so widths never increase.

    width_target(rho_estimate) -> admissible enclosure width.
    """
    n = b.shape[0]
    if b.shape[0] != b.shape[1]:
        raise DimMismatch(f"power iteration needs a square matrix, got {b.shape}")
    if b.nnz and float(b.data.min()) < 0.0:
        raise NotNonnegative("matrix has a negative entry")
    t = max(inf_norm(b), 1.0)
    bt = (b + t * sp.identity(n, format="csr")).tocsr()
    v = np.ones(n)
    lo, hi = -np.inf, np.inf
    history = [] if collect_history else None
    last_width = np.inf
    for it in range(1, max_iter + 1):
        w = bt @ v
        ratios = w / v - t
        lo = max(lo, float(ratios.min()))
        hi = min(hi, float(ratios.max()))
        bv = w - t * v
        rho = float(v @ bv) / float(v @ v)
        rho = min(max(rho, lo), hi)
        width = hi - lo
        if history is not None:
            history.append((lo, hi))
        if width <= width_target(rho):
            return PowerResult(rho, v.copy(), (lo, hi), it, history)
        mx = float(w.max())
        if mx <= 0.0:
            raise NotNonnegative("iteration left the positive cone")
        v = w / mx
        last_width = width
    raise NoConvergence(
        f"enclosure width {last_width:.3e} after {max_iter} iterations",
        iterations=max_iter,
        width=last_width,
    )


def power_iteration(
    b: sp.spmatrix,
    tol: float = 1e-9,
    max_iter: int = 200000,
    collect_history: bool = False,
) -> PowerResult:
    """Perron root of a nonnegative irreducible matrix with enclosure.

    Deterministic all-ones start.  Converged when the Collatz-Wielandt
    enclosure width drops to tol * (1 + rho).
    """
    return _collatz_power(b, lambda rho: tol * (1.0 + abs(rho)), max_iter, collect_history)
