"""Principal eigenpairs of discretized operators via shifted power iteration.

For a Z-matrix A the shift s = 1 + max diag(A) makes B = s*I - A entrywise
nonnegative; the Perron root rho(B) maps back to the principal eigenvalue
lambda = s - rho(B), the eigenvalue of A with smallest real part, carrying
a certified Collatz-Wielandt enclosure along.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import linalg
from .assembly import as_discrete, check_z_matrix
from .errors import EmptySubdomain, NotIrreducible, NotZMatrix, ValidationError
from .graphs import csr_strongly_connected
from .mesh import SubdomainMask, full_mask, sub_rectangle_mask
from .util import amap

TOL_EIG = 1e-9
MAX_ITER = 200000


@dataclass
class EigenPair:
    """Principal eigenvalue with positive right/left eigenvectors.

    value lies in the closed interval cw; right and left are normalized to
    unit max and strictly positive on the unknowns.  iterations counts
    matrix-vector products over both the right and the left solve.
    """

    value: float
    right: np.ndarray
    left: np.ndarray
    cw: tuple
    iterations: int
    residual: float


def _species_index(j: int, n: int) -> int:
    """1-based species index (as in reports) -> 0-based array index."""
    if not 1 <= j <= n:
        raise ValidationError(f"species index {j} outside 1..{n}")
    return j - 1


def principal_eigenpair(
    a: sp.spmatrix, tol_eig: float = TOL_EIG, max_iter: int = MAX_ITER
) -> EigenPair:
    """Eigenvalue of smallest real part of an irreducible Z-matrix."""
    is_z, pos, worst, _ = check_z_matrix(a)
    if not is_z:
        raise NotZMatrix(
            f"off-diagonal entry {worst:.6g} at {pos}", position=pos, value=worst
        )
    if not csr_strongly_connected(a):
        raise NotIrreducible("matrix digraph is not strongly connected")
    s = 1.0 + float(a.diagonal().max())
    b = (s * sp.identity(a.shape[0], format="csr") - a).tocsr()
    if b.nnz and float(b.data.min()) < 0.0:
        # off-diagonals below the Z tolerance flip sign under negation
        b.data = np.maximum(b.data, 0.0)

    def width(rho):
        return tol_eig * (1.0 + abs(s - rho))

    right = linalg._collatz_power(b, width, max_iter)
    left = linalg._collatz_power(linalg.transpose(b), width, max_iter)
    lam = s - right.rho
    cw = (s - right.cw[1], s - right.cw[0])
    residual = float(np.abs(a @ right.vector - lam * right.vector).max())
    return EigenPair(
        lam, right.vector, left.vector, cw, right.iterations + left.iterations, residual
    )


def cooperative_eigen(
    spec,
    tol_eig: float = TOL_EIG,
    max_iter: int = MAX_ITER,
    mask: SubdomainMask | None = None,
) -> EigenPair:
    """Principal eigenpair of the cooperative part L + M_minus."""
    ds = as_discrete(spec)
    asys = ds.assemble("cooperative", mask)
    if not asys.z_matrix:
        raise NotZMatrix(
            f"cooperative part has positive off-diagonal {asys.offdiag_max:.6g} "
            f"at {asys.worst_offdiag}",
            position=asys.worst_offdiag,
            value=asys.offdiag_max,
        )
    return principal_eigenpair(asys.A, tol_eig, max_iter)


def block_eigen(
    spec,
    species,
    tol_eig: float = TOL_EIG,
    max_iter: int = MAX_ITER,
    mask: SubdomainMask | None = None,
) -> EigenPair:
    """Cooperative eigenpair of the system restricted to a species subset.

    species are 0-based here (internal block helper).
    """
    ds = as_discrete(spec)
    return cooperative_eigen(ds.species_subset(species), tol_eig, max_iter, mask)


def component_eigen(
    spec,
    j: int,
    tol_eig: float = TOL_EIG,
    max_iter: int = MAX_ITER,
    mask: SubdomainMask | None = None,
) -> EigenPair:
    """Principal eigenpair of the scalar block L_j + m_jj_minus (j 1-based)."""
    ds = as_discrete(spec)
    k = _species_index(j, ds.n_species)
    return block_eigen(ds, [k], tol_eig, max_iter, mask)


@dataclass
class ScanResult:
    """Subdomain eigenvalues; behaves like the underlying (mask, value) list."""

    entries: list
    min_value: float
    full_value: float
    monotone_ok: bool

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]


def _dyadic_masks(grid, depth: int) -> list:
    """Deduplicated sub-rectangle masks with dyadic endpoints, full domain first."""
    masks = [full_mask(grid)]
    seen = {masks[0].inside.tobytes()}
    if depth <= 0:
        return masks
    steps = 2**depth
    axis_pairs = []
    for d in range(grid.dim):
        length = grid.hi[d] - grid.lo[d]
        pairs = []
        for i in range(steps):
            for k in range(i + 1, steps + 1):
                pairs.append(
                    (grid.lo[d] + i * length / steps, grid.lo[d] + k * length / steps)
                )
        axis_pairs.append(pairs)
    if grid.dim == 1:
        boxes = [((p[0],), (p[1],)) for p in axis_pairs[0]]
    else:
        boxes = [
            ((px[0], py[0]), (px[1], py[1]))
            for px in axis_pairs[0]
            for py in axis_pairs[1]
        ]
    for lo0, hi0 in boxes:
        try:
            mask = sub_rectangle_mask(grid, lo0, hi0)
        except EmptySubdomain:
            continue
        key = mask.inside.tobytes()
        if key not in seen:
            seen.add(key)
            masks.append(mask)
    return masks


def subdomain_scan(
    spec, depth: int, tol_eig: float = TOL_EIG, max_iter: int = MAX_ITER
) -> ScanResult:
    """Cooperative eigenvalues over dyadic sub-rectangles.

    Checks the domain-monotonicity expectation: the minimum over the scan
    should be attained on the full domain (up to the enclosure tolerance).
    """
    ds = as_discrete(spec)
    masks = _dyadic_masks(ds.grid, depth)

    def solve(mask):
        return cooperative_eigen(ds, tol_eig, max_iter, mask).value

    values = amap(solve, masks)
    entries = list(zip(masks, values))
    full_value = values[0]
    min_value = min(values)
    monotone_ok = min_value >= full_value - tol_eig * (1.0 + abs(full_value))
    return ScanResult(entries, min_value, full_value, monotone_ok)
