"""Monotone finite-difference discretization of weakly coupled systems.

Unknowns are interior node values, species-major: global index
k * n_int + i for species k and interior position i.  Dirichlet data is
eliminated into a boundary map G so that the discrete equations read
A u + G g = f.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import linalg
from .errors import NonEllipticCoefficient, ValidationError
from .expressions import Expr, const, sample_field, validate_variables
from .mesh import Grid, SubdomainMask

Z_RTOL = 1e-14
COUPLING_NONZERO = 1e-12
ASYMMETRY_WARN = 1e-10

_COORD_VARS = {1: {"x"}, 2: {"x", "y"}}


@dataclass(frozen=True)
class ScalarOperatorSpec:
    """-sum_ij D_j(a_ij D_i u) + sum_i b_i D_i u + c u with expression fields."""

    a: tuple  # dim x dim nested tuple of Expr
    b: tuple  # dim tuple of Expr
    c: Expr

    @staticmethod
    def make(dim: int, a=None, b=None, c=None) -> "ScalarOperatorSpec":
        """Normalize shorthand: scalar a means a * identity, missing parts are 0."""
        if a is None:
            a = const(1.0)
        if isinstance(a, Expr):
            a = tuple(
                tuple(a if i == j else const(0.0) for j in range(dim))
                for i in range(dim)
            )
        else:
            a = tuple(tuple(row) for row in a)
        if b is None:
            b = tuple(const(0.0) for _ in range(dim))
        elif isinstance(b, Expr):
            b = (b,) * dim
        else:
            b = tuple(b)
        if c is None:
            c = const(0.0)
        spec = ScalarOperatorSpec(a, b, c)
        if len(spec.a) != dim or any(len(row) != dim for row in spec.a):
            raise ValidationError(f"diffusion tensor must be {dim}x{dim}")
        if len(spec.b) != dim:
            raise ValidationError(f"convection needs {dim} component(s)")
        return spec

    def validate(self, grid: Grid) -> None:
        allowed = _COORD_VARS[grid.dim]
        for i, row in enumerate(self.a):
            for j, e in enumerate(row):
                validate_variables(e, allowed, f"a{i + 1}{j + 1}")
        for i, e in enumerate(self.b):
            validate_variables(e, allowed, f"b{i + 1}")
        validate_variables(self.c, allowed, "c")


@dataclass(frozen=True)
class SystemSpec:
    """N scalar operators coupled through a pointwise matrix m."""

    grid: Grid
    ops: tuple  # N ScalarOperatorSpec
    m: tuple  # N x N nested tuple of Expr
    f: tuple  # N Expr
    g: tuple  # N Expr

    @property
    def n_species(self) -> int:
        return len(self.ops)

    def validate(self) -> None:
        n = self.n_species
        if n < 1:
            raise ValidationError("need at least one species")
        if len(self.m) != n or any(len(row) != n for row in self.m):
            raise ValidationError(f"coupling matrix must be {n}x{n}")
        if len(self.f) != n or len(self.g) != n:
            raise ValidationError("f and g need one expression per species")
        allowed = _COORD_VARS[self.grid.dim]
        for k, op in enumerate(self.ops):
            op.validate(self.grid)
        for k, row in enumerate(self.m):
            for l, e in enumerate(row):
                validate_variables(e, allowed, f"m{k + 1}{l + 1}")
        for k in range(n):
            validate_variables(self.f[k], allowed, f"f{k + 1}")
            validate_variables(self.g[k], allowed, f"g{k + 1}")

    def discretize(self) -> "DiscreteSystem":
        self.validate()
        grid = self.grid
        n = self.n_species
        dim = grid.dim
        a_vals = np.empty((n, dim, dim, grid.n_nodes))
        b_vals = np.empty((n, dim, grid.n_nodes))
        c_vals = np.empty((n, grid.n_nodes))
        m_vals = np.empty((n, n, grid.n_nodes))
        f_vals = np.empty((n, grid.n_nodes))
        g_vals = np.empty((n, grid.n_nodes))
        for k, op in enumerate(self.ops):
            for i in range(dim):
                for j in range(dim):
                    a_vals[k, i, j] = sample_field(op.a[i][j], grid)
                b_vals[k, i] = sample_field(op.b[i], grid)
            c_vals[k] = sample_field(op.c, grid)
            f_vals[k] = sample_field(self.f[k], grid)
            g_vals[k] = sample_field(self.g[k], grid)
        for k in range(n):
            for l in range(n):
                m_vals[k, l] = sample_field(self.m[k][l], grid)
        return DiscreteSystem(grid, n, a_vals, b_vals, c_vals, m_vals, f_vals, g_vals)


def split_coupling(m, grid: Grid):
    """Pointwise split of the coupling matrix into nonnegative and
    nonpositive parts; plus + minus reproduces m exactly."""
    if isinstance(m, np.ndarray):
        vals = m
    else:
        n = len(m)
        vals = np.empty((n, n, grid.n_nodes))
        for k in range(n):
            for l in range(n):
                vals[k, l] = sample_field(m[k][l], grid)
    return np.maximum(vals, 0.0), np.minimum(vals, 0.0)


def _sym_eig_range(a_node):
    """Eigenvalue range of the symmetrized dim x dim tensor at every node."""
    dim = a_node.shape[0]
    if dim == 1:
        vals = a_node[0, 0]
        return vals, vals
    p = a_node[0, 0]
    r = a_node[1, 1]
    q = 0.5 * (a_node[0, 1] + a_node[1, 0])
    half_tr = 0.5 * (p + r)
    disc = np.sqrt((0.5 * (p - r)) ** 2 + q**2)
    return half_tr - disc, half_tr + disc


def check_ellipticity(op: ScalarOperatorSpec, grid: Grid):
    """(lambda_min, lambda_max) over nodes; raises when positivity is lost."""
    dim = grid.dim
    a_vals = np.empty((dim, dim, grid.n_nodes))
    for i in range(dim):
        for j in range(dim):
            a_vals[i, j] = sample_field(op.a[i][j], grid)
    return check_ellipticity_values(a_vals, grid)


def check_ellipticity_values(a_vals: np.ndarray, grid: Grid):
    if grid.dim == 2:
        asym = float(np.abs(a_vals[0, 1] - a_vals[1, 0]).max())
        if asym > ASYMMETRY_WARN:
            warnings.warn(
                f"diffusion tensor asymmetry {asym:.3e}; using the symmetric part "
                "for the ellipticity check",
                stacklevel=2,
            )
    lo, hi = _sym_eig_range(a_vals)
    lam_min = float(lo.min())
    lam_max = float(hi.max())
    if lam_min <= 0.0:
        node = int(np.argmin(lo))
        raise NonEllipticCoefficient(
            f"diffusion tensor eigenvalue {lam_min:.6g} <= 0 at node "
            f"{grid.node_coord(node)}"
        )
    return lam_min, lam_max


def check_z_matrix(a: sp.spmatrix, n_species: int = 1, n_int: int | None = None):
    """(is_z, worst_position, worst_value, offdiag_max) for positive off-diagonals.

    worst_position is (row, col); with n_int given it becomes
    ((species, interior_pos), (species, interior_pos)).
    """
    coo = a.tocoo()
    off = coo.row != coo.col
    if not off.any():
        return True, None, 0.0, 0.0
    vals = coo.data[off]
    rows = coo.row[off]
    cols = coo.col[off]
    k = int(np.argmax(vals))
    worst = float(vals[k])
    offdiag_max = max(worst, 0.0)
    pos = (int(rows[k]), int(cols[k]))
    if n_int:
        pos = (
            (pos[0] // n_int + 1, pos[0] % n_int),
            (pos[1] // n_int + 1, pos[1] % n_int),
        )
    tol = Z_RTOL * max(linalg.inf_norm(a), 1e-300)
    return worst <= tol, pos, worst, offdiag_max


@dataclass
class AssembledSystem:
    """Interior operator A, boundary map G, data vectors, and Z diagnostics."""

    A: sp.csr_matrix
    G: sp.csr_matrix
    f_vec: np.ndarray
    g_vec: np.ndarray
    z_matrix: bool
    offdiag_max: float
    worst_offdiag: tuple | None
    grid: Grid
    n_species: int
    n_int: int
    mask: SubdomainMask | None = None


def _assemble_scalar_values(a_vals, b_vals, c_vals, grid: Grid, mask=None):
    """CSR (A, G) for one scalar operator from node-sampled coefficients.

    Conservative fluxes with arithmetic-mean face coefficients, first-order
    upwind convection, centered cross-derivatives.  With a mask, equations
    are restricted to masked nodes and every eliminated neighbor takes
    homogeneous Dirichlet data (G stays empty).
    """
    dim = grid.dim
    h = grid.h
    interior_pos = grid.interior_pos
    boundary_pos = grid.boundary_pos
    if mask is None:
        target = grid.interior_ids
        row_of = interior_pos
    else:
        target = grid.interior_ids[mask.inside]
        row_of = np.full(grid.n_nodes, -1, dtype=np.int64)
        row_of[target] = np.arange(len(target))
    n_rows = len(target)
    a_rows, a_cols, a_vals_out = [], [], []
    g_rows, g_cols, g_vals_out = [], [], []

    def add(row, node, coeff):
        if coeff == 0.0:
            return
        r = int(row_of[node])
        if r >= 0:
            a_rows.append(row)
            a_cols.append(r)
            a_vals_out.append(coeff)
        elif mask is None:
            g_rows.append(row)
            g_cols.append(int(boundary_pos[node]))
            g_vals_out.append(coeff)
        # masked assembly: eliminated neighbors carry zero Dirichlet data

    for row, node in enumerate(int(p) for p in target):
        idx = grid.node_multi(node)
        diag = c_vals[node]
        for d in range(dim):
            up = list(idx)
            up[d] += 1
            dn = list(idx)
            dn[d] -= 1
            node_up = grid.node_id(up)
            node_dn = grid.node_id(dn)
            app = a_vals[d, d, node]
            f_up = 0.5 * (app + a_vals[d, d, node_up])
            f_dn = 0.5 * (app + a_vals[d, d, node_dn])
            inv_h2 = 1.0 / (h[d] * h[d])
            diag += (f_up + f_dn) * inv_h2
            add(row, node_up, -f_up * inv_h2)
            add(row, node_dn, -f_dn * inv_h2)
            bv = b_vals[d, node]
            bp = max(bv, 0.0)
            bm = min(bv, 0.0)
            diag += (bp - bm) / h[d]
            add(row, node_dn, -bp / h[d])
            add(row, node_up, bm / h[d])
        if dim == 2:
            # -D_d2(a_{d1 d2} D_d1 u), centered both ways, for d1 != d2
            for d1, d2 in ((0, 1), (1, 0)):
                scale = 1.0 / (4.0 * h[0] * h[1])
                for s2 in (1, -1):
                    nbr2 = list(idx)
                    nbr2[d2] += s2
                    a_here = a_vals[d1, d2, grid.node_id(nbr2)]
                    if a_here == 0.0:
                        continue
                    for s1 in (1, -1):
                        corner = list(nbr2)
                        corner[d1] += s1
                        add(row, grid.node_id(corner), -s1 * s2 * a_here * scale)
        a_rows.append(row)
        a_cols.append(row)
        a_vals_out.append(diag)

    A = linalg.from_coo(n_rows, n_rows, a_rows, a_cols, a_vals_out)
    G = linalg.from_coo(n_rows, grid.n_boundary, g_rows, g_cols, g_vals_out)
    return A, G


def assemble_scalar(
    op: ScalarOperatorSpec,
    grid: Grid,
    mask: SubdomainMask | None = None,
    require_elliptic: bool = True,
):
    """(A, G) for one scalar operator given as expressions."""
    op.validate(grid)
    dim = grid.dim
    a_vals = np.empty((dim, dim, grid.n_nodes))
    for i in range(dim):
        for j in range(dim):
            a_vals[i, j] = sample_field(op.a[i][j], grid)
    try:
        check_ellipticity_values(a_vals, grid)
    except NonEllipticCoefficient:
        if require_elliptic:
            raise
        warnings.warn("assembling a non-elliptic operator on request", stacklevel=2)
    b_vals = np.empty((dim, grid.n_nodes))
    for i in range(dim):
        b_vals[i] = sample_field(op.b[i], grid)
    c_vals = sample_field(op.c, grid)
    return _assemble_scalar_values(a_vals, b_vals, c_vals, grid, mask)


@dataclass
class DiscreteSystem:
    """Node-sampled coefficients of a system; the assembly workhorse.

    Produced by SystemSpec.discretize() or by a linearization; everything
    downstream (spectral, certify, oracle) runs on this representation.
    """

    grid: Grid
    n_species: int
    a_vals: np.ndarray  # (N, dim, dim, n_nodes)
    b_vals: np.ndarray  # (N, dim, n_nodes)
    c_vals: np.ndarray  # (N, n_nodes)
    m_vals: np.ndarray  # (N, N, n_nodes)
    f_vals: np.ndarray  # (N, n_nodes)
    g_vals: np.ndarray  # (N, n_nodes)
    _scalar_cache: dict = field(default_factory=dict, repr=False)

    @property
    def m_plus(self) -> np.ndarray:
        return np.maximum(self.m_vals, 0.0)

    @property
    def m_minus(self) -> np.ndarray:
        return np.minimum(self.m_vals, 0.0)

    def interior_values(self, node_values: np.ndarray) -> np.ndarray:
        return node_values[..., self.grid.interior_ids]

    def check_ellipticity(self):
        out = []
        for k in range(self.n_species):
            out.append(check_ellipticity_values(self.a_vals[k], self.grid))
        return out

    def scalar_parts(self, k: int, mask: SubdomainMask | None = None):
        key = (k, id(mask))
        if key not in self._scalar_cache:
            self._scalar_cache[key] = _assemble_scalar_values(
                self.a_vals[k], self.b_vals[k], self.c_vals[k], self.grid, mask
            )
        return self._scalar_cache[key]

    def coupling_values(self, coupling) -> np.ndarray:
        if isinstance(coupling, str):
            if coupling == "full":
                return self.m_vals
            if coupling == "cooperative":
                return self.m_minus
            raise ValidationError(f"unknown coupling mode {coupling!r}")
        coupling = np.asarray(coupling, dtype=float)
        if coupling.shape != self.m_vals.shape:
            raise ValidationError(
                f"custom coupling must have shape {self.m_vals.shape}"
            )
        return coupling

    def species_subset(self, species) -> "DiscreteSystem":
        """Restriction to a subset of species (0-based indices, kept order)."""
        ix = np.asarray(species, dtype=int)
        return DiscreteSystem(
            self.grid,
            len(ix),
            self.a_vals[ix],
            self.b_vals[ix],
            self.c_vals[ix],
            self.m_vals[np.ix_(ix, ix)],
            self.f_vals[ix],
            self.g_vals[ix],
        )

    def assemble(
        self, coupling="full", mask: SubdomainMask | None = None
    ) -> AssembledSystem:
        grid = self.grid
        n = self.n_species
        m_sel = self.coupling_values(coupling)
        if mask is None:
            target = grid.interior_ids
        else:
            target = grid.interior_ids[mask.inside]
        n_int = len(target)
        blocks_a = [[None] * n for _ in range(n)]
        blocks_g = [[None] * n for _ in range(n)]
        for k in range(n):
            A_k, G_k = self.scalar_parts(k, mask)
            for l in range(n):
                coupl = sp.diags(m_sel[k, l][target], format="csr")
                if l == k:
                    blocks_a[k][l] = A_k + coupl
                else:
                    blocks_a[k][l] = coupl
                blocks_g[k][l] = G_k if l == k else None
        A = sp.bmat(blocks_a, format="csr")
        A.sort_indices()
        G = sp.bmat(blocks_g, format="csr")
        G.sort_indices()
        f_vec = self.f_vals[:, target].reshape(-1)
        if mask is None:
            g_vec = self.g_vals[:, grid.boundary_ids].reshape(-1)
        else:
            g_vec = np.zeros(n * grid.n_boundary)
        is_z, worst_pos, _, offdiag_max = check_z_matrix(A, n, n_int)
        return AssembledSystem(
            A, G, f_vec, g_vec, is_z, offdiag_max, worst_pos, grid, n, n_int, mask
        )

    # ---------------------------------------------------- species structure

    def minus_edges(self) -> list:
        """adjacency: edge l -> k iff m_kl has a nonpositive part somewhere."""
        ids = self.grid.interior_ids
        n = self.n_species
        adj = [[] for _ in range(n)]
        for l in range(n):
            for k in range(n):
                if k != l and float(self.m_vals[k, l][ids].min()) < -COUPLING_NONZERO:
                    adj[l].append(k)
        return adj

    def plus_offdiag_pattern(self) -> np.ndarray:
        ids = self.grid.interior_ids
        n = self.n_species
        pat = np.zeros((n, n), dtype=bool)
        for k in range(n):
            for l in range(n):
                if k != l:
                    pat[k, l] = float(self.m_vals[k, l][ids].max()) > COUPLING_NONZERO
        return pat

    def plus_diag_nonzero(self, j: int) -> bool:
        ids = self.grid.interior_ids
        return float(self.m_vals[j, j][ids].max()) > COUPLING_NONZERO


def assemble_system(
    spec, coupling="full", mask: SubdomainMask | None = None
) -> AssembledSystem:
    """Block assembly of a SystemSpec or DiscreteSystem."""
    ds = as_discrete(spec)
    return ds.assemble(coupling, mask)


def as_discrete(spec) -> DiscreteSystem:
    if isinstance(spec, DiscreteSystem):
        return spec
    return spec.discretize()
