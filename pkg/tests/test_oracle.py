"""Inverse-positivity ground truth on small assembled systems."""

import numpy as np
import pytest

from elcomp.assembly import assemble_system
from elcomp.errors import DimMismatch, TooLarge, ValidationError
from elcomp.fields import block_from_exprs, block_from_solution
from elcomp.mesh import build_grid
from elcomp.oracle import (
    inverse_positivity,
    random_probe,
    solve_system,
    verify_subsolution,
)
from elcomp.expressions import parse_expr

from helpers import laplace_system


def _pair(grid, m):
    return assemble_system(laplace_system(grid, n_species=2, m=m))


def test_m_matrix_is_inverse_positive():
    grid = build_grid(1, (0.0,), (1.0,), (16,))
    asys = _pair(grid, [["0", "-1"], ["-0.5", "0"]])
    rep = inverse_positivity(asys)
    assert rep.inverse_positive
    assert rep.boundary_monotone
    assert rep.min_entry >= 0.0
    assert rep.min_boundary_entry >= 0.0
    assert rep.dof == 30
    assert rep.gauge is None and not rep.sampled


def test_strong_negative_diagonal_breaks_positivity():
    # c = -30 drops the principal eigenvalue below zero on this grid,
    # so the inverse picks up negative entries
    grid = build_grid(1, (0.0,), (1.0,), (16,))
    asys = assemble_system(laplace_system(grid, c=-30.0))
    rep = inverse_positivity(asys)
    assert not rep.inverse_positive
    assert rep.min_entry < 0.0
    assert rep.witness is not None
    i, j = rep.witness
    assert 0 <= i < 15 and 0 <= j < 15


def test_gauge_flips_competitive_pair():
    """Constant-sign positive coupling becomes cooperative after flipping
    one species, so the gauged inverse is nonnegative while the plain
    problem keeps mixed comparison directions."""
    grid = build_grid(1, (0.0,), (1.0,), (16,))
    asys = _pair(grid, [["0", "0.5"], ["0.5", "0"]])
    plain = inverse_positivity(asys)
    gauged = inverse_positivity(asys, gauge=(1, -1))
    assert gauged.inverse_positive
    assert gauged.gauge == (1, -1)
    assert not plain.inverse_positive
    assert plain.min_entry < -1e-6


def test_gauge_validation():
    grid = build_grid(1, (0.0,), (1.0,), (8,))
    asys = _pair(grid, [["0", "0.5"], ["0.5", "0"]])
    with pytest.raises(ValidationError):
        inverse_positivity(asys, gauge=(1,))
    with pytest.raises(ValidationError):
        inverse_positivity(asys, gauge=(1, 2))


def test_dof_budget_enforced():
    grid = build_grid(1, (0.0,), (1.0,), (64,))
    asys = assemble_system(laplace_system(grid))
    with pytest.raises(TooLarge):
        inverse_positivity(asys, max_dof=32)


def test_verify_subsolution_block_field():
    grid = build_grid(1, (0.0,), (1.0,), (16,))
    spec = laplace_system(grid, f=[1.0])
    asys = assemble_system(spec)
    u = solve_system(asys)
    block = block_from_solution(grid, 1, u, asys.g_vec)
    ok, res = verify_subsolution(asys, block)
    assert ok
    assert abs(res) <= 1e-10
    # bumping the peak turns it into a strict supersolution violation
    bumped = block.values.copy()
    bumped[0, 8] += 0.1
    from elcomp.fields import BlockField

    ok2, res2 = verify_subsolution(asys, BlockField(grid, bumped))
    assert not ok2
    assert res2 > 1.0


def test_verify_subsolution_flat_vector():
    grid = build_grid(1, (0.0,), (1.0,), (8,))
    asys = assemble_system(laplace_system(grid, f=[1.0]))
    u = solve_system(asys)
    ok, _ = verify_subsolution(asys, u)
    assert ok
    with pytest.raises(DimMismatch):
        verify_subsolution(asys, u[:-1])


def test_solve_system_reproduces_manufactured_solution():
    """Manufactured solution: u = sin(pi x) has -u'' = pi^2 sin(pi x);
    solving with that rhs recovers u to discretization accuracy."""
    grid = build_grid(1, (0.0,), (1.0,), (64,))
    pi = float(np.pi)
    spec = laplace_system(grid, f=[f"{pi * pi} * sin({pi} * x)"])
    asys = assemble_system(spec)
    u = solve_system(asys)
    x = grid.coords[grid.interior_ids, 0]
    assert np.allclose(u, np.sin(pi * x), atol=2e-3)
    # and the algebraic residual is tiny
    assert np.abs(asys.A @ u + asys.G @ asys.g_vec - asys.f_vec).max() < 1e-10


def test_random_probe_negative_case_and_determinism():
    grid = build_grid(1, (0.0,), (1.0,), (16,))
    bad = assemble_system(laplace_system(grid, c=-30.0))
    rep1 = random_probe(bad, trials=40, seed=3)
    rep2 = random_probe(bad, trials=40, seed=3)
    assert not rep1.inverse_positive
    assert rep1.sampled and rep1.trials == 40
    assert rep1.min_entry == rep2.min_entry
    assert rep1.witness == rep2.witness
    good = assemble_system(laplace_system(grid))
    rep3 = random_probe(good, trials=20, seed=0)
    assert rep3.inverse_positive
    assert rep3.sampled


def test_oracle_report_json_shape():
    grid = build_grid(1, (0.0,), (1.0,), (8,))
    rep = inverse_positivity(assemble_system(laplace_system(grid)))
    d = rep.to_json_dict()
    assert set(d) == {
        "inverse_positive",
        "min_entry",
        "witness",
        "boundary_monotone",
        "min_boundary_entry",
        "dof",
        "gauge",
        "sampled",
        "trials",
    }
    assert d["inverse_positive"] is True
    assert isinstance(d["witness"], list)
