from __future__ import annotations

import math

import numpy as np
import pytest

from dnfrac.errors import DomainError, QuadratureError, SolvabilityError
from dnfrac.fractional_ops import dn_apply, power_rule
from dnfrac.orders import OrderSequence
from dnfrac.solver import (
    CallableF0,
    CauchyProblem,
    GridF,
    GridF0,
    GridSpec,
    PolyF0,
    ZeroForcing,
    dn_levels_closed_form,
    forcing_solution,
    homogeneous_solution,
    level_exponents,
    residual,
    solve,
    validate,
)
from dnfrac.special_functions import ml
from dnfrac.verify import residual_fixture

NILPOTENT = np.array([[0.0, 1.0], [0.0, 0.0]])


def caputo(lam=-1.0, u0=1.0, forcing=None):
    return CauchyProblem((1.0, 0.5), [[lam]], [[u0]], forcing or ZeroForcing())


def at(grid, values, x):
    return values[int(round(x / grid.h)) - 1]


# -- orders and validation ---------------------------------------------------------


def test_order_sequence_derived_fields():
    o = OrderSequence((0.7, 0.8, 0.9))
    assert o.m == 2
    assert o.alpha == pytest.approx(1.4, abs=1e-15)
    np.testing.assert_allclose(o.mu, [0.7, 1.5, 2.4], atol=1e-15)
    np.testing.assert_allclose(o.nu_tail, [2.4, 1.7, 0.9], atol=1e-15)
    assert o.reversed().alphas == (0.9, 0.8, 0.7)
    for bad in ((), (0.0, 1.0), (1.2, 0.5)):
        with pytest.raises(DomainError):
            OrderSequence(bad)


@pytest.mark.parametrize("orders, ok, failing", [
    ((0.6, 0.9), True, []),
    ((0.4, 0.5), False, ["order_positive", "solvability"]),
    ((1.0, 1.0, 1.0), True, []),
])
def test_validate_examples(orders, ok, failing):
    m = len(orders) - 1
    report = validate(CauchyProblem(orders, [[-1.0]], np.zeros((m, 1))))
    assert report.ok is ok
    assert report.failures() == failing
    assert len(report.lines()) == 5


def test_validate_solvability_only():
    report = validate(CauchyProblem((0.5, 0.9, 0.4), [[0.0]], np.zeros((2, 1))))
    assert report.failures() == ["solvability"]


def test_validate_dimensions():
    p = CauchyProblem((0.6, 0.9), np.eye(2), [[1.0]])
    assert validate(p).failures() == ["dimensions"]
    p = CauchyProblem((0.6, 0.9), [[1.0]], [[1.0]], GridF(np.ones(8)))
    assert validate(p, GridSpec(1.0, 16)).failures() == ["dimensions"]


def test_solve_rejects_failing_validation():
    p = CauchyProblem((0.6, 0.3, 0.3), [[-1.0]], [[1.0], [0.0]])
    with pytest.raises(SolvabilityError) as info:
        solve(p, GridSpec(1.0, 64))
    assert info.value.report.failures() == ["solvability"]


def test_override_solves_and_records_failure():
    p = CauchyProblem((0.6, 0.3, 0.3), [[-1.0]], [[1.0], [0.0]], override_solvability=True)
    bundle = solve(p, GridSpec(1.0, 64), certify=False)
    assert not bundle.report.ok
    assert any("solvability" in w for w in bundle.diagnostics["warnings"])


def test_override_does_not_cover_dimension_errors():
    p = CauchyProblem((0.6, 0.9), np.eye(2), [[1.0]], override_solvability=True)
    with pytest.raises(SolvabilityError):
        solve(p, GridSpec(1.0, 64))


def test_grid_length_mismatch():
    with pytest.raises(DomainError):
        solve(caputo(), GridSpec(2.0, 64))


# -- homogeneous part -----------------------------------------------------------------


def test_caputo_relaxation():
    grid = GridSpec(1.0, 64)
    u = homogeneous_solution(caputo(), grid).samples[:, 0]
    assert at(grid, u, 1.0) == pytest.approx(0.427583576155807, rel=1e-14)  # e * erfc(1)
    np.testing.assert_allclose(u, [ml(0.5, 1.0, -math.sqrt(v)) for v in grid.x], rtol=1e-14)


def test_rl_type_singular_solution():
    grid = GridSpec(1.0, 64)
    p = CauchyProblem((0.6, 0.9), [[-1.0]], [[1.0]])
    u = homogeneous_solution(p, grid).samples[:, 0]
    # mpmath values of x**-0.4 E_{0.5,0.6}(-sqrt(x))
    assert at(grid, u, 0.25) == pytest.approx(0.59035960038303286, rel=1e-14)
    assert at(grid, u, 1.0) == pytest.approx(0.20088290449686636, rel=1e-14)


def test_zero_initial_gives_zero():
    grid = GridSpec(1.0, 32)
    u = homogeneous_solution(CauchyProblem((0.7, 0.8, 0.9), np.eye(3), np.zeros((2, 3))), grid)
    assert not np.any(u.samples)


def test_nilpotent_system():
    grid = GridSpec(1.0, 64)
    p = CauchyProblem((1.0, 0.5), NILPOTENT, [[1.0, 1.0]])
    u = solve(p, grid).u.samples
    # E_{0.5,1}(N sqrt(x)) = I + N sqrt(x) / Gamma(1.5)
    np.testing.assert_allclose(u[:, 0], 1.0 + np.sqrt(grid.x) / math.gamma(1.5), rtol=1e-14)
    np.testing.assert_allclose(u[:, 1], 1.0, rtol=1e-15)


# -- forcing part ------------------------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.9])
def test_forcing_zero_matrix_power(alpha):
    grid = GridSpec(1.0, 64)
    p = CauchyProblem((1.0, alpha), [[0.0]], [[0.0]], GridF(np.ones(64)))
    u = forcing_solution(p, grid).samples[:, 0]
    np.testing.assert_allclose(u, grid.x**alpha / math.gamma(alpha + 1), rtol=1e-13)


def test_forcing_f0_route_zero_matrix():
    grid = GridSpec(1.0, 64)
    p = CauchyProblem((1.0, 0.5), [[0.0]], [[0.0]], PolyF0([[1.0], [2.0]]))
    u = forcing_solution(p, grid).samples[:, 0]
    np.testing.assert_allclose(u, grid.x + grid.x**2, rtol=1e-13)


def test_zero_forcing_part():
    grid = GridSpec(1.0, 16)
    assert not np.any(forcing_solution(caputo(), grid).samples)


def test_forcing_scalar_relaxation():
    # mpmath values of x**0.5 E_{0.5,1.5}(-sqrt(x))
    exact = {0.25: 0.38430965580707413, 0.5: 0.47684341626975326, 1.0: 0.572416423844193}
    errs = []
    for n in (256, 1024):
        grid = GridSpec(1.0, n)
        u = forcing_solution(caputo(u0=0.0, forcing=GridF(np.ones(n))), grid).samples[:, 0]
        errs.append(max(abs(at(grid, u, x) - v) for x, v in exact.items()))
    assert errs[1] < 5e-4
    assert math.log(errs[0] / errs[1], 4) > 0.9


def test_forcing_routes_agree():
    # f0 = 1 through G0 against grid f = D^(alpha_m - 1) f0 = x**0.5 / Gamma(1.5) through G
    n = 512
    grid = GridSpec(1.0, n)
    via_f0 = forcing_solution(caputo(forcing=PolyF0([[1.0]])), grid).samples
    via_f = forcing_solution(caputo(forcing=GridF(grid.x**0.5 / math.gamma(1.5))), grid).samples
    via_grid_f0 = forcing_solution(caputo(forcing=GridF0(np.ones(n))), grid).samples
    via_callable = forcing_solution(caputo(forcing=CallableF0(np.ones_like)), grid).samples
    np.testing.assert_array_equal(via_f0, via_callable)
    np.testing.assert_allclose(via_grid_f0, via_f0, atol=1e-14)
    assert np.max(np.abs(via_f - via_f0)) < 1e-3


def test_forcing_too_coarse():
    p = caputo(forcing=GridF(np.ones(3)))
    with pytest.raises(QuadratureError):
        forcing_solution(p, GridSpec(1.0, 3))


def test_grid_forcing_length_mismatch():
    with pytest.raises(DomainError):
        forcing_solution(caputo(forcing=GridF(np.ones(8))), GridSpec(1.0, 16))


def test_grid_f_records_warning():
    bundle = solve(caputo(forcing=GridF(np.ones(64))), GridSpec(1.0, 64))
    assert any("grid derivative" in w for w in bundle.diagnostics["warnings"])


def test_poly_f0_forcing_is_power_rule():
    x = np.array([0.25, 1.0])
    f = PolyF0([[1.0], [0.0], [3.0]]).f(x, OrderSequence((1.0, 0.5)))[:, 0]
    expected = [power_rule(1.0, -0.5, 0.0, v) + 6.0 * power_rule(3.0, -0.5, 0.0, v) for v in x]
    np.testing.assert_allclose(f, expected, rtol=1e-14)


# -- bundle and levels --------------------------------------------------------------------


def test_bundle_sums_parts():
    p = residual_fixture()
    bundle = solve(p, GridSpec(1.0, 128), certify=False)
    np.testing.assert_array_equal(bundle.u.samples, bundle.homogeneous_part.samples + bundle.forcing_part.samples)
    assert len(bundle.dn_levels) == p.m


def test_zero_problem_bundle():
    p = CauchyProblem((0.7, 0.8, 0.9), np.eye(2), np.zeros((2, 2)))
    bundle = solve(p, GridSpec(1.0, 64))
    assert not np.any(bundle.u.samples)
    assert all(not np.any(level.samples) for level in bundle.dn_levels)
    assert bundle.diagnostics["residual_max"] == 0.0


def test_caputo_level_zero_tends_to_initial():
    bundle = solve(caputo(), GridSpec(1.0, 4096))
    assert bundle.diagnostics["initial_errors"][0] < 1e-3


def test_level_zero_matrix_is_power_rule():
    grid = GridSpec(1.0, 32)
    p = CauchyProblem((0.7, 0.8, 0.9), [[0.0]], [[2.0], [3.0]])
    x = grid.x
    lvl0 = dn_levels_closed_form(p, 0, grid).samples[:, 0]
    np.testing.assert_allclose(lvl0, 2.0 + 3.0 * x**0.8 / math.gamma(1.8), rtol=1e-14)
    lvl1 = dn_levels_closed_form(p, 1, grid).samples[:, 0]
    np.testing.assert_allclose(lvl1, 3.0, rtol=1e-15)


def test_level_matches_grid_operator():
    p = residual_fixture()
    errs = []
    for n in (256, 512, 1024):
        grid = GridSpec(1.0, n)
        bundle = solve(p, grid, certify=False)
        grid_level = dn_apply(bundle.u, p.orders, 0, sigma=p.orders.alphas[0] - 1).samples
        diff = np.abs(grid_level - bundle.dn_levels[0].samples)[grid.x >= 0.25]
        errs.append(float(np.max(diff)))
    assert errs[-1] < 1e-5
    assert np.all(np.diff(errs) < 0)


def test_level_range():
    with pytest.raises(DomainError):
        dn_levels_closed_form(caputo(), 1, GridSpec(1.0, 16))


def test_level_exponents():
    p = residual_fixture()
    assert level_exponents(p, 0) == pytest.approx((0.8, 1.4))
    assert level_exponents(p, 1) == pytest.approx((0.6, 1.0))
    # initial data only at level 0: the level's own term starts at alpha
    q = CauchyProblem((1.0, 0.5), [[-1.0]], [[1.0]])
    assert level_exponents(q, 0) == pytest.approx((0.5, 1.0))
    zero = CauchyProblem((1.0, 0.5), [[-1.0]], [[0.0]])
    assert level_exponents(zero, 0) == (1.0, 2.0)


# -- properties -------------------------------------------------------------------------------


def test_superposition():
    p = residual_fixture()
    grid = GridSpec(1.0, 256)
    rng = np.random.default_rng(5)
    init_a = rng.normal(size=p.initial.shape)
    coef_a = rng.normal(size=p.forcing.coeffs.shape)
    whole = solve(p, grid, certify=False).u.samples
    part_a = solve(p.with_data(init_a, PolyF0(coef_a)), grid, certify=False).u.samples
    part_b = solve(p.with_data(p.initial - init_a, PolyF0(p.forcing.coeffs - coef_a)), grid, certify=False).u.samples
    assert np.max(np.abs(whole - part_a - part_b)) < 1e-12


def test_representation_recovers_manufactured_solution():
    # re-solve from data extracted from the solution itself
    p = residual_fixture()
    grid = GridSpec(1.0, 1024)
    bundle = solve(p, grid, certify=False)
    extracted = np.array(bundle.diagnostics["initial_limits"])
    again = solve(p.with_data(initial=extracted), grid, certify=False).u.samples
    assert np.max(np.abs(again - bundle.u.samples)) < 1e-4 * np.max(np.abs(bundle.u.samples))


def test_residual_small_for_solution_and_large_for_wrong_data():
    p = residual_fixture()
    grid = GridSpec(1.0, 1024)
    u = solve(p, grid, certify=False).u
    tail = grid.x >= 0.25
    good = np.max(np.abs(residual(p, u).samples[tail]))
    wrong = p.with_data(initial=p.initial + 0.1)
    bad = np.max(np.abs(residual(wrong, u).samples[tail]))
    assert good < 1e-3
    assert bad > 100 * good


def test_solve_diagnostics():
    bundle = solve(residual_fixture(), GridSpec(1.0, 512))
    diag = bundle.diagnostics
    assert set(diag) >= {"validation", "initial_limits", "initial_errors", "residual_max", "residual_max_tail"}
    assert max(diag["initial_errors"]) < 1e-3
    assert diag["residual_max_tail"] < 1e-2
