"""Closed-form solution of the Cauchy problem for ``D^{alpha_0..alpha_m} u - A u = f``.

The solution is

    u(x) = sum_j x**(mu_j - 1) E_{alpha, mu_j}(A x**alpha) u0[j]
           + int_0^x G0(x - t) f0(t) dt,

where ``f = D^(alpha_m - 1) f0`` and ``G0(x) = x**(mu_{m-1}-1) E_{alpha,mu_{m-1}}(A x**alpha)``.
The homogeneous part is evaluated pointwise from matrix Mittag-Leffler
series; the forcing part is a product-integration convolution that treats the
kernel's endpoint power exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import DomainError, QuadratureError, SolvabilityError
from .fractional_ops import (
    GridFunction,
    GridSpec,
    dn_apply,
    extrapolate_to_zero,
    product_trapezoid_weights,
    rl_apply,
)
from .matrix_functions import as_square_matrix, matrix_ml_grid
from .orders import OrderSequence
from .special_functions import DEFAULT_CONTROL, SeriesControl, recip_gamma

__all__ = [
    "OrderSequence",
    "GridSpec",
    "ZeroForcing",
    "PolyF0",
    "CallableF0",
    "GridF",
    "GridF0",
    "CauchyProblem",
    "ValidationReport",
    "SolutionBundle",
    "validate",
    "homogeneous_solution",
    "forcing_solution",
    "dn_levels_closed_form",
    "level_exponents",
    "solve",
    "residual",
]

log = logging.getLogger(__name__)


# -- forcing ---------------------------------------------------------------


@dataclass(frozen=True)
class ZeroForcing:
    kind = "zero"


@dataclass(frozen=True)
class PolyF0:
    """``f0(x) = sum_k coeffs[k] * x**k`` with vector coefficients ``coeffs[k]``."""

    coeffs: np.ndarray
    kind = "poly_f0"

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        object.__setattr__(self, "coeffs", c)

    def f0(self, x: np.ndarray) -> np.ndarray:
        powers = np.asarray(x, dtype=float)[:, None] ** np.arange(self.coeffs.shape[0])[None, :]
        return powers @ self.coeffs

    def f(self, x: np.ndarray, orders: OrderSequence) -> np.ndarray:
        """Exact ``D^(alpha_m - 1) f0`` by the power rule."""
        s = 1.0 - orders.alphas[-1]
        x = np.asarray(x, dtype=float)
        k = np.arange(self.coeffs.shape[0])
        factors = np.array([math.gamma(kk + 1) * recip_gamma(kk + 1 + s) for kk in k])
        powers = x[:, None] ** (k[None, :] + s)
        return (powers * factors[None, :]) @ self.coeffs


@dataclass(frozen=True)
class CallableF0:
    """Vectorised ``f0`` returning ``(N, n)`` values; must be finite at 0."""

    fn: Callable[[np.ndarray], np.ndarray]
    kind = "f0"

    def f0(self, x: np.ndarray) -> np.ndarray:
        v = np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)
        return v[:, None] if v.ndim == 1 else v


@dataclass(frozen=True)
class GridF:
    """Samples of ``f`` at the solver grid points."""

    values: np.ndarray
    kind = "grid_f"

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        object.__setattr__(self, "values", v[:, None] if v.ndim == 1 else v)


@dataclass(frozen=True)
class GridF0:
    """Samples of ``f0`` at the solver grid points."""

    values: np.ndarray
    kind = "grid_f0"

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        object.__setattr__(self, "values", v[:, None] if v.ndim == 1 else v)


Forcing = Union[ZeroForcing, PolyF0, CallableF0, GridF, GridF0]


# -- problem ---------------------------------------------------------------


@dataclass(frozen=True)
class CauchyProblem:
    """Orders, matrix, initial vectors ``u0[0..m-1]``, forcing and interval length."""

    orders: OrderSequence
    A: np.ndarray
    initial: np.ndarray
    forcing: Forcing = field(default_factory=ZeroForcing)
    l: float = 1.0
    override_solvability: bool = False

    def __post_init__(self):
        if not isinstance(self.orders, OrderSequence):
            object.__setattr__(self, "orders", OrderSequence(tuple(self.orders)))
        object.__setattr__(self, "A", as_square_matrix(self.A))
        init = np.array(self.initial, dtype=float)
        if init.ndim == 1:
            init = init[:, None]
        object.__setattr__(self, "initial", init)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.orders.m

    def with_data(self, initial=None, forcing=None) -> CauchyProblem:
        return CauchyProblem(
            self.orders,
            self.A,
            self.initial if initial is None else initial,
            self.forcing if forcing is None else forcing,
            self.l,
            self.override_solvability,
        )


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of each hypothesis check, in a fixed order."""

    checks: tuple[tuple[str, bool, str], ...]

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def failures(self) -> list[str]:
        return [name for name, passed, _ in self.checks if not passed]

    def lines(self) -> list[str]:
        return [f"{name}: {'pass' if passed else 'FAIL'} ({detail})" for name, passed, detail in self.checks]


def validate(p: CauchyProblem, grid: Optional[GridSpec] = None) -> ValidationReport:
    """Check the existence hypotheses and the data shapes."""
    o = p.orders
    checks = [
        ("order_range", all(0 < a <= 1 for a in o.alphas), f"alphas={list(o.alphas)}"),
        ("order_positive", o.alpha > 0, f"alpha={o.alpha:.17g}"),
        (
            "solvability",
            o.solvable,
            f"alpha_0+alpha_m={o.alphas[0] + o.alphas[-1]:.17g}",
        ),
    ]
    dims_ok = p.initial.shape == (o.m, p.n)
    detail = f"initial {p.initial.shape[0]}x{p.initial.shape[1]}, expected {o.m}x{p.n}"
    forcing = p.forcing
    if isinstance(forcing, PolyF0) and forcing.coeffs.shape[1] != p.n:
        dims_ok, detail = False, f"f0 coefficients have dimension {forcing.coeffs.shape[1]}, expected {p.n}"
    if isinstance(forcing, (GridF, GridF0)):
        if forcing.values.shape[1] != p.n:
            dims_ok, detail = False, f"forcing samples have dimension {forcing.values.shape[1]}, expected {p.n}"
        elif grid is not None and forcing.values.shape[0] != grid.n_points:
            dims_ok, detail = False, f"{forcing.values.shape[0]} forcing samples for {grid.n_points} grid points"
    checks.append(("dimensions", dims_ok, detail))
    checks.append(("interval", p.l > 0, f"l={p.l:.17g}"))
    return ValidationReport(tuple(checks))


# -- building blocks -------------------------------------------------------


def _power_ml(p: CauchyProblem, x: np.ndarray, exponent: float, beta: float, ctl: SeriesControl) -> np.ndarray:
    """``x**exponent * E_{alpha,beta}(A x**alpha)`` stacked over ``x``."""
    alpha = p.orders.alpha
    return x[:, None, None] ** exponent * matrix_ml_grid(alpha, beta, p.A, x**alpha, ctl)


def homogeneous_solution(p: CauchyProblem, grid: GridSpec, ctl: SeriesControl = DEFAULT_CONTROL) -> GridFunction:
    """Part of the solution carried by the initial vectors."""
    x = grid.x
    u = np.zeros((x.size, p.n))
    for j, mu in enumerate(p.orders.mu[: p.m]):
        if np.any(p.initial[j]):
            u += _power_ml(p, x, mu - 1, mu, ctl) @ p.initial[j]
    return GridFunction(grid.l, u)


def _kernel_convolution(p: CauchyProblem, grid: GridSpec, sigma: float, beta: float,
                        data_nodes: np.ndarray, ctl: SeriesControl) -> np.ndarray:
    """``int_0^{x_j} (x_j-t)**sigma E_{alpha,beta}(A (x_j-t)**alpha) d(t) dt`` at every grid point.

    ``data_nodes`` holds ``d`` at nodes ``0..N``. The power ``(x - t)**sigma``
    is integrated exactly against the piecewise-linear interpolant of the
    remaining factor.
    """
    n_pts = grid.n_points
    if n_pts < 4:
        raise QuadratureError(f"need at least 4 grid points, got {n_pts}")
    h = grid.h
    y = h * np.arange(n_pts + 1)
    smooth = matrix_ml_grid(p.orders.alpha, beta, p.A, y**p.orders.alpha, ctl)
    q = sigma + 1.0
    c, e = product_trapezoid_weights(q, n_pts)
    weighted = c[:, None, None] * smooth
    out = np.zeros((n_pts, p.n))
    data = data_nodes[1:]
    for r in range(p.n):
        for col in range(p.n):
            out[:, r] += np.convolve(weighted[:n_pts, r, col], data[:, col])[:n_pts]
    out += e[1:, None] * np.einsum("jrc,c->jr", smooth[1:], data_nodes[0])
    return h**q / (q * (q + 1)) * out


def _nodes(values: np.ndarray, origin=None) -> np.ndarray:
    if origin is None:
        origin = 2 * values[0] - values[1]
    return np.vstack([origin, values])


def _f0_nodes(p: CauchyProblem, grid: GridSpec, diagnostics: Optional[dict] = None) -> Optional[np.ndarray]:
    """``f0`` at nodes ``0..N``, or ``None`` for zero forcing."""
    forcing = p.forcing
    if isinstance(forcing, ZeroForcing):
        return None
    if isinstance(forcing, (PolyF0, CallableF0)):
        return forcing.f0(np.r_[0.0, grid.x])
    if isinstance(forcing, GridF0):
        return _nodes(forcing.values)
    # Only f is known: recover f0 = D^(1 - alpha_m) f numerically.
    if diagnostics is not None:
        diagnostics.setdefault("warnings", []).append(
            "f0 recovered from grid f by a first-order grid derivative; DN levels carry an extra O(h) error"
        )
    f0 = rl_apply(GridFunction(grid.l, forcing.values), 1.0 - p.orders.alphas[-1]).samples
    return _nodes(f0)


def forcing_values(p: CauchyProblem, grid: GridSpec) -> np.ndarray:
    """Samples of the right-hand side ``f`` on the grid."""
    forcing = p.forcing
    if isinstance(forcing, ZeroForcing):
        return np.zeros((grid.n_points, p.n))
    if isinstance(forcing, PolyF0):
        return forcing.f(grid.x, p.orders)
    if isinstance(forcing, GridF):
        return forcing.values
    f0 = forcing.f0(grid.x) if isinstance(forcing, CallableF0) else forcing.values
    return rl_apply(GridFunction(grid.l, f0), p.orders.alphas[-1] - 1.0).samples


def forcing_solution(p: CauchyProblem, grid: GridSpec, ctl: SeriesControl = DEFAULT_CONTROL) -> GridFunction:
    """Part of the solution driven by the forcing.

    Uses ``G0`` against ``f0`` when ``f0`` is available and ``G`` against
    ``f`` when only grid samples of ``f`` are given.
    """
    forcing = p.forcing
    if isinstance(forcing, ZeroForcing):
        return GridFunction(grid.l, np.zeros((grid.n_points, p.n)))
    alpha = p.orders.alpha
    if isinstance(forcing, GridF):
        if forcing.values.shape[0] != grid.n_points:
            raise DomainError("grid forcing does not match the grid")
        out = _kernel_convolution(p, grid, alpha - 1, alpha, _nodes(forcing.values), ctl)
        return GridFunction(grid.l, out)
    if isinstance(forcing, GridF0) and forcing.values.shape[0] != grid.n_points:
        raise DomainError("grid forcing does not match the grid")
    mu = p.orders.mu[p.m - 1]
    out = _kernel_convolution(p, grid, mu - 1, mu, _f0_nodes(p, grid), ctl)
    return GridFunction(grid.l, out)


def dn_levels_closed_form(p: CauchyProblem, k: int, grid: GridSpec, ctl: SeriesControl = DEFAULT_CONTROL,
                          diagnostics: Optional[dict] = None) -> GridFunction:
    """Level ``D^{alpha_0..alpha_k} u`` for ``0 <= k <= m-1``.

    The homogeneous part uses the three-case composition formula term by
    term; the forcing part integrates ``f0`` against the closed-form level of
    ``G0``.
    """
    m = p.m
    if not 0 <= k <= m - 1:
        raise DomainError(f"level must lie in [0, {m - 1}], got {k!r}")
    x = grid.x
    mu = p.orders.mu
    alpha = p.orders.alpha
    out = np.zeros((x.size, p.n))
    for j in range(m):
        vec = p.initial[j]
        if not np.any(vec):
            continue
        if j > k:
            expo = mu[j] - mu[k]
            out += _power_ml(p, x, expo, expo + 1, ctl) @ vec
        elif j == k:
            out += _power_ml(p, x, 0.0, 1.0, ctl) @ vec
        else:
            expo = mu[j] - mu[k] + alpha
            out += _power_ml(p, x, expo, expo + 1, ctl) @ (p.A @ vec)
    f0 = _f0_nodes(p, grid, diagnostics)
    if f0 is not None:
        sigma = mu[m - 1] - mu[k]
        out += _kernel_convolution(p, grid, sigma, sigma + 1, f0, ctl)
    return GridFunction(grid.l, out)


def level_exponents(p: CauchyProblem, k: int, count: int = 2) -> tuple[float, ...]:
    """Leading positive exponents of ``x`` in the expansion of level ``k`` at the origin.

    Collected from the series of every term that carries nonzero data, so
    that :func:`~dnfrac.fractional_ops.extrapolate_to_zero` can cancel them.
    """
    mu, alpha = p.orders.mu, p.orders.alpha
    starts = []
    for j in range(p.m):
        if not np.any(p.initial[j]):
            continue
        if j > k:
            starts.append(mu[j] - mu[k])
        elif j == k:
            starts.append(alpha)
        elif np.any(p.A @ p.initial[j]):
            starts.append(mu[j] - mu[k] + alpha)
    if not isinstance(p.forcing, ZeroForcing):
        sigma = mu[p.m - 1] - mu[k]
        starts += [sigma + 1 + i for i in range(count)]
    found = sorted({round(s + n * alpha, 12) for s in starts for n in range(count + 1) if s + n * alpha > 0})
    found = found[:count]
    while len(found) < count:  # pad with integer powers when data are sparse
        found.append(float(len(found) + 1) if not found else found[-1] + 1.0)
    return tuple(found)


def residual(p: CauchyProblem, u: GridFunction, f: Optional[np.ndarray] = None) -> GridFunction:
    """Grid ``D^{alpha_0..alpha_m} u - A u - f`` using the independent grid DN operator.

    The leading behaviour ``x**(alpha_0 - 1)`` of the solution is declared to
    the first Abel integral, the initial vectors serve as the limits of the
    intermediate levels and their leading powers from :func:`level_exponents`
    are declared, so a solution with wrong initial data does not produce a
    decaying residual.
    """
    grid = u.grid
    if f is None:
        f = forcing_values(p, grid)
    a0 = p.orders.alphas[0]
    sigma = a0 - 1 if a0 < 1 else None
    powers = [level_exponents(p, k)[0] for k in range(p.m)]
    lhs = dn_apply(u, p.orders, p.m, sigma=sigma, limits=list(p.initial), level_powers=powers).samples
    return u.with_samples(lhs - u.samples @ p.A.T - f)


# -- bundle ----------------------------------------------------------------


@dataclass(frozen=True)
class SolutionBundle:
    """Solution samples, its DN levels ``0..m-1`` and diagnostics."""

    u: GridFunction
    dn_levels: tuple[GridFunction, ...]
    homogeneous_part: GridFunction
    forcing_part: GridFunction
    report: ValidationReport
    diagnostics: dict

    @property
    def grid(self) -> GridSpec:
        return self.u.grid


def solve(p: CauchyProblem, grid: GridSpec, ctl: SeriesControl = DEFAULT_CONTROL,
          certify: bool = True) -> SolutionBundle:
    """Solve on ``grid`` and attach DN levels, validation and residual diagnostics.

    Raises
    ------
    SolvabilityError
        If validation fails and ``p.override_solvability`` is not set.
    """
    report = validate(p, grid)
    if not report.ok:
        dims = dict((name, ok) for name, ok, _ in report.checks)
        if not (p.override_solvability and dims["dimensions"] and dims["interval"] and dims["order_positive"]):
            raise SolvabilityError("; ".join(report.lines()), report)
        log.warning("solving outside the existence hypotheses: %s", ", ".join(report.failures()))
    if abs(grid.l - p.l) > 1e-12 * p.l:
        raise DomainError(f"grid length {grid.l} differs from problem length {p.l}")

    diagnostics: dict = {"validation": report.lines()}
    hom = homogeneous_solution(p, grid, ctl)
    forced = forcing_solution(p, grid, ctl)
    u = hom.with_samples(hom.samples + forced.samples)
    levels = tuple(dn_levels_closed_form(p, k, grid, ctl, diagnostics) for k in range(p.m))

    limits = [extrapolate_to_zero(level, level_exponents(p, k)) for k, level in enumerate(levels)]
    diagnostics["initial_limits"] = [lim.tolist() for lim in limits]
    diagnostics["initial_errors"] = [
        float(np.max(np.abs(lim - p.initial[k]))) for k, lim in enumerate(limits)
    ]
    if certify and grid.n_points >= 4:
        res = residual(p, u).samples
        diagnostics["residual_max"] = float(np.max(np.abs(res)))
        tail = grid.x >= grid.l / 4
        diagnostics["residual_max_tail"] = float(np.max(np.abs(res[tail])))
    if not report.ok:
        diagnostics["warnings"] = diagnostics.get("warnings", []) + [
            "existence hypotheses fail: " + ", ".join(report.failures())
        ]
    return SolutionBundle(u, levels, hom, forced, report, diagnostics)
