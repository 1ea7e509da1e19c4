"""Grid Riemann-Liouville and Dzhrbashyan-Nersesyan operators.

Functions live on a uniform grid ``x_j = j*h, j = 1..N`` over ``(0, l]``; the
origin is excluded because the kernels of interest blow up there. Every
operator works on node values ``0..N`` internally, with the origin value
supplied by extrapolation or by a declared local model.

Abel integrals use the product trapezoidal rule: the kernel
``(x - t)**(s - 1)`` is integrated exactly against the piecewise-linear
interpolant of the data. Data with a known algebraic endpoint behaviour
``t**sigma * phi(t)`` can declare ``sigma``; the weight ``t**sigma`` is then
integrated exactly too (incomplete beta moments) and only ``phi`` is
interpolated.

Derivatives follow the recursion ``D^nu = d/dx D^(nu - 1)`` with a backward
first difference. Inside a DN composition each "differentiate, then integrate
by ``1 - alpha_i``" step is fused: the derivative of the piecewise-linear
interpolant is piecewise constant and is integrated exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special

from .errors import DomainError
from .orders import OrderSequence
from .special_functions import recip_gamma

__all__ = [
    "GridSpec",
    "GridFunction",
    "rl_apply",
    "rl_apply_right",
    "dn_apply",
    "dn_apply_right",
    "power_rule",
    "extrapolate_to_zero",
    "frac_parts_identity_check",
    "conv_diff_check",
    "product_trapezoid_weights",
]

_ZERO_TOL = 1e-12
_CHUNK = 1 << 21


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of ``n_points`` nodes ``h, 2h, ..., l``."""

    l: float
    n_points: int

    def __post_init__(self):
        if not self.l > 0:
            raise DomainError(f"interval length must be positive, got {self.l!r}")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise DomainError(f"need at least 2 grid points, got {self.n_points!r}")

    @property
    def h(self) -> float:
        return self.l / self.n_points

    @property
    def x(self) -> np.ndarray:
        return self.h * np.arange(1, self.n_points + 1)


@dataclass(frozen=True)
class GridFunction:
    """Vector-valued samples at ``x_j = j*h``, ``j = 1..N``, stored as an ``(N, dim)`` array."""

    l: float
    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim == 1:
            s = s[:, None]
        if s.ndim != 2 or s.shape[0] < 2:
            raise DomainError(f"need an (N, dim) array with N >= 2, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise DomainError("grid samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        GridSpec(self.l, s.shape[0])

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], np.ndarray], grid: GridSpec) -> GridFunction:
        """Sample a vectorised ``fn`` returning ``(N,)`` or ``(N, dim)`` values."""
        return cls(grid.l, fn(grid.x))

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.l, self.N)

    @property
    def N(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    @property
    def h(self) -> float:
        return self.l / self.N

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def with_samples(self, samples) -> GridFunction:
        return GridFunction(self.l, samples)


# -- weights ---------------------------------------------------------------


def product_trapezoid_weights(q: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Unscaled product trapezoidal weights for ``int_0^{x_j} (x_j - t)**(q-1) g(t) dt``.

    Returns ``(c, e)`` such that, for ``g`` linear between nodes,

        integral = h**q / (q*(q+1)) * (sum_{i=1..j} c[j-i]*g_i + e[j]*g_0).

    Second differences of ``d**(q+1)`` are formed through ``expm1``/``log1p``
    to limit cancellation at large ``d``.
    """
    p = q + 1.0
    d = np.arange(1, n + 1, dtype=float)
    c = np.empty(n + 1)
    c[0] = 1.0
    e = np.zeros(n + 1)
    with np.errstate(divide="ignore"):  # log1p(-1) = -inf at d = 1 is intended
        c[1:] = d**p * (np.expm1(p * np.log1p(1 / d)) + np.expm1(p * np.log1p(-1 / d)))
        e[1:] = d**q * (d * np.expm1(p * np.log1p(-1 / d)) + p)
    return c, e


def _convolve_columns(c: np.ndarray, vals: np.ndarray) -> np.ndarray:
    n = vals.shape[0]
    return np.stack([np.convolve(c[:n], vals[:, k])[:n] for k in range(vals.shape[1])], axis=1)


def _abel_nodes(nodes: np.ndarray, s: float, h: float) -> np.ndarray:
    """Product trapezoid Abel integral of order ``s`` at nodes ``1..N``; ``nodes`` holds ``0..N``."""
    n = nodes.shape[0] - 1
    c, e = product_trapezoid_weights(s, n)
    scale = h**s / math.gamma(s + 2)
    return scale * (_convolve_columns(c, nodes[1:]) + e[1:, None] * nodes[0][None, :])


def _cell_moments(n: int, s: float, q: float):
    """Yield ``(j, M)`` with ``M[r, i-1] = int_{i-1}^{i} (j_r - tau)**(s-1) * tau**q dtau``.

    ``j`` is a column of output indices and ``i`` runs over cells
    ``1..max(j)``; cells beyond ``j_r`` contribute zero. Moments come from the
    regularised incomplete beta function; work is done in row chunks.
    """
    b = special.beta(q + 1, s)
    rows_per_chunk = max(1, _CHUNK // (n + 1))
    for start in range(1, n + 1, rows_per_chunk):
        stop = min(n, start + rows_per_chunk - 1)
        j = np.arange(start, stop + 1, dtype=float)[:, None]
        u = np.minimum(np.arange(0, stop + 1, dtype=float)[None, :] / j, 1.0)
        yield j, np.diff(j ** (s + q) * b * special.betainc(q + 1, s, u), axis=1)


def _abel_singular(phi_nodes: np.ndarray, s: float, sigma: float, h: float) -> np.ndarray:
    """Abel integral of ``t**sigma * phi(t)`` with ``phi`` interpolated linearly."""
    n = phi_nodes.shape[0] - 1
    out = np.empty((n, phi_nodes.shape[1]))
    for (j, p0), (_, p1) in zip(_cell_moments(n, s, sigma), _cell_moments(n, s, sigma + 1)):
        width = p0.shape[1]
        i = np.arange(1, width + 1, dtype=float)[None, :]
        # node i-1 and node i weights of cell i
        out[int(j[0, 0]) - 1 : width] = (i * p0 - p1) @ phi_nodes[:width] + (p1 - (i - 1) * p0) @ phi_nodes[1 : width + 1]
    return h ** (s + sigma) / math.gamma(s) * out


def _integrate_derivative_power(nodes: np.ndarray, s: float, p: float, h: float) -> np.ndarray:
    """``I^s (dL/dx)`` at nodes ``1..N`` for ``L = L(0) + x**p * psi`` with ``psi`` piecewise linear.

    On a cell where ``psi = a + b x`` the derivative is
    ``p a x**(p-1) + (p+1) b x**p``; both powers are integrated exactly
    against the Abel kernel, so the leading behaviour at the origin is
    reproduced without the first-cell error of a piecewise-linear ``L``.
    """
    n = nodes.shape[0] - 1
    x = h * np.arange(1, n + 1)
    psi = (nodes[1:] - nodes[0]) / x[:, None] ** p
    psi = np.vstack([_linear_origin(psi), psi])
    # per-cell coefficients in scaled units tau = x / h
    slope = np.diff(psi, axis=0)
    offset = psi[:-1] - np.arange(n)[:, None] * slope
    out = np.empty((n, nodes.shape[1]))
    for (j, m0), (_, m1) in zip(_cell_moments(n, s, p - 1), _cell_moments(n, s, p)):
        width = m0.shape[1]
        out[int(j[0, 0]) - 1 : width] = p * (m0 @ offset[:width]) + (p + 1) * (m1 @ slope[:width])
    return h ** (s + p - 1) / math.gamma(s) * out


def _linear_origin(vals: np.ndarray) -> np.ndarray:
    return 2 * vals[0] - vals[1]


def _richardson_origin(vals: np.ndarray) -> np.ndarray:
    # quadratic extrapolation to 0 from x_1, x_2, x_4
    if vals.shape[0] < 4:
        return _linear_origin(vals)
    return 8.0 / 3.0 * vals[0] - 2.0 * vals[1] + vals[3] / 3.0


def extrapolate_to_zero(g: GridFunction, exponents: Optional[Sequence[float]] = None) -> np.ndarray:
    """Estimate ``lim_{x->0} g(x)`` by Richardson extrapolation from ``x_1, x_2, x_4``.

    The model is ``g(x) = g0 + c1 x**p1 + c2 x**p2``. By default ``p = (1, 2)``;
    when the expansion of ``g`` at the origin is known, passing its two leading
    positive exponents removes those terms exactly.
    """
    if exponents is None:
        return _richardson_origin(g.samples)
    p1, p2 = (float(e) for e in exponents)
    if not (0 < p1 and 0 < p2 and p1 != p2):
        raise DomainError(f"need two distinct positive exponents, got {exponents!r}")
    if g.N < 4:
        raise DomainError("extrapolation needs at least 4 grid points")
    r = np.array([1.0, 2.0, 4.0])
    design = np.stack([np.ones(3), r**p1, r**p2], axis=1)
    # first row of the inverse gives the weights of the constant term
    weights = np.linalg.solve(design.T, np.array([1.0, 0.0, 0.0]))
    return weights @ g.samples[[0, 1, 3]]


def _integral_nodes(samples: np.ndarray, s: float, h: float, sigma: Optional[float],
                    need_origin: bool = True) -> np.ndarray:
    """Order-``s`` Abel integral at nodes ``0..N``, including the limit at the origin.

    With ``need_origin=False`` an unbounded limit is allowed and stored as ``nan``.
    """
    n = samples.shape[0]
    x = h * np.arange(1, n + 1)
    if sigma is None or sigma == 0:
        nodes = np.vstack([_linear_origin(samples), samples])
        return np.vstack([np.zeros(samples.shape[1]), _abel_nodes(nodes, s, h)])
    if not sigma > -1:
        raise DomainError(f"declared endpoint exponent must exceed -1, got {sigma!r}")
    phi = samples / x[:, None] ** sigma
    phi_nodes = np.vstack([_linear_origin(phi), phi])
    body = _abel_singular(phi_nodes, s, sigma, h)
    lead = sigma + s
    if lead > _ZERO_TOL:
        origin = np.zeros(samples.shape[1])
    elif lead > -_ZERO_TOL:
        origin = math.gamma(sigma + 1) * phi_nodes[0]
    elif not need_origin:
        origin = np.full(samples.shape[1], np.nan)
    else:
        raise DomainError(f"integral of order {s} of t**{sigma} is unbounded at the origin")
    return np.vstack([origin, body])


def _backward_diff(nodes: np.ndarray, h: float) -> np.ndarray:
    return np.diff(nodes, axis=0) / h


def rl_apply(g: GridFunction, nu: float, sigma: Optional[float] = None) -> GridFunction:
    """Riemann-Liouville integro-differentiation of order ``nu`` from the left end 0.

    Parameters
    ----------
    g : GridFunction
        Samples on ``(0, l]``.
    nu : float
        Order in ``(-2, 2)``; negative values integrate.
    sigma : float, optional
        Declared endpoint exponent: ``g(t) = t**sigma * phi(t)`` with smooth ``phi``.

    Notes
    -----
    ``nu < 0`` is second order on smooth data; ``0 < nu < 2`` is first order
    away from the origin. ``nu = 0`` is the identity.
    """
    if not -2 < nu < 2:
        raise DomainError(f"order must satisfy |nu| < 2, got {nu!r}")
    h = g.h
    if nu == 0:
        return g
    if nu < 0:
        return g.with_samples(_integral_nodes(g.samples, -nu, h, sigma, need_origin=False)[1:])
    if nu < 1:
        nodes = _integral_nodes(g.samples, 1 - nu, h, sigma)
        return g.with_samples(_backward_diff(nodes, h))
    nodes = _integral_nodes(g.samples, 2 - nu, h, sigma)
    first = _backward_diff(nodes, h)
    return g.with_samples(_backward_diff(np.vstack([_richardson_origin(first), first]), h))


def rl_apply_right(g: GridFunction, nu: float, sigma: Optional[float] = None) -> GridFunction:
    """Right-sided operator :math:`D^\\nu_{lt}` acting towards the right end ``l``.

    Here ``g.samples[j-1]`` holds the value at ``t = l - j*h``, i.e. samples
    are ordered by distance from the right end, and the result uses the same
    ordering. Under that relabelling the right-sided operator coincides with
    the left-sided one, which is how it is evaluated.
    """
    return rl_apply(g, nu, sigma)


def _integrate_derivative(nodes: np.ndarray, s: float, h: float) -> np.ndarray:
    """``I^s (dL/dx)`` at nodes ``1..N`` for the piecewise-linear ``L`` through ``nodes``."""
    jumps = np.diff(nodes, axis=0)
    if s == 0:
        return jumps / h
    n = jumps.shape[0]
    d = np.arange(1, n, dtype=float)
    b = np.empty(n)
    b[0] = 1.0
    b[1:] = d**s * np.expm1(s * np.log1p(1 / d))
    return h ** (s - 1) / math.gamma(s + 1) * _convolve_columns(b, jumps)


def dn_apply(g: GridFunction, orders: OrderSequence, upto: int, sigma: Optional[float] = None,
             limits: Optional[Sequence] = None, level_powers: Optional[Sequence] = None) -> GridFunction:
    """DN operator level ``D^{alpha_0, ..., alpha_upto}`` applied to ``g``.

    Level 0 is ``D^(alpha_0 - 1) g``; level ``k`` integrates the derivative of
    level ``k - 1`` by order ``1 - alpha_k``. ``upto = orders.m`` gives the
    full operator.

    Parameters
    ----------
    g : GridFunction
        Samples on ``(0, l]``.
    orders : OrderSequence
    upto : int
        Level to return, ``0 <= upto <= orders.m``.
    sigma : float, optional
        Declared endpoint exponent of ``g`` (see :func:`rl_apply`).
    limits : sequence, optional
        ``limits[k]`` is the known limit of level ``k`` at the origin.
        Missing entries are extrapolated from ``x_1, x_2, x_4``.
    level_powers : sequence, optional
        ``level_powers[k] = p`` declares ``L_k(x) - L_k(0) ~ x**p`` near the
        origin; the derivative of that level is then taken with the power
        factored out.

    Notes
    -----
    Without declared powers a level behaving like ``c + x**p`` with small
    ``p`` is differentiated through its piecewise-linear interpolant, which
    leaves an O(1) relative error at the first few grid points at every
    resolution. Extrapolated limits inherit that error.
    """
    if not 0 <= upto <= orders.m:
        raise DomainError(f"level must lie in [0, {orders.m}], got {upto!r}")
    pad = [None] * (orders.m + 1)
    limits = (list(limits) + pad)[: orders.m + 1] if limits is not None else pad
    powers = (list(level_powers) + pad)[: orders.m + 1] if level_powers is not None else list(pad)
    h = g.h
    a0 = orders.alphas[0]
    if a0 == 1:
        nodes = np.vstack([_richardson_origin(g.samples), g.samples])
    else:
        nodes = _integral_nodes(g.samples, 1 - a0, h, sigma)
    if limits[0] is not None:
        nodes[0] = limits[0]
    for k in range(1, upto + 1):
        s = 1 - orders.alphas[k]
        p = powers[k - 1]
        if p is None or s == 0:
            level = _integrate_derivative(nodes, s, h)
        else:
            if not p > 0:
                raise DomainError(f"declared level power must be positive, got {p!r}")
            level = _integrate_derivative_power(nodes, s, p, h)
        origin = _richardson_origin(level) if limits[k] is None else limits[k]
        nodes = np.vstack([origin, level])
    return g.with_samples(nodes[1:])


def dn_apply_right(g: GridFunction, orders: OrderSequence, upto: int, sigma: Optional[float] = None) -> GridFunction:
    """Right-sided DN operator with the sampling convention of :func:`rl_apply_right`."""
    return dn_apply(g, orders, upto, sigma)


def power_rule(mu: float, nu: float, a: float, x: float) -> float:
    """Exact :math:`D^\\nu_{ax}` of :math:`|x-a|^{\\mu-1}/\\Gamma(\\mu)`.

    Valid for ``mu > 0`` with any real ``nu``, or any ``mu`` when ``nu`` is a
    positive integer.
    """
    if not (mu > 0 or (nu >= 1 and nu == int(nu))):
        raise DomainError(f"power rule needs mu > 0 or integer nu >= 1, got mu={mu!r}, nu={nu!r}")
    expo = mu - nu - 1
    dist = abs(x - a)
    if dist == 0 and expo < 0:
        raise DomainError("power is unbounded at the base point")
    return dist**expo * recip_gamma(mu - nu)


def _trapezoid(nodes: np.ndarray, h: float) -> np.ndarray:
    return h * (nodes[0] / 2 + nodes[1:-1].sum(axis=0) + nodes[-1] / 2)


def frac_parts_identity_check(h_fn: GridFunction, g_fn: GridFunction, nu: float) -> float:
    """Residual of fractional integration by parts on ``(0, l)`` for ``nu < 0``.

    Compares ``int h * D_{0t}^nu g`` with ``int g * D_{lt}^nu h``, each side by
    the product trapezoid rule followed by the ordinary trapezoid rule.
    """
    if not nu < 0:
        raise DomainError(f"integration by parts holds for nu < 0, got {nu!r}")
    step = g_fn.h
    s = -nu
    g_nodes = np.vstack([_linear_origin(g_fn.samples), g_fn.samples])
    h_nodes = np.vstack([_linear_origin(h_fn.samples), h_fn.samples])
    left_op = np.vstack([np.zeros(g_fn.dim), _abel_nodes(g_nodes, s, step)])
    right_op = np.vstack([np.zeros(h_fn.dim), _abel_nodes(h_nodes[::-1], s, step)])[::-1]
    lhs = _trapezoid(h_nodes * left_op, step)
    rhs = _trapezoid(g_nodes * right_op, step)
    return float(np.max(np.abs(lhs - rhs)))


def conv_diff_check(h_fn: GridFunction, g_fn: GridFunction, nu: float) -> float:
    """Max-norm residual of the rule for differentiating a convolution, ``0 < nu < 1``.

    Left side: grid ``D^nu`` of ``int_0^x h(x-t) g(t) dt``. Right side: the
    convolution of ``h`` with grid ``D^nu g`` plus ``h(x)`` times the
    extrapolated limit of ``D^(nu-1) g`` at the origin.
    """
    if not 0 < nu < 1:
        raise DomainError(f"convolution rule needs 0 < nu < 1, got {nu!r}")
    step = g_fn.h
    n = g_fn.N
    g_nodes = np.vstack([_linear_origin(g_fn.samples), g_fn.samples])
    h_nodes = np.vstack([_linear_origin(h_fn.samples), h_fn.samples])
    conv = np.empty((n, g_fn.dim))
    for j in range(1, n + 1):
        prod = h_nodes[j::-1] * g_nodes[: j + 1]
        conv[j - 1] = _trapezoid(prod, step)
    lhs = rl_apply(g_fn.with_samples(conv), nu).samples

    dg = rl_apply(g_fn, nu).samples
    rhs = np.empty_like(lhs)
    for j in range(1, n + 1):
        rhs[j - 1] = step * np.sum(h_nodes[j - 1 :: -1][:j] * dg[:j], axis=0)
    limit = _richardson_origin(_integral_nodes(g_fn.samples, 1 - nu, step, None)[1:])
    rhs += h_fn.samples * limit[None, :]
    return float(np.max(np.abs(lhs - rhs)))
