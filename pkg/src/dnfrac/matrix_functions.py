"""Mittag-Leffler functions of a matrix argument and the solution kernels built from them.

Two independent evaluators are provided. :func:`matrix_ml_series` sums the
power series :math:`\\sum_k (zA)^k / \\Gamma(\\alpha k+\\beta)` and needs no
spectral information. :func:`matrix_ml_jordan` assembles the function block by
block from a user-declared Jordan structure, each block being upper triangular
Toeplitz with entries :func:`~dnfrac.special_functions.e_entry`.

Jordan structure is never computed from a general matrix; it is accepted as
input through :class:`JordanSpec`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg, special

from .errors import DomainError, NonConvergence
from .orders import OrderSequence
from .special_functions import DEFAULT_CONTROL, SeriesControl, e_entry, recip_gamma

__all__ = [
    "as_square_matrix",
    "JordanSpec",
    "MLKernelSpec",
    "matrix_ml_series",
    "matrix_ml_grid",
    "matrix_ml_jordan",
    "kernel_G",
    "kernel_G0",
    "kernel_V",
    "dn_derivative_of_G",
]


def as_square_matrix(a) -> np.ndarray:
    """Return a read-only float copy of ``a``, checking it is square and finite."""
    m = np.array(a, dtype=float)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DomainError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix entries must be finite")
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class JordanSpec:
    """Declared Jordan structure ``A = H J H^{-1}``.

    ``block_sizes[k]`` is the order of the block belonging to
    ``eigenvalues[k]``.
    """

    eigenvalues: tuple[float, ...]
    block_sizes: tuple[int, ...]
    transform_H: np.ndarray
    transform_H_inv: np.ndarray

    def __post_init__(self):
        eig = tuple(float(v) for v in self.eigenvalues)
        sizes = tuple(int(s) for s in self.block_sizes)
        if len(eig) != len(sizes) or not eig:
            raise DomainError("need one block size per eigenvalue")
        if any(s < 1 for s in sizes) or sizes != tuple(self.block_sizes):
            raise DomainError(f"block sizes must be positive integers, got {self.block_sizes!r}")
        h = as_square_matrix(self.transform_H)
        hinv = as_square_matrix(self.transform_H_inv)
        n = h.shape[0]
        if sum(sizes) != n or hinv.shape != h.shape:
            raise DomainError(f"block sizes sum to {sum(sizes)} but the transform is {n}x{n}")
        if np.max(np.abs(h @ hinv - np.eye(n))) > 1e-10:
            raise DomainError("transform_H_inv is not the inverse of transform_H")
        object.__setattr__(self, "eigenvalues", eig)
        object.__setattr__(self, "block_sizes", sizes)
        object.__setattr__(self, "transform_H", h)
        object.__setattr__(self, "transform_H_inv", hinv)

    @classmethod
    def from_transform(cls, eigenvalues, block_sizes, transform_H) -> JordanSpec:
        h = np.asarray(transform_H, dtype=float)
        return cls(tuple(eigenvalues), tuple(block_sizes), h, np.linalg.inv(h))

    @property
    def n(self) -> int:
        return self.transform_H.shape[0]

    def jordan_matrix(self) -> np.ndarray:
        blocks = [lam * np.eye(r) + np.eye(r, k=1) for lam, r in zip(self.eigenvalues, self.block_sizes)]
        return linalg.block_diag(*blocks)

    def matrix(self) -> np.ndarray:
        """The matrix ``H J H^{-1}`` this structure describes."""
        return as_square_matrix(self.transform_H @ self.jordan_matrix() @ self.transform_H_inv)

    def check_matrix(self, a, atol: float = 1e-10) -> None:
        """Raise :class:`DomainError` unless this structure reproduces ``a``."""
        a = as_square_matrix(a)
        if a.shape != (self.n, self.n) or np.max(np.abs(self.matrix() - a)) > atol:
            raise DomainError("Jordan structure does not reproduce the matrix")


def _kahan_add(total, comp, term):
    y = term - comp
    t = total + y
    comp = (t - total) - y
    return t, comp


def matrix_ml_grid(alpha: float, beta: float, a, zs, ctl: SeriesControl = DEFAULT_CONTROL) -> np.ndarray:
    """Evaluate :math:`E_{\\alpha,\\beta}(Az)` for every ``z`` in ``zs`` at once.

    Powers of ``A`` are shared across arguments and kept normalised with a
    separate log scale, so large powers do not overflow. Returns an array of
    shape ``(len(zs), n, n)``.

    The tail is bounded by :math:`\\|A\\|_\\infty^k |z|^k / \\Gamma(\\alpha k+\\beta)`
    with a geometric estimate once the ratio of successive bounds drops
    below one half.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    a = as_square_matrix(a)
    zs = np.atleast_1d(np.asarray(zs, dtype=float))
    n = a.shape[0]
    total = np.zeros((zs.size, n, n))
    comp = np.zeros_like(total)
    total, comp = _kahan_add(total, comp, recip_gamma(beta) * np.eye(n)[None])

    zmax = float(np.max(np.abs(zs))) if zs.size else 0.0
    growth = float(np.linalg.norm(a, np.inf)) * zmax
    if growth == 0:
        return total

    with np.errstate(divide="ignore"):
        logz = np.log(np.abs(zs))
    negz = zs < 0
    power = a / np.max(np.abs(a))
    logscale = math.log(np.max(np.abs(a)))
    for k in range(1, ctl.max_terms):
        arg = alpha * k + beta
        if not (arg <= 0 and arg == math.floor(arg)):
            lg = float(special.gammaln(arg))
            sgn = float(special.gammasgn(arg))
            sign = np.where(negz & (k % 2 == 1), -sgn, sgn)
            coef = sign * np.exp(k * logz + logscale - lg)
            total, comp = _kahan_add(total, comp, coef[:, None, None] * power[None])
            if arg > 0:
                ratio = growth * math.exp(lg - float(special.gammaln(arg + alpha)))
                bound = math.exp(k * math.log(growth) - lg)
                if ratio < 0.5 and bound * ratio / (1 - ratio) <= ctl.abs_tol:
                    return total
        power = power @ a
        scale = np.max(np.abs(power))
        if scale == 0:  # nilpotent: every further term vanishes
            return total
        power = power / scale
        logscale += math.log(scale)
    raise NonConvergence(f"matrix E_{{{alpha},{beta}}} series did not converge in {ctl.max_terms} terms")


def matrix_ml_series(alpha: float, beta: float, a, z: float, ctl: SeriesControl = DEFAULT_CONTROL) -> np.ndarray:
    """:math:`E_{\\alpha,\\beta}(Az)` from the truncated matrix power series."""
    return matrix_ml_grid(alpha, beta, a, [z], ctl)[0]


def matrix_ml_jordan(alpha: float, beta: float, js: JordanSpec, z: float,
                     ctl: SeriesControl = DEFAULT_CONTROL) -> np.ndarray:
    """:math:`E_{\\alpha,\\beta}(Az)` assembled as ``H diag(E(J_k z)) H^{-1}``.

    Each block ``E(J_k z)`` is upper triangular Toeplitz with ``e_n`` on the
    ``n``-th superdiagonal.
    """
    blocks = []
    for lam, r in zip(js.eigenvalues, js.block_sizes):
        entries = [e_entry(alpha, beta, lam, z, d, ctl) for d in range(r)]
        blocks.append(linalg.toeplitz(np.r_[entries[0], np.zeros(r - 1)], entries))
    return js.transform_H @ linalg.block_diag(*blocks) @ js.transform_H_inv


@dataclass(frozen=True)
class MLKernelSpec:
    """Orders and matrix of a system, with an optional Jordan structure for ``A``.

    When ``jordan`` is given, kernels are evaluated through the Jordan route.
    """

    orders: OrderSequence
    matrix: np.ndarray
    jordan: Optional[JordanSpec] = None

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_square_matrix(self.matrix))
        if self.jordan is not None:
            self.jordan.check_matrix(self.matrix)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def ml(self, beta: float, zs, ctl: SeriesControl = DEFAULT_CONTROL) -> np.ndarray:
        zs = np.atleast_1d(np.asarray(zs, dtype=float))
        if self.jordan is None:
            return matrix_ml_grid(self.orders.alpha, beta, self.matrix, zs, ctl)
        return np.stack([matrix_ml_jordan(self.orders.alpha, beta, self.jordan, z, ctl) for z in zs])

    def power_kernel(self, exponent: float, beta: float, x, ctl: SeriesControl = DEFAULT_CONTROL) -> np.ndarray:
        """``x**exponent * E_{alpha,beta}(A x**alpha)`` for scalar or 1-d ``x > 0``."""
        xs = np.asarray(x, dtype=float)
        if np.any(xs <= 0):
            raise DomainError("kernels are defined for x > 0 only")
        flat = np.atleast_1d(xs)
        vals = flat[:, None, None] ** exponent * self.ml(beta, flat**self.orders.alpha, ctl)
        return vals[0] if xs.ndim == 0 else vals


def kernel_G(spec: MLKernelSpec, x, ctl: SeriesControl = DEFAULT_CONTROL) -> np.ndarray:
    """Green kernel :math:`G(x) = x^{\\alpha-1}E_{\\alpha,\\alpha}(Ax^\\alpha)`."""
    alpha = spec.orders.alpha
    return spec.power_kernel(alpha - 1, alpha, x, ctl)


def kernel_G0(spec: MLKernelSpec, x, ctl: SeriesControl = DEFAULT_CONTROL) -> np.ndarray:
    """Reduced kernel :math:`x^{\\mu_{m-1}-1}E_{\\alpha,\\mu_{m-1}}(Ax^\\alpha)` acting on ``f0``.

    For a single-order sequence ``m = 0`` there is no reduction and ``G`` is returned.
    """
    orders = spec.orders
    if orders.m == 0:
        return kernel_G(spec, x, ctl)
    mu = orders.mu[orders.m - 1]
    return spec.power_kernel(mu - 1, mu, x, ctl)


def kernel_V(spec: MLKernelSpec, x: float, t: float, ctl: SeriesControl = DEFAULT_CONTROL) -> np.ndarray:
    """Adjoint Green companion :math:`(x-t)^\\alpha E_{\\alpha,\\alpha+1}(A(x-t)^\\alpha)`, ``0 <= t < x``."""
    if not 0 <= t < x:
        raise DomainError(f"kernel_V needs 0 <= t < x, got x={x!r}, t={t!r}")
    alpha = spec.orders.alpha
    return spec.power_kernel(alpha, alpha + 1, x - t, ctl)


def dn_derivative_of_G(spec: MLKernelSpec, k: int, x, ctl: SeriesControl = DEFAULT_CONTROL) -> np.ndarray:
    """DN derivative of ``G`` for the tail ``{alpha_m, ..., alpha_k}``, ``1 <= k <= m``.

    Closed form :math:`x^{\\mu_{k-1}-1}E_{\\alpha,\\mu_{k-1}}(Ax^\\alpha)`; it
    multiplies the initial vector ``u_0^{k-1}`` in the solution.
    """
    orders = spec.orders
    if not 1 <= k <= orders.m:
        raise DomainError(f"k must lie in [1, {orders.m}], got {k!r}")
    mu = orders.mu[k - 1]
    return spec.power_kernel(mu - 1, mu, x, ctl)
