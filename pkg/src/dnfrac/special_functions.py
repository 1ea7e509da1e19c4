"""Reciprocal gamma, Mittag-Leffler and Prabhakar functions for real arguments.

All functions are evaluated from their Taylor series

.. math::

    E^{\\gamma}_{\\alpha,\\beta}(z) = \\sum_{k\\ge 0}
        \\binom{k+\\gamma-1}{k} \\frac{z^k}{\\Gamma(\\alpha k + \\beta)},

restricted to positive integer :math:`\\gamma`. The sum is truncated once the
remaining tail is provably below ``SeriesControl.abs_tol``: as soon as the
gamma argument is positive, consecutive term ratios are non-increasing
(log-convexity of :math:`\\Gamma`), so a geometric bound on the tail applies.

Terms are summed with :func:`math.fsum`. When the terms are much larger than
the result (negative ``z``, small ``alpha``) a double precision sum cannot
meet the tolerance even if every term is correctly rounded, and the same
terms are re-summed in extended precision with :mod:`mpmath`.

Asymptotic expansions for large ``|z|`` are not provided; arguments far from
the origin raise :class:`~dnfrac.errors.NonConvergence` instead of returning
an inaccurate value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
from scipy import special

from .errors import DomainError, NonConvergence

__all__ = [
    "SeriesControl",
    "DEFAULT_CONTROL",
    "MLParams",
    "recip_gamma",
    "ml",
    "prabhakar",
    "e_entry",
]

_EPS = 2.0**-52


@dataclass(frozen=True)
class SeriesControl:
    """Truncation settings for every series in the package."""

    abs_tol: float = 1e-14
    max_terms: int = 2000

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol!r}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise ValueError(f"max_terms must be a positive integer, got {self.max_terms!r}")


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class MLParams:
    """Parameters of :math:`E^{\\gamma}_{\\alpha,\\beta}`; ``gamma_p=1`` is the two-parameter case."""

    alpha: float
    beta: float
    gamma_p: int = 1

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha!r}")
        if int(self.gamma_p) != self.gamma_p or self.gamma_p < 1:
            raise DomainError(f"gamma_p must be a positive integer, got {self.gamma_p!r}")

    def __call__(self, z: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
        return prabhakar(self.alpha, self.beta, self.gamma_p, z, ctl)


def recip_gamma(x: float) -> float:
    """Return :math:`1/\\Gamma(x)`, which is exactly zero at ``0, -1, -2, ...``."""
    if 0 < x < 170:
        return 1.0 / math.gamma(x)  # exact factorials at integers
    return float(special.rgamma(x))


def _is_pole(arg: float) -> bool:
    return arg <= 0 and arg == math.floor(arg)


def _term(z: float, k: int, coef: int, arg: float) -> float:
    if _is_pole(arg):
        return 0.0
    klogz = k * math.log(abs(z))
    if klogz < 700.0 and arg < 170.0:
        return z**k * coef * recip_gamma(arg)
    # Large powers or gamma arguments: assemble in log space to avoid overflow.
    sign = -1.0 if (z < 0 and k % 2) else 1.0
    sign *= float(special.gammasgn(arg))
    log_mag = klogz + math.log(coef) - float(special.gammaln(arg))
    if log_mag > 709.0:
        raise NonConvergence(f"series term {k} overflows double precision (|z|={abs(z)!r} too large)")
    return sign * math.exp(log_mag)


def _series_terms(alpha: float, beta: float, gamma_p: int, z: float, ctl: SeriesControl) -> list[float]:
    terms = []
    az = abs(z)
    running = 0.0
    for k in range(ctl.max_terms):
        arg = alpha * k + beta
        coef = math.comb(k + gamma_p - 1, k)
        t = _term(z, k, coef, arg)
        terms.append(t)
        running += t
        if arg > 0:
            ratio = az * (gamma_p + k) / (k + 1) * math.exp(
                float(special.gammaln(arg)) - float(special.gammaln(arg + alpha))
            )
            # the tail must meet abs_tol and also sit below the rounding level
            # of the sum; terms decay super-exponentially, so this is cheap
            limit = min(ctl.abs_tol, max(0.5 * _EPS * abs(running), 1e-3 * ctl.abs_tol))
            if ratio < 1 and abs(t) * ratio / (1 - ratio) <= limit:
                return terms
    raise NonConvergence(
        f"E^{gamma_p}_{{{alpha},{beta}}}({z}) did not converge in {ctl.max_terms} terms"
    )


def _extended_sum(alpha: float, beta: float, gamma_p: int, z: float, nterms: int, digits: int) -> float:
    with mpmath.workdps(digits):
        a, b, zz = mpmath.mpf(alpha), mpmath.mpf(beta), mpmath.mpf(z)
        acc = mpmath.mpf(0)
        power = mpmath.mpf(1)
        for k in range(nterms):
            acc += math.comb(k + gamma_p - 1, k) * power * mpmath.rgamma(a * k + b)
            power *= zz
        return float(acc)


def prabhakar(alpha: float, beta: float, gamma_p: int, z: float,
              ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Three-parameter Mittag-Leffler (Prabhakar) function for integer ``gamma_p >= 1``.

    Parameters
    ----------
    alpha : float
        Positive order.
    beta : float
        Any real; terms whose gamma argument hits a pole vanish.
    gamma_p : int
        Pochhammer parameter, a positive integer.
    z : float
        Argument.
    ctl : SeriesControl, optional
        Truncation tolerance and term budget.

    Raises
    ------
    NonConvergence
        If ``ctl.max_terms`` terms do not bring the tail below ``ctl.abs_tol``.
    """
    MLParams(alpha, beta, gamma_p)  # validates
    if z == 0:
        return recip_gamma(beta)
    terms = _series_terms(alpha, beta, int(gamma_p), z, ctl)
    total = math.fsum(terms)
    spread = math.fsum(abs(t) for t in terms) / max(1.0, abs(total))
    if 4 * _EPS * spread > ctl.abs_tol:
        digits = 20 + math.ceil(math.log10(spread))
        total = _extended_sum(alpha, beta, int(gamma_p), z, len(terms), digits)
    return total


def ml(alpha: float, beta: float, z: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Two-parameter Mittag-Leffler function :math:`E_{\\alpha,\\beta}(z)`.

    >>> round(ml(1.0, 1.0, 1.0), 12)
    2.718281828459
    """
    return prabhakar(alpha, beta, 1, z, ctl)


def e_entry(alpha: float, beta: float, lam: float, z: float, n: int,
            ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Entry ``n`` steps above the diagonal of :math:`E_{\\alpha,\\beta}(J z)` for a Jordan block.

    Equals :math:`z^n E^{n+1}_{\\alpha,\\alpha n+\\beta}(\\lambda z)`; ``n = 0``
    gives :math:`E_{\\alpha,\\beta}(\\lambda z)`.
    """
    if n < 0 or int(n) != n:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    n = int(n)
    if n > 0 and z == 0:
        return 0.0
    return z**n * prabhakar(alpha, alpha * n + beta, n + 1, lam * z, ctl)
