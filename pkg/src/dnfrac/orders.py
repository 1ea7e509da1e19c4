"""Order sequences of Dzhrbashyan-Nersesyan operators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = ["OrderSequence"]


@dataclass(frozen=True)
class OrderSequence:
    """The tuple ``(alpha_0, ..., alpha_m)`` defining a DN operator.

    ``alpha`` is the operator order ``sum(alphas) - 1``. ``mu[k]`` is the
    partial sum ``alpha_0 + ... + alpha_k`` and ``nu_tail[k]`` the tail sum
    ``alpha_k + ... + alpha_m``.
    """

    alphas: tuple[float, ...]
    mu: tuple[float, ...] = field(init=False, repr=False)
    nu_tail: tuple[float, ...] = field(init=False, repr=False)

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        if not alphas:
            raise DomainError("an order sequence needs at least one entry")
        for a in alphas:
            if not 0 < a <= 1:
                raise DomainError(f"every order must lie in (0, 1], got {a!r}")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "mu", tuple(np.cumsum(alphas).tolist()))
        object.__setattr__(self, "nu_tail", tuple(np.cumsum(alphas[::-1])[::-1].tolist()))

    @property
    def m(self) -> int:
        return len(self.alphas) - 1

    @property
    def alpha(self) -> float:
        return self.mu[-1] - 1.0

    @property
    def solvable(self) -> bool:
        """Existence hypothesis ``alpha_0 + alpha_m > 1``."""
        return self.alphas[0] + self.alphas[-1] > 1

    def reversed(self) -> OrderSequence:
        return OrderSequence(self.alphas[::-1])

    def __len__(self):
        return len(self.alphas)
