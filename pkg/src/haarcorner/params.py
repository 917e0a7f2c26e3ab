"""Parameter triple (n, p, q) shared by every sampler and formula."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class EnsembleParams:
    """Dimensions of the corner-block ensemble.

    ``n`` is the ambient orthogonal dimension, ``p x q`` the shape of the
    corner block (q <= p).  Orthonormalization-based sampling only needs
    ``q <= p <= n``; the spectral density, the beta-chain model and all
    information functionals additionally need ``p + q <= n``, which callers
    assert through :meth:`require_density`.
    """

    n: int
    p: int
    q: int

    def __post_init__(self):
        for name in ("n", "p", "q"):
            v = getattr(self, name)
            if not isinstance(v, (int,)) or isinstance(v, bool):
                raise TypeError(f"{name} must be an integer, got {v!r}")
        if not (1 <= self.q <= self.p <= self.n):
            raise ValueError(
                f"require 1 <= q <= p <= n, got n={self.n}, p={self.p}, q={self.q}"
            )

    @property
    def c_n(self) -> float:
        """Density exponent (n - p - q - 1) / 2, recomputed on access."""
        return (self.n - self.p - self.q - 1) / 2.0

    @property
    def c_n_exact(self) -> Fraction:
        return Fraction(self.n - self.p - self.q - 1, 2)

    @property
    def supports_density(self) -> bool:
        """True when p + q <= n, so the corner density is well defined."""
        return self.p + self.q <= self.n

    def require_density(self) -> "EnsembleParams":
        if not self.supports_density:
            raise ValueError(
                f"p + q <= n required for density-based operations, "
                f"got n={self.n}, p={self.p}, q={self.q}"
            )
        return self

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n, self.p, self.q)
