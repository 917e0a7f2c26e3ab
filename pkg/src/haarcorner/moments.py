"""Closed-form beta moments and large-n expansions of the resolvent traces.

The expansions truncate at the printed orders; their omitted terms are of
the p^2 q^2 / n^3 class only when p and q grow, so ``remainder_budget``
carries an explicit multiple of p^2 q^2 / n^3 to compare against.  The
final assembly combines them through the spectral information formula in
exact rational arithmetic, so no catastrophic cancellation occurs even
though the O(pq) leading terms cancel down to O(p^2 q^2 / n^2).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .params import EnsembleParams

REMAINDER_CONSTANT = 10.0


def beta_inverse_moment(alpha: float, beta: float, k: int) -> float:
    """E[xi^{-k}] for xi ~ Beta(alpha, beta), k in {1, 2}.

    E[1/xi]   = 1 + beta / (alpha - 1)
    E[1/xi^2] = 1 + beta (1/(alpha-1) + 1/(alpha-2))
                  + beta^2 / ((alpha-1)(alpha-2))
    """
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    if not alpha > k:
        raise ValueError(f"moment requires alpha > k, got alpha={alpha}, k={k}")
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if k == 1:
        return 1.0 + beta / (alpha - 1.0)
    return (1.0 + beta * (1.0 / (alpha - 1.0) + 1.0 / (alpha - 2.0))
            + beta * beta / ((alpha - 1.0) * (alpha - 2.0)))


@dataclass(frozen=True)
class ExpansionValue:
    """A truncated expansion value with the budget for its dropped terms."""

    value: float
    remainder_budget: float

    def __post_init__(self):
        if self.remainder_budget < 0:
            raise ValueError("remainder_budget must be nonnegative")


def _check_guard(params: EnsembleParams) -> None:
    if (params.p + params.q) / params.n > 0.5:
        raise ValueError(
            f"expansion guard violated: (p + q)/n = "
            f"{(params.p + params.q) / params.n:.3f} > 0.5")


def _expansion_exact(params: EnsembleParams, k: int) -> Fraction:
    n, p, q = (Fraction(v) for v in params.as_tuple())
    if k == 1:
        return (q + p * q / (n - p) + p * q * (q + 1) / n ** 2
                + (2 * p ** 2 * q * (q + 1) + p * q ** 3) / n ** 3)
    return (q + 2 * p * q / (n - p) + p ** 2 * q / (n - p) ** 2
            + 3 * p * q * (q + 1) / n ** 2
            + (9 * p ** 2 * q * (q + 1) + 4 * p * q ** 3) / n ** 3)


def resolvent_expansion(params: EnsembleParams, k: int,
                        remainder_constant: float = REMAINDER_CONSTANT
                        ) -> ExpansionValue:
    """Truncated large-n expansion of E[sum (1 - lambda)^{-k}], k in {1, 2}.

    k=1: q + pq/(n-p) + pq(q+1)/n^2 + (2 p^2 q (q+1) + p q^3)/n^3
    k=2: q + 2pq/(n-p) + p^2 q/(n-p)^2 + 3pq(q+1)/n^2
           + (9 p^2 q (q+1) + 4 p q^3)/n^3
    """
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    _check_guard(params)
    n, p, q = params.as_tuple()
    budget = remainder_constant * p * p * q * q / n ** 3
    return ExpansionValue(float(_expansion_exact(params, k)), budget)


def expected_trace(params: EnsembleParams) -> float:
    """E[sum lambda_k] = p q / n, exact at every n."""
    return params.p * params.q / params.n


def theorem_assembly(params: EnsembleParams) -> float:
    """Information value implied by the truncated trace expansions.

    Evaluates (n/4)(pq/n) - c (E1 - q) + (c^2/n)(E2 - E1) with the
    expansions E1, E2 in exact rational arithmetic and converts once at
    the end; the cancellation from O(pq) down to O(p^2 q^2 / n^2) is
    therefore exact.
    """
    _check_guard(params)
    n, p, q = (Fraction(v) for v in params.as_tuple())
    c = params.c_n_exact
    e1 = _expansion_exact(params, 1)
    e2 = _expansion_exact(params, 2)
    value = p * q / 4 - c * (e1 - q) + c * c / n * (e2 - e1)
    return float(value)
