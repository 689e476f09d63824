"""Standard test functions: monomials, the Blaschke-derived series, random sparse series."""

from __future__ import annotations

import random
from fractions import Fraction

from . import scalars as sc
from .scalars import EXACT, FLOAT
from .series import TruncatedSeries


def blaschke(a=Fraction(1, 2), M: int = 12, mode: str = EXACT) -> TruncatedSeries:
    """Pull-back of the one-variable Blaschke factor ``(a - w)/(1 - conj(a) w)``.

    ``a_1 = a`` and ``a_{2^m} = -(1 - |a|^2) conj(a)^(m-1)`` for ``m = 1..M``,
    truncated at degree ``2^M``.  The discarded coefficients contribute
    ``(1 - |a|^2) |a|^(2M)`` to the squared l2 norm, which is recorded as the
    series tail.
    """
    a = sc.to_scalar(a, mode)
    r2 = sc.abs2(a)
    if r2 >= 1:
        raise ValueError(f"|a| must be < 1, got |a|^2 = {r2}")
    if M < 1:
        raise ValueError("M must be >= 1")
    one_minus = 1 - r2
    ac = a.conjugate()
    terms = {1: a}
    power = sc.one(mode)
    for m in range(1, M + 1):
        idx = 2**m
        terms[idx] = terms.get(idx, sc.zero(mode)) - one_minus * power
        power = power * ac
    tail_sq = one_minus * r2**M
    absa = float(r2) ** 0.5
    tail_l1 = float(one_minus) * absa**M / (1 - absa)
    return TruncatedSeries(terms, mode, degree_cap=2**M, tail_l2_sq=tail_sq if mode == EXACT else float(tail_sq),
                           tail_l1=tail_l1)


def monomial(N: int, c=1, mode: str = EXACT) -> TruncatedSeries:
    return TruncatedSeries.monomial(N, c, mode)


COEFF_SETS = {
    "units": [(1, 0), (-1, 0), (1, 1), (-1, 1), (1, -1), (-1, -1)],
    "small": [(Fraction(p, q), 0) for p in range(-3, 4) if p for q in (1, 2, 3)],
}


def random_series(seed: int, support_size: int, max_index: int, coeff_set: str = "units",
                  mode: str = EXACT, require_a1: bool = False) -> TruncatedSeries:
    """Random sparse series with coefficients drawn from a named finite set."""
    if support_size < 1 or support_size > max_index:
        raise ValueError("need 1 <= support_size <= max_index")
    rng = random.Random(seed)
    values = COEFF_SETS[coeff_set]
    if require_a1:
        rest = rng.sample(range(2, max_index + 1), min(support_size - 1, max_index - 1))
        idx = [1] + rest
    else:
        idx = rng.sample(range(1, max_index + 1), support_size)
    terms = {n: rng.choice(values) for n in sorted(idx)}
    return TruncatedSeries(terms, mode, degree_cap=max_index)
