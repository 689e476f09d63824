"""Basis and frame diagnostics for dilation systems.

Everything here works on a finite section of the system and a finite probe
family.  A failed bound at some probe is a definite certificate; passing
all probes is only evidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import scalars as sc
from .bohr import bohr_lift_t, sample_modulus
from .criteria import orthogonality_test
from .primes import PRIMES, next_prime_above
from .scalars import EXACT, FLOAT
from .series import (TruncatedSeries, combine, dilate, inner_product, norm_sq)

# sampled minimum modulus must exceed this (after subtracting the tail) to count as bounded below
DEFAULT_FLOOR = 1e-2


@dataclass
class BasisVerdict:
    kind: str
    evidence: dict
    t: object
    note: str = ""

    def to_json(self) -> dict:
        return {"kind": self.kind, "t": self.t, "evidence": self.evidence, "note": self.note}


def riesz_probe(f: TruncatedSeries, t=0, n_samples: int = 10_000, seed: int = 0,
                floor: float = DEFAULT_FLOOR) -> BasisVerdict:
    """Sample ``|B_t f|`` on the torus and read off a basis verdict.

    ``lower = min - tail`` and ``upper = max + tail`` where ``tail`` bounds
    the l1 mass of discarded coefficients.  ``lower > floor`` gives
    ``riesz`` at ``t = 0`` and ``unconditional`` otherwise (a dilation system
    is never norm-bounded below and above when ``t != 0``).  When the sampled
    minimum clears the floor but the tail does not, the verdict is
    ``inconclusive``.
    """
    g = f if f.mode == FLOAT or sc.is_even_integer(t) else f.to_float()
    F = bohr_lift_t(g, t).to_float()
    s = sample_modulus(F, n_samples, seed)
    lower = s.min - s.tail_l1
    upper = s.max + s.tail_l1
    evidence = {"min": s.min, "max": s.max, "tail": s.tail_l1, "lower": lower, "upper": upper,
                "mean": s.mean, "variance": s.variance, "n_samples": n_samples, "seed": seed,
                "floor": floor}
    good = "riesz" if float(t) == 0 else "unconditional"
    if lower > floor and math.isfinite(upper):
        kind = good
    elif s.min > floor:
        kind = "inconclusive"
    else:
        kind = "none"
    note = "evidence concerns the truncated symbol"
    if f.has_tail:
        note += "; the untruncated symbol is covered only through the l1 tail bound"
    return BasisVerdict(kind, evidence, t, note)


@dataclass
class NormProfile:
    norms_sq: list
    norms: list
    trend: str
    t: object

    def to_json(self) -> dict:
        return {"t": self.t, "trend": self.trend, "norms": self.norms,
                "norms_sq": [sc.fmt_real(v) for v in self.norms_sq]}


def _trend(values) -> str:
    if len(values) < 2:
        return "constant"
    diffs = [b - a for a, b in zip(values, values[1:])]
    if all(d == 0 for d in diffs):
        return "constant"
    if all(d > 0 for d in diffs):
        return "increasing"
    if all(d < 0 for d in diffs):
        return "decreasing"
    return "mixed"


def norm_profile(f: TruncatedSeries, t=0, k_cap: int = 8) -> NormProfile:
    """``||f(z^k)||_t`` for ``k = 1..K``; ``||f(z^k)||_t^2 = sum |a_n|^2 (nk+1)^t``."""
    if k_cap < 1:
        raise ValueError("k_cap must be >= 1")
    sq = [norm_sq(dilate(f, k), t) for k in range(1, k_cap + 1)]
    return NormProfile(sq, [math.sqrt(v) for v in sq], _trend(sq), t)


@dataclass
class FrameReport:
    lower_estimate: object
    upper_estimate: object
    lower_probe: int
    upper_probe: int
    probe_family: str
    k_cap: int
    degree_cap: int
    ratios: list
    trend: list
    trend_direction: str
    t: object
    mode: str

    def to_json(self) -> dict:
        f = sc.fmt_real
        return {
            "A_est": f(self.lower_estimate), "B_est": f(self.upper_estimate),
            "A_probe": self.lower_probe, "B_probe": self.upper_probe,
            "probe_family": self.probe_family, "k_cap": self.k_cap, "degree_cap": self.degree_cap,
            "trend_direction": self.trend_direction, "t": self.t, "mode": self.mode,
            "ratios": [[n, f(r)] for n, r in self.ratios],
            "trend": [[n, f(r)] for n, r in self.trend],
        }


def prime_power_ladder(p: int, probe_cap: int) -> list[int]:
    out, q = [], p
    while q <= probe_cap:
        out.append(q)
        q *= p
    return out


def proof_prime(A: float, B: float, t: float) -> int:
    """Smallest prime ``p > (A / (2B))**(1/t)``, the ladder base for ``t < 0``."""
    if A <= 0 or B <= 0 or t == 0:
        raise ValueError("need A, B > 0 and t != 0")
    return next_prime_above((A / (2 * B)) ** (1.0 / t))


def bessel_ratio(h: TruncatedSeries, dilations: Sequence[TruncatedSeries], t):
    """``sum_k |<h, f(z^k)>_t|^2 / ||h||_t^2``."""
    num = sum((sc.abs2(inner_product(h, d, t)) for d in dilations),
              Fraction(0) if h.mode == EXACT else 0.0)
    return num / norm_sq(h, t)


def frame_bounds(f: TruncatedSeries, t=0, k_cap: int = 8, probe_cap: int = 8,
                 ladder_prime: int = 2) -> FrameReport:
    """Estimate frame bounds of ``{f(z^k)}_{k <= K}`` over monomial probes.

    Probes are ``z^n`` for ``n <= P``; the prime-power ladder
    ``z^{p^m} (p^m <= P)`` is recorded separately as ``trend``.  A_est and
    B_est are the smallest and largest ratios seen and name their probe.
    """
    if k_cap < 1 or probe_cap < 1:
        raise ValueError("k_cap and probe_cap must be >= 1")
    if f.mode == EXACT and not sc.is_integer(t):
        raise sc.ExactnessError("exact frame bounds need integer t")
    if not PRIMES.is_prime(ladder_prime):
        raise ValueError(f"ladder_prime {ladder_prime} is not prime")
    dil = [dilate(f, k) for k in range(1, k_cap + 1)]
    ratios = []
    for n in range(1, probe_cap + 1):
        h = TruncatedSeries.monomial(n, 1, f.mode)
        ratios.append((n, bessel_ratio(h, dil, t)))
    by_n = dict(ratios)
    trend = [(q, by_n[q]) for q in prime_power_ladder(ladder_prime, probe_cap)]
    lo = min(ratios, key=lambda x: (x[1], x[0]))
    hi = max(ratios, key=lambda x: (x[1], -x[0]))
    family = f"z^n for n<={probe_cap}; ladder z^({ladder_prime}^m)"
    return FrameReport(lo[1], hi[1], lo[0], hi[0], family, k_cap, f.degree_cap, ratios, trend,
                       _trend([r for _, r in trend]), t, f.mode)


class OmegaSolveError(ValueError):
    """The divisor-sum system could not be solved."""


class LeadingCoefficientZero(OmegaSolveError):
    """``a_1 = 0``: forward substitution is unavailable."""


class InconsistentSystem(OmegaSolveError):
    """``g`` is not in the span of ``f(z^k), k <= K`` on its stored range."""

    def __init__(self, n: int, residual):
        super().__init__(f"residual {residual} at degree {n} beyond the solved range")
        self.n = n
        self.residual = residual


def synthesize(f: TruncatedSeries, c: Sequence) -> TruncatedSeries:
    """``sum_k c_k f(z^k)`` for ``k = 1..len(c)``."""
    return combine([dilate(f, k) for k in range(1, len(c) + 1)], c)


def omega_solve(f: TruncatedSeries, g: TruncatedSeries, k_cap: int, tol: float = 1e-12) -> list:
    """Solve ``sum_{k | n} c_k a_{n/k} = g_n`` for ``c_1..c_K``.

    The system is lower triangular with diagonal ``a_1``, so it is solved by
    forward substitution.  Degrees in ``(K, deg g]`` are then checked for
    consistency.
    """
    if f.mode != g.mode:
        raise sc.ModeError("mixed modes")
    a1 = f.coeff(1)
    if a1 == 0:
        raise LeadingCoefficientZero("a_1 = 0; the divisor-sum system is not triangular")
    c = [None] * (k_cap + 1)
    for n in range(1, k_cap + 1):
        acc = g.coeff(n)
        for k in _proper_divisors(n):
            acc = acc - c[k] * f.coeff(n // k)
        c[n] = acc / a1
    for n in range(k_cap + 1, g.degree_cap + 1):
        acc = g.coeff(n)
        for k in _divisors_upto(n, k_cap):
            a = f._terms.get(n // k)
            if a is not None:
                acc = acc - c[k] * a
        bad = acc != 0 if f.mode == EXACT else abs(acc) > tol
        if bad:
            raise InconsistentSystem(n, acc)
    return c[1:]


def _proper_divisors(n: int) -> list[int]:
    return [d for d in range(1, n) if n % d == 0]


def _divisors_upto(n: int, cap: int) -> list[int]:
    return [d for d in range(1, min(n, cap) + 1) if n % d == 0]


@dataclass
class BiorthogonalReport:
    values: list
    ok: list
    residuals: list
    holds: bool

    def to_json(self, mode: str) -> dict:
        return {"holds": self.holds, "ok": self.ok, "residuals": self.residuals,
                "values": [[sc.scalar_to_json(v, mode) for v in row] for row in self.values]}


def biorthogonal_check(f: TruncatedSeries, duals: Sequence[TruncatedSeries], t=0, k_cap: int | None = None,
                       tol: float = 1e-12) -> BiorthogonalReport:
    """Compare ``<f(z^k), y_l>_t`` with the Kronecker delta."""
    if not duals:
        return BiorthogonalReport([], [], [], True)
    K = k_cap if k_cap is not None else len(duals)
    values, ok, res = [], [], []
    for k in range(1, K + 1):
        fk = dilate(f, k)
        vrow, orow, rrow = [], [], []
        for l, y in enumerate(duals, start=1):
            v = inner_product(fk, y, t)
            d = v - (1 if k == l else 0)
            vrow.append(v)
            rrow.append(abs(d))
            orow.append(d == 0 if f.mode == EXACT else abs(d) <= tol)
        values.append(vrow)
        ok.append(orow)
        res.append(rrow)
    return BiorthogonalReport(values, ok, res, all(all(r) for r in ok))


@dataclass
class ParsevalReport:
    parseval: bool
    bessel_equal: bool
    orthonormal: bool
    failures: list = field(default_factory=list)
    orthogonality_verdict: str = ""
    norm_sq: object = None
    probe_cap: int = 0
    note: str = "completeness is not certified"

    def to_json(self) -> dict:
        return {"parseval": self.parseval, "bessel_equal": self.bessel_equal,
                "orthonormal": self.orthonormal, "orthogonality_verdict": self.orthogonality_verdict,
                "norm_sq": sc.fmt_real(self.norm_sq), "probe_cap": self.probe_cap,
                "failures": [[n, sc.fmt_real(r)] for n, r in self.failures], "note": self.note}


def parseval_check(f: TruncatedSeries, k_cap: int, probe_cap: int, tol: float = 1e-12) -> ParsevalReport:
    """Test ``sum_k |<h, f(z^k)>|^2 = ||h||^2`` on probes ``z^n`` in H_0^2.

    Probes are limited to ``n <= min(P, K)`` so every divisor of the probe
    degree is inside the section.  Orthogonality of the section and
    ``||f|| = 1`` are checked alongside; an orthonormal section whose
    Bessel sums fall short shows an orthonormal but incomplete system.
    """
    P = min(probe_cap, k_cap)
    dil = [dilate(f, k) for k in range(1, k_cap + 1)]
    failures = []
    for n in range(1, P + 1):
        h = TruncatedSeries.monomial(n, 1, f.mode)
        r = bessel_ratio(h, dil, 0)
        good = r == 1 if f.mode == EXACT else abs(r - 1) <= tol
        if not good:
            failures.append((n, r))
    ortho = orthogonality_test(f, 0, max(k_cap, 2))
    nsq = norm_sq(f, 0)
    unit = nsq == 1 if f.mode == EXACT and not f.has_tail else abs(float(nsq) - 1) <= tol + float(f.tail_l2_sq)
    orthonormal = ortho.all_zero and unit
    bessel = not failures
    return ParsevalReport(bessel and orthonormal, bessel, orthonormal, failures, ortho.verdict, nsq, P)
