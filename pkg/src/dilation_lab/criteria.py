"""Vanishing criteria built on coprime-pair residuals.

For coefficient sequences ``b``, ``c`` and a coprime pair ``(i, j)`` the
residual is

    R(i, j) = sum_n conj(b_{n i}) * c_{n j} * w(n, i, j)

Orthogonality of a dilation system, constant modulus of a Bohr series,
constancy of a product ``F * conj(G)`` and the limits used to force
monomials all reduce to families of these residuals vanishing.

Verdicts are three-valued.  A residual whose size exceeds its truncation and
rounding bound is a *violation*.  One that stays inside a bound no larger
than ``resolution`` is *zero*.  Anything else is *inconclusive*: the
truncation could hide a nonzero value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from . import scalars as sc
from .bohr import BohrSeries, Tau, apply_tau, factorize, h2_inner
from .scalars import EXACT, FLOAT, ExactnessError, ModeError
from .series import TruncatedSeries, rounding_bound

DEFAULT_RESOLUTION = 1e-6

ALL_ZERO = "all_zero"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class WeightLaw:
    """A residual weight ``w(n) = (scale * n + shift) ** exponent``.

    ``scale`` and ``shift`` may depend on the pair; see the constructors.
    """

    name: str
    fn: Callable[[int, int, int, str], object] = field(compare=False)
    exponent: object = 0

    def __call__(self, n: int, i: int, j: int, mode: str):
        return self.fn(n, i, j, mode)


def _one(n, i, j, mode):
    return Fraction(1) if mode == EXACT else 1.0


UNWEIGHTED = WeightLaw("unweighted", _one, 0)


def nij_power(t) -> WeightLaw:
    """``(n i j)**t``, the limit weight reached as the dilation level grows."""
    return WeightLaw(f"(nij)^{t}", lambda n, i, j, mode: sc.int_power(n * i * j, t, mode), t)


def nij_power_minus_one(t) -> WeightLaw:
    """``(n i j)**(t - 1)``, the weight of the first-order correction."""
    s = t - 1
    return WeightLaw(f"(nij)^({t}-1)", lambda n, i, j, mode: sc.int_power(n * i * j, s, mode), s)


def gram_level(t, k: int) -> WeightLaw:
    """``(n k i j + 1)**t``: the Gram entry ``<f(z^{ki}), f(z^{kj})>_t``."""
    return WeightLaw(f"(nkij+1)^{t} with k={k}",
                     lambda n, i, j, mode: sc.int_power(n * k * i * j + 1, t, mode), t)


def shifted_level(t, k: int) -> WeightLaw:
    """``(n i j + 1/k)**t``; equals ``k**(-t)`` times :func:`gram_level`."""
    return WeightLaw(f"(nij+1/k)^{t} with k={k}",
                     lambda n, i, j, mode: sc.rational_power(Fraction(n * i * j * k + 1, k), t, mode), t)


@dataclass
class PairResidual:
    i: int
    j: int
    residual: object
    tail_bound: float
    status: str
    k: int = 1
    term_count: int = 0

    @property
    def position(self) -> tuple[int, int]:
        """Gram position ``(k i, k j)`` of the pair."""
        return (self.k * self.i, self.k * self.j)

    def to_json(self, mode: str) -> dict:
        out = {"i": self.i, "j": self.j, "k": self.k,
               "residual": sc.scalar_to_json(self.residual, mode),
               "abs": abs(self.residual), "tail_bound": self.tail_bound, "status": self.status}
        return out


@dataclass
class ResidualReport:
    pairs: list
    weight_law: str
    verdict: str
    mode: str
    resolution: float = DEFAULT_RESOLUTION
    first_violation: tuple | None = None
    extra: dict = field(default_factory=dict)

    @property
    def all_zero(self) -> bool:
        return self.verdict == ALL_ZERO

    @property
    def violated(self) -> bool:
        return self.first_violation is not None

    def residual_at(self, i: int, j: int, k: int = 1):
        for p in self.pairs:
            if (p.i, p.j, p.k) == (i, j, k):
                return p.residual
        raise KeyError((i, j, k))

    def to_json(self) -> dict:
        extra = {}
        for key, v in self.extra.items():
            if isinstance(v, (sc.GaussianRational, complex)):
                extra[key] = sc.scalar_to_json(v, self.mode)
            elif isinstance(v, Fraction):
                extra[key] = str(v)
            else:
                extra[key] = v
        return {
            "weight_law": self.weight_law,
            "verdict": self.verdict,
            "first_violation": list(self.first_violation) if self.first_violation else None,
            "resolution": self.resolution,
            "mode": self.mode,
            "pairs": [p.to_json(self.mode) for p in self.pairs],
            "extra": extra,
        }


def coprime_pairs(cap: int, ordered: bool = False) -> Iterator[tuple[int, int]]:
    """Coprime ``(i, j)`` with ``i, j <= cap`` and ``i*j > 1``.

    Sorted by ``i*j`` then ``i``.  Unordered pairs have ``i < j``.
    """
    pairs = [(i, j) for i in range(1, cap + 1) for j in range(1, cap + 1)
             if i != j and math.gcd(i, j) == 1 and (ordered or i < j)]
    pairs.sort(key=lambda p: (p[0] * p[1], p[0]))
    return iter(pairs)


def _residual_terms(b: TruncatedSeries, c: TruncatedSeries, i: int, j: int, weight: WeightLaw):
    mode = b.mode
    total = sc.zero(mode)
    count = 0
    abs_sum = 0.0
    cterms = c._terms
    for m, bm in b.items():
        if m % i:
            continue
        n = m // i
        cn = cterms.get(n * j)
        if cn is None:
            continue
        term = bm.conjugate() * cn * weight(n, i, j, mode)
        total = total + term
        count += 1
        if mode == FLOAT:
            abs_sum += abs(term)
    return total, count, abs_sum


def coprime_residual(b: TruncatedSeries, c: TruncatedSeries, i: int, j: int, weight: WeightLaw = UNWEIGHTED):
    """``sum_n conj(b_{n i}) c_{n j} w(n, i, j)`` over the stored range."""
    if i < 1 or j < 1 or math.gcd(i, j) != 1:
        raise ValueError(f"({i}, {j}) is not a coprime pair of positive integers")
    if b.mode != c.mode:
        raise ModeError("mixed modes")
    return _residual_terms(b, c, i, j, weight)[0]


def _head_l2(s: TruncatedSeries, step: int, above: Fraction) -> float:
    """sqrt of sum |s_m|^2 over stored m divisible by step with m/step > above."""
    tot = 0.0
    for m, a in s.items():
        if m % step == 0 and m // step > above:
            tot += float(sc.abs2(a))
    return math.sqrt(tot)


def residual_tail_bound(b: TruncatedSeries, c: TruncatedSeries, i: int, j: int, weight: WeightLaw) -> float:
    """Cauchy-Schwarz bound on the residual terms lost to truncation.

    The lost ``n`` are those with ``n i > N_b`` or ``n j > N_c``.  Splitting
    on which factor is in a tail gives
    ``W * (T_b * (H_c + T_c) + T_c * H_b)`` with ``T`` the tail l2 norms and
    ``H`` the l2 norm of stored coefficients that pair with a tail entry.
    """
    tb = math.sqrt(float(b.tail_l2_sq))
    tc = math.sqrt(float(c.tail_l2_sq))
    if tb == 0 and tc == 0:
        return 0.0
    nb = Fraction(b.degree_cap, i)
    nc = Fraction(c.degree_cap, j)
    n0 = math.floor(min(nb, nc)) + 1
    if float(weight.exponent) > 0:
        return math.inf
    # (a n + d)^s with s <= 0 is non-increasing in n
    wmax = abs(float(weight(n0, i, j, FLOAT)))
    hc = _head_l2(c, j, nb) if tb else 0.0
    hb = _head_l2(b, i, nc) if tc else 0.0
    return wmax * (tb * (hc + tc) + tc * hb)


def classify(value, tail: float, mode: str, count: int, abs_sum: float, resolution: float) -> str:
    """``zero`` / ``violated`` / ``inconclusive`` for one residual."""
    if mode == EXACT and tail == 0:
        return "zero" if value == 0 else "violated"
    err = tail + (rounding_bound(count, abs_sum) if mode == FLOAT else 0.0)
    if abs(value) > err:
        return "violated"
    if err <= resolution:
        return "zero"
    return INCONCLUSIVE


def _verdict(pairs: list, label=lambda p: (p.i, p.j)) -> tuple[str, tuple | None]:
    for p in pairs:
        if p.status == "violated":
            pos = label(p)
            return f"violated_at({pos[0]},{pos[1]})", pos
    if any(p.status == INCONCLUSIVE for p in pairs):
        return INCONCLUSIVE, None
    return ALL_ZERO, None


def residual_family(b: TruncatedSeries, c: TruncatedSeries, pairs, weight: WeightLaw,
                    resolution: float = DEFAULT_RESOLUTION, k: int = 1) -> list[PairResidual]:
    out = []
    for i, j in pairs:
        val, count, abs_sum = _residual_terms(b, c, i, j, weight)
        tail = residual_tail_bound(b, c, i, j, weight)
        status = classify(val, tail, b.mode, count, abs_sum, resolution)
        out.append(PairResidual(i, j, val, tail, status, k=k, term_count=count))
    return out


def _check_t(f: TruncatedSeries, t):
    if f.mode == EXACT and not sc.is_integer(t):
        raise ExactnessError(f"exact residuals need integer t, got {t!r}; convert with to_float()")


def orthogonality_test(f: TruncatedSeries, t=0, k_cap: int = 2,
                       resolution: float = DEFAULT_RESOLUTION) -> ResidualReport:
    """Is ``{f(z^k)}_{k <= K}`` orthogonal in D_t?

    For ``t = 0`` the unweighted coprime residuals over ``i < j <= K`` decide
    it.  Otherwise every off-diagonal Gram entry ``<f(z^k), f(z^l)>_t`` with
    ``k < l <= K`` is checked; entry ``(g i, g j)`` is the coprime residual
    ``(i, j)`` under the weight ``(n g i j + 1)**t``.  Pairs in the report
    carry the dilation level ``g`` as ``k`` and the verdict names the Gram
    position.
    """
    if k_cap < 2:
        raise ValueError("k_cap must be >= 2")
    _check_t(f, t)
    if float(t) == 0:
        pairs = residual_family(f, f, coprime_pairs(k_cap), UNWEIGHTED, resolution)
        verdict, first = _verdict(pairs)
        return ResidualReport(pairs, UNWEIGHTED.name, verdict, f.mode, resolution, first,
                              {"t": t, "k_cap": k_cap})
    positions = [(k, l) for k in range(1, k_cap + 1) for l in range(k + 1, k_cap + 1)]
    positions.sort(key=lambda p: (p[0] * p[1], p[0]))
    pairs = []
    for k, l in positions:
        g = math.gcd(k, l)
        pairs.extend(residual_family(f, f, [(k // g, l // g)], gram_level(t, g), resolution, k=g))
    verdict, first = _verdict(pairs, label=lambda p: p.position)
    return ResidualReport(pairs, f"(nkij+1)^{t}", verdict, f.mode, resolution, first,
                          {"t": t, "k_cap": k_cap})


def inner_test(F: BohrSeries, i_cap: int, resolution: float = DEFAULT_RESOLUTION) -> ResidualReport:
    """Constant-modulus test for a holomorphic Bohr series.

    ``|F|`` is constant iff every unweighted coprime residual of its pulled
    back coefficients vanishes; the constant is then ``sum |a_n|^2``.  The
    report's ``extra`` holds ``c2`` (stored coefficients) and ``c2_tail``
    (the amount the discarded coefficients may add).
    """
    f = F.pullback()
    pairs = residual_family(f, f, coprime_pairs(i_cap), UNWEIGHTED, resolution)
    verdict, first = _verdict(pairs)
    return ResidualReport(pairs, UNWEIGHTED.name, verdict, F.mode, resolution, first,
                          {"c2": F.l2_sq(), "c2_tail": F.tail_l2_sq if F.mode == EXACT else float(F.tail_l2_sq),
                           "i_cap": i_cap})


def product_constant_test(F: BohrSeries, G: BohrSeries, i_cap: int,
                          resolution: float = DEFAULT_RESOLUTION) -> ResidualReport:
    """Is ``F * conj(G)`` constant on the torus?

    The residual at an ordered coprime pair is
    ``<zeta^alpha(i) F, zeta^alpha(j) G> = sum_r conj(g_{i r}) f_{j r}``;
    the constant, when the residuals vanish, is ``<F, G>``.
    """
    if F.mode != G.mode:
        raise ModeError("mixed modes")
    fs, gs = F.pullback(), G.pullback()
    pairs = residual_family(gs, fs, coprime_pairs(i_cap, ordered=True), UNWEIGHTED, resolution)
    verdict, first = _verdict(pairs)
    return ResidualReport(pairs, UNWEIGHTED.name, verdict, F.mode, resolution, first,
                          {"constant": h2_inner(F, G), "i_cap": i_cap})


@dataclass
class TauSymmetryReport:
    rows: list
    identity_holds: bool
    modulus_verdict: str
    product_verdict: str
    equivalent: bool
    mode: str

    def to_json(self) -> dict:
        return {
            "identity_holds": self.identity_holds,
            "modulus_verdict": self.modulus_verdict,
            "product_verdict": self.product_verdict,
            "equivalent": self.equivalent,
            "mode": self.mode,
            "rows": [{"i": r["i"], "j": r["j"], "lhs": sc.scalar_to_json(r["lhs"], self.mode),
                      "rhs": sc.scalar_to_json(r["rhs"], self.mode), "defect": r["defect"]}
                     for r in self.rows],
        }


def tau_symmetry_test(F: BohrSeries, tau: Tau, i_cap: int, rel_tol: float = 1e-12,
                      resolution: float = DEFAULT_RESOLUTION) -> TauSymmetryReport:
    """Check the pairing identity linking ``|F_tau|`` and ``F_{tau^2} conj(F)``.

    For each ordered coprime pair both sides

        tau^alpha(ij)  * <zeta^alpha(i) F_tau,    zeta^alpha(j) F_tau>
        tau^alpha(i^2) * <zeta^alpha(i) F_tau^2,  zeta^alpha(j) F>

    are computed directly on the Bohr series.  The report also runs the
    constant-modulus test on ``F_tau`` and the product test on
    ``(F_{tau^2}, F)`` and records whether the two verdicts agree.
    """
    mode = F.mode
    if mode == EXACT and not tau.is_exact():
        F = F.to_float()
        mode = FLOAT
    tau2 = tau.squared()
    f_tau = apply_tau(F, tau)
    f_tau2 = apply_tau(F, tau2)
    rows = []
    ok = True
    for i, j in coprime_pairs(i_cap, ordered=True):
        ai, aj = factorize(i), factorize(j)
        lhs = h2_inner(f_tau.shift(ai), f_tau.shift(aj)) * tau.weight(ai + aj, mode)
        rhs = h2_inner(f_tau2.shift(ai), F.shift(aj)) * tau.weight(ai + ai, mode)
        defect = abs(lhs - rhs)
        if mode == EXACT:
            good = lhs == rhs
        else:
            good = defect <= rel_tol * max(1.0, abs(lhs), abs(rhs))
        ok = ok and good
        rows.append({"i": i, "j": j, "lhs": lhs, "rhs": rhs, "defect": float(defect)})
    modulus = inner_test(f_tau, i_cap, resolution).verdict
    product = product_constant_test(f_tau2, F, i_cap, resolution).verdict
    same = (modulus == ALL_ZERO) == (product == ALL_ZERO)
    return TauSymmetryReport(rows, ok, modulus, product, same, mode)


@dataclass
class MonomialDiagnostic:
    ratio_spread: object
    limit_residuals: ResidualReport
    correction_residuals: ResidualReport
    verdict: str
    eigen_ratios: list

    def to_json(self) -> dict:
        return {
            "ratio_spread": sc.fmt_real(self.ratio_spread) if isinstance(self.ratio_spread, Fraction)
            else self.ratio_spread,
            "verdict": self.verdict,
            "eigen_ratios": [sc.fmt_real(r) if isinstance(r, Fraction) else r for r in self.eigen_ratios],
            "limit_residuals": self.limit_residuals.to_json(),
            "correction_residuals": self.correction_residuals.to_json(),
        }


def monomial_diagnostic(f: TruncatedSeries, t, pair_cap: int | None = None,
                        resolution: float = DEFAULT_RESOLUTION) -> MonomialDiagnostic:
    """Residuals of the ``(nij)^t`` and ``(nij)^(t-1)`` laws and the eigen test.

    Under ``T_{tau^2}`` with radii ``1/p_m`` the lifted coefficient
    ``a_n n^(t/2)`` becomes ``a_n n^(t/2 - 1)``; the vector is an
    eigenvector exactly when the ratios ``1/n`` over the support coincide.
    ``ratio_spread = max/min - 1`` of those ratios is zero iff f is a
    monomial.
    """
    if float(t) == 0:
        raise ValueError("monomial_diagnostic needs t != 0")
    _check_t(f, t)
    support = f.support
    cap = pair_cap if pair_cap is not None else max(2, max(support, default=1))
    pairs = list(coprime_pairs(cap))
    lim = residual_family(f, f, pairs, nij_power(t), resolution)
    cor = residual_family(f, f, pairs, nij_power_minus_one(t), resolution)
    v1, first1 = _verdict(lim)
    v2, first2 = _verdict(cor)
    lim_report = ResidualReport(lim, nij_power(t).name, v1, f.mode, resolution, first1)
    cor_report = ResidualReport(cor, nij_power_minus_one(t).name, v2, f.mode, resolution, first2)
    if not support:
        return MonomialDiagnostic(0, lim_report, cor_report, "zero", [])
    ratios = [Fraction(1, n) if f.mode == EXACT else 1.0 / n for n in support]
    spread = max(ratios) / min(ratios) - 1
    verdict = "monomial" if len(support) == 1 else "non-monomial"
    return MonomialDiagnostic(spread, lim_report, cor_report, verdict, ratios)


def proof_chain(f: TruncatedSeries, i: int, j: int, t, ks) -> list[dict]:
    """Track the residual ``(n i j + 1/k)^t`` toward its limits as k grows.

    Each row holds ``shifted`` (the k-dependent residual), ``limit`` (the
    ``(nij)^t`` residual), ``gap = shifted - limit``, ``scaled_gap = k*gap``
    and ``derivative = t * sum conj(a_{ni}) a_{nj} (nij)^(t-1)``, the value
    ``scaled_gap`` approaches.
    """
    _check_t(f, t)
    limit = coprime_residual(f, f, i, j, nij_power(t))
    corr = coprime_residual(f, f, i, j, nij_power_minus_one(t))
    derivative = corr * (Fraction(t) if f.mode == EXACT else float(t))
    rows = []
    for k in ks:
        shifted = coprime_residual(f, f, i, j, shifted_level(t, k))
        gap = shifted - limit
        rows.append({"k": k, "shifted": shifted, "limit": limit, "gap": gap,
                     "scaled_gap": gap * k, "derivative": derivative})
    return rows


def loglog_slope(ks, values) -> float:
    """Least-squares slope of ``log|value|`` against ``log k``."""
    x = np.log(np.asarray(ks, dtype=float))
    y = np.log(np.abs(np.asarray([complex(v) for v in values])))
    return float(np.polyfit(x, y, 1)[0])
