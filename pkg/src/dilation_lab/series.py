"""Truncated analytic functions on the disk and their D_t geometry.

A :class:`TruncatedSeries` holds the coefficients ``a_1 .. a_N`` of
``f(z) = sum a_n z^n``.  There is no constant term: index 0 does not exist.
The D_t inner product is

    <f, g>_t = sum_{n >= 1} f_n * conj(g_n) * (n + 1)**t

(linear in the first slot).  A series may carry bounds on the part that was
cut off (``tail_l2_sq`` bounds ``sum_{n > N} |a_n|^2`` and ``tail_l1``
bounds ``sum_{n > N} |a_n|``).  Those feed the truncation error bounds in
:class:`GramReport`; a series without a tail is treated as exactly known.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import scalars as sc
from .scalars import EXACT, FLOAT, ExactnessError, ModeError

MAX_DEGREE = 2**62
UNIT_ROUNDOFF = 2.0**-53


class TruncatedSeries:
    """Finitely supported coefficient sequence of a function in D_t.

    Storage is sparse; ``coeff(n)`` returns zero for indices without a
    stored term.  Instances are immutable.
    """

    __slots__ = ("_terms", "degree_cap", "mode", "tail_l2_sq", "tail_l1")

    def __init__(self, terms: Mapping[int, object], mode: str = EXACT, degree_cap: int | None = None,
                 tail_l2_sq=0, tail_l1=0.0):
        sc.check_mode(mode)
        clean = {}
        for n, a in terms.items():
            n = int(n)
            if n < 1:
                raise IndexError(f"coefficient index must be >= 1 (no constant term), got {n}")
            a = sc.to_scalar(a, mode) if not _is_mode_scalar(a, mode) else a
            if a != 0:
                clean[n] = a
        top = max(clean, default=0)
        if degree_cap is None:
            degree_cap = max(top, 1)
        if degree_cap < top:
            raise ValueError(f"degree_cap {degree_cap} is below the highest stored index {top}")
        if degree_cap > MAX_DEGREE:
            raise OverflowError(f"degree cap {degree_cap} exceeds {MAX_DEGREE}")
        if tail_l2_sq < 0 or tail_l1 < 0:
            raise ValueError("tail bounds must be non-negative")
        if mode == EXACT and not isinstance(tail_l2_sq, (int, Fraction)):
            raise ModeError("exact series need an exact tail_l2_sq")
        object.__setattr__(self, "_terms", dict(sorted(clean.items())))
        object.__setattr__(self, "degree_cap", int(degree_cap))
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "tail_l2_sq", Fraction(tail_l2_sq) if mode == EXACT else float(tail_l2_sq))
        object.__setattr__(self, "tail_l1", float(tail_l1))

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedSeries is immutable")

    @classmethod
    def from_coeffs(cls, coeffs: Sequence, mode: str = EXACT, **kw) -> "TruncatedSeries":
        """Build from a dense list ``[a_1, a_2, ..., a_N]``."""
        kw.setdefault("degree_cap", max(len(coeffs), 1))
        return cls({n: a for n, a in enumerate(coeffs, start=1)}, mode, **kw)

    @classmethod
    def monomial(cls, degree: int, c=1, mode: str = EXACT) -> "TruncatedSeries":
        return cls({degree: c}, mode, degree_cap=degree)

    @classmethod
    def zero(cls, mode: str = EXACT, degree_cap: int = 1) -> "TruncatedSeries":
        return cls({}, mode, degree_cap=degree_cap)

    def coeff(self, n: int):
        if n < 1:
            raise IndexError(f"coefficient index must be >= 1, got {n}")
        return self._terms.get(n, sc.zero(self.mode))

    def __getitem__(self, n: int):
        return self.coeff(n)

    def items(self):
        return self._terms.items()

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(self._terms)

    @property
    def has_tail(self) -> bool:
        return self.tail_l2_sq > 0 or self.tail_l1 > 0

    def dense(self) -> list:
        """Coefficients ``a_1 .. a_N`` as a list (zeros filled in)."""
        z = sc.zero(self.mode)
        return [self._terms.get(n, z) for n in range(1, self.degree_cap + 1)]

    def is_zero(self) -> bool:
        return not self._terms

    def to_float(self) -> "TruncatedSeries":
        return TruncatedSeries({n: complex(a) for n, a in self._terms.items()}, FLOAT,
                               degree_cap=self.degree_cap, tail_l2_sq=float(self.tail_l2_sq),
                               tail_l1=self.tail_l1)

    def scaled(self, c) -> "TruncatedSeries":
        c = sc.to_scalar(c, self.mode)
        m2 = sc.abs2(c)
        return TruncatedSeries({n: c * a for n, a in self._terms.items()}, self.mode,
                               degree_cap=self.degree_cap, tail_l2_sq=self.tail_l2_sq * m2,
                               tail_l1=self.tail_l1 * math.sqrt(m2))

    def with_degree_cap(self, degree_cap: int) -> "TruncatedSeries":
        return TruncatedSeries(self._terms, self.mode, degree_cap=degree_cap,
                               tail_l2_sq=self.tail_l2_sq, tail_l1=self.tail_l1)

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        _same_mode(self, other)
        out = dict(self._terms)
        for n, b in other.items():
            out[n] = out[n] + b if n in out else b
        return TruncatedSeries(out, self.mode, degree_cap=max(self.degree_cap, other.degree_cap),
                               tail_l2_sq=_add_tail_sq(self.tail_l2_sq, other.tail_l2_sq),
                               tail_l1=self.tail_l1 + other.tail_l1)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.mode == other.mode and self._terms == other._terms
                and self.degree_cap == other.degree_cap and self.tail_l2_sq == other.tail_l2_sq
                and self.tail_l1 == other.tail_l1)

    __hash__ = None

    def __repr__(self):
        body = " + ".join(f"{a}*z^{n}" for n, a in self._terms.items()) or "0"
        return f"TruncatedSeries({body}; N={self.degree_cap}, mode={self.mode})"


def _is_mode_scalar(a, mode):
    if mode == EXACT:
        return isinstance(a, sc.GaussianRational)
    return isinstance(a, complex)


def _same_mode(*series):
    modes = {s.mode for s in series}
    if len(modes) > 1:
        raise ModeError(f"mixed modes: {sorted(modes)}")
    return modes.pop()


def _add_tail_sq(a, b):
    # ||x + y||^2 <= (||x|| + ||y||)^2, kept exact when one side vanishes
    if not a:
        return b
    if not b:
        return a
    return (math.sqrt(a) + math.sqrt(b)) ** 2


@dataclass(frozen=True)
class DirichletWeight:
    """The two weight laws attached to the parameter ``t``.

    ``norm_weight(n) = (n + 1)**t`` defines the D_t norm and
    ``scale_weight(n) = n**(t/2)`` is the diagonal of S_t.
    """

    t: float | int | Fraction = 0

    def norm_weight(self, n: int, mode: str = FLOAT):
        return sc.int_power(n + 1, self.t, mode)

    def scale_weight(self, n: int, mode: str = FLOAT):
        return sc.half_power(n, self.t, mode)


def _weight(w) -> DirichletWeight:
    return w if isinstance(w, DirichletWeight) else DirichletWeight(w)


def inner_product(f: TruncatedSeries, g: TruncatedSeries, w=0):
    """D_t inner product, linear in ``f`` and conjugate-linear in ``g``."""
    mode = _same_mode(f, g)
    w = _weight(w)
    total = sc.zero(mode)
    small, big = (f, g) if len(f._terms) <= len(g._terms) else (g, f)
    for n in small._terms:
        if n in big._terms:
            total = total + f._terms[n] * g._terms[n].conjugate() * w.norm_weight(n, mode)
    return total


def norm_sq(f: TruncatedSeries, t=0):
    """``||f||_t**2`` as a Fraction (exact) or float."""
    wt = DirichletWeight(t)
    if f.mode == EXACT:
        return sum((a.abs2() * wt.norm_weight(n, EXACT) for n, a in f.items()), Fraction(0))
    return math.fsum(sc.abs2(a) * wt.norm_weight(n, FLOAT) for n, a in f.items())


def norm(f: TruncatedSeries, t=0) -> float:
    return math.sqrt(norm_sq(f, t))


def tail_norm(f: TruncatedSeries, t=0) -> float:
    """Upper bound on the D_t norm of the coefficients beyond ``degree_cap``.

    Only the unweighted tail is recorded, so for ``t > 0`` a nonzero tail
    gives an infinite bound.
    """
    if not f.tail_l2_sq:
        return 0.0
    if float(t) > 0:
        return math.inf
    return math.sqrt(float(f.tail_l2_sq) * float(f.degree_cap + 2) ** float(t))


def dilate(f: TruncatedSeries, k: int) -> TruncatedSeries:
    """``f(z**k)``: coefficient ``a_n`` moves to index ``n*k``."""
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"dilation factor must be a positive integer, got {k!r}")
    if f.degree_cap * k > MAX_DEGREE:
        raise OverflowError(f"dilated degree {f.degree_cap * k} exceeds {MAX_DEGREE}")
    return TruncatedSeries({n * k: a for n, a in f.items()}, f.mode, degree_cap=f.degree_cap * k,
                           tail_l2_sq=f.tail_l2_sq, tail_l1=f.tail_l1)


def scale_st(f: TruncatedSeries, t) -> TruncatedSeries:
    """Apply S_t: ``a_n -> a_n * n**(t/2)``.

    Exact mode requires ``t`` to be an even integer.
    """
    if f.mode == EXACT and not sc.is_even_integer(t):
        raise ExactnessError(f"S_t in exact mode needs an even integer t, got {t!r}")
    out = {n: a * sc.half_power(n, t, f.mode) for n, a in f.items()}
    tail_sq, tail_l1 = f.tail_l2_sq, f.tail_l1
    if f.has_tail:
        if float(t) > 0:
            tail_sq, tail_l1 = math.inf, math.inf
        else:
            # n^(t/2) <= (N+1)^(t/2) on the discarded indices when t <= 0
            tail_sq = tail_sq * sc.int_power(f.degree_cap + 1, t, f.mode)
            tail_l1 = tail_l1 * float(f.degree_cap + 1) ** (float(t) / 2)
    if f.mode == EXACT and tail_sq == math.inf:
        raise ExactnessError("S_t with t > 0 has no finite tail bound for a truncated series")
    return TruncatedSeries(out, f.mode, degree_cap=f.degree_cap, tail_l2_sq=tail_sq, tail_l1=tail_l1)


@dataclass
class GramReport:
    """Hermitian matrix of ``<f(z^k), f(z^l)>_t`` for ``k, l = 1..K``.

    ``entries[k-1][l-1]`` holds the inner product; ``tail_bounds`` holds a
    bound on ``|true value - entry|`` covering both the discarded tail of
    ``f`` and (in float mode) accumulated rounding.
    """

    entries: list
    k_cap: int
    tail_bounds: list
    t: object
    mode: str
    degree_cap: int = 0
    term_counts: list = field(default_factory=list, repr=False)

    def entry(self, k: int, l: int):
        return self.entries[k - 1][l - 1]

    def tail(self, k: int, l: int) -> float:
        return self.tail_bounds[k - 1][l - 1]

    def is_hermitian(self) -> bool:
        K = self.k_cap
        return all(self.entries[a][b] == self.entries[b][a].conjugate() for a in range(K) for b in range(K))

    def max_offdiag_excess(self) -> float:
        """Largest ``|entry| - tail`` over off-diagonal positions."""
        K = self.k_cap
        worst = -math.inf
        for a in range(K):
            for b in range(K):
                if a != b:
                    worst = max(worst, abs(self.entries[a][b]) - self.tail_bounds[a][b])
        return worst

    def as_complex_array(self):
        import numpy as np

        return np.array([[complex(x) for x in row] for row in self.entries], dtype=complex)

    def csv_rows(self):
        """Rows ``(row, col, re, im, tail_bound)`` with 1-based indices."""
        for a in range(self.k_cap):
            for b in range(self.k_cap):
                e = self.entries[a][b]
                if self.mode == EXACT:
                    re, im = str(e.re), str(e.im)
                else:
                    re, im = repr(e.real), repr(e.imag)
                yield (a + 1, b + 1, re, im, repr(float(self.tail_bounds[a][b])))


def gram_entry(f: TruncatedSeries, t, k: int, l: int):
    """One Gram entry via the gcd parametrization.

    With ``g = gcd(k, l)``, ``i = k/g``, ``j = l/g`` the overlapping degrees
    are ``n = g*i*j*r`` and the entry is
    ``sum_r a_{j r} * conj(a_{i r}) * (g*i*j*r + 1)**t``.
    Returns ``(value, term_count, abs_sum)``.
    """
    g = math.gcd(k, l)
    i, j = k // g, l // g
    mode = f.mode
    total = sc.zero(mode)
    count = 0
    abs_sum = 0.0
    terms = f._terms
    step = g * i * j
    for m, a_ir in terms.items():
        if m % i:
            continue
        r = m // i
        a_jr = terms.get(j * r)
        if a_jr is None:
            continue
        term = a_jr * a_ir.conjugate() * sc.int_power(step * r + 1, t, mode)
        total = total + term
        count += 1
        if mode == FLOAT:
            abs_sum += abs(term)
    return total, count, abs_sum


def _head_l2(f: TruncatedSeries, i: int, j: int) -> float:
    """sqrt of sum |a_m|^2 over stored m divisible by i with m*j > N*i."""
    N = f.degree_cap
    s = 0.0
    for m, a in f.items():
        if m % i == 0 and m * j > N * i:
            s += float(sc.abs2(a))
    return math.sqrt(s)


def entry_tail_bound(f: TruncatedSeries, t, k: int, l: int) -> float:
    """Cauchy-Schwarz bound on the part of a Gram entry lost to truncation."""
    if not f.tail_l2_sq:
        return 0.0
    if float(t) > 0:
        return math.inf
    g = math.gcd(k, l)
    i, j = k // g, l // g
    lo, hi = min(i, j), max(i, j)
    tail = math.sqrt(float(f.tail_l2_sq))
    head = _head_l2(f, lo, hi)
    weight = float(f.degree_cap + 2) ** float(t)
    return weight * (head + tail) * tail


def rounding_bound(count: int, abs_sum: float) -> float:
    return 10.0 * UNIT_ROUNDOFF * (count + 1) * abs_sum


def gram(f: TruncatedSeries, t=0, k_cap: int = 1) -> GramReport:
    """Gram matrix of the dilation system ``{f(z^k)}_{k <= K}`` in D_t."""
    if k_cap < 1:
        raise ValueError("k_cap must be >= 1")
    if f.mode == EXACT and not sc.is_integer(t):
        raise ExactnessError(f"exact Gram needs integer t, got {t!r}; convert with to_float()")
    K = k_cap
    entries = [[None] * K for _ in range(K)]
    tails = [[0.0] * K for _ in range(K)]
    counts = [[0] * K for _ in range(K)]
    for k in range(1, K + 1):
        for l in range(k, K + 1):
            val, count, abs_sum = gram_entry(f, t, k, l)
            bound = entry_tail_bound(f, t, k, l)
            if f.mode == FLOAT:
                bound += rounding_bound(count, abs_sum)
                if k == l:
                    val = complex(val.real, 0.0)
            entries[k - 1][l - 1] = val
            entries[l - 1][k - 1] = val.conjugate()
            tails[k - 1][l - 1] = tails[l - 1][k - 1] = bound
            counts[k - 1][l - 1] = counts[l - 1][k - 1] = count
    return GramReport(entries=entries, k_cap=K, tail_bounds=tails, t=t, mode=f.mode,
                      degree_cap=f.degree_cap, term_counts=counts)


def combine(series: Iterable[TruncatedSeries], weights: Iterable) -> TruncatedSeries:
    """Linear combination ``sum c_i * s_i`` of same-mode series."""
    series = list(series)
    weights = list(weights)
    if not series:
        raise ValueError("combine needs at least one series")
    mode = _same_mode(*series)
    out: dict[int, object] = {}
    cap = 1
    for s, c in zip(series, weights):
        c = sc.to_scalar(c, mode)
        cap = max(cap, s.degree_cap)
        if c == 0:
            continue
        for n, a in s.items():
            out[n] = out[n] + c * a if n in out else c * a
    return TruncatedSeries(out, mode, degree_cap=cap)
