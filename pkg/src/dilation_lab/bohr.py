"""Bohr lift of disk series to power series over the infinite torus.

The positive integer ``n = p_1^e_1 * p_2^e_2 * ...`` corresponds to the
multi-index ``alpha(n) = (e_1, e_2, ...)`` and the monomial
``zeta^alpha(n)``.  Lifting ``sum a_n z^n`` gives ``sum a_n zeta^alpha(n)``;
the map is a coefficient-preserving bijection, so all l2 quantities carry
over unchanged.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import scalars as sc
from .primes import PRIMES, nth_prime, prime_index
from .scalars import EXACT, FLOAT, ModeError
from .series import TruncatedSeries, scale_st

DENSE_PREFIX = 64


class MultiIndex:
    """Finitely supported exponent vector over the primes.

    ``exps[m]`` is the exponent of the prime with 0-based index ``m``.  The
    first :data:`DENSE_PREFIX` coordinates are kept in a tuple; higher prime
    indices go into a sorted sparse tail.
    """

    __slots__ = ("_dense", "_sparse")

    def __init__(self, exps: Iterable[int] = (), overflow: Mapping[int, int] | None = None):
        dense = [int(e) for e in exps]
        sparse = {}
        for m, e in list(enumerate(dense))[DENSE_PREFIX:]:
            if e:
                sparse[m] = e
        dense = dense[:DENSE_PREFIX]
        for m, e in (overflow or {}).items():
            m, e = int(m), int(e)
            if m < DENSE_PREFIX:
                dense.extend([0] * (m + 1 - len(dense)))
                dense[m] += e
            elif e:
                sparse[m] = sparse.get(m, 0) + e
        if any(e < 0 for e in dense) or any(e < 0 for e in sparse.values()):
            raise ValueError("multi-index exponents must be non-negative")
        while dense and dense[-1] == 0:
            dense.pop()
        object.__setattr__(self, "_dense", tuple(dense))
        object.__setattr__(self, "_sparse", tuple(sorted(sparse.items())))

    def __setattr__(self, name, value):
        raise AttributeError("MultiIndex is immutable")

    def __getitem__(self, m: int) -> int:
        if m < len(self._dense):
            return self._dense[m]
        for k, e in self._sparse:
            if k == m:
                return e
        return 0

    def nonzero(self) -> list[tuple[int, int]]:
        """``(prime index, exponent)`` pairs with positive exponent."""
        return [(m, e) for m, e in enumerate(self._dense) if e] + list(self._sparse)

    @property
    def exps(self) -> tuple[int, ...]:
        """Dense exponent tuple with trailing zeros stripped."""
        if not self._sparse:
            return self._dense
        top = self._sparse[-1][0]
        out = list(self._dense) + [0] * (top + 1 - len(self._dense))
        for m, e in self._sparse:
            out[m] = e
        return tuple(out)

    @property
    def width(self) -> int:
        """Number of coordinates needed to evaluate the monomial."""
        if self._sparse:
            return self._sparse[-1][0] + 1
        return len(self._dense)

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        if not isinstance(other, MultiIndex):
            return NotImplemented
        n = max(len(self._dense), len(other._dense))
        dense = [self[m] + other[m] for m in range(n)]
        sparse = dict(self._sparse)
        for m, e in other._sparse:
            sparse[m] = sparse.get(m, 0) + e
        return MultiIndex(dense, sparse)

    def __eq__(self, other):
        if isinstance(other, MultiIndex):
            return self._dense == other._dense and self._sparse == other._sparse
        if isinstance(other, tuple):
            return self == MultiIndex(other)
        return NotImplemented

    def __hash__(self):
        return hash((self._dense, self._sparse))

    def __lt__(self, other: "MultiIndex"):
        return index_to_int(self) < index_to_int(other)

    def __repr__(self):
        return f"MultiIndex{self.exps}"


def factorize(n: int) -> MultiIndex:
    """``alpha(n)``: exponents of the prime factorization of ``n``."""
    if n < 1:
        raise ValueError(f"factorize needs n >= 1, got {n}")
    return MultiIndex(overflow={prime_index(p): e for p, e in PRIMES.factor_pairs(n)})


def index_to_int(alpha: MultiIndex, limit: int | None = None) -> int:
    """Inverse of :func:`factorize`.  Raises OverflowError above ``limit``."""
    out = 1
    for m, e in alpha.nonzero():
        out *= nth_prime(m) ** e
        if limit is not None and out > limit:
            raise OverflowError(f"product exceeds {limit}")
    return out


class BohrSeries:
    """Sparse power series ``sum c_beta zeta^beta`` on the infinite torus.

    ``tail_l2_sq`` and ``tail_l1`` bound the coefficients that were lost
    when the source series was truncated.
    """

    __slots__ = ("_terms", "mode", "tail_l2_sq", "tail_l1", "degree_cap")

    def __init__(self, terms: Mapping[MultiIndex, object], mode: str = EXACT, tail_l2_sq=0, tail_l1=0.0,
                 degree_cap: int | None = None):
        sc.check_mode(mode)
        clean = {}
        for beta, c in terms.items():
            if not isinstance(beta, MultiIndex):
                beta = MultiIndex(beta)
            c = sc.to_scalar(c, mode)
            if c != 0:
                clean[beta] = c
        object.__setattr__(self, "_terms", clean)
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "tail_l2_sq", tail_l2_sq)
        object.__setattr__(self, "tail_l1", float(tail_l1))
        # integer-index range the coefficients were taken from; None means "exactly known"
        object.__setattr__(self, "degree_cap", degree_cap)

    def __setattr__(self, name, value):
        raise AttributeError("BohrSeries is immutable")

    def items(self):
        return self._terms.items()

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def __getitem__(self, beta):
        if not isinstance(beta, MultiIndex):
            beta = MultiIndex(beta)
        return self._terms.get(beta, sc.zero(self.mode))

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if not isinstance(other, BohrSeries):
            return NotImplemented
        return self.mode == other.mode and self._terms == other._terms

    __hash__ = None

    @property
    def width(self) -> int:
        return max((b.width for b in self._terms), default=0)

    def coefficients(self) -> dict[int, object]:
        """Pull the coefficients back to integer indices: ``{n: a_n}``."""
        return {index_to_int(b): c for b, c in self._terms.items()}

    def pullback(self) -> TruncatedSeries:
        """The disk series whose lift is this series (inverse Bohr map)."""
        coeffs = self.coefficients()
        cap = self.degree_cap if self.degree_cap is not None else max(coeffs, default=1)
        tail = self.tail_l2_sq
        if self.mode == FLOAT:
            tail = float(tail)
        return TruncatedSeries(coeffs, self.mode, degree_cap=max(cap, max(coeffs, default=1)),
                               tail_l2_sq=tail, tail_l1=self.tail_l1)

    def l2_sq(self):
        if self.mode == EXACT:
            return sum((c.abs2() for c in self._terms.values()), Fraction(0))
        return math.fsum(sc.abs2(c) for c in self._terms.values())

    def shift(self, alpha: MultiIndex) -> "BohrSeries":
        """Multiply by the monomial ``zeta^alpha``."""
        return BohrSeries({b + alpha: c for b, c in self._terms.items()}, self.mode)

    def conj_coeffs(self) -> "BohrSeries":
        return BohrSeries({b: c.conjugate() for b, c in self._terms.items()}, self.mode)

    def to_float(self) -> "BohrSeries":
        return BohrSeries({b: complex(c) for b, c in self._terms.items()}, FLOAT,
                          float(self.tail_l2_sq), self.tail_l1, self.degree_cap)

    def to_json(self) -> list[dict]:
        rows = []
        for b in sorted(self._terms, key=index_to_int):
            c = self._terms[b]
            if self.mode == EXACT:
                rows.append({"exps": list(b.exps), "re": str(c.re), "im": str(c.im)})
            else:
                rows.append({"exps": list(b.exps), "re": c.real, "im": c.imag})
        return rows

    @classmethod
    def from_json(cls, rows: Sequence[Mapping], mode: str) -> "BohrSeries":
        terms = {}
        for row in rows:
            if mode == EXACT:
                terms[MultiIndex(row["exps"])] = sc.GaussianRational(Fraction(str(row["re"])),
                                                                   Fraction(str(row["im"])))
            else:
                terms[MultiIndex(row["exps"])] = complex(float(row["re"]), float(row["im"]))
        return cls(terms, mode)

    def __repr__(self):
        body = ", ".join(f"{b.exps}: {c}" for b, c in self._terms.items())
        return f"BohrSeries({{{body}}}, mode={self.mode})"


def h2_inner(F: BohrSeries, G: BohrSeries):
    """``<F, G>`` in H^2 of the torus (monomials orthonormal)."""
    if F.mode != G.mode:
        raise ModeError("mixed modes")
    total = sc.zero(F.mode)
    for b, c in F.items():
        d = G._terms.get(b)
        if d is not None:
            total = total + c * d.conjugate()
    return total


def bohr_lift(f: TruncatedSeries) -> BohrSeries:
    return BohrSeries({factorize(n): a for n, a in f.items()}, f.mode, f.tail_l2_sq, f.tail_l1,
                      f.degree_cap if f.has_tail else None)


def bohr_lift_t(f: TruncatedSeries, t) -> BohrSeries:
    """Lift of ``S_t f``: coefficient at ``alpha(n)`` is ``a_n * n**(t/2)``."""
    return bohr_lift(scale_st(f, t))


@dataclass(frozen=True)
class Tau:
    """A point of ``[0, 1]^infinity`` defining the diagonal operator T_tau.

    The radius at coordinate ``m`` is ``radii[m]`` (or ``fill`` past the
    end), times ``p_m ** (-prime_power / 2)``.  ``Tau.star()`` is
    ``(1/sqrt(p_m))`` and its square ``(1/p_m)`` stays exact.
    """

    radii: tuple = ()
    fill: object = 1
    prime_power: int = 0

    def __post_init__(self):
        for r in tuple(self.radii) + (self.fill,):
            if not 0 <= r <= 1:
                raise ValueError(f"tau radii must lie in [0, 1], got {r!r}")
        if self.prime_power < 0:
            raise ValueError("prime_power must be >= 0")

    @classmethod
    def ones(cls) -> "Tau":
        return cls()

    @classmethod
    def star(cls) -> "Tau":
        return cls(prime_power=1)

    @classmethod
    def explicit(cls, radii: Sequence, fill=1) -> "Tau":
        return cls(tuple(radii), fill)

    def squared(self) -> "Tau":
        return Tau(tuple(r * r for r in self.radii), self.fill * self.fill, 2 * self.prime_power)

    def is_exact(self) -> bool:
        vals = tuple(self.radii) + (self.fill,)
        return self.prime_power % 2 == 0 and all(isinstance(r, (int, Fraction)) for r in vals)

    def radius(self, m: int, mode: str = FLOAT):
        base = self.radii[m] if m < len(self.radii) else self.fill
        if mode == EXACT:
            if not self.is_exact():
                raise sc.ExactnessError("this tau has irrational radii; use float mode")
            return Fraction(base) / Fraction(nth_prime(m)) ** (self.prime_power // 2)
        return float(base) * float(nth_prime(m)) ** (-self.prime_power / 2.0)

    def weight(self, beta: MultiIndex, mode: str = FLOAT):
        """``tau^beta = prod_m radius(m)**beta_m``."""
        out = Fraction(1) if mode == EXACT else 1.0
        for m, e in beta.nonzero():
            out = out * self.radius(m, mode) ** e
        return out


def apply_tau(F: BohrSeries, tau: Tau) -> BohrSeries:
    """``F_tau``: the coefficient at ``beta`` is multiplied by ``tau^beta``."""
    # radii are <= 1, so the recorded tail bounds stay valid
    return BohrSeries({b: c * tau.weight(b, F.mode) for b, c in F.items()}, F.mode,
                      F.tail_l2_sq, F.tail_l1, F.degree_cap)


@dataclass(frozen=True)
class TorusPoint:
    phases: tuple
    seed: int | None = None

    def __post_init__(self):
        for w in self.phases:
            if not math.isclose(abs(w), 1.0, rel_tol=0, abs_tol=1e-12):
                raise ValueError(f"torus phases must have modulus 1, got {w!r}")

    @classmethod
    def from_angles(cls, angles: Sequence[float], seed: int | None = None) -> "TorusPoint":
        return cls(tuple(complex(math.cos(a), math.sin(a)) for a in angles), seed)


def evaluate(F: BohrSeries, zeta: TorusPoint) -> complex:
    if F.width > len(zeta.phases):
        raise ValueError(f"point supplies {len(zeta.phases)} coordinates, series needs {F.width}")
    total = 0j
    for b, c in F.items():
        v = complex(c)
        for m, e in b.nonzero():
            v *= zeta.phases[m] ** e
        total += v
    return total


@dataclass
class ModulusSummary:
    """Statistics of ``|F(zeta)|`` over Haar-random torus points."""

    min: float
    max: float
    mean: float
    variance: float
    n_samples: int
    seed: int
    tail_l1: float
    coordinates: int

    def to_json(self) -> dict:
        return {
            "min": self.min, "max": self.max, "mean": self.mean, "variance": self.variance,
            "n_samples": self.n_samples, "seed": self.seed, "tail_l1": self.tail_l1,
            "coordinates": self.coordinates,
        }


def thread_cap() -> int:
    """Worker count from ``DILATION_LAB_THREADS`` (default 1)."""
    raw = os.environ.get("DILATION_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


SAMPLE_CHUNK = 1 << 14


def _modulus_chunk(angles: np.ndarray, exps: np.ndarray, coefs: np.ndarray) -> np.ndarray:
    phase = angles @ exps.T
    vals = np.exp(1j * phase) @ coefs
    return np.abs(vals)


def sample_moduli(F: BohrSeries, n_samples: int, seed: int) -> np.ndarray:
    """``|F(zeta)|`` at ``n_samples`` Haar-uniform points.

    Angles are drawn in row-major order from ``numpy.random.default_rng(seed)``
    for the coordinates F actually uses, so the first ``m`` samples do not
    depend on ``n_samples``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    d = max(F.width, 1)
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.0, 2.0 * math.pi, size=(n_samples, d))
    items = list(F.items())
    if not items:
        return np.zeros(n_samples)
    exps = np.zeros((len(items), d))
    for r, (b, _) in enumerate(items):
        for m, e in b.nonzero():
            exps[r, m] = e
    coefs = np.array([complex(c) for _, c in items])
    chunks = [angles[s:s + SAMPLE_CHUNK] for s in range(0, n_samples, SAMPLE_CHUNK)]
    workers = min(thread_cap(), len(chunks))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda a: _modulus_chunk(a, exps, coefs), chunks))
    else:
        parts = [_modulus_chunk(a, exps, coefs) for a in chunks]
    return np.concatenate(parts)


def sample_modulus(F: BohrSeries, n_samples: int, seed: int = 0) -> ModulusSummary:
    mods = sample_moduli(F, n_samples, seed)
    vals = mods.tolist()
    mean = math.fsum(vals) / len(vals)
    var = math.fsum((v - mean) ** 2 for v in vals) / len(vals)
    return ModulusSummary(min=float(mods.min()), max=float(mods.max()), mean=mean, variance=var,
                          n_samples=n_samples, seed=seed, tail_l1=F.tail_l1, coordinates=F.width)
