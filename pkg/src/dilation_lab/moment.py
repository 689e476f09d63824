"""The operator moment problem ``T z^k = lambda_k f(z^k)`` on a finite section.

The truncated operator acts on ``span{z^k : k <= K}`` and lands in
``span{z^n : n <= N*K}``.  Column ``k`` of its matrix is
``lambda_k f(z^k)``, supported on multiples of ``k``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import scalars as sc
from .bohr import bohr_lift_t, sample_modulus
from .scalars import EXACT, FLOAT
from .series import TruncatedSeries, dilate, entry_tail_bound, norm_sq

logger = logging.getLogger(__name__)

# |log-log slope| of |lambda_k| above this counts as an unbounded trend
LAMBDA_SLOPE_TOL = 0.1


class MomentError(ValueError):
    pass


@dataclass
class MomentProblem:
    f: TruncatedSeries
    t: object
    lambdas: list
    k_cap: int
    degree_cap: int | None = None
    tol: float = 1e-12

    def __post_init__(self):
        if self.degree_cap is None:
            self.degree_cap = self.f.degree_cap
        if len(self.lambdas) < self.k_cap:
            raise MomentError(f"need {self.k_cap} lambdas, got {len(self.lambdas)}")
        self.lambdas = [sc.to_scalar(x, self.f.mode) for x in self.lambdas[: self.k_cap]]

    def check_norm(self) -> None:
        n2 = norm_sq(self.f, self.t)
        if self.f.mode == EXACT and not self.f.has_tail:
            if n2 != 1:
                raise MomentError(f"||f||_t^2 = {n2}, expected exactly 1")
        elif abs(float(n2) - 1.0) > self.tol + float(self.f.tail_l2_sq):
            raise MomentError(f"||f||_t^2 = {float(n2)!r}, expected 1 within {self.tol}")


def lambdas_from_moduli(moduli: Sequence, phases: Sequence | None = None, mode: str = FLOAT) -> list:
    """Combine moduli with unit phases (default 1)."""
    if phases is None:
        return [sc.to_scalar(m, mode) for m in moduli]
    if mode == EXACT:
        return [sc.to_scalar(m, EXACT) * sc.to_scalar(p, EXACT) for m, p in zip(moduli, phases)]
    return [complex(m) * complex(p) for m, p in zip(moduli, phases)]


def isometric_lambda(k: int, N: int, t, mode: str = EXACT):
    """``((kN + k + N + 1) / (kN + 1)) ** (t/2)``; exact for even integer t."""
    base = Fraction(k * N + k + N + 1, k * N + 1)
    if mode == EXACT:
        if not sc.is_even_integer(t):
            raise sc.ExactnessError("exact lambda law needs even integer t")
        return base ** (int(t) // 2)
    return float(base) ** (float(t) / 2)


def monomial_problem(N: int, t, k_cap: int, mode: str = EXACT, phase=1) -> MomentProblem:
    """``f = c z^N`` with ``|c| = (N+1)^(-t/2)`` and the isometric lambdas."""
    if mode == EXACT:
        if not sc.is_even_integer(t):
            raise sc.ExactnessError("exact monomial problem needs even integer t")
        c = sc.to_scalar(phase, EXACT) * Fraction(N + 1) ** (-(int(t) // 2))
    else:
        c = complex(phase) * float(N + 1) ** (-float(t) / 2)
    f = TruncatedSeries.monomial(N, c, mode)
    lams = [isometric_lambda(k, N, t, mode) for k in range(1, k_cap + 1)]
    return MomentProblem(f, t, lams, k_cap)


@dataclass
class OperatorMatrix:
    columns: list
    n_rows: int
    t: object
    mode: str
    lambdas: list
    source: TruncatedSeries = field(repr=False)

    @property
    def k_cap(self) -> int:
        return len(self.columns)

    def entry(self, n: int, k: int):
        return self.columns[k - 1].get(n, sc.zero(self.mode))

    def column_norm_sq(self, k: int):
        col = self.columns[k - 1]
        zero = Fraction(0) if self.mode == EXACT else 0.0
        return sum((sc.abs2(v) * sc.int_power(n + 1, self.t, self.mode) for n, v in col.items()), zero)

    def column_inner(self, k: int, l: int):
        a, b = self.columns[k - 1], self.columns[l - 1]
        total = sc.zero(self.mode)
        for n, v in a.items():
            w = b.get(n)
            if w is not None:
                total = total + v * w.conjugate() * sc.int_power(n + 1, self.t, self.mode)
        return total

    def weighted_array(self) -> np.ndarray:
        """Matrix of T between the D_t-normalized monomial bases."""
        t = float(self.t)
        A = np.zeros((self.n_rows, self.k_cap), dtype=complex)
        for k, col in enumerate(self.columns, start=1):
            ck = (k + 1) ** (-t / 2)
            for n, v in col.items():
                A[n - 1, k - 1] = complex(v) * (n + 1) ** (t / 2) * ck
        return A


def build_operator(p: MomentProblem, check_norm: bool = True) -> OperatorMatrix:
    """Matrix of the truncated T.

    ``check_norm=False`` skips the unit-norm requirement on f, which is
    useful when T is studied as a plain multiplier (its norm is then the
    sup of the symbol rather than a normalized quantity).
    """
    if check_norm:
        p.check_norm()
    K, N = p.k_cap, p.degree_cap
    if p.f.degree_cap > N:
        raise MomentError(f"f has degree cap {p.f.degree_cap} above the problem's {N}")
    cols = []
    for k in range(1, K + 1):
        lam = p.lambdas[k - 1]
        cols.append({n: lam * a for n, a in dilate(p.f, k).items() if n <= N * K})
    return OperatorMatrix(cols, N * K, p.t, p.f.mode, list(p.lambdas), p.f)


@dataclass
class IsometryReport:
    isometric: bool
    norm_defects: list
    sq_defects: list
    orthogonality_defects: list
    tail_bounds: dict
    mode: str

    def to_json(self) -> dict:
        return {
            "isometric": self.isometric, "mode": self.mode,
            "norm_defects": self.norm_defects,
            "sq_defects": [sc.fmt_real(d) for d in self.sq_defects],
            "orthogonality_defects": [[k, l, sc.scalar_to_json(v, self.mode), abs(v)]
                                      for k, l, v in self.orthogonality_defects],
        }


def isometry_check(m: OperatorMatrix, tol: float = 1e-12) -> IsometryReport:
    """Compare T on the monomials with an isometry.

    Column ``k`` must have weighted norm ``||z^k||_t = (k+1)^(t/2)`` and
    distinct columns must be D_t-orthogonal.
    """
    exact = m.mode == EXACT and not m.source.has_tail
    K = m.k_cap
    sq_def, norm_def, orth = [], [], []
    tails = {}
    ok = True
    for k in range(1, K + 1):
        src = sc.int_power(k + 1, m.t, m.mode)
        col = m.column_norm_sq(k)
        d = col - src
        sq_def.append(d)
        norm_def.append(abs(math.sqrt(col) - math.sqrt(src)))
        lam2 = float(sc.abs2(m.lambdas[k - 1]))
        tail = lam2 * entry_tail_bound(m.source, m.t, k, k)
        tails[(k, k)] = tail
        ok = ok and (d == 0 if exact else abs(d) <= tol + tail)
    for k in range(1, K + 1):
        for l in range(k + 1, K + 1):
            v = m.column_inner(k, l)
            orth.append((k, l, v))
            scale = math.sqrt(float(sc.abs2(m.lambdas[k - 1]) * sc.abs2(m.lambdas[l - 1])))
            tail = scale * entry_tail_bound(m.source, m.t, k, l)
            tails[(k, l)] = tail
            ok = ok and (v == 0 if exact else abs(v) <= tol + tail)
    return IsometryReport(ok, norm_def, sq_def, orth, tails, m.mode)


@dataclass
class BoundednessReport:
    symbol: dict
    lambda_min: float
    lambda_max: float
    lambda_slope: float
    normalized_min: float
    normalized_max: float
    lambda_two_sided: bool
    bounded_evidence: bool
    invertible_evidence: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def boundedness_probe(p: MomentProblem, n_samples: int = 10_000, seed: int = 0,
                      floor: float = 1e-2) -> BoundednessReport:
    """Evidence for a bounded (and an invertible) solution.

    The multiplier symbol is ``B_t f`` sampled on the torus.  ``lambda`` is
    taken as bounded on both sides when its moduli are positive and the
    log-log slope of ``|lambda_k|`` against ``k`` stays within
    :data:`LAMBDA_SLOPE_TOL`.  The normalized moduli
    ``|lambda_k| k^(t/2) / ||z^k||_t`` are reported too.
    """
    f = p.f if p.f.mode == FLOAT or sc.is_even_integer(p.t) else p.f.to_float()
    s = sample_modulus(bohr_lift_t(f, p.t).to_float(), n_samples, seed)
    mods = [abs(x) for x in p.lambdas]
    t = float(p.t)
    normed = [m * (k ** (t / 2)) / ((k + 1) ** (t / 2)) for k, m in enumerate(mods, start=1)]
    if len(mods) >= 2 and min(mods) > 0:
        ks = np.arange(1, len(mods) + 1, dtype=float)
        slope = float(np.polyfit(np.log(ks), np.log(mods), 1)[0])
    else:
        slope = 0.0
    two_sided = min(mods) > 0 and abs(slope) <= LAMBDA_SLOPE_TOL
    upper = s.max + s.tail_l1
    lower = s.min - s.tail_l1
    bounded = two_sided and math.isfinite(upper)
    invertible = bounded and lower > floor
    return BoundednessReport(s.to_json(), min(mods), max(mods), slope, min(normed), max(normed),
                             two_sided, bounded, invertible)


@dataclass
class NormEstimate:
    value: float
    iterations: int
    residual: float
    restarted: bool = False


def _power(A: np.ndarray, x: np.ndarray, max_iter: int, tol: float) -> tuple[float, int, float]:
    x = x / np.linalg.norm(x)
    lam = 0.0
    it = 0
    for it in range(1, max_iter + 1):
        y = A.conj().T @ (A @ x)
        lam_new = float(np.real(np.vdot(x, y)))
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0, it, 0.0
        x = y / ny
        if abs(lam_new - lam) <= tol * max(lam_new, 1.0):
            break
        lam = lam_new
    y = A.conj().T @ (A @ x)
    lam = float(np.real(np.vdot(x, y)))
    resid = float(np.linalg.norm(y - lam * x) / lam) if lam > 0 else 0.0
    return lam, it, resid


def operator_norm_estimate(m: OperatorMatrix, max_iter: int = 1000, tol: float = 1e-15) -> NormEstimate:
    """Largest singular value of the weighted matrix by power iteration.

    Iterates ``x <- A^H A x / ||A^H A x||`` from the all-ones vector until
    the Rayleigh quotient settles, then repeats from a fixed pseudo-random
    vector: symmetric coefficient patterns can make all-ones orthogonal to
    the top singular vector.  The larger result is kept; ``restarted`` says
    whether the second start won.  ``residual`` is
    ``||A^H A x - s^2 x|| / s^2`` at exit.
    """
    A = m.weighted_array()
    n = A.shape[1]
    ones = np.ones(n, dtype=complex)
    if not np.any(A @ ones):
        # all-ones lies in the kernel; use a deterministic ramp instead
        ones = np.arange(1, n + 1, dtype=complex)
    rng = np.random.default_rng(0)
    fallback = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    first = _power(A, ones, max_iter, tol)
    second = _power(A, fallback, max_iter, tol)
    restarted = second[0] > first[0] * (1 + 1e-12)
    lam, it, resid = second if restarted else first
    logger.debug("power iteration: %d iterations, residual %.3e, restarted %s", it, resid, restarted)
    return NormEstimate(math.sqrt(max(lam, 0.0)), it, resid, restarted)
