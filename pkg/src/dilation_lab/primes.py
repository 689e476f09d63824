"""Incremental prime table and factorization into prime-index exponents."""

from __future__ import annotations

import bisect
import math
import threading

_INITIAL_LIMIT = 1 << 12


class PrimeTable:
    """Primes found by a sieve that doubles its range on demand.

    Also keeps a smallest-prime-factor table over the sieved range, so
    factoring ``n <= limit`` costs O(log n).
    """

    def __init__(self, limit: int = _INITIAL_LIMIT):
        self._lock = threading.Lock()
        self._limit = 1
        self._primes: list[int] = []
        self._index: dict[int, int] = {}
        self._spf: list[int] = [0, 1]
        self._extend(limit)

    def _extend(self, limit: int) -> None:
        with self._lock:
            if limit <= self._limit:
                return
            spf = list(range(limit + 1))
            for p in range(2, math.isqrt(limit) + 1):
                if spf[p] == p:
                    for q in range(p * p, limit + 1, p):
                        if spf[q] == q:
                            spf[q] = p
            primes = [n for n in range(2, limit + 1) if spf[n] == n]
            self._spf = spf
            self._primes = primes
            self._index = {p: m for m, p in enumerate(primes)}
            self._limit = limit

    @property
    def limit(self) -> int:
        return self._limit

    def ensure(self, limit: int) -> None:
        if limit > self._limit:
            self._extend(max(limit, 2 * self._limit))

    def prime(self, m: int) -> int:
        """The prime with 0-based index ``m`` (``prime(0) == 2``)."""
        if m < 0:
            raise IndexError(m)
        while m >= len(self._primes):
            # p_m < m (ln m + ln ln m) for m >= 6
            est = int((m + 1) * (math.log(m + 2) + math.log(math.log(m + 3)))) + 16
            self.ensure(max(est, 2 * self._limit))
        return self._primes[m]

    def index_of(self, p: int) -> int:
        self.ensure(p)
        try:
            return self._index[p]
        except KeyError:
            raise ValueError(f"{p} is not prime") from None

    def primes_upto(self, n: int) -> list[int]:
        self.ensure(n)
        return self._primes[: bisect.bisect_right(self._primes, n)]

    def factor_pairs(self, n: int) -> list[tuple[int, int]]:
        """``[(p, e), ...]`` with ``prod p**e == n``, primes ascending."""
        if n < 1:
            raise ValueError(f"factorize needs n >= 1, got {n}")
        out: list[tuple[int, int]] = []
        if n <= self._limit:
            spf = self._spf
            while n > 1:
                p = spf[n]
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                out.append((p, e))
            return out
        self.ensure(min(math.isqrt(n) + 1, 1 << 22))
        for p in self._primes:
            if p * p > n:
                break
            if n % p == 0:
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                out.append((p, e))
        if n > 1:
            if n > self._limit and math.isqrt(n) >= self._limit:
                # residue larger than the square of the sieve: finish by trial division
                out.extend(_trial_factor(n, self._limit))
            else:
                out.append((n, 1))
        return out

    def is_prime(self, n: int) -> bool:
        if n < 2:
            return False
        if n <= self._limit:
            return self._spf[n] == n
        return self.factor_pairs(n) == [(n, 1)]


def _trial_factor(n: int, start: int) -> list[tuple[int, int]]:
    out = []
    d = start | 1
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 2
    if n > 1:
        out.append((n, 1))
    return out


PRIMES = PrimeTable()


def nth_prime(m: int) -> int:
    return PRIMES.prime(m)


def prime_index(p: int) -> int:
    if p > PRIMES.limit:
        PRIMES.ensure(p)
    return PRIMES.index_of(p)


def next_prime_above(x: float) -> int:
    n = max(2, math.floor(x) + 1)
    while not PRIMES.is_prime(n):
        n += 1
    return n
