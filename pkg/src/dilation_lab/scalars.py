"""Scalar arithmetic for the two coefficient modes.

``exact`` mode stores Gaussian rationals (real and imaginary parts are
:class:`fractions.Fraction`); ``float`` mode stores Python ``complex``.
A container is always uniform in its mode, and binary operations between an
exact and a float scalar raise :class:`ModeError` instead of silently
rounding.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Union

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)


class ModeError(TypeError):
    """Raised when exact and float values meet, or a mode is unknown."""


class ExactnessError(ValueError):
    """Raised when an operation cannot be carried out without rounding."""


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)) and not isinstance(x, bool):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise ModeError(f"cannot use {type(x).__name__} in exact mode")


class GaussianRational:
    """Immutable complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _as_fraction(re))
        object.__setattr__(self, "im", _as_fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @classmethod
    def _coerce(cls, other) -> "GaussianRational":
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (float, complex)):
            raise ModeError("mixed exact/float arithmetic is not allowed")
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            return cls(other, 0)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        d = o.abs2()
        if d == 0:
            raise ZeroDivisionError("division by exact zero")
        num = self * o.conjugate()
        return GaussianRational(num.re / d, num.im / d)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, n):
        if not isinstance(n, int):
            raise ExactnessError("exact powers need an integer exponent")
        if n < 0:
            return GaussianRational(1) / (self ** -n)
        result = GaussianRational(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return math.sqrt(self.abs2())

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            return self.im == 0 and self.re == other
        if isinstance(other, (float, complex)):
            return complex(self) == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.im == 0:
            return f"GaussianRational({self.re})"
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        sign = "+" if self.im >= 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


Scalar = Union[GaussianRational, complex]


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ModeError(f"unknown mode {mode!r}; expected 'exact' or 'float'")
    return mode


def to_scalar(x, mode: str) -> Scalar:
    """Convert ``x`` into the scalar type of ``mode``.

    Exact mode accepts ints, Fractions, rational strings such as ``"1/2"``,
    ``(re, im)`` pairs of those, or a :class:`GaussianRational`.
    """
    check_mode(mode)
    if mode == EXACT:
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, tuple) and len(x) == 2:
            return GaussianRational(x[0], x[1])
        return GaussianRational(_as_fraction(x))
    if isinstance(x, GaussianRational):
        return complex(x)
    if isinstance(x, tuple) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, str):
        return complex(float(Fraction(x)))
    return complex(x)


def zero(mode: str) -> Scalar:
    return GaussianRational(0) if mode == EXACT else 0j


def one(mode: str) -> Scalar:
    return GaussianRational(1) if mode == EXACT else 1 + 0j


def mode_of(x) -> str:
    if isinstance(x, GaussianRational):
        return EXACT
    if isinstance(x, (float, complex)):
        return FLOAT
    if isinstance(x, (int, Rational)):
        return EXACT
    raise ModeError(f"not a scalar: {x!r}")


def conj(x):
    return x.conjugate()


def abs2(x):
    """Squared modulus; a Fraction in exact mode, a float otherwise."""
    if isinstance(x, GaussianRational):
        return x.abs2()
    if isinstance(x, Fraction):
        return x * x
    return x.real * x.real + x.imag * x.imag


def is_integer(t) -> bool:
    if isinstance(t, int):
        return True
    if isinstance(t, Fraction):
        return t.denominator == 1
    return float(t).is_integer()


def is_even_integer(t) -> bool:
    return is_integer(t) and int(t) % 2 == 0


def int_power(base: int, t, mode: str):
    """``base ** t`` for a positive integer base.

    Exact mode returns a Fraction and requires integer ``t``; float mode
    returns a float.
    """
    if mode == EXACT:
        if not is_integer(t):
            raise ExactnessError(f"exact weights need integer t, got {t!r}")
        return Fraction(base) ** int(t)
    return float(base) ** float(t)


def rational_power(base: Fraction, t, mode: str):
    """``base ** t`` for a positive rational base (exact needs integer t)."""
    if mode == EXACT:
        if not is_integer(t):
            raise ExactnessError(f"exact weights need integer t, got {t!r}")
        return Fraction(base) ** int(t)
    return float(base) ** float(t)


def half_power(n: int, t, mode: str):
    """``n ** (t/2)``; exact only when ``t`` is an even integer."""
    if mode == EXACT:
        if not is_even_integer(t):
            raise ExactnessError(f"n^(t/2) is irrational in general; exact mode needs even t, got {t!r}")
        return Fraction(n) ** (int(t) // 2)
    return float(n) ** (float(t) / 2.0)


def to_float_complex(x) -> complex:
    return complex(x)


def scalar_to_json(x, mode: str) -> list:
    """Serialize one scalar as ``[num, den, num, den]`` (exact) or ``[re, im]``."""
    if mode == EXACT:
        g = to_scalar(x, EXACT)
        return [g.re.numerator, g.re.denominator, g.im.numerator, g.im.denominator]
    z = complex(x)
    return [z.real, z.imag]


def scalar_from_json(item, mode: str) -> Scalar:
    if mode == EXACT:
        if len(item) != 4:
            raise ValueError(f"exact coefficient must be [num, den, num, den], got {item!r}")
        for v in item:
            if not isinstance(v, int) or isinstance(v, bool):
                raise ValueError(f"exact coefficient entries must be integers, got {item!r}")
        return GaussianRational(Fraction(item[0], item[1]), Fraction(item[2], item[3]))
    if len(item) != 2:
        raise ValueError(f"float coefficient must be [re, im], got {item!r}")
    return complex(float(item[0]), float(item[1]))


def fmt_real(x) -> str:
    """Text form of a real value: exact fractions stay exact."""
    if isinstance(x, Fraction):
        return str(x)
    return repr(float(x))
