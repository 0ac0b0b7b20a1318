"""Exact arithmetic in Z[1/sqrt2] with a single packed 64-bit encoding.

A value ``x = (a + b*sqrt2) / sqrt2**c`` is stored as one unsigned 64-bit
integer (the *word*)::

    bits  0..25   a   two's complement, 26 bits
    bits 26..51   b   two's complement, 26 bits
    bits 52..63   c   unsigned, 12 bits

Words are always *reduced*: ``a`` is odd, or ``c == 0``.  Zero is the all-zero
word.  Under this rule equal values have bit-equal words, so words can be
compared and hashed directly.

The module-level functions work on raw words and are what the matrix kernels
use.  :class:`Dyadic` is a thin value wrapper for everything else.
"""

from __future__ import annotations

import math

from .errors import DyadicOverflow

A_BITS = 26
B_BITS = 26
C_BITS = 12

A_SHIFT = 0
B_SHIFT = A_BITS
C_SHIFT = A_BITS + B_BITS

_A_MASK = (1 << A_BITS) - 1
_B_MASK = (1 << B_BITS) - 1
_C_MASK = (1 << C_BITS) - 1

COEFF_MIN = -(1 << (A_BITS - 1))
COEFF_MAX = (1 << (A_BITS - 1)) - 1
EXP_MAX = _C_MASK

WORD_MASK = (1 << 64) - 1

ZERO = 0


def _check(a: int, b: int, c: int) -> None:
    if not COEFF_MIN <= a <= COEFF_MAX:
        raise DyadicOverflow(f"integer coefficient {a} outside 26-bit field")
    if not COEFF_MIN <= b <= COEFF_MAX:
        raise DyadicOverflow(f"sqrt2 coefficient {b} outside 26-bit field")
    if not 0 <= c <= EXP_MAX:
        raise DyadicOverflow(f"exponent {c} outside 12-bit field")


def pack(a: int, b: int, c: int) -> int:
    """Pack already-reduced fields.  Use :func:`reduce` for arbitrary input."""
    _check(a, b, c)
    return (a & _A_MASK) | ((b & _B_MASK) << B_SHIFT) | (c << C_SHIFT)


def unpack(w: int) -> tuple[int, int, int]:
    a = w & _A_MASK
    b = (w >> B_SHIFT) & _B_MASK
    if a >> (A_BITS - 1):
        a -= 1 << A_BITS
    if b >> (B_BITS - 1):
        b -= 1 << B_BITS
    return a, b, w >> C_SHIFT


def _reduce_fields(a: int, b: int, c: int) -> tuple[int, int, int, int]:
    """Return reduced (a, b, c) and the number of sqrt2-division steps taken."""
    if a == 0 and b == 0:
        return 0, 0, 0, 0
    steps = 0
    while c > 0 and not a & 1:
        # (a + b sqrt2)/sqrt2 = b + (a/2) sqrt2
        a, b = b, a >> 1
        c -= 1
        steps += 1
    return a, b, c, steps


def reduce(a: int, b: int, c: int) -> int:
    """Word for the (possibly unreduced) value ``(a + b sqrt2)/sqrt2**c``."""
    if c < 0:
        raise ValueError("exponent must be non-negative")
    a, b, c, _ = _reduce_fields(a, b, c)
    return pack(a, b, c)


def is_reduced(a: int, b: int, c: int) -> bool:
    if a == 0 and b == 0:
        return c == 0
    return c == 0 or a & 1 == 1


def _align(a: int, b: int, gap: int) -> tuple[int, int]:
    """Multiply the numerator ``a + b sqrt2`` by ``sqrt2**gap``."""
    if gap & 1:
        a, b = b << 1, a  # swap-and-double
    m = gap >> 1
    return a << m, b << m


def add_fields(x: int, y: int, sign: int = 1) -> tuple[int, int, int, int]:
    """Unpacked ``x + sign*y`` before packing, plus reduction step count."""
    a1, b1, c1 = unpack(x)
    a2, b2, c2 = unpack(y)
    if c1 < c2:
        a1, b1 = _align(a1, b1, c2 - c1)
        c = c2
    elif c2 < c1:
        a2, b2 = _align(a2, b2, c1 - c2)
        c = c1
    else:
        c = c1
    if sign > 0:
        return _reduce_fields(a1 + a2, b1 + b2, c)
    return _reduce_fields(a1 - a2, b1 - b2, c)


def add(x: int, y: int) -> int:
    a, b, c, _ = add_fields(x, y, 1)
    return pack(a, b, c)


def sub(x: int, y: int) -> int:
    a, b, c, _ = add_fields(x, y, -1)
    return pack(a, b, c)


def neg(x: int) -> int:
    if x == ZERO:
        return ZERO
    a, b, c = unpack(x)
    return pack(-a, -b, c)


def mul(x: int, y: int) -> int:
    a1, b1, c1 = unpack(x)
    a2, b2, c2 = unpack(y)
    a = a1 * a2 + 2 * b1 * b2
    b = a1 * b2 + a2 * b1
    return reduce(a, b, c1 + c2)


def div_sqrt2(x: int) -> int:
    if x == ZERO:
        return ZERO
    a, b, c = unpack(x)
    if c == 0 and not a & 1:
        # (a + b sqrt2)/sqrt2 = b + (a/2) sqrt2
        return pack(b, a >> 1, 0)
    return pack(a, b, c + 1)


def mul_sqrt2(x: int) -> int:
    a, b, c = unpack(x)
    if c > 0:
        # (a + b sqrt2)/sqrt2**(c-1) with a odd is reduced
        return pack(a, b, c - 1)
    return pack(2 * b, a, 0)


def twist(x: int) -> int:
    """Galois conjugate (sqrt2 -> -sqrt2).

    On the numerator this flips the sign of ``b``; the denominator
    ``sqrt2**c`` picks up ``(-1)**c`` as well, so for odd ``c`` the net effect
    is negating ``a`` instead.  Either way the word stays reduced.
    """
    a, b, c = unpack(x)
    if c & 1:
        return pack(-a, b, c)
    return pack(a, -b, c)


def order_key(x: int) -> tuple[int, int, int]:
    a, b, c = unpack(x)
    return (c, a, b)


_KEY_OFFSET = 1 << (A_BITS - 1)


def sort_key(x: int) -> int:
    """Integer with the same ordering as :func:`order_key`."""
    a, b, c = unpack(x)
    return (c << (A_BITS + B_BITS)) | ((a + _KEY_OFFSET) << B_BITS) | (b + _KEY_OFFSET)


def from_sort_key(k: int) -> int:
    c = k >> (A_BITS + B_BITS)
    a = ((k >> B_BITS) & _A_MASK) - _KEY_OFFSET
    b = (k & _B_MASK) - _KEY_OFFSET
    return pack(a, b, c)


def to_float(x: int) -> float:
    """Approximate value, for debugging and display only."""
    a, b, c = unpack(x)
    return (a + b * math.sqrt(2.0)) / math.sqrt(2.0) ** c


def in_unit_interval(x: int) -> bool:
    """True when both ``x`` and its twist lie in [-1, 1] (exact test)."""
    a, b, c = unpack(x)
    # |a + s*b*sqrt2| <= sqrt2**c  for s = +1, -1, decided in integers
    for s in (1, -1):
        if not _abs_le_pow_sqrt2(a, s * b, c):
            return False
    return True


def _abs_le_pow_sqrt2(a: int, b: int, c: int) -> bool:
    # square both sides: a^2 + 2b^2 + 2ab*sqrt2 <= 2**c, i.e. lhs*sqrt2 <= r
    r = (1 << c) - a * a - 2 * b * b
    lhs = 2 * a * b
    if lhs >= 0:
        return r >= 0 and 2 * lhs * lhs <= r * r
    return r >= 0 or 2 * lhs * lhs >= r * r


class Dyadic:
    """Immutable value wrapper around a packed word."""

    __slots__ = ("word",)

    def __init__(self, a: int = 0, b: int = 0, c: int = 0):
        object.__setattr__(self, "word", reduce(a, b, c))

    @classmethod
    def from_word(cls, w: int) -> Dyadic:
        obj = cls.__new__(cls)
        object.__setattr__(obj, "word", w & WORD_MASK)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    @property
    def fields(self) -> tuple[int, int, int]:
        return unpack(self.word)

    a = property(lambda self: unpack(self.word)[0])
    b = property(lambda self: unpack(self.word)[1])
    c = property(lambda self: unpack(self.word)[2])

    def __add__(self, other: Dyadic) -> Dyadic:
        return Dyadic.from_word(add(self.word, other.word))

    def __sub__(self, other: Dyadic) -> Dyadic:
        return Dyadic.from_word(sub(self.word, other.word))

    def __mul__(self, other: Dyadic) -> Dyadic:
        return Dyadic.from_word(mul(self.word, other.word))

    def __neg__(self) -> Dyadic:
        return Dyadic.from_word(neg(self.word))

    def twist(self) -> Dyadic:
        return Dyadic.from_word(twist(self.word))

    def div_sqrt2(self) -> Dyadic:
        return Dyadic.from_word(div_sqrt2(self.word))

    def order_key(self) -> tuple[int, int, int]:
        return order_key(self.word)

    def __eq__(self, other) -> bool:
        return isinstance(other, Dyadic) and self.word == other.word

    def __hash__(self) -> int:
        return hash(self.word)

    def __float__(self) -> float:
        return to_float(self.word)

    def __repr__(self) -> str:
        a, b, c = unpack(self.word)
        return f"Dyadic({a}, {b}, {c})"

    def __str__(self) -> str:
        a, b, c = unpack(self.word)
        return f"{a},{b},{c}"
