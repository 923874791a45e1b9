"""Small shared helpers: exact rational handling, seeds, integer roots."""

from __future__ import annotations

from fractions import Fraction

_GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def to_fraction(x) -> Fraction:
    """Convert a user-supplied number to an exact Fraction.

    Floats go through their decimal string form so that e.g. 0.1 means
    exactly 1/10 rather than the nearest binary double.  Integers, strings
    and Fractions convert exactly.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def ceil_frac(x: Fraction) -> int:
    """Ceiling of an exact rational."""
    return -((-x.numerator) // x.denominator)


def int_nth_root(x: int, d: int) -> int:
    """Largest r with r**d <= x, for x >= 0 and d >= 1."""
    if x < 0:
        raise ValueError("negative radicand")
    if d < 1:
        raise ValueError("root order must be >= 1")
    if d == 1 or x in (0, 1):
        return x
    # Newton iteration on integers, starting above the root.
    r = 1 << (x.bit_length() // d + 1)
    while True:
        nxt = ((d - 1) * r + x // r ** (d - 1)) // d
        if nxt >= r:
            break
        r = nxt
    while r ** d > x:
        r -= 1
    return r


def frac_root_floor(x: Fraction, d: int, digits: int = 30) -> Fraction:
    """A rational lower bound of x**(1/d), accurate to 10**-digits.

    Rounding down is deliberate: the adaptive-imbalance guarantee needs the
    returned value to never exceed the true root.  For d == 1 the result is
    exact.
    """
    if x < 0:
        raise ValueError("negative radicand")
    if d == 1:
        return x
    scale = 10 ** digits
    radicand = (x.numerator * scale ** d) // x.denominator
    return Fraction(int_nth_root(radicand, d), scale)


def mix64(x: int) -> int:
    """Avalanche mixer (splitmix64 finalizer) on 64-bit values."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def split_seed(seed: int, *streams: int) -> int:
    """Derive a child seed from a parent seed and one or more stream tags.

    The result depends only on the values, not on call order, so seeds can
    be attached to positions in a recursion tree rather than to execution
    order.
    """
    s = seed & _MASK64
    for t in streams:
        s = mix64(s ^ ((_GOLDEN * ((t & _MASK64) + 1)) & _MASK64))
    return s
