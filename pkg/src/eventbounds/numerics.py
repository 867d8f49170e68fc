"""Shared arithmetic helpers: exact rationals, floats, and tolerant compares.

Two arithmetic modes coexist throughout the package:

* exact mode: values are rational numbers and every comparison is exact;
* float mode: values are 64-bit floats and comparisons allow an absolute
  tolerance (``DEFAULT_TOLERANCE`` unless overridden).

A value's mode is decided by its type: ``float`` means float mode, anything
rational means exact mode.  Exact values are created through
:func:`rational`, which is backed by ``gmpy2.mpq`` when gmpy2 is installed
and by ``fractions.Fraction`` otherwise.  The two backends hash, compare
and print identically, so they interoperate; gmpy2 is purely a speedup
(roughly 3x on the rational hot path, see benchmarks/).

One caveat drives the helpers below: multiplying a gmpy2 rational by a
float yields a gmpy2 ``mpfr``, not a ``float``.  Mixed-mode arithmetic must
therefore convert rationals to float explicitly, which :func:`dot_product`
and friends do.
"""

from __future__ import annotations

import os
from fractions import Fraction
from typing import Iterable, Sequence, Union

#: Set EVENTBOUNDS_BACKEND=fractions (or =gmpy2) to pin the backend; the
#: benchmark script uses this to compare both in otherwise identical runs.
_FORCED_BACKEND = os.environ.get("EVENTBOUNDS_BACKEND")

try:  # pragma: no cover - exercised indirectly via either backend
    if _FORCED_BACKEND == "fractions":
        raise ImportError("backend pinned to fractions")
    from gmpy2 import mpq as _mpq

    RATIONAL_BACKEND = "gmpy2"
    _RATIONAL_TYPES = (Fraction, type(_mpq(0)))

    def rational(numerator: object = 0, denominator: object = 1):
        """Exact rational number (gmpy2 backend)."""
        return _mpq(numerator, denominator)

except ImportError:  # pragma: no cover
    if _FORCED_BACKEND == "gmpy2":
        raise
    RATIONAL_BACKEND = "fractions"
    _RATIONAL_TYPES = (Fraction,)

    def rational(numerator: object = 0, denominator: object = 1):
        """Exact rational number (fractions backend)."""
        return Fraction(numerator, denominator)


#: Absolute tolerance used for float-mode comparisons and validations.
DEFAULT_TOLERANCE = 1e-9

#: Values flowing through the package are either exact rationals or floats.
#: The alias documents intent; gmpy2 rationals satisfy it by duck typing.
Number = Union[Fraction, float]


def is_rational(value: object) -> bool:
    """True for ints and exact rationals, False for floats and others."""
    return isinstance(value, (int, *_RATIONAL_TYPES)) and not isinstance(value, bool)


def all_exact(values: Iterable[object]) -> bool:
    """True when every value is an int or exact rational."""
    return all(is_rational(v) for v in values)


def to_number(value: object) -> Number:
    """Coerce a scalar from user input into package arithmetic.

    ints and rationals become exact rationals; floats stay floats; strings
    are parsed as exact rationals ("3/8", "3", "0.375" are all accepted).
    """
    if isinstance(value, bool):
        raise ValueError(f"boolean {value!r} is not a number")
    if isinstance(value, float):
        return value
    if isinstance(value, int) or isinstance(value, _RATIONAL_TYPES):
        return rational(value)
    if isinstance(value, str):
        try:
            return rational(Fraction(value))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse {value!r} as a rational number") from exc
    raise ValueError(f"unsupported numeric value {value!r}")


def exactify(value: Number) -> Number:
    """Convert a float to the exact rational with the same decimal text.

    Exact values pass through unchanged.  Used by the CLI flag that forces
    exact arithmetic on float-laden input files.
    """
    if isinstance(value, float):
        return rational(Fraction(repr(value)))
    return rational(value)


def encode_number(value: Number) -> object:
    """JSON-ready form: rationals as strings ("3/8"), floats as floats."""
    if isinstance(value, float):
        return value
    return str(value)


def decode_number(value: object) -> Number:
    """Inverse of :func:`encode_number` (also accepts bare ints)."""
    return to_number(value)


def zero(exact: bool) -> Number:
    return rational(0) if exact else 0.0


def one(exact: bool) -> Number:
    return rational(1) if exact else 1.0


def clamp01(value: Number) -> Number:
    """Clip a raw bound value to [0, 1], preserving arithmetic mode."""
    if isinstance(value, float):
        return min(1.0, max(0.0, value))
    if value < 0:
        return rational(0)
    if value > 1:
        return rational(1)
    return value


_ZERO = rational(0)


def dot_product(coefficients: Sequence[Number], values: Sequence[Number]) -> Number:
    """Scalar product that keeps exact mode exact and float mode float.

    Unrolled for lengths two and three, the only sizes the closed-form
    bound families use; this function dominates bulk verification runs.
    """
    k = len(coefficients)
    if k != len(values):
        raise ValueError(f"length mismatch: {k} coefficients, {len(values)} values")
    if k == 2:
        c0, c1 = coefficients
        v0, v1 = values
        if (
            isinstance(c0, float) or isinstance(c1, float)
            or isinstance(v0, float) or isinstance(v1, float)
        ):
            return float(c0) * float(v0) + float(c1) * float(v1)
        return _ZERO + c0 * v0 + c1 * v1
    if k == 3:
        c0, c1, c2 = coefficients
        v0, v1, v2 = values
        if (
            isinstance(c0, float) or isinstance(c1, float) or isinstance(c2, float)
            or isinstance(v0, float) or isinstance(v1, float) or isinstance(v2, float)
        ):
            return float(c0) * float(v0) + float(c1) * float(v1) + float(c2) * float(v2)
        return _ZERO + c0 * v0 + c1 * v1 + c2 * v2
    exact = True
    for x in coefficients:
        if isinstance(x, float):
            exact = False
            break
    if exact:
        for x in values:
            if isinstance(x, float):
                exact = False
                break
    if exact:
        total = _ZERO
        for c, v in zip(coefficients, values):
            total += c * v
        return total
    return sum(float(c) * float(v) for c, v in zip(coefficients, values))


def _floor(q: Number) -> int:
    if isinstance(q, float):
        import math

        return math.floor(q)
    return int(q.numerator // q.denominator)


def integer_bracket(numerator: Number, denominator: Number, lo: int, hi: int) -> tuple[int, ...]:
    """Integers m in [lo, hi] satisfying m-1 <= numerator/denominator <= m.

    Requires denominator > 0 and lo <= hi.  When the quotient is itself an
    integer t, both t and t+1 satisfy the bracket and both are returned
    (after clamping); otherwise the single admissible integer is returned.
    A quotient outside [lo-1, hi+1] clamps to the nearest endpoint.
    """
    if lo > hi:
        raise ValueError(f"empty bracket range [{lo}, {hi}]")
    if isinstance(numerator, float) or isinstance(denominator, float):
        if float(denominator) <= 0.0:
            raise ValueError("bracket denominator must be positive")
        quotient: Number = float(numerator) / float(denominator)
    else:
        if denominator <= 0:
            raise ValueError("bracket denominator must be positive")
        quotient = rational(numerator) / rational(denominator)
    floor_q = _floor(quotient)
    candidates = [floor_q, floor_q + 1] if quotient == floor_q else [floor_q + 1]
    clamped = sorted({min(hi, max(lo, m)) for m in candidates})
    return tuple(clamped)


def leq(a: Number, b: Number, tolerance: float = DEFAULT_TOLERANCE) -> bool:
    """a <= b, exactly for rationals, within tolerance when a float is involved."""
    if isinstance(a, float) or isinstance(b, float):
        return float(a) <= float(b) + tolerance
    return a <= b


def geq(a: Number, b: Number, tolerance: float = DEFAULT_TOLERANCE) -> bool:
    return leq(b, a, tolerance)


def close(a: Number, b: Number, tolerance: float = DEFAULT_TOLERANCE) -> bool:
    """Equality, exact for rationals, absolute-tolerance for floats."""
    if isinstance(a, float) or isinstance(b, float):
        return abs(float(a) - float(b)) <= tolerance
    return a == b
