"""Exact scalar values carried on edges.

Transmissions are ints, ``fractions.Fraction``s, complex numbers with exact
rational real/imaginary parts (:class:`ComplexQ`), or tuples thereof (built by
the ``concat`` operator).  All arithmetic stays exact; a :class:`ComplexQ`
whose imaginary part cancels to zero is normalized back to a plain rational so
that equality and hashing behave uniformly across types.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import ExpressionTypeError

Rational = Union[int, Fraction]


@dataclass(frozen=True)
class ComplexQ:
    """A complex number with exact rational parts.  ``im`` is never zero."""

    re: Fraction
    im: Fraction

    def __str__(self) -> str:
        sign = "+" if self.im >= 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}j"

    def __repr__(self) -> str:
        return f"ComplexQ({self.re!r}, {self.im!r})"


Scalar = Union[int, Fraction, ComplexQ]
Value = Union[Scalar, tuple]


def make_complex(re, im) -> Scalar:
    """Build an exact complex scalar, demoting to a rational when im == 0."""
    re, im = Fraction(re), Fraction(im)
    if im == 0:
        return _demote(re)
    return ComplexQ(re, im)


def _demote(x: Fraction) -> Rational:
    return int(x) if x.denominator == 1 else x


def _parts(v: Scalar) -> tuple[Fraction, Fraction]:
    if isinstance(v, ComplexQ):
        return v.re, v.im
    if isinstance(v, (int, Fraction)):
        return Fraction(v), Fraction(0)
    raise ExpressionTypeError(f"not a numeric scalar: {v!r}")


_REAL = (int, Fraction, float)  # floats appear only when sampling gaussian systems


def vadd(a: Scalar, b: Scalar) -> Scalar:
    if isinstance(a, _REAL) and isinstance(b, _REAL):
        return a + b
    (ar, ai), (br, bi) = _parts(a), _parts(b)
    return make_complex(ar + br, ai + bi)


def vsub(a: Scalar, b: Scalar) -> Scalar:
    if isinstance(a, _REAL) and isinstance(b, _REAL):
        return a - b
    return vadd(a, vneg(b))


def vneg(a: Scalar) -> Scalar:
    if isinstance(a, _REAL):
        return -a
    ar, ai = _parts(a)
    return make_complex(-ar, -ai)


def vmul(a: Scalar, b: Scalar) -> Scalar:
    if isinstance(a, _REAL) and isinstance(b, _REAL):
        return a * b
    (ar, ai), (br, bi) = _parts(a), _parts(b)
    return make_complex(ar * br - ai * bi, ar * bi + ai * br)


def require_bit(v: Value, op: str) -> int:
    if isinstance(v, int) and v in (0, 1):
        return v
    raise ExpressionTypeError(f"{op} needs a 0/1 value, got {v!r}")


def require_int(v: Value, op: str) -> int:
    if isinstance(v, int):
        return v
    raise ExpressionTypeError(f"{op} needs an integer value, got {v!r}")


def value_to_json(v: Value):
    """Encode a value for the JSON system format."""
    if isinstance(v, bool):
        raise ExpressionTypeError("booleans are not transmission values")
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        return [v.numerator, v.denominator]
    if isinstance(v, ComplexQ):
        return {
            "re": [v.re.numerator, v.re.denominator],
            "im": [v.im.numerator, v.im.denominator],
        }
    if isinstance(v, tuple):
        return {"tuple": [value_to_json(x) for x in v]}
    raise ExpressionTypeError(f"cannot serialize value {v!r}")


def value_from_json(obj) -> Value:
    """Decode a value from the JSON system format."""
    if isinstance(obj, bool):
        raise ExpressionTypeError("booleans are not transmission values")
    if isinstance(obj, int):
        return obj
    if isinstance(obj, list):
        if len(obj) != 2 or not all(isinstance(x, int) for x in obj):
            raise ExpressionTypeError(f"rational must be [num, den]: {obj!r}")
        return _demote(Fraction(obj[0], obj[1]))
    if isinstance(obj, dict):
        if "tuple" in obj:
            return tuple(value_from_json(x) for x in obj["tuple"])
        if "re" in obj and "im" in obj:
            re = Fraction(obj["re"][0], obj["re"][1])
            im = Fraction(obj["im"][0], obj["im"][1])
            return make_complex(re, im)
    raise ExpressionTypeError(f"cannot parse value {obj!r}")


def value_str(v: Value) -> str:
    """Compact display form, also used for CSV cells."""
    if isinstance(v, tuple):
        return "(" + ";".join(value_str(x) for x in v) + ")"
    return str(v)
