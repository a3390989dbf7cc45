"""Finite-support vectors in truncated c0 / lp, their norms and open balls.

Scalars are kept as exact dyadic rationals (``Fraction`` with a power-of-two
denominator) whenever possible.  A non-dyadic rational or a ``float``
degrades the affected coordinate to ``float`` and the vector reports
``exact == False``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral, Rational, Real
from typing import Iterable, Mapping

from .errors import InputError, ParseError

__all__ = [
    "SeqVector",
    "SpaceTag",
    "Ball",
    "C0",
    "is_dyadic",
    "pow2",
    "to_scalar",
    "norm",
    "in_ball",
    "parse_space",
    "parse_scalar",
    "format_scalar",
    "parse_vector",
    "format_vector",
]


def is_dyadic(q: Fraction) -> bool:
    d = q.denominator
    return d & (d - 1) == 0


def pow2(e: int) -> Fraction:
    """Exact ``2**e`` for any integer ``e``."""
    return Fraction(1 << e) if e >= 0 else Fraction(1, 1 << -e)


def to_scalar(v):
    """Coerce to the package scalar type: dyadic ``Fraction`` or ``float``."""
    if isinstance(v, Fraction):
        return v if is_dyadic(v) else float(v)
    if isinstance(v, Integral):
        return Fraction(int(v))
    if isinstance(v, Rational):
        return to_scalar(Fraction(v.numerator, v.denominator))
    if isinstance(v, Real):
        f = float(v)
        if not math.isfinite(f):
            raise InputError(f"non-finite scalar {v!r}")
        return f
    raise InputError(f"unsupported scalar {v!r}")


class SeqVector:
    """Finite-support sequence with 1-based coordinates.

    Immutable; zero entries are never stored.
    """

    __slots__ = ("_coords", "_max_index")

    def __init__(self, coords: Mapping[int, object] | Iterable[tuple[int, object]] = ()):
        items = coords.items() if isinstance(coords, Mapping) else coords
        data = {}
        for i, v in items:
            i = int(i)
            if i < 1:
                raise InputError(f"coordinates are 1-based, got index {i}")
            v = to_scalar(v)
            if v != 0:
                data[i] = v
        self._coords = data
        self._max_index = max(data) if data else 0

    @classmethod
    def _raw(cls, data: dict) -> SeqVector:
        # trusted path: data already coerced and zero-free
        obj = cls.__new__(cls)
        obj._coords = data
        obj._max_index = max(data) if data else 0
        return obj

    @classmethod
    def basis(cls, n: int, value=1) -> SeqVector:
        return cls({n: value})

    @classmethod
    def zero(cls) -> SeqVector:
        return cls._raw({})

    @property
    def coords(self) -> dict:
        return dict(self._coords)

    @property
    def max_index(self) -> int:
        return self._max_index

    @property
    def support(self) -> list[int]:
        return sorted(self._coords)

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self._coords.values())

    def items(self):
        return sorted(self._coords.items())

    def is_zero(self) -> bool:
        return not self._coords

    def __getitem__(self, n: int):
        return self._coords.get(n, Fraction(0))

    def __len__(self):
        return len(self._coords)

    def __add__(self, other: SeqVector) -> SeqVector:
        if not isinstance(other, SeqVector):
            return NotImplemented
        data = dict(self._coords)
        for i, v in other._coords.items():
            s = to_scalar(data.get(i, 0) + v)
            if s == 0:
                data.pop(i, None)
            else:
                data[i] = s
        return SeqVector._raw(data)

    def __neg__(self) -> SeqVector:
        return SeqVector._raw({i: -v for i, v in self._coords.items()})

    def __sub__(self, other: SeqVector) -> SeqVector:
        if not isinstance(other, SeqVector):
            return NotImplemented
        return self + (-other)

    def __mul__(self, c) -> SeqVector:
        c = to_scalar(c)
        if c == 0:
            return SeqVector.zero()
        data = {i: to_scalar(c * v) for i, v in self._coords.items()}
        # float products can underflow to zero
        return SeqVector._raw({i: v for i, v in data.items() if v != 0})

    __rmul__ = __mul__

    def restrict(self, lo: int, hi: int) -> SeqVector:
        """Coordinates with ``lo <= index <= hi``."""
        return SeqVector._raw({i: v for i, v in self._coords.items() if lo <= i <= hi})

    def __eq__(self, other):
        if not isinstance(other, SeqVector):
            return NotImplemented
        return self._coords == other._coords

    def __hash__(self):
        return hash(frozenset(self._coords.items()))

    def __repr__(self):
        if len(self._coords) > 8:
            head = SeqVector._raw(dict(self.items()[:8]))
            return f"SeqVector({format_vector(head)},... [{len(self._coords)} entries])"
        return f"SeqVector({format_vector(self) or '0'})"


@dataclass(frozen=True)
class SpaceTag:
    kind: str = "c0"
    p: float | None = None

    def __post_init__(self):
        if self.kind == "c0":
            if self.p is not None:
                raise InputError("c0 takes no exponent")
        elif self.kind == "lp":
            if self.p is None or not self.p > 1:
                raise InputError(f"lp needs p > 1, got {self.p!r}")
        else:
            raise InputError(f"unknown space kind {self.kind!r}")

    def __str__(self):
        return "c0" if self.kind == "c0" else f"lp:{self.p:g}"


C0 = SpaceTag("c0")


def parse_space(text: str) -> SpaceTag:
    """``"c0"`` or ``"lp:<p>"``."""
    text = text.strip()
    if text == "c0":
        return C0
    if text.startswith("lp:"):
        try:
            p = float(text[3:])
        except ValueError:
            raise ParseError(f"bad exponent in {text!r}") from None
        return SpaceTag("lp", int(p) if p.is_integer() else p)
    raise ParseError(f"unknown space {text!r}; expected c0 or lp:<p>")


def _int_power(p) -> int | None:
    if isinstance(p, Integral):
        return int(p)
    if isinstance(p, float) and p.is_integer():
        return int(p)
    return None


def norm(x: SeqVector, space: SpaceTag = C0):
    """c0: ``max |x_n|`` (exact for dyadic input); lp: ``(sum |x_n|^p)^(1/p)`` as float."""
    vals = x._coords.values()
    if not vals:
        return Fraction(0)
    if space.kind == "c0":
        return max(abs(v) for v in vals)
    p = float(space.p)
    # scale by the max to avoid overflow/underflow in the power sum
    big = max(abs(v) for v in vals)
    m = float(big)
    if m == 0.0:
        return 0.0
    return m * sum(float(abs(v) / big) ** p for v in vals) ** (1 / p)


def _norm_below(x: SeqVector, r, space: SpaceTag) -> bool:
    """Exact ``norm(x) < r`` whenever the arithmetic allows it."""
    if space.kind == "c0":
        return norm(x, space) < r
    ip = _int_power(space.p)
    if ip is not None and x.exact and isinstance(r, Fraction):
        return sum(abs(v) ** ip for v in x._coords.values()) < r**ip
    return norm(x, space) < float(r)


@dataclass(frozen=True)
class Ball:
    """Open ball ``{y : ||y - center|| < radius}``."""

    center: SeqVector
    radius: object
    space: SpaceTag = C0

    def __post_init__(self):
        r = to_scalar(self.radius)
        if not r > 0:
            raise InputError(f"radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "radius", r)

    def __contains__(self, x: SeqVector) -> bool:
        return in_ball(x, self)


def in_ball(x: SeqVector, B: Ball) -> bool:
    return _norm_below(x - B.center, B.radius, B.space)


# literal format: "i:value" pairs, comma separated; value is decimal or p/2^q

_DYADIC = re.compile(r"^\s*([+-]?\d+)\s*/\s*2\s*\^\s*(\d+)\s*$")


def parse_scalar(text: str):
    m = _DYADIC.match(text)
    if m:
        return to_scalar(Fraction(int(m.group(1)), 1 << int(m.group(2))))
    try:
        return to_scalar(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        pass
    try:
        return to_scalar(float(text))
    except ValueError:
        raise ParseError(f"bad scalar {text!r}") from None


def format_scalar(v) -> str:
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        q = v.denominator.bit_length() - 1
        return f"{v.numerator}/2^{q}"
    return repr(float(v))


def parse_vector(text: str) -> SeqVector:
    """Parse ``"1:1, 3:-3/2^4, 5:0.25"``; an empty string is the zero vector."""
    text = text.strip()
    if not text or text == "0":
        return SeqVector.zero()
    coords = {}
    for part in text.split(","):
        idx, sep, val = part.partition(":")
        if not sep:
            raise ParseError(f"expected 'i:value', got {part.strip()!r}")
        try:
            i = int(idx)
        except ValueError:
            raise ParseError(f"bad index {idx.strip()!r}") from None
        if i < 1:
            raise ParseError(f"index must be >= 1, got {i}")
        if i in coords:
            raise ParseError(f"index {i} given twice")
        coords[i] = parse_scalar(val)
    return SeqVector(coords)


def format_vector(x: SeqVector) -> str:
    return ",".join(f"{i}:{format_scalar(v)}" for i, v in x.items())
