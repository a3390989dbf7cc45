"""Finite truncations of subsets of the positive integers.

A :class:`NatSet` is a sorted tuple of positive integers together with the
horizon up to which the truncation is meant to be faithful.  Everything here
is a pure function of immutable inputs.
"""

from __future__ import annotations

import bisect
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

from .errors import InputError, InvalidWindowError, ParseError

__all__ = [
    "NatSet",
    "APWitness",
    "DensityProfile",
    "longest_ap_fixed_difference",
    "ap_profile",
    "apb_score",
    "density_profile",
    "shift_left",
    "squarefree",
    "multiples",
    "arithmetic_progression",
    "read_natset",
    "write_natset",
    "write_density_csv",
]


@dataclass(frozen=True)
class NatSet:
    """Subset of ``[1, horizon]`` stored as a strictly increasing tuple."""

    elements: tuple[int, ...]
    horizon: int

    def __post_init__(self):
        if not isinstance(self.elements, tuple):
            object.__setattr__(self, "elements", tuple(int(a) for a in self.elements))
        self.validate()

    def validate(self):
        h = self.horizon
        if int(h) != h or h < 0:
            raise InputError(f"horizon must be a non-negative integer, got {h!r}")
        els = self.elements
        if not els:
            return
        if els[0] < 1:
            raise InputError(f"elements must be positive, got {els[0]}")
        if els[-1] > h:
            raise InputError(f"element {els[-1]} exceeds horizon {h}")
        if len(els) > 1:
            arr = self.array
            bad = np.flatnonzero(np.diff(arr) <= 0)
            if bad.size:
                i = int(bad[0])
                raise InputError(
                    f"elements must be strictly increasing: {els[i]} then {els[i + 1]}"
                )

    @classmethod
    def from_iterable(cls, values: Iterable[int], horizon: int | None = None) -> NatSet:
        """Build from any iterable; duplicates are merged, ``horizon`` defaults to max."""
        els = sorted({int(v) for v in values})
        if horizon is None:
            horizon = els[-1] if els else 0
        return cls(tuple(els), int(horizon))

    @classmethod
    def from_mask(cls, mask) -> NatSet:
        """Build from a boolean array indexed by integer (index 0 ignored)."""
        mask = np.asarray(mask, dtype=bool)
        idx = np.flatnonzero(mask[1:]) + 1
        return cls(tuple(idx.tolist()), max(len(mask) - 1, 0))

    @classmethod
    def empty(cls, horizon: int = 0) -> NatSet:
        return cls((), horizon)

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.elements, dtype=np.int64)

    @cached_property
    def _members(self) -> frozenset:
        return frozenset(self.elements)

    def mask(self) -> np.ndarray:
        """Boolean indicator of length ``horizon + 1``."""
        m = np.zeros(self.horizon + 1, dtype=bool)
        m[self.array] = True
        return m

    def __contains__(self, n) -> bool:
        return n in self._members

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def count_upto(self, n: int) -> int:
        """``|A ∩ [1, n]|``."""
        return bisect.bisect_right(self.elements, n)

    def clip(self, horizon: int) -> NatSet:
        horizon = min(horizon, self.horizon)
        return NatSet(self.elements[: self.count_upto(horizon)], horizon)

    # set algebra: the result is only trusted up to the smaller horizon
    def _combine(self, other: NatSet, op) -> NatSet:
        h = min(self.horizon, other.horizon)
        a, b = self.clip(h)._members, other.clip(h)._members
        return NatSet(tuple(sorted(op(a, b))), h)

    def __and__(self, other: NatSet) -> NatSet:
        return self._combine(other, frozenset.__and__)

    def __or__(self, other: NatSet) -> NatSet:
        return self._combine(other, frozenset.__or__)

    def __sub__(self, other: NatSet) -> NatSet:
        return self._combine(other, frozenset.__sub__)

    def issubset(self, other: NatSet) -> bool:
        return self._members <= other._members

    def __repr__(self):
        shown = ", ".join(map(str, self.elements[:8]))
        if len(self) > 8:
            shown += ", ..."
        return f"NatSet({{{shown}}}, horizon={self.horizon}, size={len(self)})"


@dataclass(frozen=True)
class APWitness:
    """Arithmetic progression ``start, start + difference, ...`` with ``length`` terms.

    ``length == 0`` (with ``start == 0``) is the empty result.
    """

    start: int
    difference: int
    length: int

    @classmethod
    def empty(cls, difference: int) -> APWitness:
        return cls(0, difference, 0)

    def __bool__(self):
        return self.length > 0

    @property
    def last(self) -> int:
        return self.start + (self.length - 1) * self.difference

    def terms(self) -> list[int]:
        return [self.start + j * self.difference for j in range(self.length)]

    def verify(self, A: NatSet) -> bool:
        """Re-check every term against ``A`` by direct membership."""
        if self.length == 0:
            return True
        if self.start < 1 or self.difference < 1 or self.last > A.horizon:
            return False
        return all(t in A for t in self.terms())


@dataclass(frozen=True)
class DensityProfile:
    kind: str
    samples: tuple[tuple[int, Fraction], ...]
    estimate: Fraction
    window: int = 0
    attained_at: int = field(default=0, compare=False)

    def validate(self):
        prev = 0
        for n, r in self.samples:
            if not 0 <= r <= 1:
                raise InputError(f"ratio {r} at n={n} outside [0, 1]")
            if n <= prev:
                raise InputError("sample indices must increase")
            prev = n
        if not 0 <= self.estimate <= 1:
            raise InputError(f"estimate {self.estimate} outside [0, 1]")


def longest_ap_fixed_difference(A: NatSet, k: int) -> APWitness:
    """Longest AP of difference exactly ``k`` inside ``A``; ties go to the smallest start.

    Dynamic programme over the elements in decreasing order:
    ``run(a) = 1 + run(a + k)`` when ``a + k`` is in ``A``.
    """
    if k < 1:
        raise InputError(f"difference must be >= 1, got {k}")
    run: dict[int, int] = {}
    best_len, best_start = 0, 0
    for a in reversed(A.elements):
        n = run.get(a + k, 0) + 1
        run[a] = n
        if n >= best_len:
            best_len, best_start = n, a
    if best_len == 0:
        return APWitness.empty(k)
    return APWitness(best_start, k, best_len)


def ap_profile(A: NatSet, kmax: int) -> dict[int, APWitness]:
    if kmax < 1:
        raise InputError(f"kmax must be >= 1, got {kmax}")
    return {k: longest_ap_fixed_difference(A, k) for k in range(1, kmax + 1)}


def apb_score(profile: dict[int, APWitness]) -> APWitness:
    """Best witness of a profile: longest, then smallest difference."""
    best = None
    for k in sorted(profile):
        w = profile[k]
        if best is None or w.length > best.length:
            best = w
    return best if best is not None else APWitness.empty(1)


def _geometric_grid(lo: int, hi: int, per_decade: int = 20) -> np.ndarray:
    if lo >= hi:
        return np.array([hi], dtype=np.int64)
    num = max(2, int(math.ceil(per_decade * math.log10(hi / lo))) + 1)
    grid = np.unique(np.rint(np.geomspace(lo, hi, num)).astype(np.int64))
    grid[-1] = hi
    return np.unique(grid)


def density_profile(A: NatSet, kind: str, window: int, per_decade: int = 20) -> DensityProfile:
    """Finite-horizon density estimate.

    ``lower``/``upper``: ratios ``|A ∩ [1, n]| / n`` on a geometric grid of
    ``n`` from ``window`` to the horizon; the estimate is the min/max over the
    final decade ``n >= horizon / 10``.

    ``banach-upper``: ``max_k |A ∩ [k+1, k+window]| / window`` over
    ``0 <= k <= horizon - window``; samples carry the running maximum over
    windows ending at or before each grid point.
    """
    h = A.horizon
    if window < 1 or window > h:
        raise InvalidWindowError(f"window {window} must lie in [1, horizon={h}]")
    grid = _geometric_grid(window, h, per_decade)
    if kind in ("lower", "upper"):
        counts = np.searchsorted(A.array, grid, side="right")
        samples = tuple((int(n), Fraction(int(c), int(n))) for n, c in zip(grid, counts))
        final = [s for s in samples if 10 * s[0] >= h] or [samples[-1]]
        pick = min if kind == "lower" else max
        n_at, est = pick(final, key=lambda s: s[1])
        return DensityProfile(kind, samples, est, window, attained_at=n_at)
    if kind == "banach-upper":
        cum = np.concatenate(([0], np.cumsum(A.mask()[1:], dtype=np.int64)))
        # window count ending at e: cum[e] - cum[e - window], e = window..h
        wc = cum[window:] - cum[: h - window + 1]
        running = np.maximum.accumulate(wc)
        samples = tuple(
            (int(n), Fraction(int(running[n - window]), window)) for n in grid
        )
        best_end = int(np.argmax(wc)) + window
        return DensityProfile(kind, samples, samples[-1][1], window, attained_at=best_end)
    raise InputError(f"unknown density kind {kind!r}")


def shift_left(A: NatSet, n: int) -> NatSet:
    """``(A - n) ∩ [1, horizon - n]``."""
    if n < 0:
        raise InputError(f"shift must be non-negative, got {n}")
    if n == 0:
        return A
    i = A.count_upto(n)
    return NatSet(tuple(a - n for a in A.elements[i:]), max(A.horizon - n, 0))


def squarefree(horizon: int) -> NatSet:
    mask = np.ones(horizon + 1, dtype=bool)
    mask[0] = False
    d = 2
    while d * d <= horizon:
        mask[d * d :: d * d] = False
        d += 1
    return NatSet.from_mask(mask)


def multiples(k: int, horizon: int) -> NatSet:
    return NatSet(tuple(range(k, horizon + 1, k)), horizon)


def arithmetic_progression(start: int, difference: int, length: int, horizon: int | None = None) -> NatSet:
    els = tuple(start + j * difference for j in range(length))
    return NatSet(els, horizon if horizon is not None else (els[-1] if els else 0))


def read_natset(source) -> NatSet:
    """Parse the ``horizon=N`` + one-integer-per-line format.

    ``source`` is a path or an open text stream.  Blank lines and ``#``
    comments are skipped.  Errors carry the offending line number.
    """
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, encoding="utf-8") as fh:
            return read_natset(fh)
    horizon = None
    values = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if horizon is None:
            key, sep, val = line.partition("=")
            if not sep or key.strip() != "horizon":
                raise ParseError("expected header 'horizon=N'", lineno)
            try:
                horizon = int(val)
            except ValueError:
                raise ParseError(f"bad horizon {val.strip()!r}", lineno) from None
            if horizon < 0:
                raise ParseError("horizon must be non-negative", lineno)
            continue
        try:
            v = int(line)
        except ValueError:
            raise ParseError(f"not an integer: {line!r}", lineno) from None
        if v < 1 or v > horizon:
            raise ParseError(f"{v} outside [1, {horizon}]", lineno)
        if values and v <= values[-1]:
            raise ParseError(f"{v} does not increase on {values[-1]}", lineno)
        values.append(v)
    if horizon is None:
        raise ParseError("missing header 'horizon=N'", 1)
    return NatSet(tuple(values), horizon)


def write_natset(A: NatSet, fh=None) -> str | None:
    A.validate()
    out = fh if fh is not None else io.StringIO()
    out.write(f"horizon={A.horizon}\n")
    for a in A.elements:
        out.write(f"{a}\n")
    return out.getvalue() if fh is None else None


def write_density_csv(profile: DensityProfile, fh=None) -> str | None:
    profile.validate()
    out = fh if fh is not None else io.StringIO()
    out.write("n,ratio\n")
    for n, r in profile.samples:
        out.write(f"{n},{float(r):.12g}\n")
    return out.getvalue() if fh is None else None
