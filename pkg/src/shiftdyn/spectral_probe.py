"""Finite-dimensional probe of the binomial-transform argument.

For a matrix ``S``, vector ``x`` and functional ``x*``,

    f(n) = sum_{k=0}^{n} C(n, k) Re<(S - I)^k x, x*> = Re<S^n x, x*>,

and ``n`` is a return time of ``x`` to
``U = {y : Re<y, x*> > 0, Re<S y, x*> < 0}`` exactly when ``f(n) > 0 > f(n+1)``.
Integer, ``Fraction`` and complex entries stay exact through ``dtype=object``.
"""

from __future__ import annotations

import csv
import math
from fractions import Fraction
from numbers import Integral, Rational

import numpy as np

from .errors import DimensionMismatchError, InputError, ParseError
from .natset import DensityProfile, NatSet, density_profile

__all__ = [
    "FiniteOperator",
    "Functional",
    "binomial_transform",
    "binomial_scale",
    "pairing_sequence",
    "return_count_by_sign_change",
    "nilpotency_check",
    "read_matrix_csv",
]


def _is_exact(v) -> bool:
    return isinstance(v, (Integral, Rational)) and not isinstance(v, bool)


def _as_array(data) -> np.ndarray:
    arr = np.asarray(data, dtype=object)
    flat = list(arr.flat)
    if flat and all(_is_exact(v) for v in flat):
        vals = [v if isinstance(v, Fraction) else int(v) for v in flat]
        out = np.empty(len(vals), dtype=object)
        out[:] = vals
        return out.reshape(arr.shape)
    if any(isinstance(v, complex) for v in flat):
        return np.asarray(data, dtype=complex)
    return np.asarray(data, dtype=float)


class FiniteOperator:
    """Square matrix acting on column vectors."""

    def __init__(self, entries):
        a = _as_array(entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InputError(f"operator must be a non-empty square matrix, got shape {a.shape}")
        self.entries = a

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def exact(self) -> bool:
        return self.entries.dtype == object

    def __matmul__(self, v):
        return self.entries.dot(v)

    def minus_identity(self) -> FiniteOperator:
        e = self.entries.copy()
        for i in range(self.dim):
            e[i, i] = e[i, i] - 1
        return FiniteOperator(e)

    @classmethod
    def identity(cls, d: int, scale=1) -> FiniteOperator:
        e = np.zeros((d, d), dtype=object)
        for i in range(d):
            e[i, i] = scale
        return cls(e)


class Functional:
    def __init__(self, coefficients):
        c = _as_array(coefficients)
        if c.ndim != 1 or c.size == 0:
            raise InputError("functional must be a non-empty vector")
        if all(v == 0 for v in c.flat):
            raise InputError("functional must be nonzero")
        self.coefficients = c

    def __call__(self, y):
        # bilinear pairing <y, x*>, no conjugation
        return sum((a * b for a, b in zip(y, self.coefficients)), 0)


def _re(v):
    return v.real if isinstance(v, complex) or isinstance(v, np.complexfloating) else v


def _check_dims(S: FiniteOperator, x, xstar: Functional):
    x = _as_array(x)
    if x.ndim != 1 or x.shape[0] != S.dim or xstar.coefficients.shape[0] != S.dim:
        raise DimensionMismatchError(
            f"operator is {S.dim}x{S.dim}, x has shape {x.shape}, x* has {xstar.coefficients.shape}"
        )
    return x


def binomial_transform(S: FiniteOperator, x, xstar: Functional, n: int):
    """Return ``(lhs, rhs)``: the binomial sum over ``(S - I)^k`` and ``Re<S^n x, x*>``."""
    if n < 0:
        raise InputError(f"n must be >= 0, got {n}")
    x = _check_dims(S, x, xstar)
    N = S.minus_identity()
    lhs = 0
    y = x
    for k in range(n + 1):
        lhs = lhs + math.comb(n, k) * _re(xstar(y))
        y = N @ y
    z = x
    for _ in range(n):
        z = S @ z
    return lhs, _re(xstar(z))


def binomial_scale(S: FiniteOperator, x, xstar: Functional, n: int) -> float:
    """``sum_k C(n, k) |Re<(S - I)^k x, x*>|``, the size of the terms being summed.

    Float evaluation of the binomial side loses about ``eps * scale``
    absolutely, which can dwarf ``|Re<S^n x, x*>|`` when the terms cancel.
    """
    x = _check_dims(S, x, xstar)
    N = S.minus_identity()
    total = 0.0
    y = x
    for k in range(n + 1):
        total += math.comb(n, k) * abs(float(_re(xstar(y))))
        y = N @ y
    return total


def pairing_sequence(S: FiniteOperator, x, xstar: Functional, length: int) -> list:
    """``[Re<S^n x, x*> for n in 0..length-1]`` by iterated application."""
    x = _check_dims(S, x, xstar)
    out = []
    y = x
    for _ in range(length):
        out.append(_re(xstar(y)))
        y = S @ y
    return out


def return_count_by_sign_change(
    S: FiniteOperator, x, xstar: Functional, horizon: int, window: int = 1
) -> tuple[NatSet, DensityProfile]:
    """``{n in [1, horizon] : f(n) > 0 and f(n+1) < 0}`` and its lower-density profile."""
    if horizon < 1:
        raise InputError(f"horizon must be >= 1, got {horizon}")
    f = pairing_sequence(S, x, xstar, horizon + 2)
    hits = tuple(n for n in range(1, horizon + 1) if f[n] > 0 and f[n + 1] < 0)
    N = NatSet(hits, horizon)
    return N, density_profile(N, "lower", min(window, horizon))


def nilpotency_check(S: FiniteOperator, rtol: float = 1e-12) -> tuple[bool, int | None]:
    """``(True, index)`` if ``S^d == 0``, where index is the least ``m`` with ``S^m == 0``.

    Exact for integer/rational matrices; float matrices use a relative
    tolerance scaled by ``max(1, ||S||)^m``.
    """
    A = S.entries
    scale = 1.0 if S.exact else max(1.0, float(np.abs(A).max()))
    P = A
    for m in range(1, S.dim + 1):
        if S.exact:
            zero = all(v == 0 for v in P.flat)
        else:
            zero = bool(np.abs(P).max() <= rtol * scale**m)
        if zero:
            return True, m
        P = P.dot(A)
    return False, None


def read_matrix_csv(source) -> FiniteOperator:
    """Rows of comma-separated scalars (ints, ``p/q`` fractions or floats)."""
    if isinstance(source, str) or hasattr(source, "__fspath__"):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_matrix_csv(fh)
    rows = []
    for lineno, row in enumerate(csv.reader(source), start=1):
        row = [c.strip() for c in row]
        if not row or all(not c for c in row) or row[0].startswith("#"):
            continue
        vals = []
        for c in row:
            try:
                vals.append(int(c))
            except ValueError:
                try:
                    vals.append(Fraction(c))
                except ValueError:
                    try:
                        vals.append(float(c))
                    except ValueError:
                        raise ParseError(f"bad matrix entry {c!r}", lineno) from None
        if rows and len(vals) != len(rows[0]):
            raise ParseError(f"row has {len(vals)} entries, expected {len(rows[0])}", lineno)
        rows.append(vals)
    if not rows:
        raise ParseError("empty matrix", 1)
    try:
        return FiniteOperator(rows)
    except InputError as exc:
        raise ParseError(str(exc)) from None
