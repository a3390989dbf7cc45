"""Backward shift action, orbits and return-time sets.

Convention: ``(B_w x)_n = w_{n+1} x_{n+1}``, i.e. ``B_w e_1 = 0`` and
``B_w e_n = w_n e_{n-1}``.  ``F`` is the right inverse
``F e_n = e_{n+1} / w_{n+1}`` so that ``B_w F = I``.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import InputError
from ..natset import NatSet
from ..seqspace import Ball, SeqVector, in_ball, to_scalar
from .weights import WeightRule

__all__ = [
    "OrbitRecord",
    "apply_shift",
    "apply_power",
    "forward_shift",
    "orbit",
    "return_set",
    "power_subsample",
]


@dataclass(frozen=True)
class OrbitRecord:
    steps: tuple[tuple[int, SeqVector], ...]
    exact: bool

    def __getitem__(self, n: int) -> SeqVector:
        return self.steps[n][1]

    def __len__(self):
        return len(self.steps)


def apply_shift(rule: WeightRule, x: SeqVector) -> SeqVector:
    data = {}
    for i, v in x._coords.items():
        if i >= 2:
            data[i - 1] = to_scalar(rule.weight(i) * v)
    return SeqVector._raw(data)


def apply_power(rule: WeightRule, x: SeqVector, k: int) -> SeqVector:
    """``B_w^k x`` in one pass: ``(B^k x)_n = (prod_{v=n+1}^{n+k} w_v) x_{n+k}``."""
    if k < 0:
        raise InputError(f"power must be >= 0, got {k}")
    data = {}
    for i, v in x._coords.items():
        if i > k:
            data[i - k] = to_scalar(rule.span_product(i - k, i) * v)
    return SeqVector._raw(data)


def forward_shift(rule: WeightRule, y: SeqVector, m: int) -> SeqVector:
    """``F^m y`` with ``F^m e_n = e_{n+m} / prod_{v=n+1}^{n+m} w_v``."""
    if m < 0:
        raise InputError(f"power must be >= 0, got {m}")
    data = {}
    for i, v in y._coords.items():
        data[i + m] = to_scalar(v / rule.span_product(i, i + m))
    return SeqVector._raw(data)


def orbit(rule: WeightRule, x: SeqVector, T: int) -> OrbitRecord:
    """Steps ``0..T`` of ``B_w^n x``; once the orbit hits zero it stays there."""
    if T < 0:
        raise InputError(f"T must be >= 0, got {T}")
    steps = [(0, x)]
    cur = x
    for n in range(1, T + 1):
        if not cur.is_zero():
            cur = apply_shift(rule, cur)
        steps.append((n, cur))
    return OrbitRecord(tuple(steps), all(v.exact for _, v in steps))


def return_set(rule: WeightRule, x: SeqVector, U: Ball, horizon: int) -> NatSet:
    """``{n in [1, horizon] : B_w^n x in U}`` by orbit replay."""
    if horizon < 0:
        raise InputError(f"horizon must be >= 0, got {horizon}")
    hits = []
    cur = x
    for n in range(1, horizon + 1):
        cur = apply_shift(rule, cur)
        if cur.is_zero():
            if in_ball(cur, U):
                hits.extend(range(n, horizon + 1))
            break
        if in_ball(cur, U):
            hits.append(n)
    return NatSet(tuple(hits), horizon)


def power_subsample(N: NatSet, p: int) -> NatSet:
    """``{n : p*n in N}``: the return set of ``T^p`` at the same ``x`` and ``U``."""
    if p < 1:
        raise InputError(f"p must be >= 1, got {p}")
    if p == 1:
        return N
    return NatSet(tuple(a // p for a in N.elements if a % p == 0), N.horizon // p)
