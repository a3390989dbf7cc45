"""Weight sequences for backward shifts.

Rules whose weights are all exact powers of two carry integer exponents, so
``prod_{v<=n} w_v = 2**E(n)`` is tracked without any rounding.  Other rules
fall back to ``sum log2|w_v|``.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction

import numpy as np

from ..errors import InputError, ParseError
from ..natset import NatSet
from ..seqspace import format_scalar, parse_scalar, pow2, to_scalar

__all__ = [
    "WeightRule",
    "ConstantWeights",
    "ExplicitWeights",
    "CounterexampleWeights",
    "in_counterexample_set",
    "counterexample_set",
    "counterexample_mask",
    "parse_rule",
    "running_product_exponent",
]


def _log2_of_power(v) -> int | None:
    """``m`` if ``v == 2**m`` exactly, else None."""
    if not isinstance(v, Fraction) or v <= 0:
        return None
    p, q = v.numerator, v.denominator
    if p & (p - 1) == 0 and q & (q - 1) == 0:
        return p.bit_length() - q.bit_length()
    return None


class WeightRule:
    """Base class: a nonzero weight ``w_n`` for every ``n >= 1``.

    Subclasses implement :meth:`weight` and may override :meth:`_build_exponents`
    with a vectorised version.  Prefix exponents are memoised behind a lock.
    """

    name = "rule"
    #: every weight is an exact (positive) power of two
    power_of_two = False
    #: largest valid index, None for unbounded rules
    limit: int | None = None

    def __init__(self):
        self._lock = threading.Lock()
        self._cache = None

    def weight(self, n: int):
        raise NotImplementedError

    def weight_exponent(self, n: int) -> int:
        e = _log2_of_power(self.weight(n))
        if e is None:
            raise InputError(f"w_{n} is not a power of two")
        return e

    def _check_index(self, n: int):
        if n < 1:
            raise InputError(f"weight index must be >= 1, got {n}")
        if self.limit is not None and n > self.limit:
            raise InputError(f"w_{n} requested but the rule only defines {self.limit} weights")

    def _build_exponents(self, n_max: int) -> np.ndarray:
        if self.power_of_two:
            e = np.fromiter(
                (self.weight_exponent(n) for n in range(1, n_max + 1)), np.int64, n_max
            )
        else:
            e = np.fromiter(
                (math.log2(abs(float(self.weight(n)))) for n in range(1, n_max + 1)),
                np.float64,
                n_max,
            )
        return np.concatenate((np.zeros(1, dtype=e.dtype), np.cumsum(e)))

    def exponents(self, n_max: int) -> np.ndarray:
        """Array ``E[0..n_max]`` with ``prod_{v<=n} w_v = 2**E[n]`` (``E[0] == 0``).

        Integer dtype for power-of-two rules, float (log2 of the absolute
        product) otherwise.
        """
        if n_max < 0:
            raise InputError(f"n_max must be >= 0, got {n_max}")
        if self.limit is not None and n_max > self.limit:
            raise InputError(f"exponents up to {n_max} requested but the rule only defines {self.limit} weights")
        with self._lock:
            if self._cache is None or len(self._cache) <= n_max:
                size = max(n_max, 2 * (len(self._cache) - 1) if self._cache is not None else 0, 64)
                if self.limit is not None:
                    size = min(size, self.limit)
                self._cache = self._build_exponents(size)
            cache = self._cache
        return cache[: n_max + 1]

    def prefix_exponent(self, n: int):
        e = self.exponents(n)[n]
        return int(e) if self.power_of_two else float(e)

    def span_product(self, a: int, b: int):
        """``prod_{v=a+1}^{b} w_v`` (empty product 1 when ``b <= a``)."""
        if b <= a:
            return Fraction(1)
        if self.power_of_two:
            E = self.exponents(b)
            return pow2(int(E[b]) - int(E[a]))
        prod = Fraction(1)
        for v in range(a + 1, b + 1):
            prod = to_scalar(prod * self.weight(v))
        return prod

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class ConstantWeights(WeightRule):
    def __init__(self, lam):
        super().__init__()
        lam = to_scalar(lam)
        if lam == 0:
            raise InputError("weights must be nonzero")
        self.lam = lam
        self._exp = _log2_of_power(lam)
        self.power_of_two = self._exp is not None
        self.name = f"const:{format_scalar(lam)}"

    def weight(self, n: int):
        self._check_index(n)
        return self.lam

    def _build_exponents(self, n_max: int) -> np.ndarray:
        n = np.arange(n_max + 1, dtype=np.int64)
        if self.power_of_two:
            return n * self._exp
        return n * math.log2(abs(float(self.lam)))


class ExplicitWeights(WeightRule):
    def __init__(self, values, name=None):
        super().__init__()
        vals = tuple(to_scalar(v) for v in values)
        if not vals:
            raise InputError("explicit weight list is empty")
        for i, v in enumerate(vals, start=1):
            if v == 0:
                raise InputError(f"weights must be nonzero (w_{i} = 0)")
        self.values = vals
        self.limit = len(vals)
        self.power_of_two = all(_log2_of_power(v) is not None for v in vals)
        self.name = name or f"list:{len(vals)}"

    def weight(self, n: int):
        self._check_index(n)
        return self.values[n - 1]


# --- the counterexample ----------------------------------------------------
#
# S = union over l >= 1, j >= 1 of [l*10^j - j, l*10^j + j]
# w_n = 2 on S, 2^{-E(n-1)} on (S+1)\S, 1 elsewhere, so E resets to 0 right
# after every maximal run of S.


def in_counterexample_set(n: int) -> bool:
    """Membership in S; O(log n) by testing the nearest multiple of each 10^j."""
    if n < 1:
        return False
    j, p = 1, 10
    while p - j <= n:
        l = (n + p // 2) // p
        if l >= 1 and abs(n - l * p) <= j:
            return True
        j += 1
        p *= 10
    return False


def counterexample_mask(horizon: int) -> np.ndarray:
    """Indicator of S on ``0..horizon``."""
    mask = np.zeros(horizon + 1, dtype=bool)
    j, p = 1, 10
    while p - j <= horizon:
        centers = np.arange(p, horizon + j + 1, p, dtype=np.int64)
        for off in range(-j, j + 1):
            idx = centers + off
            mask[idx[(idx >= 1) & (idx <= horizon)]] = True
        j += 1
        p *= 10
    return mask


def counterexample_set(horizon: int) -> NatSet:
    return NatSet.from_mask(counterexample_mask(horizon))


class CounterexampleWeights(WeightRule):
    name = "paper-counterexample"
    power_of_two = True

    def _run_position(self, n: int) -> int:
        # position of n inside its maximal run of S, 0 if n is not in S
        if not in_counterexample_set(n):
            return 0
        m = n
        while m > 1 and in_counterexample_set(m - 1):
            m -= 1
        return n - m + 1

    def weight_exponent(self, n: int) -> int:
        self._check_index(n)
        if in_counterexample_set(n):
            return 1
        return -self._run_position(n - 1) if n > 1 else 0

    def weight(self, n: int):
        return pow2(self.weight_exponent(n))

    def prefix_exponent(self, n: int) -> int:
        if n < 0:
            raise InputError(f"n must be >= 0, got {n}")
        return self._run_position(n)

    def _build_exponents(self, n_max: int) -> np.ndarray:
        mask = counterexample_mask(n_max)
        c = np.cumsum(mask, dtype=np.int64)
        base = np.maximum.accumulate(np.where(mask, 0, c))
        return c - base


def running_product_exponent(rule: WeightRule, n: int):
    """Exponent ``e`` with ``prod_{v=1}^{n} w_v = 2**e``.

    Exact ``int`` for power-of-two rules, otherwise ``sum log2|w_v|`` as float.
    """
    if n < 0:
        raise InputError(f"n must be >= 0, got {n}")
    return rule.prefix_exponent(n)


def parse_rule(text: str) -> WeightRule:
    """``const:<scalar>``, ``list:@path``, ``list:w1,w2,...`` or ``paper-counterexample`` (alias ``counterexample``)."""
    text = text.strip()
    if text in ("paper-counterexample", "counterexample"):
        return CounterexampleWeights()
    kind, sep, arg = text.partition(":")
    if sep and kind == "const":
        try:
            return ConstantWeights(parse_scalar(arg))
        except InputError as exc:
            raise ParseError(f"bad rule {text!r}: {exc}") from None
    if sep and kind == "list":
        if arg.startswith("@"):
            path = arg[1:]
            vals = []
            try:
                with open(path, encoding="utf-8") as fh:
                    for lineno, raw in enumerate(fh, start=1):
                        line = raw.split("#", 1)[0].strip()
                        if line:
                            try:
                                vals.append(parse_scalar(line))
                            except ParseError as exc:
                                raise ParseError(str(exc), lineno) from None
            except OSError as exc:
                raise ParseError(f"cannot read weight file {path!r}: {exc}") from None
            label = f"list:@{path}"
        else:
            vals = [parse_scalar(v) for v in arg.split(",") if v.strip()]
            label = f"list:{arg}"
        try:
            return ExplicitWeights(vals, name=label)
        except InputError as exc:
            raise ParseError(f"bad rule {text!r}: {exc}") from None
    raise ParseError(f"unknown weight rule {text!r}")
