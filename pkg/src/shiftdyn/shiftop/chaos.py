"""Chaos diagnostics for weighted backward shifts.

``B_w`` is chaotic on c0/lp iff ``sum_n e_n / prod_{v<=n} w_v`` converges
there.  At a finite horizon this can only be probed, so every verdict below
is a documented heuristic on the prefix exponents ``E(n)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..errors import ConstructionFailed, DegenerateInputError, ExtensionRejected, InputError
from ..natset import _geometric_grid
from ..seqspace import C0, SeqVector, SpaceTag, format_vector, norm, pow2, to_scalar
from .orbit import forward_shift
from .weights import WeightRule

__all__ = [
    "ChaosVerdict",
    "ProbeResult",
    "HypercyclicConstruction",
    "chaos_criterion",
    "reset_indices",
    "periodic_extension",
    "dense_periodic_probe",
    "construct_hypercyclic_vector",
]

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

# float exponents within this of 0 count as "product <= 1"
_FLOAT_SLACK = 1e-9


@dataclass(frozen=True)
class ChaosVerdict:
    verdict: str
    witnesses: tuple[int, ...]
    exponent_samples: tuple[tuple[int, object], ...]
    space: str = "c0"
    horizon: int = 0
    detail: dict = field(default_factory=dict, compare=False)

    def to_dict(self, max_witnesses=None):
        w = list(self.witnesses)
        if max_witnesses is not None:
            w = w[:max_witnesses]
        return {
            "verdict": self.verdict,
            "witnesses": w,
            "n_witnesses": len(self.witnesses),
            "exponent_samples": [[n, e] for n, e in self.exponent_samples],
            "space": self.space,
            "horizon": self.horizon,
            "detail": self.detail,
        }


def _at_most_one(E: np.ndarray) -> np.ndarray:
    if np.issubdtype(E.dtype, np.integer):
        return E <= 0
    return E <= _FLOAT_SLACK


def reset_indices(rule: WeightRule, horizon: int) -> np.ndarray:
    """Indices ``n <= horizon`` where the running product drops back to ``<= 1``."""
    E = rule.exponents(horizon)
    low = _at_most_one(E)
    return np.flatnonzero(low[1:] & ~low[:-1]) + 1


def _chunks(arr: np.ndarray, parts: int):
    return [c for c in np.array_split(arr, parts) if c.size]


def _nondecreasing(vals) -> bool:
    return all(a <= b for a, b in zip(vals, vals[1:]))


def chaos_criterion(
    rule: WeightRule,
    space: SpaceTag = C0,
    horizon: int = 10_000,
    growth_floor: float = 20,
    blocks: int = 10,
) -> ChaosVerdict:
    """Finite-horizon verdict on convergence of ``sum e_n / prod_{v<=n} w_v``.

    Looks only at the top half ``[horizon // 2, horizon]``.

    - c0: *pass* when ``min E >= growth_floor`` there and the minima of
      ``blocks`` consecutive sub-blocks are nondecreasing.
    - lp: *pass* when ``log2 sum 2^{-p E} <= -growth_floor`` over the top half
      and the per-block tail sums are nonincreasing.
    - *fail* when the product is ``<= 1`` at two or more top-half indices
      (the series terms do not go to zero).  Witnesses are the reset indices
      over ``[1, horizon]``; a rule that never rises above 1 has no resets and
      reports its first top-half indices instead.
    - *inconclusive* otherwise.
    """
    if horizon < 10:
        raise InputError(f"horizon must be >= 10, got {horizon}")
    E = rule.exponents(horizon)
    half = horizon // 2
    top = E[half:]
    low_top = _at_most_one(top)
    recurring = int(low_top.sum()) >= 2

    if space.kind == "c0":
        mins = [c.min() for c in _chunks(top, blocks)]
        score = float(top.min())
        growth_ok = score >= growth_floor and _nondecreasing(mins)
        detail = {"top_half_min_exponent": _py(top.min())}
    else:
        p = float(space.p)
        logs = -p * top.astype(np.float64)
        tails = [float(np.logaddexp2.reduce(c)) for c in _chunks(logs, blocks)]
        tail = float(np.logaddexp2.reduce(logs))
        growth_ok = tail <= -growth_floor and _nondecreasing(tails[::-1])
        detail = {"top_half_log2_tail": tail}

    detail["top_half_low_count"] = int(low_top.sum())
    grid = _geometric_grid(1, horizon, 10)
    samples = tuple((int(n), _py(E[n])) for n in grid)

    if recurring:
        resets = reset_indices(rule, horizon)
        if resets.size:
            witnesses = tuple(int(n) for n in resets)
        else:
            witnesses = tuple(int(n) + half for n in np.flatnonzero(low_top)[:100])
        return ChaosVerdict(FAIL, witnesses, samples, str(space), horizon, detail)
    if growth_ok:
        return ChaosVerdict(PASS, (), samples, str(space), horizon, detail)
    return ChaosVerdict(INCONCLUSIVE, (), samples, str(space), horizon, detail)


def _py(v):
    return int(v) if isinstance(v, (np.integer, int)) else float(v)


# --- periodic vectors -------------------------------------------------------


def _block_maxima(x: SeqVector, lo: int, hi: int, k: int) -> list:
    # maxima of |x| over k-blocks ending at hi, hi-k, ... down to lo, in increasing order
    out = []
    end = hi
    while end - k + 1 >= lo:
        start = end - k + 1
        out.append(max((abs(x[i]) for i in range(start, end + 1)), default=Fraction(0)))
        end -= k
    return out[::-1]


def periodic_extension(
    prefix,
    rule: WeightRule,
    space: SpaceTag = C0,
    horizon: int = 256,
    tol=Fraction(1, 1 << 20),
) -> SeqVector:
    """Extend ``prefix`` (length ``k``) to a ``B_w^k``-fixed vector on ``[1, horizon]``.

    Uses ``x_{n+k} = x_n / prod_{v=n+1}^{n+k} w_v``.  The truncation is
    accepted when the final tenth of the window (at least ``k`` coordinates)
    has norm below ``tol`` and its per-period maxima are nonincreasing;
    otherwise :class:`ExtensionRejected` is raised with that tail norm.
    """
    vals = [to_scalar(v) for v in prefix]
    k = len(vals)
    if k < 1 or all(v == 0 for v in vals):
        raise DegenerateInputError("prefix must contain a nonzero entry")
    if horizon < 2 * k:
        raise InputError(f"horizon {horizon} too small for period {k}")
    coords = dict(enumerate(vals, start=1))
    if rule.power_of_two:
        E = rule.exponents(horizon)
        for n in range(1, horizon - k + 1):
            v = coords[n]
            coords[n + k] = v * pow2(int(E[n]) - int(E[n + k])) if v != 0 else v
    else:
        for n in range(1, horizon - k + 1):
            v = coords[n]
            coords[n + k] = to_scalar(v / rule.span_product(n, n + k)) if v != 0 else v
    x = SeqVector(coords)

    span = max(k, horizon // 10)
    lo = horizon - span + 1
    tail = norm(x.restrict(lo, horizon), space)
    maxima = _block_maxima(x, lo, horizon, k)
    decreasing = all(a >= b for a, b in zip(maxima, maxima[1:]))
    if not (tail < tol and decreasing):
        why = "tail above tolerance" if tail >= tol else "tail not decreasing"
        raise ExtensionRejected(f"{why} (tail norm {float(tail):.3g})", tail, x)
    return x


@dataclass(frozen=True)
class ProbeResult:
    accepted: bool
    k: int | None
    distance: object
    vector: SeqVector | None
    attempts: tuple = ()

    def to_dict(self):
        return {
            "accepted": self.accepted,
            "k": self.k,
            "distance": None if self.distance is None else float(self.distance),
            "vector": None if self.vector is None else format_vector(self.vector),
            "attempts": [[k, status, float(v)] for k, status, v in self.attempts],
        }


def dense_periodic_probe(
    rule: WeightRule,
    target: SeqVector,
    eps,
    space: SpaceTag = C0,
    horizon: int = 256,
    kcap: int = 64,
    tol=None,
) -> ProbeResult:
    """Look for a periodic vector within ``eps`` of ``target``.

    Tries periods ``k = maxIndex(target), ..., kcap`` (the smallest period
    need not reach ``eps``) with the target itself as the prefix.
    """
    eps = to_scalar(eps)
    if not eps > 0:
        raise InputError("eps must be positive")
    if tol is None:
        tol = eps / 4
    if target.is_zero():
        return ProbeResult(True, 1, Fraction(0), SeqVector.zero(), ())
    attempts = []
    best = None
    for k in range(max(1, target.max_index), kcap + 1):
        if horizon < 2 * k:
            break
        prefix = [target[i] for i in range(1, k + 1)]
        try:
            ext = periodic_extension(prefix, rule, space, horizon, tol)
        except ExtensionRejected as rej:
            attempts.append((k, "rejected", rej.tail_magnitude))
            continue
        d = norm(ext - target, space)
        attempts.append((k, "distance", d))
        if best is None or d < best:
            best = d
        if d < eps:
            return ProbeResult(True, k, d, ext, tuple(attempts))
    return ProbeResult(False, None, best, None, tuple(attempts))


# --- hypercyclic vectors ----------------------------------------------------


@dataclass(frozen=True)
class HypercyclicConstruction:
    vector: SeqVector
    positions: tuple[int, ...]


def construct_hypercyclic_vector(
    rule: WeightRule,
    targets,
    tol,
    space: SpaceTag = C0,
    step: int | None = None,
    max_position: int = 4096,
) -> HypercyclicConstruction:
    """Block construction ``x = sum_i F^{n_i} y_i``.

    Positions are placed greedily (earliest admissible) so that blocks have
    disjoint supports and ``||F^{n_i - n_j} y_i|| <= tol_i`` for every earlier
    position ``n_j`` including ``n_0 = 0``.  Then
    ``||B^{n_i} x - y_i|| <= sum_{j>i} tol_j``.

    With ``step`` the positions are forced onto ``n_1 + (i-1) * step`` and only
    ``n_1`` is searched.  Raises :class:`ConstructionFailed` naming the first
    target that cannot be placed below ``max_position``.
    """
    targets = list(targets)
    tol = [to_scalar(t) for t in tol]
    if len(tol) != len(targets):
        raise InputError("need one tolerance per target")
    if any(not t > 0 for t in tol):
        raise InputError("tolerances must be positive")
    if any(a < b for a, b in zip(tol, tol[1:])):
        raise InputError("tolerances must be nonincreasing")
    widths = [max(1, y.max_index) for y in targets]

    def ok(i, m):
        return norm(forward_shift(rule, targets[i], m), space) <= tol[i]

    positions: list[int] = []
    if step is None:
        for i in range(len(targets)):
            lo = 1 if i == 0 else positions[-1] + widths[i - 1]
            for n in range(lo, max_position + 1):
                if ok(i, n) and all(ok(i, n - nj) for nj in positions):
                    positions.append(n)
                    break
            else:
                raise ConstructionFailed(
                    f"target {i} admits no position <= {max_position}", index=i
                )
    else:
        if step < max(widths, default=1):
            raise InputError(f"step {step} shorter than a target's support")
        for i in range(len(targets)):
            for d in range(1, i + 1):
                if not ok(i, d * step):
                    raise ConstructionFailed(
                        f"target {i} too close to target {i - d} at step {step}", index=i
                    )
        for n1 in range(1, max_position + 1):
            if all(ok(i, n1 + i * step) for i in range(len(targets))):
                positions = [n1 + i * step for i in range(len(targets))]
                break
        else:
            bad = next(
                (i for i in range(len(targets)) if not ok(i, max_position + i * step)), 0
            )
            raise ConstructionFailed(
                f"target {bad} admits no start <= {max_position}", index=bad
            )

    x = SeqVector.zero()
    for y, n in zip(targets, positions):
        x = x + forward_shift(rule, y, n)
    return HypercyclicConstruction(x, tuple(positions))
