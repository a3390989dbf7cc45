"""AP block families ``A_k`` and a finite-horizon check of the
F-hypercyclicity criterion for weighted backward shifts on c0 / lp.

Conditions, for disjoint ``A_1, A_2, ...``:

i)   ``|j - j'| >= max(k, k')`` for ``j in A_k``, ``j' in A_k'``, ``j != j'``;
ii)  ``sum_{n in A_k + k'} e_n / prod_{v<=n} w_v`` is small and decays in ``k``;
iii) ``C_{k,l} = sup_{j in A_l} || sum_{n in A_k - j} e_{n+k'} / prod_{v=1}^{n} w_{v+k'} ||``
     decays in ``k`` uniformly in ``l`` and in ``l`` for each ``k``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, NamedTuple

import numpy as np

from .errors import CapacityError, InputError
from .natset import NatSet
from .seqspace import C0, SpaceTag, pow2
from .shiftop.weights import WeightRule

__all__ = [
    "Block",
    "APFamilySpec",
    "CriterionReport",
    "Separation",
    "build_family",
    "family_sets",
    "check_separation",
    "series_norm",
    "compute_Ckl",
    "full_report",
]


@dataclass(frozen=True)
class Block:
    """``{10**j0 + difference * l : 0 <= l < length}``."""

    j0: int
    difference: int
    length: int

    @property
    def start(self) -> int:
        return 10**self.j0

    @property
    def last(self) -> int:
        return self.start + (self.length - 1) * self.difference

    def terms(self) -> list[int]:
        return [self.start + self.difference * l for l in range(self.length)]


@dataclass(frozen=True)
class APFamilySpec:
    k: int
    blocks: tuple[Block, ...]

    def elements(self) -> list[int]:
        return [t for b in self.blocks for t in b.terms()]

    def natset(self, horizon: int) -> NatSet:
        return NatSet.from_iterable(self.elements(), horizon)


def build_family(kmax: int, blocks_per_k: int, horizon: int) -> list[APFamilySpec]:
    """Round-robin construction of the block sets.

    Round ``r`` places one block for each ``k = 1..kmax``: difference
    ``10**(2k)``, length ``r + 1``, start ``10**j0`` with ``j0`` minimal such
    that the start is at least ``kmax`` beyond every element already placed.
    Blocks running past ``horizon`` are clipped; a start beyond ``horizon`` is
    a :class:`CapacityError`.
    """
    if kmax < 1:
        raise InputError(f"kmax must be >= 1, got {kmax}")
    if blocks_per_k < 0:
        raise InputError(f"blocks_per_k must be >= 0, got {blocks_per_k}")
    if blocks_per_k == 0:
        return []
    placed: dict[int, list[Block]] = {k: [] for k in range(1, kmax + 1)}
    top = 0
    for r in range(blocks_per_k):
        for k in range(1, kmax + 1):
            j0 = 1
            while 10**j0 < top + kmax:
                j0 += 1
            start = 10**j0
            if start > horizon:
                raise CapacityError(
                    f"block {r + 1} of A_{k} would start at 10^{j0} > horizon {horizon}",
                    k=k,
                    block=r + 1,
                )
            diff = 10 ** (2 * k)
            length = min(r + 1, (horizon - start) // diff + 1)
            b = Block(j0, diff, length)
            placed[k].append(b)
            top = b.last
    return [APFamilySpec(k, tuple(bs)) for k, bs in placed.items()]


def family_sets(family, horizon: int | None = None) -> dict[int, NatSet]:
    """Normalise a family (list of specs or mapping ``k -> iterable``) to NatSets."""
    if isinstance(family, Mapping) and all(isinstance(v, NatSet) for v in family.values()):
        if horizon is None:
            return dict(sorted(family.items()))
        return {k: v.clip(horizon) for k, v in sorted(family.items())}
    if isinstance(family, Mapping):
        raw = {int(k): sorted(set(v)) for k, v in family.items()}
    else:
        raw = {spec.k: sorted(set(spec.elements())) for spec in family}
    if horizon is None:
        horizon = max((v[-1] for v in raw.values() if v), default=0)
    return {k: NatSet.from_iterable([a for a in v if a <= horizon], horizon) for k, v in sorted(raw.items())}


class Separation(NamedTuple):
    ok: bool
    witness: tuple[int, int] | None


def check_separation(family) -> Separation:
    """Condition i).  Sets must also be pairwise disjoint.

    Only neighbours closer than the largest index can violate, so a sorted
    sweep suffices.
    """
    sets = family_sets(family)
    labelled = sorted((a, k) for k, A in sets.items() for a in A)
    if not labelled:
        return Separation(True, None)
    reach = max(sets)
    for i, (a, k) in enumerate(labelled):
        for b, k2 in labelled[i + 1 :]:
            if b - a >= reach:
                break
            if b - a < max(k, k2):
                # b == a only happens across different k: a disjointness failure
                return Separation(False, (a, b))
    return Separation(True, None)


def _coeff_norm(exps: np.ndarray, space: SpaceTag, exact: bool):
    # norm of sum_n 2^{-exps[n]} e_n (distinct n)
    if exps.size == 0:
        return Fraction(0) if exact else 0.0
    if space.kind == "c0":
        m = exps.min()
        return pow2(-int(m)) if exact else float(2.0 ** (-float(m)))
    p = float(space.p)
    return float(2.0 ** (np.logaddexp2.reduce(-p * exps.astype(np.float64)) / p))


def series_norm(rule: WeightRule, A: NatSet, kprime: int, space: SpaceTag = C0, horizon: int | None = None):
    """``|| sum_{n in (A + k') ∩ [1, horizon]} e_n / prod_{v<=n} w_v ||``.

    Exact ``Fraction`` for power-of-two rules in c0, float otherwise.
    """
    if kprime < 0:
        raise InputError(f"k' must be >= 0, got {kprime}")
    if horizon is None:
        horizon = A.horizon + kprime
    n = A.array + kprime
    n = n[(n >= 1) & (n <= horizon)]
    E = rule.exponents(horizon)
    exact = rule.power_of_two and space.kind == "c0"
    return _coeff_norm(E[n], space, exact)


def compute_Ckl(rule: WeightRule, family, k: int, l: int, kprime: int, space: SpaceTag = C0, horizon: int | None = None):
    """``sup_{j in A_l} || sum_{n in A_k - j} e_{n+k'} / prod_{v=1}^{n} w_{v+k'} ||``.

    ``prod_{v=1}^{n} w_{v+k'} = 2**(E(n+k') - E(k'))``; sums run over
    ``n in [1, horizon]`` and ``j in A_l ∩ [1, horizon]``.
    """
    sets = family_sets(family, horizon)
    if k not in sets or l not in sets:
        raise InputError(f"family has no A_{k} or A_{l}")
    if horizon is None:
        horizon = max((s.horizon for s in sets.values()), default=0)
    Ak, Al = sets[k].array, sets[l].array
    Al = Al[Al <= horizon]
    E = rule.exponents(horizon + kprime)
    base = E[kprime]
    exact = rule.power_of_two and space.kind == "c0"
    best = _coeff_norm(np.empty(0), space, exact)
    for j in Al:
        n = Ak - j
        n = n[(n >= 1) & (n <= horizon)]
        if n.size == 0:
            continue
        val = _coeff_norm(E[n + kprime] - base, space, exact)
        if val > best:
            best = val
    return best


def _nonincreasing(vals) -> bool:
    return all(a >= b for a, b in zip(vals, vals[1:]))


@dataclass
class CriterionReport:
    separation_ok: bool
    separation_witness: tuple[int, int] | None
    series_norms: dict = field(default_factory=dict)  # (k, k') -> norm
    Ckl_raw: dict = field(default_factory=dict)  # (k, l, k') -> value
    Ckl: dict = field(default_factory=dict)  # (k, l) -> max over k' < k
    sup_over_l: dict = field(default_factory=dict)  # k -> max over l
    flags: dict = field(default_factory=dict)
    family: list = field(default_factory=list)
    space: str = "c0"
    horizon: int = 0

    @property
    def passed(self) -> bool:
        return self.separation_ok and all(self.flags.values())

    def to_dict(self) -> dict:
        f = float
        return {
            "space": self.space,
            "horizon": self.horizon,
            "condition_i": {
                "separation_ok": self.separation_ok,
                "witness": list(self.separation_witness) if self.separation_witness else None,
            },
            "condition_ii": [
                {"k": k, "kprime": kp, "norm": f(v)} for (k, kp), v in sorted(self.series_norms.items())
            ],
            "condition_iii": [
                {"k": k, "l": l, "kprime": kp, "value": f(v)} for (k, l, kp), v in sorted(self.Ckl_raw.items())
            ],
            "Ckl": [{"k": k, "l": l, "value": f(v)} for (k, l), v in sorted(self.Ckl.items())],
            "sup_over_l": [{"k": k, "value": f(v)} for k, v in sorted(self.sup_over_l.items())],
            "flags": dict(sorted(self.flags.items())),
            "family": [
                {"k": spec.k, "start": b.start, "difference": b.difference, "length": b.length}
                for spec in self.family
                for b in spec.blocks
            ],
        }

    def csv_tables(self) -> dict[str, str]:
        """One CSV per condition plus the family rows; fixed column order."""
        d = self.to_dict()
        out = {}

        def table(name, cols, rows):
            buf = io.StringIO()
            buf.write(",".join(cols) + "\n")
            for r in rows:
                buf.write(",".join("" if r[c] is None else (f"{r[c]:.12g}" if isinstance(r[c], float) else str(r[c])) for c in cols) + "\n")
            out[name] = buf.getvalue()

        w = d["condition_i"]["witness"] or [None, None]
        table("condition_i", ["separation_ok", "j", "jprime"], [{"separation_ok": d["condition_i"]["separation_ok"], "j": w[0], "jprime": w[1]}])
        table("condition_ii", ["k", "kprime", "norm"], d["condition_ii"])
        table("condition_iii", ["k", "l", "kprime", "value"], d["condition_iii"])
        table("Ckl", ["k", "l", "value"], d["Ckl"])
        table("flags", ["flag", "value"], [{"flag": k, "value": v} for k, v in d["flags"].items()])
        table("family", ["k", "start", "difference", "length"], d["family"])
        return out


def full_report(rule: WeightRule, family, kprimes=None, space: SpaceTag = C0, horizon: int | None = None) -> CriterionReport:
    """Aggregate conditions i)-iii) over the computed range of ``k``, ``l``, ``k'``.

    Decay is reported as nonincreasing monotonicity flags, never as a limit.
    """
    specs = [] if isinstance(family, Mapping) else list(family)
    sets = family_sets(family, horizon)
    if horizon is None:
        horizon = max((s.horizon for s in sets.values()), default=0)
    ks = sorted(sets)
    if kprimes is None:
        kprimes = range(0, max(ks, default=0))
    kprimes = sorted(set(kprimes))
    sep = check_separation(sets)
    rep = CriterionReport(sep.ok, sep.witness, family=specs, space=str(space), horizon=horizon)
    if not ks:
        rep.flags = {"series_bounded": True, "series_decay_in_k": True, "sup_l_decay_in_k": True, "decay_in_l": True}
        return rep

    for k in ks:
        for kp in kprimes:
            if kp < k:
                rep.series_norms[(k, kp)] = series_norm(rule, sets[k], kp, space, horizon + kp)
    for k in ks:
        for l in ks:
            vals = []
            for kp in kprimes:
                if kp < k:
                    v = compute_Ckl(rule, sets, k, l, kp, space, horizon)
                    rep.Ckl_raw[(k, l, kp)] = v
                    vals.append(v)
            if vals:
                rep.Ckl[(k, l)] = max(vals)
    for k in ks:
        row = [v for (kk, _), v in rep.Ckl.items() if kk == k]
        if row:
            rep.sup_over_l[k] = max(row)

    series_decay = all(
        _nonincreasing([rep.series_norms[(k, kp)] for k in ks if (k, kp) in rep.series_norms])
        for kp in kprimes
    )
    rep.flags = {
        "series_bounded": all(v <= 1 for v in rep.series_norms.values()),
        "series_decay_in_k": series_decay,
        "sup_l_decay_in_k": _nonincreasing([rep.sup_over_l[k] for k in ks if k in rep.sup_over_l]),
        "decay_in_l": all(
            _nonincreasing([rep.Ckl[(k, l)] for l in ks if (k, l) in rep.Ckl]) for k in ks
        ),
    }
    return rep
