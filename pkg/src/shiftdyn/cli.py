"""Command-line entry point.

Every command writes one document (JSON with sorted keys, or CSV with fixed
columns) to stdout or ``--out``.  Exit codes: 0 ok, 2 input error, 3
capacity/construction failure.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CapacityError, ConstructionFailed, InputError, ShiftdynError
from .fcriterion import build_family, family_sets, full_report
from .natset import (
    NatSet,
    ap_profile,
    apb_score,
    density_profile,
    longest_ap_fixed_difference,
    multiples,
    read_natset,
    squarefree,
)
from .seqspace import Ball, format_vector, parse_scalar, parse_space, parse_vector
from .shiftop import (
    CounterexampleWeights,
    chaos_criterion,
    construct_hypercyclic_vector,
    counterexample_mask,
    counterexample_set,
    dense_periodic_probe,
    orbit,
    parse_rule,
    reset_indices,
    return_set,
)
from .spectral_probe import (
    Functional,
    FiniteOperator,
    binomial_transform,
    nilpotency_check,
    read_matrix_csv,
    return_count_by_sign_change,
)

EXIT_OK, EXIT_INPUT, EXIT_CAPACITY = 0, 2, 3
FORMATS = ("json", "csv")
MAX_WITNESSES = 100


@dataclass(frozen=True)
class RunConfig:
    command: str
    horizon: int = 10_000
    kmax: int = 4
    eps: str = "1/2^10"
    output: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.horizon < 10:
            raise InputError(f"--horizon must be >= 10, got {self.horizon}")
        if self.kmax < 1:
            raise InputError(f"--kmax must be >= 1, got {self.kmax}")
        if self.format not in FORMATS:
            raise InputError(f"--format must be one of {FORMATS}, got {self.format!r}")


# --- output -----------------------------------------------------------------


def _plain(v):
    """Convert to JSON-native values; exact scalars become floats."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (Fraction, float, np.floating)):
        return float(v)
    return v


def _csv(cols, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for r in rows:
        cells = []
        for c in cols:
            v = r[c]
            if v is None:
                cells.append("")
            elif isinstance(v, (Fraction, float)):
                cells.append(f"{float(v):.12g}")
            else:
                cells.append(str(v))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def _sections(tables: dict[str, str]) -> str:
    return "".join(f"# {name}\n{body}" for name, body in tables.items())


class _Result:
    def __init__(self, doc: dict, csv: str | dict | None = None):
        self.doc = doc
        self.csv = csv

    def render(self, fmt: str) -> str:
        if fmt == "csv" and self.csv is not None:
            return self.csv if isinstance(self.csv, str) else _sections(self.csv)
        return json.dumps(_plain(self.doc), sort_keys=True, indent=2) + "\n"


# --- input helpers ------------------------------------------------------------


def load_set(source: str, horizon: int) -> NatSet:
    """A set file, or ``gen:squarefree``, ``gen:evens``, ``gen:counterexample-s``."""
    if source.startswith("gen:"):
        name = source[4:]
        if name == "squarefree":
            return squarefree(horizon)
        if name == "evens":
            return multiples(2, horizon)
        if name == "counterexample-s":
            return counterexample_set(horizon)
        raise InputError(f"unknown generator {source!r}")
    try:
        return read_natset(source)
    except OSError as exc:
        raise InputError(f"cannot read set file {source!r}: {exc.strerror}") from None


def _scalar_list(text: str, what: str) -> list:
    vals = [parse_scalar(t) for t in text.split(",") if t.strip()]
    if not vals:
        raise InputError(f"{what} is empty")
    return vals


def _witness(w) -> dict:
    return {"start": w.start, "difference": w.difference, "length": w.length}


# --- commands ---------------------------------------------------------------


def cmd_density(args, cfg: RunConfig) -> _Result:
    A = load_set(args.set, cfg.horizon)
    window = args.window if args.window is not None else (1 if args.kind != "banach-upper" else 10)
    prof = density_profile(A, args.kind, window)
    prof.validate()
    doc = {
        "kind": prof.kind,
        "horizon": A.horizon,
        "window": prof.window,
        "estimate": prof.estimate,
        "attained_at": prof.attained_at,
        "samples": [[n, r] for n, r in prof.samples],
    }
    return _Result(doc, _csv(["n", "ratio"], [{"n": n, "ratio": r} for n, r in prof.samples]))


def cmd_ap_profile(args, cfg: RunConfig) -> _Result:
    A = load_set(args.set, cfg.horizon)
    prof = ap_profile(A, cfg.kmax)
    for w in prof.values():
        if w and not w.verify(A):
            raise AssertionError(f"witness {w} failed re-validation")
    best = apb_score(prof)
    rows = [{"k": k, **_witness(w)} for k, w in sorted(prof.items())]
    doc = {
        "horizon": A.horizon,
        "size": len(A),
        "profile": rows,
        "score": best.length,
        "score_witness": _witness(best),
        "threshold": args.threshold,
        "accepted": None if args.threshold is None else best.length >= args.threshold,
    }
    return _Result(doc, _csv(["k", "start", "difference", "length"], rows))


def cmd_shift_orbit(args, cfg: RunConfig) -> _Result:
    rule = parse_rule(args.rule)
    x = parse_vector(args.x)
    rec = orbit(rule, x, args.steps)
    rows = [{"n": n, "vector": format_vector(v)} for n, v in rec.steps]
    doc = {"rule": rule.name, "exact": rec.exact, "steps": rows}
    return _Result(doc, _csv(["n", "vector"], [{"n": r["n"], "vector": f'"{r["vector"]}"'} for r in rows]))


def cmd_chaos_check(args, cfg: RunConfig) -> _Result:
    rule = parse_rule(args.rule)
    space = parse_space(args.space)
    v = chaos_criterion(rule, space, cfg.horizon, args.growth_floor)
    doc = {"rule": rule.name, **v.to_dict(MAX_WITNESSES)}
    rows = [{"n": n, "exponent": e} for n, e in v.exponent_samples]
    return _Result(doc, {
        "verdict": _csv(["verdict", "n_witnesses"], [{"verdict": v.verdict, "n_witnesses": len(v.witnesses)}]),
        "witnesses": _csv(["n"], [{"n": n} for n in v.witnesses[:MAX_WITNESSES]]),
        "exponent_samples": _csv(["n", "exponent"], rows),
    })


def cmd_periodic_probe(args, cfg: RunConfig) -> _Result:
    rule = parse_rule(args.rule)
    space = parse_space(args.space)
    target = parse_vector(args.target)
    res = dense_periodic_probe(
        rule, target, parse_scalar(cfg.eps), space, horizon=cfg.horizon, kcap=args.kcap
    )
    doc = {"rule": rule.name, "target": format_vector(target), "eps": cfg.eps, **res.to_dict()}
    rows = [{"k": k, "status": s, "value": val} for k, s, val in res.attempts]
    return _Result(doc, _csv(["k", "status", "value"], rows))


def cmd_hypercyclic_build(args, cfg: RunConfig) -> _Result:
    rule = parse_rule(args.rule)
    space = parse_space(args.space)
    targets = [parse_vector(t) for t in args.targets.split(";")]
    tol = _scalar_list(args.tol, "--tol")
    if len(tol) == 1 and len(targets) > 1:
        tol = tol * len(targets)
    con = construct_hypercyclic_vector(
        rule, targets, tol, space, step=args.step, max_position=args.max_position
    )
    doc = {
        "rule": rule.name,
        "positions": list(con.positions),
        "vector": format_vector(con.vector),
    }
    rows = [{"i": i, "target": f'"{format_vector(y)}"', "position": n}
            for i, (y, n) in enumerate(zip(targets, con.positions), start=1)]
    return _Result(doc, _csv(["i", "target", "position"], rows))


def cmd_return_set(args, cfg: RunConfig) -> _Result:
    rule = parse_rule(args.rule)
    space = parse_space(args.space)
    x = parse_vector(args.x)
    U = Ball(parse_vector(args.center), parse_scalar(args.radius), space)
    N = return_set(rule, x, U, cfg.horizon)
    N.validate()
    prof = ap_profile(N, cfg.kmax)
    best = apb_score(prof)
    doc = {
        "rule": rule.name,
        "horizon": N.horizon,
        "returns": list(N.elements),
        "ap_profile": [{"k": k, **_witness(w)} for k, w in sorted(prof.items())],
        "score_witness": _witness(best),
    }
    return _Result(doc, _csv(["n"], [{"n": n} for n in N.elements]))


def cmd_criterion_check(args, cfg: RunConfig) -> _Result:
    rule = parse_rule(args.rule)
    space = parse_space(args.space)
    family = build_family(cfg.kmax, args.blocks, cfg.horizon)
    rep = full_report(rule, family, space=space, horizon=cfg.horizon)
    doc = {"rule": rule.name, **rep.to_dict(), "passed": rep.passed}
    return _Result(doc, rep.csv_tables())


def _runs(mask: np.ndarray) -> int:
    return int(np.count_nonzero(mask[1:] & ~mask[:-1]))


def cmd_counterexample_report(args, cfg: RunConfig) -> _Result:
    h = cfg.horizon
    rule = CounterexampleWeights()
    family = build_family(cfg.kmax, args.blocks, h)
    mask = counterexample_mask(h)
    E = rule.exponents(h)
    resets = reset_indices(rule, h)
    verdict = chaos_criterion(rule, parse_space("c0"), h)
    rep = full_report(rule, family, horizon=h)
    sets = family_sets(family, h)

    aps = []
    for k, A in sorted(sets.items()):
        w = longest_ap_fixed_difference(A, 10 ** (2 * k))
        if w and not w.verify(A):
            raise AssertionError(f"witness {w} failed re-validation")
        longest_block = max((b.length for spec in family if spec.k == k for b in spec.blocks), default=0)
        aps.append({"k": k, **_witness(w), "longest_block": longest_block})

    s_stats = {
        "horizon": h,
        "size": int(mask.sum()),
        "runs": _runs(mask),
        "density": float(mask.sum()) / h,
        "max_exponent": int(E.max()),
    }
    doc = {
        "config": {"horizon": h, "kmax": cfg.kmax, "blocks": args.blocks},
        "S": s_stats,
        "resets": {"count": int(resets.size), "first": [int(n) for n in resets[:MAX_WITNESSES]]},
        "chaos": verdict.to_dict(MAX_WITNESSES),
        "criterion": {**rep.to_dict(), "passed": rep.passed},
        "ap_profiles": aps,
    }
    tables = {
        "S": _csv(list(s_stats), [s_stats]),
        "resets": _csv(["n"], [{"n": int(n)} for n in resets[:MAX_WITNESSES]]),
        "chaos": _csv(["verdict", "n_witnesses"], [{"verdict": verdict.verdict, "n_witnesses": len(verdict.witnesses)}]),
        **rep.csv_tables(),
        "ap_profiles": _csv(["k", "start", "difference", "length", "longest_block"], aps),
    }
    return _Result(doc, tables)


def _parse_matrix(text: str) -> FiniteOperator:
    if not os.path.exists(text):
        rows = [_scalar_list(r, "matrix row") for r in text.split(";") if r.strip()]
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise InputError("matrix rows have different lengths")
        return FiniteOperator(rows)
    try:
        return read_matrix_csv(text)
    except OSError as exc:
        raise InputError(f"cannot read matrix file {text!r}: {exc.strerror}") from None


def cmd_binomial_check(args, cfg: RunConfig) -> _Result:
    S = _parse_matrix(args.matrix)
    x = _scalar_list(args.x, "--x")
    xstar = Functional(_scalar_list(args.xstar, "--xstar"))
    lhs, rhs = binomial_transform(S, x, xstar, args.n)
    N, prof = return_count_by_sign_change(S, x, xstar, cfg.horizon)
    nil, index = nilpotency_check(S.minus_identity())
    doc = {
        "n": args.n,
        "lhs": lhs,
        "rhs": rhs,
        "equal": lhs == rhs,
        "returns": list(N.elements[:1000]),
        "n_returns": len(N),
        "density_estimate": prof.estimate,
        "density_samples": [[n, r] for n, r in prof.samples],
        "s_minus_i_nilpotent": nil,
        "nilpotency_index": index,
    }
    return _Result(doc, {
        "identity": _csv(["n", "lhs", "rhs"], [{"n": args.n, "lhs": lhs, "rhs": rhs}]),
        "density": _csv(["n", "ratio"], [{"n": n, "ratio": r} for n, r in prof.samples]),
    })


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--horizon", type=int, default=10_000)
    common.add_argument("--kmax", type=int, default=4)
    common.add_argument("--eps", default="1/2^10", help="scalar, decimal or p/2^q")
    common.add_argument("--format", choices=FORMATS, default="json")
    common.add_argument("--out", help="write here instead of stdout")

    rule = argparse.ArgumentParser(add_help=False)
    rule.add_argument("--rule", default="const:2", help="const:<x>, list:@file, list:a,b,... or paper-counterexample")
    rule.add_argument("--space", default="c0", help="c0 or lp:<p>")

    p = argparse.ArgumentParser(prog="shiftdyn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("density", parents=[common], help="density profile of a set")
    s.add_argument("set", help="set file or gen:squarefree|evens|counterexample-s")
    s.add_argument("--kind", choices=("lower", "upper", "banach-upper"), default="lower")
    s.add_argument("--window", type=int)

    s = sub.add_parser("ap-profile", parents=[common], help="longest AP for each difference <= kmax")
    s.add_argument("set")
    s.add_argument("--threshold", type=int, help="AP length at which to report acceptance")

    s = sub.add_parser("shift-orbit", parents=[common, rule], help="orbit of a vector")
    s.add_argument("--x", required=True, help="vector literal, e.g. '1:1,3:-3/2^4'")
    s.add_argument("--steps", type=int, default=10)

    s = sub.add_parser("chaos-check", parents=[common, rule], help="finite-horizon chaos criterion")
    s.add_argument("--growth-floor", type=float, default=20)

    s = sub.add_parser("periodic-probe", parents=[common, rule], help="periodic vector near a target")
    s.add_argument("--target", required=True)
    s.add_argument("--kcap", type=int, default=64)

    s = sub.add_parser("hypercyclic-build", parents=[common, rule], help="block construction of a vector")
    s.add_argument("--targets", required=True, help="vector literals separated by ';'")
    s.add_argument("--tol", required=True, help="comma-separated tolerances (one value is repeated)")
    s.add_argument("--step", type=int)
    s.add_argument("--max-position", type=int, default=4096)

    s = sub.add_parser("return-set", parents=[common, rule], help="return times to a ball")
    s.add_argument("--x", required=True)
    s.add_argument("--center", required=True)
    s.add_argument("--radius", required=True)

    s = sub.add_parser("criterion-check", parents=[common, rule], help="criterion conditions on the block family")
    s.add_argument("--blocks", type=int, default=2)

    s = sub.add_parser("counterexample-report", parents=[common], help="full counterexample pipeline")
    s.add_argument("--blocks", type=int, default=3)

    s = sub.add_parser("binomial-check", parents=[common], help="binomial identity and sign-change returns")
    s.add_argument("--matrix", required=True, help="CSV file, or inline rows 'a,b;c,d'")
    s.add_argument("--x", required=True, help="comma-separated entries")
    s.add_argument("--xstar", required=True, help="comma-separated entries")
    s.add_argument("--n", type=int, default=10)
    return p


COMMANDS = {
    "density": cmd_density,
    "ap-profile": cmd_ap_profile,
    "shift-orbit": cmd_shift_orbit,
    "chaos-check": cmd_chaos_check,
    "periodic-probe": cmd_periodic_probe,
    "hypercyclic-build": cmd_hypercyclic_build,
    "return-set": cmd_return_set,
    "criterion-check": cmd_criterion_check,
    "counterexample-report": cmd_counterexample_report,
    "binomial-check": cmd_binomial_check,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(args.command, args.horizon, args.kmax, args.eps, args.out, args.format)
        text = COMMANDS[args.command](args, cfg).render(cfg.format)
    except InputError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except (CapacityError, ConstructionFailed) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_CAPACITY
    except ShiftdynError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
