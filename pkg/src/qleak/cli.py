"""``qleak`` command line: analyze, leakage, optimize, primitive, table1, attack.

Exit codes: 0 success, 1 malformed input file, 2 invalid parameters,
3 numerical failure, 4 a ``table1`` relation does not hold.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import __version__
from .attacks import ot_attack
from .distributions import (
    JointDistribution,
    Side,
    binary_entropy,
    conditional_entropy,
    dependent_part,
    is_trivial,
    monotone,
    mutual_information,
    shannon_entropy,
)
from .embeddings import _gram_entropies, leakage_regular, make_regular
from .errors import FormatError, LeakageError, NumericalError
from .formats import load_distribution, load_phases
from .optimizer import Method, OptimizerConfig, minimize_leakage
from .primitives import (
    Kind,
    PrimitiveSpec,
    build_primitive,
    otp_lower_bound,
    rot_closed_form_leakage,
)

EXIT_OK, EXIT_FORMAT, EXIT_PARAMS, EXIT_NUMERIC, EXIT_RELATION = 0, 1, 2, 3, 4
RELATION_TOL = 1e-6
SIG_DIGITS = 15


class UsageError(Exception):
    """Bad command-line parameters (exit code 2)."""


@dataclass
class Report:
    command: str
    inputs: dict[str, Any]
    results: dict[str, Any]
    provenance: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return _clean({"command": self.command, "inputs": self.inputs,
                       "results": self.results, "provenance": self.provenance})


def _round(x: float) -> float:
    if not math.isfinite(x):
        raise NumericalError(f"non-finite value {x!r} in report")
    return float(f"{x:.{SIG_DIGITS}g}")


def _clean(obj):
    """Convert numpy scalars/arrays and round every real to 15 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    return obj


def _flatten(obj, prefix: str = ""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list):
        for k, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    else:
        yield prefix, obj


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def render(report: Report, fmt: str) -> str:
    data = report.to_dict()
    if fmt == "json":
        return json.dumps(data, ensure_ascii=False, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "value"])
    for key, value in _flatten(data["results"]):
        writer.writerow([key, _csv_value(value)])
    return buf.getvalue()


def _seed(args) -> int:
    if args.seed is not None:
        seed = args.seed
    else:
        raw = os.environ.get("LEAKAGE_SEED", "0")
        try:
            seed = int(raw)
        except ValueError:
            raise UsageError(f"LEAKAGE_SEED={raw!r} is not an integer") from None
    if not 0 <= seed < 2 ** 64:
        raise UsageError("seed must be an unsigned 64-bit integer")
    return seed


def _config(args) -> OptimizerConfig:
    try:
        return OptimizerConfig(starts=args.starts, max_iterations=args.max_iter,
                               convergence_tol=args.tol, seed=_seed(args), method=args.method)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _stats(d: JointDistribution) -> dict[str, Any]:
    return {
        "H_X": shannon_entropy(d.px),
        "H_Y": shannon_entropy(d.py),
        "H_XY": shannon_entropy(d.probs.ravel()),
        "H_X_given_Y": conditional_entropy(d, Side.ALICE),
        "H_Y_given_X": conditional_entropy(d, Side.BOB),
        "mutual_information": mutual_information(d),
        "monotone_alice": monotone(d, Side.ALICE),
        "monotone_bob": monotone(d, Side.BOB),
        "trivial": is_trivial(d),
    }


def _phase_entries(d: JointDistribution, theta) -> list[dict[str, Any]]:
    return [{"x": d.x_alphabet[x], "y": d.y_alphabet[y], "theta": t}
            for (x, y), t in sorted(theta.values.items())]


def _optimize_results(d: JointDistribution, cfg: OptimizerConfig) -> dict[str, Any]:
    res = minimize_leakage(d, cfg)
    return {
        "best_leakage": res.best_leakage,
        "converged": res.converged,
        "free_parameters": len(res.free_pairs),
        "best_start": res.best_start,
        "evaluations": res.evaluations,
        "best_theta": _phase_entries(d, res.best_theta),
        "trace": [[i, v] for i, v in res.trace],
    }


def cmd_analyze(args) -> Report:
    d = load_distribution(args.dist_file)
    results = _stats(d)
    for side in Side:
        results[f"dependent_part_{side.value}"] = dependent_part(d, side).classes()
    return Report("analyze", {"dist_file": args.dist_file}, results)


def cmd_leakage(args) -> Report:
    d = load_distribution(args.dist_file)
    theta = load_phases(args.phases, d) if args.phases else None
    e = make_regular(d, theta)
    s_a, s_b = _gram_entropies(e.amplitudes)
    results = {
        "leakage": leakage_regular(e),
        "entropy_alice": s_a,
        "entropy_bob": s_b,
        "mutual_information": mutual_information(d),
    }
    return Report("leakage", {"dist_file": args.dist_file, "phases": args.phases or "canonical"},
                  results)


def _opt_inputs(cfg: OptimizerConfig) -> dict[str, Any]:
    return {"starts": cfg.starts, "max_iter": cfg.max_iterations, "tol": cfg.convergence_tol,
            "seed": cfg.seed, "method": cfg.method.value}


def cmd_optimize(args) -> Report:
    d = load_distribution(args.dist_file)
    cfg = _config(args)
    return Report("optimize", {"dist_file": args.dist_file, **_opt_inputs(cfg)},
                  _optimize_results(d, cfg), {"seed": cfg.seed})


def _primitive_spec(args) -> PrimitiveSpec:
    return PrimitiveSpec(args.name, r=args.r, p=args.p)


def cmd_primitive(args) -> Report:
    spec = _primitive_spec(args)
    cfg = _config(args)
    d = build_primitive(spec)
    results: dict[str, Any] = {"alphabet_x": len(d.x_alphabet), "alphabet_y": len(d.y_alphabet)}
    results.update(_stats(d))
    results["leakage"] = leakage_regular(make_regular(d))
    opt = _optimize_results(d, cfg)
    results["min_leakage"] = opt["best_leakage"]
    results["free_parameters"] = opt["free_parameters"]
    if spec.kind is Kind.ROT:
        results["closed_form_leakage"] = rot_closed_form_leakage(spec.r)
    elif spec.kind in (Kind.OT, Kind.SAND):
        results["closed_form_leakage"] = 0.5
    elif spec.kind is Kind.OT_STRING:
        results["lower_bound"] = rot_closed_form_leakage(spec.r)
    else:
        results["lower_bound"] = otp_lower_bound(spec.p)
        results["lower_bound_proof_constant"] = otp_lower_bound(spec.p, proof_constant=True)
    inputs = {"name": spec.kind.value, "r": spec.r, "p": spec.p, **_opt_inputs(cfg)}
    return Report("primitive", inputs, results, {"seed": cfg.seed})


def _relation(computed: float, target: float | None, relation: str) -> dict[str, Any]:
    if target is None:
        holds = True
    elif relation == "==":
        holds = abs(computed - target) <= RELATION_TOL
    else:
        holds = computed >= target - RELATION_TOL
    return {"computed": computed, "table_value": target, "relation": relation, "holds": holds}


def cmd_table1(args) -> Report:
    cfg = _config(args)
    r, p = args.r, args.p
    # fail fast on bad --r/--p before any optimisation runs
    PrimitiveSpec(Kind.OT_STRING, r=r)
    PrimitiveSpec(Kind.OT_NOISY, p=p)

    def opt(kind, **kw):
        return minimize_leakage(build_primitive(PrimitiveSpec(kind, **kw)), cfg).best_leakage

    rot1 = leakage_regular(make_regular(build_primitive(PrimitiveSpec(Kind.ROT, r=1))))
    rotr = leakage_regular(make_regular(build_primitive(PrimitiveSpec(Kind.ROT, r=r))))
    rows = {
        "rot1": _relation(rot1, binary_entropy(0.25) - 0.5, "=="),
        "rot_r": _relation(rotr, rot_closed_form_leakage(r), "=="),
        "ot": _relation(opt(Kind.OT), 0.5, "=="),
        "sand": _relation(opt(Kind.SAND), 0.5, "=="),
        "ot_r": _relation(opt(Kind.OT_STRING, r=r), rot_closed_form_leakage(r), ">="),
        "ot_p": _relation(opt(Kind.OT_NOISY, p=p), otp_lower_bound(p), ">="),
    }
    results = {**rows, "all_hold": all(row["holds"] for row in rows.values())}
    inputs = {"r": r, "p": p, **_opt_inputs(cfg)}
    return Report("table1", inputs, results, {"seed": cfg.seed})


def _outcome_section(report) -> dict[str, Any]:
    return {
        "probabilities": dict(zip(report.labels, report.probabilities)),
        "conditional": {
            lab: (None if cond is None else dict(zip(report.other_labels, cond)))
            for lab, cond in zip(report.labels, report.conditional)
        },
    }


def cmd_attack(args) -> Report:
    summary, ra, rb = ot_attack()
    results = {
        "alice": {"success_probability": summary.alice_success,
                  "conditional_correctness": summary.alice_correct, **_outcome_section(ra)},
        "bob": {"success_probability": summary.bob_success,
                "conditional_correctness": summary.bob_correct, **_outcome_section(rb)},
    }
    return Report("attack", {"target": args.target}, results)


def _add_optimizer_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--starts", type=int, default=32)
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=None,
                   help="defaults to $LEAKAGE_SEED, else 0")
    p.add_argument("--method", choices=[m.value for m in Method], default=Method.COORDINATE_DESCENT.value)


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=["json", "csv"], default="json")

    parser = argparse.ArgumentParser(prog="qleak", parents=[fmt],
                                     description="Leakage of quantum embeddings of two-party primitives.")
    parser.add_argument("--version", action="version", version=f"qleak {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[fmt], help="entropies, dependent parts, triviality")
    p.add_argument("dist_file")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("leakage", parents=[fmt], help="leakage of a regular embedding")
    p.add_argument("dist_file")
    p.add_argument("--phases", default=None, help="phase file (canonical embedding if omitted)")
    p.set_defaults(func=cmd_leakage)

    p = sub.add_parser("optimize", parents=[fmt], help="minimise leakage over phases")
    p.add_argument("dist_file")
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("primitive", parents=[fmt], help="built-in primitive report")
    p.add_argument("name", choices=[k.value for k in Kind])
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--p", type=float, default=None)
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_primitive)

    p = sub.add_parser("table1", parents=[fmt], help="reproduce the leakage table")
    p.add_argument("--r", type=int, default=2, help="string length for the r-bit rows")
    p.add_argument("--p", type=float, default=0.05, help="noise rate for the noisy OT row")
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("attack", parents=[fmt], help="fixed POVM attacks")
    p.add_argument("target", choices=["ot"])
    p.set_defaults(func=cmd_attack)
    return parser


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = args.func(args)
        report.provenance = {"tool": "qleak", "version": __version__, **report.provenance}
        stdout.write(render(report, args.format))
    except FormatError as exc:
        print(f"qleak: error: {exc}", file=stderr)
        return EXIT_FORMAT
    except NumericalError as exc:
        print(f"qleak: numerical failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    except (UsageError, LeakageError) as exc:
        print(f"qleak: invalid parameters: {exc}", file=stderr)
        return EXIT_PARAMS
    if args.command == "table1" and not report.results["all_hold"]:
        print("qleak: at least one table relation does not hold", file=stderr)
        return EXIT_RELATION
    return EXIT_OK


def main() -> None:
    sys.exit(run())
