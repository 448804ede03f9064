"""``stabtel`` command-line front end.

Exit codes: 0 success, 1 parse/validation error, 2 no decomposition with
nonzero capacity found, 3 simulation verdict IMPERFECT.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import dense
from .errors import BudgetError, NoDecompositionError, StabtelError
from .problem_io import (
    DEMOS,
    ProblemSpec,
    load_demo,
    parse_problem,
    parse_protocol_json,
    serialize_protocol,
)
from .protocol import ProtocolSpec, synthesize_protocol
from .stabilizer import build_group, certify_decomposition, is_prime, projector_rank, search_decomposition

EXIT_OK, EXIT_INPUT, EXIT_NO_DECOMPOSITION, EXIT_IMPERFECT = 0, 1, 2, 3

CAVEAT = (
    "a failed search does not prove the capacity is unachievable: "
    "the sufficient conditions used here are not known to be necessary"
)


class CliError(Exception):
    def __init__(self, message: str, code: int):
        self.code = code
        super().__init__(message)


# -- loading -------------------------------------------------------------------------


def _read_source(args) -> tuple[str, object]:
    """Return ("problem", ProblemSpec) or ("protocol", ProtocolSpec)."""
    if getattr(args, "demo", None):
        return "problem", load_demo(args.demo)
    if not args.input:
        raise CliError("one of --input PATH or --demo NAME is required", EXIT_INPUT)
    try:
        text = Path(args.input).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {args.input}: {exc.strerror}", EXIT_INPUT) from None
    if text.lstrip().startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError:
            obj = None
        if isinstance(obj, dict) and "format" in obj:
            return "protocol", parse_protocol_json(obj)
    return "problem", parse_problem(text)


def _group(problem: ProblemSpec):
    return build_group(problem.generators, problem.d, problem.n)


def _decompose(problem: ProblemSpec, S):
    if problem.decomposition is not None:
        return certify_decomposition(S, problem.partition, problem.decomposition, problem.receiver), "certified"
    return search_decomposition(S, problem.partition, problem.receiver), "search"


# -- commands ---------------------------------------------------------------------------


def check_report(problem: ProblemSpec) -> tuple[dict, int]:
    S = _group(problem)
    rank = projector_rank(S)
    outcome, source = _decompose(problem, S)
    dec = outcome.decomposition
    report = {
        "valid": True,
        "d": problem.d,
        "n": problem.n,
        "k": S.k,
        "projector_rank": rank,
        "state": "pure" if rank == 1 else "mixed",
        "partition": [list(p) for p in problem.partition],
        "receiver": problem.receiver,
        "decomposition_source": source,
        "found": dec is not None and dec.t > 0,
        "stage": outcome.stage,
        "message": outcome.message,
        "capacities": list(dec.capacities) if dec else None,
        "best_effort": not is_prime(problem.d),
        "caveat": CAVEAT,
    }
    if dec is not None:
        pat = dec.pattern
        report["tail_pattern"] = {"s": pat.s, "u": pat.u, "a": list(pat.a), "b": list(pat.b)}
        # the decomposition's own generating set (products of the input generators)
        report["decomposition_generators"] = [str(g) for g in dec.generators]
        report["groups"] = [[i + 1 for i in g] for g in dec.groups]
    if source == "certified":
        searched = search_decomposition(S, problem.partition, problem.receiver).decomposition
        report["search_capacities"] = list(searched.capacities) if searched else None
    code = EXIT_OK if report["found"] else EXIT_NO_DECOMPOSITION
    return report, code


def _format_check(r: dict) -> str:
    parts = " | ".join("{" + ",".join(map(str, p)) + "}" for p in r["partition"])
    lines = [
        f"group: valid, d={r['d']}, n={r['n']}, k={r['k']}",
        f"projector rank: {r['projector_rank']} ({r['state']})",
        f"partition: {parts} (receiver: part {r['receiver']})",
    ]
    if r["capacities"] is None:
        lines.append(f"decomposition: none found ({r['decomposition_source']}, stage {r['stage']}: {r['message']})")
    else:
        caps = r["capacities"]
        label = f"t={caps[0]}" if len(caps) == 1 else "(" + ",".join(map(str, caps)) + ")"
        lines.append(f"decomposition ({r['decomposition_source']}): capacities {label}")
        tp = r["tail_pattern"]
        lines.append(f"receiver tail: s={tp['s']} a={tp['a']} u={tp['u']} b={tp['b']}")
        if not r["found"]:
            lines.append("no decomposition with t>0 found")
    if "search_capacities" in r and r["search_capacities"] is not None:
        lines.append("unconstrained search finds capacities (" + ",".join(map(str, r["search_capacities"])) + ")")
    if r["best_effort"]:
        lines.append("note: composite d, search is best-effort (unit pivots only)")
    lines.append(f"caveat: {CAVEAT}")
    return "\n".join(lines)


def synthesize_from_problem(problem: ProblemSpec, order: str = "before") -> ProtocolSpec:
    S = _group(problem)
    return synthesize_protocol(
        S, problem.partition, problem.receiver, decomposition=problem.decomposition, unitary_order=order
    )


def _trial_inputs(spec: ProtocolSpec, problem: ProblemSpec | None, trial: int, seed: int | None):
    dims = [spec.d**a for a in spec.capacities]
    if seed is None and trial == 0 and problem is not None and problem.inputs is not None:
        if len(problem.inputs) != len(dims):
            raise CliError(f"problem lists {len(problem.inputs)} inputs for {len(dims)} senders", EXIT_INPUT)
        return [x.density_matrix(dim) for x, dim in zip(problem.inputs, dims)]
    base = 0 if seed is None else seed
    return [dense.random_density_matrix(dim, [base, trial, i]) for i, dim in enumerate(dims)]


def simulate_report(spec: ProtocolSpec, problem: ProblemSpec | None, trials: int, seed: int | None,
                    mode: str, samples: int, budget: int) -> tuple[dict, int]:
    table: dict[tuple[int, ...], dict] = {}
    per_trial = []
    for trial in range(trials):
        inputs = _trial_inputs(spec, problem, trial, seed)
        res = dense.run_protocol(
            spec, inputs, mode=mode, samples=samples,
            seed=None if seed is None else [seed, trial], budget=budget,
        )
        per_trial.append({
            "trial": trial,
            "mode": res.mode,
            "covered": res.covered,
            "max_distance": res.max_distance,
            "mean_distance": res.mean_distance,
            "probability_sum": res.probability_sum,
            "zero_probability": len(res.zero_probability),
        })
        for o in res.outcomes:
            row = table.setdefault(o.x, {"probabilities": [], "max_distance": 0.0})
            row["probabilities"].append(o.probability)
            if o.distance is not None:
                row["max_distance"] = max(row["max_distance"], o.distance)
    max_dist = max(t["max_distance"] for t in per_trial)
    verdict = "PERFECT" if max_dist < dense.PERFECTION_TOL else "IMPERFECT"
    report = {
        "capacities": list(spec.capacities),
        "outcome_count": spec.outcome_count,
        "trials": per_trial,
        "outcomes": [
            {"x": list(x), "probability": float(np.mean(r["probabilities"])), "max_distance": r["max_distance"]}
            for x, r in sorted(table.items())
        ],
        "max_distance": max_dist,
        "mean_distance": float(np.mean([t["mean_distance"] for t in per_trial])),
        "verdict": verdict,
        "threshold": dense.PERFECTION_TOL,
    }
    return report, EXIT_OK if verdict == "PERFECT" else EXIT_IMPERFECT


def _format_simulation(r: dict) -> str:
    lines = ["outcome                       probability   max trace distance"]
    for o in r["outcomes"]:
        lines.append(f"{''.join(map(str, o['x'])):<28}  {o['probability']:.9f}   {o['max_distance']:.3e}")
    t = r["trials"][0]
    lines.append(
        f"trials: {len(r['trials'])}, mode: {t['mode']}, outcomes per trial: {t['covered']} of {r['outcome_count']}"
    )
    lines.append(f"max trace distance: {r['max_distance']:.3e}  mean: {r['mean_distance']:.3e}")
    lines.append(f"verdict: {r['verdict']} (threshold {r['threshold']:g})")
    return "\n".join(lines)


# -- entry point ----------------------------------------------------------------------


def _emit(args, report: dict, text: str) -> None:
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(text)


def _cmd_check(args) -> int:
    kind, obj = _read_source(args)
    if kind != "problem":
        raise CliError("check expects a problem file, not a protocol file", EXIT_INPUT)
    report, code = check_report(obj)
    _emit(args, report, _format_check(report))
    return code


def _cmd_synthesize(args) -> int:
    kind, problem = _read_source(args)
    if kind != "problem":
        raise CliError("synthesize expects a problem file", EXIT_INPUT)
    spec = synthesize_from_problem(problem, args.order)
    text = serialize_protocol(spec)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        summary = {"written": args.out, "capacities": list(spec.capacities), "outcomes": spec.outcome_count}
        _emit(args, summary, f"wrote {args.out}: capacities {tuple(spec.capacities)}, {spec.outcome_count} outcomes")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    kind, obj = _read_source(args)
    problem = obj if kind == "problem" else None
    spec = synthesize_from_problem(obj, args.order) if kind == "problem" else obj
    report, code = simulate_report(spec, problem, args.trials, args.seed, args.mode, args.samples, args.budget)
    _emit(args, report, _format_simulation(report))
    return code


def _cmd_demo(args) -> int:
    problem = load_demo(args.name)
    check, code = check_report(problem)
    if code != EXIT_OK:
        _emit(args, {"check": check}, _format_check(check))
        return code
    spec = synthesize_from_problem(problem, args.order)
    sim, code = simulate_report(spec, problem, args.trials, args.seed, args.mode, args.samples, args.budget)
    report = {"demo": args.name, "check": check, "simulation": sim}
    text = "\n".join([f"== {args.name}: check ==", _format_check(check),
                      f"== {args.name}: simulation ==", _format_simulation(sim)])
    _emit(args, report, text)
    return code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit machine-readable JSON")
    common.add_argument("--budget", type=int, default=dense.DEFAULT_BUDGET, metavar="DIM",
                        help="largest dense dimension to materialize (default %(default)s)")
    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--input", metavar="PATH", help="problem file (JSON or text) or protocol file")
    source.add_argument("--demo", choices=DEMOS, help="use a built-in example instead of --input")
    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--trials", type=int, default=1, help="number of random input sets")
    sim.add_argument("--seed", type=int, default=None, help="seed for inputs and outcome sampling")
    sim.add_argument("--mode", choices=("auto", "enumerate", "sample"), default="auto",
                     help="enumerate all outcomes, sample them, or decide by count (<= 4096 enumerates)")
    sim.add_argument("--samples", type=int, default=50, help="outcomes drawn per trial in sample mode")
    order = argparse.ArgumentParser(add_help=False)
    order.add_argument("--order", choices=("before", "after"), default="before",
                       help="apply the receiver unitary before or after the senders' measurements")

    parser = argparse.ArgumentParser(prog="stabtel", description="Stabilizer-state teleportation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", parents=[common, source], help="validate a problem and report capacities")
    p.set_defaults(func=_cmd_check)
    p = sub.add_parser("synthesize", parents=[common, source, order], help="write a protocol file")
    p.add_argument("--out", metavar="PATH", help="output path (default: stdout)")
    p.set_defaults(func=_cmd_synthesize)
    p = sub.add_parser("simulate", parents=[common, source, sim, order], help="dense simulation of a protocol")
    p.set_defaults(func=_cmd_simulate)
    p = sub.add_parser("demo", parents=[common, sim, order], help="run a built-in example end to end")
    p.add_argument("name", choices=DEMOS)
    p.set_defaults(func=_cmd_demo)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "trials", 1) < 1:
        parser.error("--trials must be >= 1")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except NoDecompositionError as exc:
        print(f"no decomposition: {exc}; {CAVEAT}", file=sys.stderr)
        return EXIT_NO_DECOMPOSITION
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except StabtelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
