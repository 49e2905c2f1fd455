"""Command-line front end: one subcommand per pipeline stage, JSON in and out.

Exit codes: 0 when the command succeeds and any property it checks holds,
1 when a checked property fails (the report carries a witness), 2 for
unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .errors import MetricViolation, NotAMinimumMatching, TCSpaceError
from .harness import (
    KINDS,
    GeneratorSpec,
    gen_greedy_pair_sequence,
    gen_random_metric,
    run_property_suite,
)
from .lp import lp_to_dict
from .matching import (
    Matching,
    MatchingInstance,
    brute_force_min_matching,
    check_prefix_matching_criterion,
    dual_from_dict,
    dual_to_dict,
    odd_cut_dual_lp,
    pairs_from_dict,
    pairs_to_dict,
    solve_dual_lp,
    solve_matching_lp,
    uncross_to_laminar,
    verify_dual_certificate,
)
from .metric import space_from_dict, space_to_dict
from .projection import (
    apply_projection,
    build_projection,
    certify_projection,
    projection_to_dict,
    realize,
)
from .transport import problem_from_dict, problem_to_dict, tc_norm

__all__ = ["main", "run"]


class InputError(Exception):
    """Raised for anything that should end in exit code 2."""


def _load_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from exc


def _need(args, name: str) -> str:
    value = getattr(args, name)
    if value is None:
        raise InputError(f"--{name} is required for {args.command}")
    return value


def _space(args):
    return space_from_dict(_load_json(_need(args, "space")))


def _pairs(args):
    return pairs_from_dict(_load_json(_need(args, "pairs")))


def _pinned_dual(args, space, pairs):
    if args.dual is None:
        return None
    return dual_from_dict(MatchingInstance.from_pairs(space, pairs), _load_json(args.dual))


def _plain(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _dump_lp(args, lp) -> None:
    if getattr(args, "dump_lp", None):
        Path(args.dump_lp).write_text(json.dumps(lp_to_dict(lp), indent=2) + "\n")


# ---------------------------------------------------------------------------
# subcommands; each returns (exit code, report)


def cmd_validate(args):
    obj = _load_json(_need(args, "space"))
    try:
        space = space_from_dict(obj)
    except MetricViolation as exc:
        return 1, {"valid": False, "error": type(exc).__name__, "detail": str(exc),
                   "witness": list(exc.points)}
    return 0, {"valid": True, "points": len(space)}


def cmd_tc_norm(args):
    space = _space(args)
    f = problem_from_dict(_load_json(_need(args, "problem")))
    res = tc_norm(space, f)
    return 0, {"value": res.value,
               "plan": [[s, t, a] for s, t, a in res.plan.moves],
               "potentials": res.potentials}


def cmd_match(args):
    space = _space(args)
    if args.pairs is not None:
        pairs = _pairs(args)
        inst = MatchingInstance.from_pairs(space, pairs)
    else:
        pairs = None
        inst = MatchingInstance(space, space.points)
    m, weight, _, lp = solve_matching_lp(inst, with_outcome=True)
    _dump_lp(args, lp)
    report = {"weight": weight, "matching": [list(p) for p in m.pairs]}
    if pairs is None:
        return 0, report
    given = Matching(tuple(pairs)).weight(space)
    report.update(given_weight=given, given_is_minimum=given == weight)
    return (0 if given == weight else 1), report


def _dual_for(args, space, pairs):
    inst = MatchingInstance.from_pairs(space, pairs)
    matching = Matching(tuple(pairs))
    pinned = _pinned_dual(args, space, pairs)
    if pinned is not None:
        return inst, matching, pinned, False
    if args.dump_lp:
        _dump_lp(args, odd_cut_dual_lp(inst)[0])
    _, opt = brute_force_min_matching(inst)
    if matching.weight(space) != opt:
        raise NotAMinimumMatching(len(pairs), matching.weight(space), opt)
    return inst, matching, uncross_to_laminar(inst, matching, solve_dual_lp(inst)), True


def cmd_dual(args):
    space = _space(args)
    pairs = _pairs(args)
    inst, matching, dual, computed = _dual_for(args, space, pairs)
    cert = verify_dual_certificate(inst, matching, dual, check_cardinality=computed)
    return (0 if cert.ok else 1), {"dual": dual_to_dict(inst, dual), "certificate_ok": cert.ok,
                                   "violations": cert.violations}


def cmd_project(args):
    space = _space(args)
    pairs = _pairs(args)
    P = build_projection(space, pairs, _pinned_dual(args, space, pairs))
    report = projection_to_dict(P)
    if args.problem is not None:
        f = problem_from_dict(_load_json(args.problem))
        el = apply_projection(P, f)
        report["image"] = {"coefficients": el.coefficients,
                           "problem": problem_to_dict(realize(P, el))["masses"]}
    return 0, report


def cmd_certify(args):
    space = _space(args)
    pairs = _pairs(args)
    P = build_projection(space, pairs, _pinned_dual(args, space, pairs))
    cert = certify_projection(P, battery=args.battery, samples=args.samples, seed=args.seed)
    return (0 if cert.ok else 1), cert.to_dict()


def cmd_criterion(args):
    space = _space(args)
    res = check_prefix_matching_criterion(space, _pairs(args))
    if res.passed:
        return 0, {"passed": True}
    return 1, {"passed": False, "failing_prefix": res.failing_prefix,
               "prefix_weight": res.prefix_weight, "optimum": res.optimum}


def cmd_generate(args):
    spec = GeneratorSpec(args.kind, args.size, args.seed, args.denominator_bound)
    space = gen_random_metric(spec)
    report = {"space": space_to_dict(space)}
    code = 0
    if args.n_pairs is not None:
        pairs = gen_greedy_pair_sequence(space, args.n_pairs)
        report["pairs"] = None if pairs is None else pairs_to_dict(pairs)["pairs"]
        code = 0 if pairs is not None else 1
    return code, report


def cmd_suite(args):
    spec = GeneratorSpec(args.kind, args.size, args.seed, args.denominator_bound)
    rep = run_property_suite(spec, args.trials, n_pairs=args.n_pairs, fault=args.fault,
                             battery=args.battery, samples=args.samples)
    return (0 if rep.ok else 1), rep.to_dict()


COMMANDS = {
    "validate": (cmd_validate, "check that a space file is a finite metric space"),
    "tc-norm": (cmd_tc_norm, "transportation cost norm of a problem, with plan and potentials"),
    "match": (cmd_match, "minimum perfect matching via the odd-cut LP"),
    "dual": (cmd_dual, "laminar optimal odd-cut dual and its certificate"),
    "project": (cmd_project, "build the norm-one projection for a pair sequence"),
    "certify": (cmd_certify, "build and exactly certify the projection"),
    "criterion": (cmd_criterion, "prefix minimum-matching criterion for a pair sequence"),
    "generate": (cmd_generate, "random metric space, optionally with a pair sequence"),
    "suite": (cmd_suite, "randomized end-to-end property suite"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tcspace", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")
        if name not in ("generate", "suite"):
            p.add_argument("--space", metavar="FILE")
        if name in ("match", "dual", "project", "certify", "criterion"):
            p.add_argument("--pairs", metavar="FILE")
        if name in ("tc-norm", "project"):
            p.add_argument("--problem", metavar="FILE")
        if name in ("dual", "project", "certify"):
            p.add_argument("--dual", metavar="FILE", help="pin this dual instead of computing one")
        if name in ("match", "dual"):
            p.add_argument("--dump-lp", metavar="FILE", help="write the LP instance as JSON")
        if name in ("certify", "generate", "suite"):
            p.add_argument("--seed", type=int, default=0)
        if name in ("certify", "suite"):
            p.add_argument("--battery", type=int, default=20,
                           help="random coefficient vectors for the l1 check")
            p.add_argument("--samples", type=int, default=5,
                           help="random problems for the norm-bound check")
        if name in ("generate", "suite"):
            p.add_argument("--kind", choices=KINDS, default="clustered")
            p.add_argument("--size", type=int, default=6)
            p.add_argument("--denominator-bound", type=int, default=4)
            p.add_argument("--n-pairs", type=int)
        if name == "suite":
            p.add_argument("--trials", type=int, default=10)
            p.add_argument("--fault", choices=("perturb-dual",))
    return parser


def _as_text(obj, indent: str = "") -> str:
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{indent}{k}:")
                lines.append(_as_text(v, indent + "  "))
            else:
                lines.append(f"{indent}{k}: {json.dumps(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, dict) and v:
                lines.append(f"{indent}-")
                lines.append(_as_text(v, indent + "  "))
            else:
                lines.append(f"{indent}- {json.dumps(v)}")
    else:
        lines.append(f"{indent}{json.dumps(obj)}")
    return "\n".join(lines)


def _emit(args, report, stdout) -> None:
    report = _plain(report)
    if getattr(args, "format", "json") == "text":
        text = _as_text(report) + "\n"
    else:
        text = json.dumps(report, indent=2) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        stdout.write(text)


def run(argv: Optional[Sequence[str]] = None, *, stdout=None, stderr=None) -> int:
    """Parse ``argv``, dispatch, write the report and return the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the usage message
        return 2 if exc.code else 0
    handler = COMMANDS[args.command][0]
    try:
        code, report = handler(args)
    except NotAMinimumMatching as exc:
        code, report = 1, {"error": "NotAMinimumMatching", "detail": str(exc),
                           "failing_prefix": exc.k, "prefix_weight": exc.weight,
                           "optimum": exc.optimum}
    except (InputError, TCSpaceError) as exc:
        stderr.write(f"tcspace {args.command}: {type(exc).__name__}: {exc}\n")
        return 2
    try:
        _emit(args, report, stdout)
    except OSError as exc:
        stderr.write(f"tcspace {args.command}: cannot write output: {exc}\n")
        return 2
    return code


def main() -> None:
    sys.exit(run())
