"""Command-line entry point.

Exit codes: 0 when the verdict is true or the command succeeded, 1 when a
verdict is false, 2 on any error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import warnings

from .analysis import SpliceWarning
from .beliefs import BeliefAssessment, compute_beliefs, validate_beliefs
from .equilibrium import (
    check_sequential,
    convert_to_sequential,
    find_nash,
    prune_to_lean,
)
from .game import expected_utility
from .gamefile import parse_game_file
from .mediated import (
    MediatedGame,
    mediated_beliefs,
    mediated_check,
    mediated_expected_utility,
)
from .report import report
from .scenarios import REGISTRY, run_scenario


class UsageError(Exception):
    pass


def parse_budget(text: str) -> dict:
    keys = {"steps": "max_steps", "coins": "max_random_bits", "tape": "tape_window"}
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        k, sep, v = part.partition("=")
        if not sep or k.strip() not in keys or not v.strip().isdigit():
            raise UsageError(f"bad budget item {part!r}; expected steps=N,coins=N,tape=N")
        out[keys[k.strip()]] = int(v)
    return out


def load_game(path: str, budget: str | None):
    with open(path, encoding="utf-8") as fh:
        g = parse_game_file(fh.read())
    if budget:
        g = dataclasses.replace(g, budget=dataclasses.replace(g.budget, **parse_budget(budget)))
    return g


def _profile(g, text: str) -> tuple:
    names = [n.strip() for n in text.split(",")]
    return g.profile(names)


def _emit(result, fmt) -> None:
    sys.stdout.buffer.write(report(result, fmt))
    sys.stdout.flush()


def _names(profile) -> list:
    return [m.name for m in profile]


def cmd_validate(args) -> int:
    g = load_game(args.file, args.budget)
    diags = g.validate()
    _emit({"valid": not diags, "diagnostics": diags}, args.format)
    return 0 if not diags else 1


def cmd_expected_utility(args) -> int:
    g = load_game(args.file, args.budget)
    p = _profile(g, args.profile)
    u = mediated_expected_utility(g, p) if isinstance(g, MediatedGame) else expected_utility(g, p)
    _emit({"profile": _names(p), "utility": list(u)}, args.format)
    return 0


def cmd_nash(args) -> int:
    g = load_game(args.file, args.budget)
    if isinstance(g, MediatedGame):
        found = [p for p in g.profiles() if mediated_check(g, p, "nash").verdict]
    else:
        found = find_nash(g)
    _emit({"nash": [",".join(_names(p)) for p in found], "count": len(found)}, args.format)
    return 0 if found else 1


def cmd_beliefs(args) -> int:
    g = load_game(args.file, args.budget)
    p = _profile(g, args.profile)
    if isinstance(g, MediatedGame):
        mu = mediated_beliefs(g, p)
    else:
        mu = compute_beliefs(g, p)
        ok, bad = validate_beliefs(g, p, mu)
        if not ok:
            raise RuntimeError(f"computed beliefs fail validation: {bad[0]}")
    _emit({"profile": _names(p), "belief": mu.dump()}, args.format)
    return 0


def cmd_seqeq(args) -> int:
    g = load_game(args.file, args.budget)
    p = _profile(g, args.profile)
    if isinstance(g, MediatedGame):
        rep = mediated_check(g, p, args.mode)
    else:
        rep = check_sequential(g, BeliefAssessment(p, compute_beliefs(g, p)), args.mode)
    _emit(rep, args.format)
    return 0 if rep.verdict else 1


def _plain_only(g, what):
    if isinstance(g, MediatedGame):
        raise UsageError(f"{what} is not available for mediated games")


def cmd_convert(args) -> int:
    g = load_game(args.file, args.budget)
    _plain_only(g, "convert")
    result = convert_to_sequential(g, _profile(g, args.profile))
    _emit(result, args.format)
    return 0


def cmd_prune(args) -> int:
    g = load_game(args.file, args.budget)
    _plain_only(g, "prune")
    pruned = prune_to_lean(g, _profile(g, args.profile))
    _emit({"profile": _names(pruned),
           "states": [" ".join(m.states) for m in pruned]}, args.format)
    return 0


def cmd_scenario(args) -> int:
    result = run_scenario(args.name)
    _emit(result, args.format)
    return 0 if result.passed else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "structured"), default="text")
    common.add_argument("--budget", help="override, e.g. steps=100,coins=4,tape=16")

    parser = argparse.ArgumentParser(prog="machgame",
                                     description="Analyse Bayesian machine games.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, *positional, **extra):
        sp = sub.add_parser(name, parents=[common])
        for arg in positional:
            sp.add_argument(arg)
        for flag, kw in extra.items():
            sp.add_argument(flag, **kw)
        sp.set_defaults(func=func)

    add("validate", cmd_validate, "file")
    add("expected-utility", cmd_expected_utility, "file", "profile")
    add("nash", cmd_nash, "file")
    add("beliefs", cmd_beliefs, "file", "profile")
    add("seqeq", cmd_seqeq, "file", "profile",
        **{"--mode": dict(choices=("exante", "interim"), required=True)})
    add("convert", cmd_convert, "file", "profile")
    add("prune", cmd_prune, "file", "profile")
    sc = sub.add_parser("scenario", parents=[common])
    sc.add_argument("name", choices=sorted(REGISTRY))
    sc.set_defaults(func=cmd_scenario)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    warnings.simplefilter("ignore", SpliceWarning)
    try:
        return args.func(args)
    except Exception as exc:  # every failure maps to exit code 2
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
