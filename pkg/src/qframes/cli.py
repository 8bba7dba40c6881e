"""Command-line entry point: ``qframes {fr,certify,chsh,sample}``.

Exit codes: 0 success or consistent, 1 inconsistency certified, 2 usage or
validation error.
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter
from fractions import Fraction
from math import sqrt
from typing import Sequence

from .frames import global_assignments, hardy_certificate
from .measurement import born, format_outcome, sample
from .scenario_io import (
    Report,
    ScenarioError,
    certificate_to_dict,
    distribution_to_dict,
    load_scenario,
    support_to_dict,
)
from .scenarios import (
    CHSH_STATES,
    TSIRELSON,
    classical_chsh_bound,
    fr_contexts,
    maximize_chsh,
    run_fr,
)

EXIT_OK, EXIT_INCONSISTENT, EXIT_USAGE = 0, 1, 2


def format_probability(p: float) -> str:
    """Exact fraction (denominator <= 16) alongside the decimal, when one fits within 1e-12."""
    frac = Fraction(p).limit_denominator(16)
    if abs(float(frac) - p) <= 1e-12:
        return f"{frac} ({p:.6f})"
    return f"{p:.6f}"


def _table(rows: Sequence[Sequence[str]], header: Sequence[str]) -> list[str]:
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
    fmt = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()  # noqa: E731
    return [fmt(header), *(fmt(r) for r in rows)]


def _emit(args, report: Report, lines: list[str]) -> None:
    if args.format == "json":
        sys.stdout.write(report.to_json())
    else:
        print("\n".join(lines))


def cmd_fr(args) -> int:
    rep = run_fr(args.mode, args.seed)
    report = Report("fr", "frauchiger-renner", seed=args.seed)
    report.details["mode"] = args.mode
    report.distributions["XY"] = distribution_to_dict(rep.super_distribution)
    report.probabilities["p_ok_ok"] = rep.p_ok_ok
    lines = []
    if args.mode == "unitary":
        lines.append("mode unitary: only Wigner and Friend register outcomes; the state stays entangled")
        for ctx in fr_contexts():
            report.distributions.setdefault(ctx.id, distribution_to_dict(born(ctx.joint, rep.pre_super_state)))
        report.support = support_to_dict(rep.table)
        report.certificate = certificate_to_dict(rep.certificate)
    else:
        branch = format_outcome(rep.alice_bob_outcome)
        lines.append(f"mode collapse: Alice and Bob register A,B = {branch}; the state is a product state")
        report.details["alice_bob_outcome"] = list(rep.alice_bob_outcome)
    lines.append("")
    lines += _table(
        [(format_outcome(o), format_probability(p)) for o, p in rep.super_distribution.items()],
        ("X,Y", "probability"),
    )
    lines.append("")
    lines.append(f"P(ok,ok) = {format_probability(rep.p_ok_ok)}")
    if rep.certificate is not None:
        lines.append("")
        lines.append("single-world reading of the outcome ok,ok:")
        lines += rep.certificate.render(rep.table)
    _emit(args, report, lines)
    return EXIT_OK


def _parse_fixes(fixes: Sequence[str]) -> dict[str, str]:
    out = {}
    for item in fixes:
        obs, sep, value = item.partition("=")
        if not sep or not obs or not value:
            raise ScenarioError(f"expected OBSERVABLE=VALUE, got {item!r}", "--fix")
        out[obs.strip()] = value.strip()
    return out


def cmd_certify(args) -> int:
    scenario = load_scenario(args.scenario)
    constraints = {**scenario.constraints, **_parse_fixes(args.fix)}
    table = scenario.support_table(args.tol)
    try:
        found = global_assignments(table, constraints)
    except ValueError as exc:
        raise ScenarioError(str(exc), "--fix") from None
    report = Report("certify", scenario.id, support=support_to_dict(table), assignments=found)
    report.details["constraints"] = constraints
    for ctx in scenario.contexts:
        report.distributions[ctx.id] = distribution_to_dict(born(ctx.joint, scenario.state))
    lines = [f"scenario {scenario.id}"]
    lines += [f"  support {cid}: " + " ".join("{" + t + "}" for t in row) for cid, row in report.support.items()]
    lines.append("constraints: " + (", ".join(f"{o}={v}" for o, v in constraints.items()) or "none"))
    if found:
        lines.append(f"consistent: {len(found)} single-world assignment(s)")
        lines += ["  " + ", ".join(f"{o}={v}" for o, v in a.items()) for a in found]
        _emit(args, report, lines)
        return EXIT_OK
    cert = hardy_certificate(table, constraints)
    report.certificate = certificate_to_dict(cert)
    lines.append("inconsistent: no single-world assignment")
    lines += cert.render(table)
    _emit(args, report, lines)
    return EXIT_INCONSISTENT


def cmd_chsh(args) -> int:
    state = CHSH_STATES[args.state]()
    setting, value = maximize_chsh(state, args.restarts, args.seed)
    report = Report("chsh", args.state, seed=args.seed)
    report.probabilities = {
        "chsh_value": value,
        "classical_bound": float(classical_chsh_bound()),
        "tsirelson_bound": TSIRELSON,
    }
    report.details = {"setting": dict(zip(("a", "a2", "b", "b2"), setting.as_tuple())), "restarts": args.restarts}
    lines = [
        f"state {args.state}, {args.restarts} restarts, seed {args.seed}",
        "best setting (rad): " + ", ".join(f"{k}={v:.9f}" for k, v in report.details["setting"].items()),
        f"best CHSH value:   {value:.10f}",
        f"classical bound:   {classical_chsh_bound()}",
        f"Tsirelson bound:   2*sqrt(2) = {2 * sqrt(2):.10f}",
    ]
    _emit(args, report, lines)
    return EXIT_OK


def cmd_sample(args) -> int:
    scenario = load_scenario(args.scenario)
    try:
        ctx = scenario.context(args.context)
    except KeyError:
        names = ", ".join(c.id for c in scenario.contexts)
        raise ScenarioError(f"unknown context {args.context!r} (available: {names})", "--context") from None
    if args.n < 1:
        raise ScenarioError("n must be >= 1", "--n")
    dist = born(ctx.joint, scenario.state)
    draws = sample(ctx.joint, scenario.state, args.n, args.seed)
    counts = Counter(draws)
    report = Report("sample", scenario.id, seed=args.seed)
    report.distributions[ctx.id] = distribution_to_dict(dist)
    report.details = {
        "context": ctx.id,
        "n": args.n,
        "counts": {format_outcome(o): counts.get(o, 0) for o in dist},
        "frequencies": {format_outcome(o): counts.get(o, 0) / args.n for o in dist},
    }
    if args.n == 1:
        lines = [f"{ctx.id}: {format_outcome(draws[0])}"]
    else:
        rows = [
            (format_outcome(o), str(counts.get(o, 0)), f"{counts.get(o, 0) / args.n:.6f}", format_probability(p))
            for o, p in dist.items()
        ]
        lines = [f"context {ctx.id}, n={args.n}, seed={args.seed}"]
        lines += _table(rows, ("outcome", "count", "frequency", "born"))
    _emit(args, report, lines)
    return EXIT_OK


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _tol(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("tolerance must lie in (0, 1)")
    return value


def build_parser() -> argparse.ArgumentParser:
    def add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        p.add_argument("--format", choices=("table", "json"), default=d("table"))
        p.add_argument("--seed", type=_seed, default=d(0))
        p.add_argument("--tol", type=_tol, default=d(1e-9), help="support tolerance")

    parser = argparse.ArgumentParser(prog="qframes", description=__doc__.splitlines()[0])
    add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fr", help="Frauchiger-Renner protocol in either ultimate-observer mode")
    p.add_argument("--mode", choices=("unitary", "collapse"), required=True)
    add_globals(p, suppress=True)
    p.set_defaults(func=cmd_fr)

    p = sub.add_parser("certify", help="search single-world assignments for a scenario file")
    p.add_argument("scenario", nargs="?", default="builtin:fr", help="path or builtin:<name> (default builtin:fr)")
    p.add_argument("--fix", action="append", default=[], metavar="OBS=VALUE")
    add_globals(p, suppress=True)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("chsh", help="maximize the CHSH value over X-Z plane settings")
    p.add_argument("--state", choices=sorted(CHSH_STATES), default="singlet")
    p.add_argument("--restarts", type=int, default=20)
    add_globals(p, suppress=True)
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("sample", help="seeded Born sampling in one context")
    p.add_argument("scenario", nargs="?", default="builtin:fr")
    p.add_argument("--context", required=True)
    p.add_argument("--n", type=int, default=1000)
    add_globals(p, suppress=True)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "chsh" and args.restarts < 1:
        parser.error("--restarts must be >= 1")
    try:
        return args.func(args)
    except ValueError as exc:  # ScenarioError and validation failures from the library
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
