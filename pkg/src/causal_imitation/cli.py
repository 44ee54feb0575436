"""Command-line entry point: ``causal-imitation <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .diagram import DiagramError, ImitationQuery, parse_diagram
from .experiment import parse_methods, run_experiment
from .fixtures import fixture_names, load_query, run_fixture
from .imitation import construct_plan, strategy_contexts
from .scm import ScmError, expectation, scm_to_json
from .separation import c_components, d_separated

EXIT_IMITABLE, EXIT_ERROR, EXIT_NOT_IMITABLE = 0, 1, 2


class CliError(Exception):
    pass


def _load(path: str) -> ImitationQuery:
    """Read a .cg file; a bare fixture name (with or without .cg) also works."""
    p = Path(path)
    if p.is_file():
        try:
            return parse_diagram(p.read_text(), name=p.stem)
        except DiagramError as exc:
            where = f"{path}:{exc.line}" if exc.line else path
            raise CliError(f"{where}: {exc}") from None
    if p.stem in fixture_names() and p.parent == Path("."):
        return load_query(p.stem)
    raise CliError(f"cannot read graph file {path!r}")


def _graph_arg(args) -> str:
    path = args.graph or args.path
    if not path:
        raise CliError("a graph file is required (positional or --graph)")
    return path


def _names(text: str) -> list[str]:
    return [t for t in text.replace(",", " ").split() if t]


def _fmt(vs) -> str:
    return "{" + ", ".join(vs) + "}"


# -- commands -----------------------------------------------------------------


def cmd_check(args) -> int:
    q = _load(_graph_arg(args))
    verdict = construct_plan(q)
    g = q.diagram
    if args.json:
        print(json.dumps(verdict.to_json(g)))
    else:
        print(f"query: {q.name or '-'}  actions={_fmt(q.actions)}  target={q.target}")
        print(f"imitable: {'yes' if verdict.imitable else 'no'}")
        if verdict.missing_actions:
            print(f"missing actions: {_fmt(g.sort(verdict.missing_actions))}")
        print(f"O^X: {_fmt(g.sort(verdict.ox.keys()))}")
        print(f"boundary actions: {_fmt(g.sort(verdict.plan.boundary_actions))}")
        for x in verdict.plan.covered_actions:
            cond = verdict.plan.condition[x]
            print(f"  {x} | {_fmt(g.sort(verdict.plan.contexts[x]))}  (condition {int(cond) if cond else 'FAIL'})")
    return EXIT_IMITABLE if verdict.imitable else EXIT_NOT_IMITABLE


def cmd_dsep(args) -> int:
    if args.graph and args.path is not None:
        # with --graph every positional is a node set
        args.a, args.b, args.given, args.path = args.path, args.a, args.b, None
    q = _load(_graph_arg(args))
    a, b, z = _names(args.a), _names(args.b), _names(args.given or "")
    try:
        result = d_separated(q.diagram, a, b, z)
    except DiagramError as exc:
        raise CliError(str(exc)) from None
    if args.json:
        print(json.dumps({"a": a, "b": b, "given": z, "separated": result}))
    else:
        print(f"{_fmt(a)} {'_||_' if result else 'not _||_'} {_fmt(b)} | {_fmt(z)}")
    return 0


def cmd_ccomp(args) -> int:
    q = _load(_graph_arg(args))
    part = c_components(q.diagram)
    comps = [list(q.diagram.sort(c)) for c in part.components]
    if args.json:
        print(json.dumps({"components": comps}))
    else:
        for c in comps:
            print(_fmt(c))
    return 0


def cmd_simulate(args) -> int:
    q = _load(_graph_arg(args))
    try:
        methods = parse_methods(args.methods)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if args.models < 1 or args.samples < 0:
        raise CliError("--models must be >= 1 and --samples >= 0")
    try:
        report = run_experiment(q, args.models, args.samples, methods, args.seed)
    except ScmError as exc:
        raise CliError(str(exc)) from None
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    if args.json:
        print(json.dumps([r.__dict__ for r in report.rows]))
    else:
        print(report.to_text())
    return 0


def cmd_fixtures(args) -> int:
    if args.op == "list":
        for name in fixture_names():
            print(name)
        return 0
    if not args.name:
        raise CliError(f"'fixtures {args.op}' needs a fixture name")
    try:
        if args.op == "show":
            from .diagram import serialize_query

            print(serialize_query(load_query(args.name)), end="")
            return 0
        report = run_fixture(args.name, n_models=args.models if args.models is not None else 100, seed=args.seed)
    except KeyError as exc:
        raise CliError(str(exc.args[0])) from None
    for label, ok, detail in report.lines:
        print(f"[{'ok' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else ""))
    print(f"{report.name}: {'PASS' if report.passed else 'FAIL'} ({report.seconds:.2f}s)")
    return 0 if report.passed else EXIT_ERROR


def cmd_witness(args) -> int:
    from .oracle import best_imitator
    from .witness import chain_witness

    q = _load(_graph_arg(args))
    if not args.action:
        raise CliError("--action is required")
    try:
        m = chain_witness(q, args.action)
    except ScmError as exc:
        raise CliError(str(exc)) from None
    expert = expectation(m, q.target)
    best = best_imitator(m, strategy_contexts(q, "all"), q.target, q.actions).best_value
    if args.json:
        out = scm_to_json(q, m)
        out["expert"] = expert
        out["best_imitator"] = best
        print(json.dumps(out))
        return 0
    g = m.diagram
    for v in g.nodes:
        ps = g.parents(v)
        table = m.cpts[v].reshape(-1, m.domains[v])
        print(f"{v} | {', '.join(ps) if ps else '-'}")
        for i, row in enumerate(table):
            print(f"  {i:>3}: " + " ".join(f"{p:.3g}" for p in row))
    print(f"expert E[Y] = {expert:.6g}")
    print(f"best imitator (all observed contexts) = {best:.6g}")
    return 0


def cmd_oracle(args) -> int:
    from .oracle import OracleCapError, enumerate_def3

    q = _load(_graph_arg(args))
    t0 = time.perf_counter()
    verdict = construct_plan(q)
    t1 = time.perf_counter()
    try:
        found = enumerate_def3(q)
    except OracleCapError as exc:
        raise CliError(str(exc)) from None
    t2 = time.perf_counter()
    agree = (found is not None) == verdict.imitable
    if args.json:
        print(json.dumps({"imitable": verdict.imitable, "oracle_imitable": found is not None,
                          "agree": agree, "seconds": {"plan": t1 - t0, "oracle": t2 - t1}}))
    else:
        print(f"construct_plan: {'imitable' if verdict.imitable else 'not imitable'} ({t1 - t0:.4f}s)")
        print(f"oracle:         {'imitable' if found is not None else 'not imitable'} ({t2 - t1:.4f}s)")
        if found is not None:
            print("  " + "  ".join(f"{x}|{_fmt(q.diagram.sort(z))}" for x, z in found.items()))
        print(f"agree: {'yes' if agree else 'NO'}")
    return 0 if agree else EXIT_ERROR


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="causal-imitation", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def graph_command(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("path", nargs="?", help="graph file (.cg) or fixture name")
        p.add_argument("--graph", "-g", help="graph file, alternative to the positional path")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.set_defaults(func=func)
        return p

    graph_command("check", cmd_check, "imitability verdict and plan")
    graph_command("plan", cmd_check, "same as check")
    p = graph_command("dsep", cmd_dsep, "test a d-separation statement")
    p.add_argument("a", help="first node set, comma separated")
    p.add_argument("b", help="second node set, comma separated")
    p.add_argument("given", nargs="?", default="", help="conditioning set, comma separated")
    graph_command("ccomp", cmd_ccomp, "list c-components")
    p = graph_command("simulate", cmd_simulate, "cloning error over random binary models")
    p.add_argument("--models", type=int, default=200)
    p.add_argument("--samples", type=int, default=0, help="0 fits policies exactly")
    p.add_argument("--methods", default="all", help="comma list of seq, pi, parents, all; a lone all means every method")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", metavar="PATH", help="also write the report as CSV")
    p = graph_command("witness", cmd_witness, "XOR-chain counterexample model")
    p.add_argument("--action", help="action confounded with the target")

    p = sub.add_parser("fixtures", help="bundled example queries")
    p.add_argument("op", choices=["list", "run", "show"])
    p.add_argument("name", nargs="?")
    p.add_argument("--models", type=int, default=None, help="random models for imitable fixtures (default 100)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fixtures)

    p = sub.add_parser("oracle", help="compare against brute-force search")
    p.add_argument("op", choices=["check"])
    p.add_argument("path", nargs="?")
    p.add_argument("--graph", "-g")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
