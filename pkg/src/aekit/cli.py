"""``aekit`` command line.

Every subcommand reads JSON (``-`` for stdin) and writes one canonical JSON
report. Exit codes: 0 success, 1 no solution under ``--require-solution``,
2 invalid input or usage, 3 regularity FAIL.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import os
import sys
from typing import Any, Sequence, TextIO

from . import _jsonio
from ._parallel import resolve_threads
from .economy import (EconomyProfile, ToleranceConfig, load_json_text, parse_cloud,
                      problem_from_json, problem_to_json, validate_economy)
from .equilibrium import certify, ne_oracle, ne_via_gap
from .errors import AEKitError, ImprovementSetMismatch, ParseError
from .gapfun import gap, gap_sweep
from .profiles import (ProfileFamily, check_regularity, family_from_json, lsc_probe, rho,
                       stability_experiment)
from .reductions import (GNEPSpec, RelationSpec, from_gnep, from_relation, gnep_from_json,
                         relation_from_json)
from .setval import excess, hausdorff
from .slmfg import SLMFGProblem, signal_continuity_probe, slmfg_from_json, solve_slmfg

EXIT_OK, EXIT_NO_SOLUTION, EXIT_INVALID, EXIT_REGULARITY_FAIL = 0, 1, 2, 3
DEFAULT_EPS_GRID = "1,0.5,0.25,0.125,0.0625"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}\n")


# -- argument types --------------------------------------------------------------


def _tolerances(text: str) -> dict:
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        key, sep, value = part.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected key=value, got {part!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"tolerance {key!r} is not a real: {value!r}") from None
    unknown = set(out) - {"dedup", "feas", "intersect", "gap_zero"}
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown tolerance(s): {', '.join(sorted(unknown))}")
    bad = [k for k, v in out.items() if not (v >= 0 and v != float("inf"))]
    if bad:
        raise argparse.ArgumentTypeError(f"tolerance {bad[0]} must be a finite nonnegative real")
    return out


def _window(text: str) -> range:
    lo, sep, hi = text.partition("..")
    try:
        a, b = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a..b with integers, got {text!r}") from None
    if not sep or a > b:
        raise argparse.ArgumentTypeError(f"expected a nonempty range a..b, got {text!r}")
    return range(a, b + 1)


def _reals(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one value")
    return values


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _threads(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        n = 0
    if n < 1:
        raise argparse.ArgumentTypeError(f"thread count must be a positive integer, got {text!r}")
    return n


def _json_arg(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"invalid JSON: {exc.msg}") from None


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tolerances", type=_tolerances, default={}, metavar="k=v,...")
    common.add_argument("--threads", type=_threads, default=None, metavar="N")
    common.add_argument("--pretty", action="store_true")
    common.add_argument("-o", "--output", default=None, metavar="PATH")

    parser = _Parser(prog="aekit", description="Abstract economies on finite grids.")
    groups = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def leaf(sub, name, inputs, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        for arg in inputs:
            p.add_argument(arg)
        return p

    ae = groups.add_parser("ae", help="equilibria of one problem").add_subparsers(
        dest="command", required=True, parser_class=_Parser)
    p = leaf(ae, "solve", ["problem"], "equilibria via the gap function")
    p.add_argument("--method", choices=("gap", "oracle"), default="gap")
    p.add_argument("--require-solution", action="store_true")
    p = leaf(ae, "gap", ["problem"], "gap function on one profile or the whole grid")
    p.add_argument("--point", type=_json_arg, default=None)
    p = leaf(ae, "certify", ["problem"], "equilibrium certificate of a profile")
    p.add_argument("--point", type=_json_arg, required=True)

    metric = groups.add_parser("metric", help="distances").add_subparsers(
        dest="command", required=True, parser_class=_Parser)
    leaf(metric, "rho", ["first", "second"], "distance between two problems on the same grids")
    leaf(metric, "hausdorff", ["first", "second"], "Hausdorff distance between two point clouds")

    reg = groups.add_parser("regularity", help="separation and inflation").add_subparsers(
        dest="command", required=True, parser_class=_Parser)
    p = leaf(reg, "check", ["input"], "check a family file or a single problem")
    p.add_argument("--eps-grid", type=_reals, default=_reals(DEFAULT_EPS_GRID))
    p.add_argument("--window", type=_window, default=None, metavar="a..b")

    stab = groups.add_parser("stability", help="equilibrium-set stability").add_subparsers(
        dest="command", required=True, parser_class=_Parser)
    p = leaf(stab, "run", ["family"], "trace equilibrium excess along a family")
    p.add_argument("--window", type=_window, default=None, metavar="a..b")

    lsc = groups.add_parser("lsc", help="lower semicontinuity of the gap").add_subparsers(
        dest="command", required=True, parser_class=_Parser)
    p = leaf(lsc, "probe", ["family"], "probe the gap along a family")
    p.add_argument("--window", type=_window, default=None, metavar="a..b")
    p.add_argument("--point", type=_json_arg, default=None)
    p.add_argument("--slack", type=float, default=None)

    red = groups.add_parser("reduce", help="build a problem from another game").add_subparsers(
        dest="command", required=True, parser_class=_Parser)
    p = leaf(red, "gnep", ["input"], "epsilon-improvement economy of a cost game")
    p.add_argument("--epsilon", type=float, default=None)
    leaf(red, "relation", ["input"], "economy of a dominance relation")

    sl = groups.add_parser("slmfg", help="leader-follower games").add_subparsers(
        dest="command", required=True, parser_class=_Parser)
    p = leaf(sl, "solve", ["problem"], "solve by enumeration")
    p.add_argument("--mode", choices=("optimistic", "pessimistic"), default="optimistic")
    p.add_argument("--require-solution", action="store_true")
    p = leaf(sl, "probe", ["problem"], "signal continuity along a leader sequence")
    p.add_argument("--sequence", type=_ints, required=True, metavar="i,j,...")
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--window", type=_window, default=None, metavar="a..b")
    p.add_argument("--tol", type=float, default=None)
    return parser


# -- input helpers ----------------------------------------------------------------------


class _Context:
    def __init__(self, args: argparse.Namespace, stdin: TextIO):
        self.args = args
        self.stdin = stdin
        self.stdin_used = False
        self.threads = resolve_threads(args.threads)

    def read(self, path: str) -> tuple[Any, str | None]:
        """Parsed JSON and the directory that relative references resolve against."""
        if path == "-":
            if self.stdin_used:
                raise ParseError("stdin can be read only once", "-")
            self.stdin_used = True
            return load_json_text(self.stdin.read()), os.getcwd()
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        try:
            return load_json_text(text), os.path.dirname(os.path.abspath(path))
        except ParseError as exc:
            raise ParseError(str(exc), path) from exc

    def tolerances(self, base: ToleranceConfig) -> ToleranceConfig:
        return base.updated(**self.args.tolerances) if self.args.tolerances else base

    def problem(self, path: str) -> EconomyProfile:
        obj, _ = self.read(path)
        gamma = problem_from_json(obj, validate=False)
        gamma = gamma.with_tolerances(self.tolerances(gamma.tolerances))
        report = validate_economy(gamma)
        if not report.passed:
            raise AEKitError("; ".join(report.violations))
        return gamma

    def family(self, path: str) -> ProfileFamily:
        obj, base_dir = self.read(path)
        if isinstance(obj, dict) and "perturbation" not in obj:
            gamma = problem_from_json(obj)
            return ProfileFamily.constant(gamma.with_tolerances(self.tolerances(gamma.tolerances)))
        family = family_from_json(obj, base_dir)
        if not self.args.tolerances:
            return family
        retol = lambda g: g.with_tolerances(self.tolerances(g.tolerances))
        limit = None if family.limit is None else retol(family.limit)
        return ProfileFamily(lambda n: retol(family.member(n)), family.indices, limit)


def _point(value: Any, gamma: EconomyProfile, path: str = "--point") -> list:
    if not isinstance(value, list) or len(value) != gamma.n_players:
        raise ParseError(f"expected a list of {gamma.n_players} player actions", path)
    return [parse_cloud([c if isinstance(c, list) else [c]], space.dim, f"{path}[{k}]").points[0]
            for k, (space, c) in enumerate(zip(gamma.players, value))]


def _cloud_file(obj: Any, path: str):
    pts = obj.get("points") if isinstance(obj, dict) else obj
    if not isinstance(pts, list):
        raise ParseError("expected a list of points or {\"points\": [...]}", path)
    if not pts:
        dim = obj.get("dim") if isinstance(obj, dict) else None
        if not isinstance(dim, int):
            raise ParseError("an empty cloud needs an explicit dim", path)
    else:
        first = pts[0]
        dim = len(first) if isinstance(first, list) else 1
    return parse_cloud(pts, dim, path)


# -- commands ----------------------------------------------------------------------------


def _ae_solve(ctx: _Context):
    gamma = ctx.problem(ctx.args.problem)
    result = (ne_via_gap if ctx.args.method == "gap" else ne_oracle)(gamma, ctx.threads)
    code = EXIT_NO_SOLUTION if ctx.args.require_solution and len(result) == 0 else EXIT_OK
    return {"status": "solved" if len(result) else "no-solution", **result.to_json()}, code


def _ae_gap(ctx: _Context):
    gamma = ctx.problem(ctx.args.problem)
    if ctx.args.point is not None:
        return gap(gamma, _point(ctx.args.point, gamma)).to_json(), EXIT_OK
    return {"evaluations": [e.to_json() for e in gap_sweep(gamma, ctx.threads)]}, EXIT_OK


def _ae_certify(ctx: _Context):
    gamma = ctx.problem(ctx.args.problem)
    return certify(gamma, _point(ctx.args.point, gamma)).to_json(), EXIT_OK


def _metric_rho(ctx: _Context):
    a, b = ctx.problem(ctx.args.first), ctx.problem(ctx.args.second)
    return {"rho": rho(a, b)}, EXIT_OK


def _metric_hausdorff(ctx: _Context):
    a = _cloud_file(ctx.read(ctx.args.first)[0], ctx.args.first)
    b = _cloud_file(ctx.read(ctx.args.second)[0], ctx.args.second)
    if a.dim != b.dim:
        raise ParseError(f"dimension mismatch: {a.dim} vs {b.dim}", ctx.args.second)
    return {"hausdorff": hausdorff(a, b), "excess": [excess(a, b), excess(b, a)]}, EXIT_OK


def _regularity_check(ctx: _Context):
    family = ctx.family(ctx.args.input)
    try:
        cert = check_regularity(family, ctx.args.eps_grid, window=ctx.args.window)
    except ImprovementSetMismatch as exc:
        return {"verdict": "FAIL", "reason": str(exc)}, EXIT_REGULARITY_FAIL
    return cert.to_json(), EXIT_OK if cert.passed else EXIT_REGULARITY_FAIL


def _stability_run(ctx: _Context):
    family = ctx.family(ctx.args.family)
    report = stability_experiment(family, ctx.args.window, threads=ctx.threads)
    return report.to_json(), EXIT_OK


def _lsc_probe(ctx: _Context):
    family = ctx.family(ctx.args.family)
    limit = family.limit if family.limit is not None else family.member(family.window(ctx.args.window)[-1])
    if ctx.args.point is not None:
        points = [_point(ctx.args.point, limit)]
    else:
        points = [list(limit.point_at(idx)) for idx in limit.grid_indices()]
    probes = []
    for x in points:
        rep = lsc_probe(family, x, x, ctx.args.window, ctx.args.slack, limit)
        probes.append({"point": [list(c) for c in x], **rep.to_json()})
    verdict = "PASS" if all(p["verdict"] == "PASS" for p in probes) else "FAIL"
    return {"verdict": verdict, "probes": probes}, EXIT_OK


def _reduce_gnep(ctx: _Context):
    spec: GNEPSpec = gnep_from_json(ctx.read(ctx.args.input)[0])
    eps = spec.epsilon if ctx.args.epsilon is None else ctx.args.epsilon
    spec = GNEPSpec(spec.players, spec.objectives, spec.constraints, eps,
                    ctx.tolerances(spec.tolerances))
    return problem_to_json(from_gnep(spec)), EXIT_OK


def _reduce_relation(ctx: _Context):
    spec: RelationSpec = relation_from_json(ctx.read(ctx.args.input)[0])
    spec = RelationSpec(spec.players, spec.dominance, spec.constraints,
                        ctx.tolerances(spec.tolerances))
    return problem_to_json(from_relation(spec)), EXIT_OK


def _slmfg(ctx: _Context) -> tuple[SLMFGProblem, list[int]]:
    obj, base_dir = ctx.read(ctx.args.problem)
    problem = slmfg_from_json(obj, base_dir)
    if ctx.args.tolerances:
        signal = {i: g.with_tolerances(ctx.tolerances(g.tolerances)) for i, g in problem.signal.items()}
        problem = SLMFGProblem(problem.leader_grid, problem.omega, problem.objective, signal)
    raw = obj["leader"]["grid"]
    canon = {p: j for j, p in enumerate(problem.leader_grid.points)}
    remap = [canon[parse_cloud([p], problem.leader_grid.dim, "leader.grid").points[0]] for p in raw]
    return problem, remap


def _slmfg_solve(ctx: _Context):
    problem, _ = _slmfg(ctx)
    sol = solve_slmfg(problem, ctx.args.mode, ctx.threads)
    code = EXIT_NO_SOLUTION if ctx.args.require_solution and not sol.found else EXIT_OK
    return sol.to_json(), code


def _slmfg_probe(ctx: _Context):
    problem, remap = _slmfg(ctx)

    def canon(i: int, flag: str) -> int:
        if not 0 <= i < len(remap):
            raise ParseError(f"leader index {i} is outside the leader grid", flag)
        return remap[i]

    seq = [canon(i, "--sequence") for i in ctx.args.sequence]
    if not seq:
        raise ParseError("the sequence must be nonempty", "--sequence")
    report = signal_continuity_probe(problem, seq, canon(ctx.args.target, "--target"),
                                     ctx.args.window, ctx.args.tol)
    return report.to_json(), EXIT_OK


COMMANDS = {
    ("ae", "solve"): _ae_solve,
    ("ae", "gap"): _ae_gap,
    ("ae", "certify"): _ae_certify,
    ("metric", "rho"): _metric_rho,
    ("metric", "hausdorff"): _metric_hausdorff,
    ("regularity", "check"): _regularity_check,
    ("stability", "run"): _stability_run,
    ("lsc", "probe"): _lsc_probe,
    ("reduce", "gnep"): _reduce_gnep,
    ("reduce", "relation"): _reduce_relation,
    ("slmfg", "solve"): _slmfg_solve,
    ("slmfg", "probe"): _slmfg_probe,
}


def run_cli(argv: Sequence[str], stdin: TextIO | None = None, stdout: TextIO | None = None,
            stderr: TextIO | None = None) -> int:
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    help_out = io.StringIO()
    try:
        with contextlib.redirect_stdout(help_out):
            args = parser.parse_args(list(argv))
    except UsageError as exc:
        stderr.write(str(exc))
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        stdout.write(help_out.getvalue())
        return EXIT_OK if not exc.code else EXIT_INVALID
    try:
        ctx = _Context(args, stdin)
        report, code = COMMANDS[(args.group, args.command)](ctx)
        text = _jsonio.dumps(report, args.pretty)
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            stdout.write(text)
        return code
    except (AEKitError, OSError) as exc:
        stderr.write(f"aekit: error: {exc}\n")
        return EXIT_INVALID


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))
