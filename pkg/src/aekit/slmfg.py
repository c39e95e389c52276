"""Single-leader multi-follower games solved by enumeration.

The leader picks ``w`` from the feasible part ``omega`` of a finite grid; the
signal map turns ``w`` into the followers' abstract economy, whose
equilibria are the admissible responses. The optimistic problem minimizes
the leader cost ``F(w, x)`` jointly over the graph
``{(w, x) : w in omega, x in NE(signal(w))}``.

A pessimistic variant (the leader guards against the worst equilibrium) is
available through ``mode="pessimistic"``; leader actions with no follower
equilibrium are skipped in that mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Sequence

from . import _jsonio
from ._parallel import ordered_map
from .economy import (EconomyProfile, GridIndex, ProfilePoint, _locate, _require, load_json_text,
                      load_reference, parse_cloud, problem_from_json, problem_to_json,
                      validate_economy)
from .equilibrium import EquilibriumSet, ne_oracle
from .errors import InvalidInputError, ParseError, ValidationError
from .profiles import rho
from .reductions import from_gnep, gnep_from_json
from .setval import FiniteCloud, Point, excess

MODES = ("optimistic", "pessimistic")


@dataclass(frozen=True)
class SLMFGProblem:
    """Leader grid, feasible leader indices, cost table and signal map.

    ``objective`` is keyed by ``(w_index, follower grid index)``; leader indices
    refer to the canonical (sorted) order of ``leader_grid``.
    """

    leader_grid: FiniteCloud
    omega: tuple[int, ...]
    objective: Mapping[tuple[int, GridIndex], float]
    signal: Mapping[int, EconomyProfile]

    def __post_init__(self):
        object.__setattr__(self, "omega", tuple(sorted(set(int(i) for i in self.omega))))
        object.__setattr__(self, "objective", MappingProxyType(
            {k: float(v) for k, v in self.objective.items()}))
        object.__setattr__(self, "signal", MappingProxyType(dict(self.signal)))
        if self.leader_grid.is_empty():
            raise InvalidInputError("the leader grid must be nonempty")
        for i in self.omega:
            if not 0 <= i < len(self.leader_grid):
                raise InvalidInputError(f"omega index {i} is outside the leader grid")
            if i not in self.signal:
                raise ValidationError(f"signal map is not defined at leader index {i}")
        images = [self.signal[i] for i in self.omega]
        for i, g in zip(self.omega, images):
            if not g.same_grids(images[0]) or g.tolerances != images[0].tolerances:
                raise ValidationError(f"signal image at leader index {i} does not share the "
                                      "follower grids and tolerances")
        for i, g in zip(self.omega, images):
            for idx in g.grid_indices():
                v = self.objective.get((i, idx))
                if v is None:
                    raise ValidationError(f"objective table incomplete at leader index {i}, "
                                          f"followers {g.point_at(idx)}")
                if not math.isfinite(v):
                    raise ValidationError("objective values must be finite")

    def leader_point(self, i: int) -> Point:
        return self.leader_grid.points[i]


def _response(problem: SLMFGProblem, i: int) -> EquilibriumSet:
    g = problem.signal[i]
    report = validate_economy(g)
    if not report.passed:
        raise ValidationError(f"signal image at leader point {problem.leader_point(i)} is invalid: "
                              + "; ".join(report.violations))
    return ne_oracle(g)


def _responses(problem: SLMFGProblem, threads: int | None) -> list[EquilibriumSet]:
    return ordered_map(lambda i: _response(problem, i), problem.omega, threads)


def build_graph(problem: SLMFGProblem, threads: int | None = None
                ) -> list[tuple[Point, ProfilePoint]]:
    """All ``(w, x)`` with ``w`` in omega and ``x`` an equilibrium of ``signal(w)``, lexicographic."""
    return [(problem.leader_point(i), x)
            for i, ne in zip(problem.omega, _responses(problem, threads)) for x in ne.equilibria]


@dataclass(frozen=True)
class SLMFGSolution:
    mode: str
    w_star: Point | None
    x_star: ProfilePoint | None
    value: float | None
    graph_size: int
    per_w_counts: tuple[tuple[Point, int], ...]

    @property
    def found(self) -> bool:
        return self.w_star is not None

    def to_json(self) -> dict:
        return {
            "status": "solved" if self.found else "no-solution",
            "mode": self.mode,
            "w": None if self.w_star is None else list(self.w_star),
            "x": None if self.x_star is None else [list(c) for c in self.x_star],
            "value": self.value,
            "graph_size": self.graph_size,
            "per_w_counts": [{"w": list(w), "count": c} for w, c in self.per_w_counts],
        }


def solve_slmfg(problem: SLMFGProblem, mode: str = "optimistic",
                threads: int | None = None) -> SLMFGSolution:
    """Minimize the leader cost over the equilibrium graph.

    Ties are broken by the lexicographic order of ``(w, x)``. When the graph
    is empty the solution has ``found == False``.
    """
    if mode not in MODES:
        raise InvalidInputError(f"mode must be one of {MODES}, got {mode!r}")
    responses = _responses(problem, threads)
    counts = tuple((problem.leader_point(i), len(ne)) for i, ne in zip(problem.omega, responses))
    size = sum(c for _, c in counts)
    best = None  # (value, i, x)
    for i, ne in zip(problem.omega, responses):
        g = problem.signal[i]
        if mode == "optimistic":
            for x in ne.equilibria:
                v = problem.objective[(i, g.index_of(x))]
                if best is None or v < best[0]:
                    best = (v, i, x)
        elif ne.equilibria:
            worst = None
            for x in ne.equilibria:
                v = problem.objective[(i, g.index_of(x))]
                if worst is None or v > worst[0]:
                    worst = (v, i, x)
            if best is None or worst[0] < best[0]:
                best = worst
    if best is None:
        return SLMFGSolution(mode, None, None, None, size, counts)
    return SLMFGSolution(mode, problem.leader_point(best[1]), best[2], best[0], size, counts)


@dataclass(frozen=True)
class SignalProbeReport:
    passed: bool
    sequence: tuple[int, ...]
    rho_trace: tuple[float, ...]
    excess_trace: tuple[float, ...]
    tol: float

    def to_json(self) -> dict:
        return {"verdict": "PASS" if self.passed else "FAIL", "sequence": list(self.sequence),
                "rho_trace": list(self.rho_trace), "excess_trace": list(self.excess_trace),
                "tol": self.tol}


def signal_continuity_probe(problem: SLMFGProblem, sequence: Sequence[int], target: int,
                            window: Iterable[int] | None = None, tol: float | None = None
                            ) -> SignalProbeReport:
    """Trace ``rho(signal(w_n), signal(w_hat))`` along a leader sequence.

    ``sequence`` lists leader indices ``w_1, w_2, ...``; ``window`` selects
    1-based positions of it (default: all). PASS iff every tail value is at
    most ``tol`` (default: the target profile's ``feas``). The excess of the
    equilibrium sets is reported alongside as evidence for the composed map.
    """
    for i in list(sequence) + [target]:
        if i not in problem.signal or i not in problem.omega:
            raise InvalidInputError(f"leader index {i} is not in omega")
    positions = tuple(range(1, len(sequence) + 1)) if window is None else tuple(window)
    if not positions:
        raise InvalidInputError("window must be nonempty")
    seq = tuple(sequence[p - 1] for p in positions)
    g_hat = problem.signal[target]
    tol = g_hat.tolerances.feas if tol is None else tol
    ne_hat = ne_oracle(g_hat).cloud()
    rho_trace = tuple(rho(problem.signal[i], g_hat) for i in seq)
    excess_trace = tuple(excess(ne_oracle(problem.signal[i]).cloud(), ne_hat, g_hat.tolerances.dedup)
                         for i in seq)
    tail = rho_trace[len(rho_trace) // 2:]
    return SignalProbeReport(all(r <= tol for r in tail), seq, rho_trace, excess_trace, tol)


# -- JSON -------------------------------------------------------------------------


def slmfg_from_json(obj: Any, base_dir: str | None = None) -> SLMFGProblem:
    """Parse an SLMFG document.

    Leader indices (``omega``, ``w_index``) refer to positions in the file's
    ``leader.grid`` list. Signal entries are inline objects or file paths.
    """
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object at top level", "$")
    leader = _require(obj, "leader", "$")
    dim = _require(leader, "dim", "leader")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ParseError("dim must be a positive integer", "leader.dim")
    raw_grid = _require(leader, "grid", "leader")
    if not isinstance(raw_grid, list) or not raw_grid:
        raise ParseError("expected a nonempty list of points", "leader.grid")
    grid = parse_cloud(raw_grid, dim, "leader.grid")
    if len(grid) != len(raw_grid):
        raise ParseError("leader grid has duplicate points", "leader.grid")
    canon = {tuple(float(c) for c in p): j for j, p in enumerate(grid.points)}
    remap = [canon[tuple(float(c) for c in p)] for p in raw_grid]

    def leader_index(value: Any, path: str) -> int:
        if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value < len(remap):
            raise ParseError("expected an index into leader.grid", path)
        return remap[value]

    omega_raw = leader.get("omega", list(range(len(raw_grid))))
    if not isinstance(omega_raw, list):
        raise ParseError("expected a list of indices", "leader.omega")
    omega = [leader_index(v, f"leader.omega[{j}]") for j, v in enumerate(omega_raw)]

    sig = _require(obj, "signal", "$")
    kind = _require(sig, "kind", "signal")
    entries = _require(sig, "entries", "signal")
    if not isinstance(entries, list):
        raise ParseError("expected a list", "signal.entries")
    signal = {}
    for j, e in enumerate(entries):
        p = f"signal.entries[{j}]"
        i = leader_index(_require(e, "w_index", p), f"{p}.w_index")
        if i in signal:
            raise ParseError("duplicate signal entry", p)
        if kind == "per_w_files":
            signal[i] = problem_from_json(load_reference(_require(e, "problem", p), base_dir,
                                                         f"{p}.problem"))
        elif kind == "gnep_family":
            spec = gnep_from_json(load_reference(_require(e, "gnep", p), base_dir, f"{p}.gnep"))
            if "epsilon" in e:
                spec = spec.with_epsilon(float(e["epsilon"]))
            signal[i] = from_gnep(spec)
        else:
            raise ParseError(f"unknown signal kind {kind!r}", "signal.kind")

    objective = {}
    rows = _require(obj, "objective", "$")
    if not isinstance(rows, list):
        raise ParseError("expected a list", "objective")
    for j, row in enumerate(rows):
        p = f"objective[{j}]"
        i = leader_index(_require(row, "w_index", p), f"{p}.w_index")
        if i not in signal:
            continue  # rows outside the signal's domain are irrelevant
        g = signal[i]
        at = _require(row, "at", p)
        if not isinstance(at, list) or len(at) != g.n_players:
            raise ParseError(f"expected {g.n_players} follower coordinates", f"{p}.at")
        idx = tuple(_locate(s, c, g.tolerances.dedup, f"{p}.at[{m}]")
                    for m, (s, c) in enumerate(zip(g.players, at)))
        value = row.get("value")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError("expected a real", f"{p}.value")
        if (i, idx) in objective:
            raise ParseError("duplicate objective row", p)
        objective[(i, idx)] = float(value)
    try:
        return SLMFGProblem(grid, tuple(omega), objective, signal)
    except InvalidInputError as exc:
        raise ParseError(str(exc), "$") from exc


def parse_slmfg(text: str, base_dir: str | None = None) -> SLMFGProblem:
    return slmfg_from_json(load_json_text(text), base_dir)


def slmfg_to_json(problem: SLMFGProblem) -> dict:
    """Document with inline signal profiles; leader indices are canonical."""
    rows = []
    for (i, idx), v in sorted(problem.objective.items()):
        g = problem.signal[i]
        rows.append({"w_index": i, "at": [list(c) for c in g.point_at(idx)], "value": v})
    return {
        "leader": {"dim": problem.leader_grid.dim,
                   "grid": [list(p) for p in problem.leader_grid.points],
                   "omega": list(problem.omega)},
        "objective": rows,
        "signal": {"kind": "per_w_files",
                   "entries": [{"w_index": i, "problem": problem_to_json(g)}
                               for i, g in sorted(problem.signal.items())]},
    }


def serialize_slmfg(problem: SLMFGProblem, pretty: bool = False) -> str:
    return _jsonio.dumps(slmfg_to_json(problem), pretty)
