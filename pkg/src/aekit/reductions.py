"""Abstract economies built from objective tables or dominance relations.

``from_gnep`` turns cost tables ``f_nu`` into the epsilon-improvement
preference map::

    P_nu(x) = { y in grid_nu : f_nu(y, x_-nu) < f_nu(x_nu, x_-nu) - eps }

so that equilibria of the resulting economy are the epsilon-Nash equilibria of
the generalized game. ``enumerate_eps_equilibria`` computes the latter
directly and serves as an independent check.

For the two routes to agree, feasibility of grid actions (``feas``) and the
meeting test of ``A`` and ``P`` (``intersect``) should use the same tolerance,
which the defaults do.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Mapping, Sequence

from . import _jsonio
from ._parallel import ordered_map
from .economy import (ActionSpace, EconomyProfile, GridIndex, TabulatedConstraintMap,
                      TabulatedPreferenceMap, ToleranceConfig, _require, load_json_text,
                      parse_constraint_maps, parse_players, parse_table, parse_tolerances,
                      problem_to_json)
from .equilibrium import EquilibriumSet
from .errors import InvalidInputError, ParseError, ValidationError
from .setval import FiniteCloud, displacement


def _full_indices(players: Sequence[ActionSpace]):
    return itertools.product(*(range(len(p)) for p in players))


@dataclass(frozen=True)
class GNEPSpec:
    """Finite generalized game with cost tables (minimized) and an epsilon."""

    players: tuple[ActionSpace, ...]
    objectives: tuple[Mapping[GridIndex, float], ...]
    constraints: tuple[TabulatedConstraintMap, ...]
    epsilon: float = 0.0
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)

    def __post_init__(self):
        object.__setattr__(self, "players", tuple(self.players))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "objectives",
                           tuple(MappingProxyType({k: float(v) for k, v in o.items()})
                                 for o in self.objectives))
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise InvalidInputError(f"epsilon must be a finite nonnegative real, got {self.epsilon}")
        if len(self.objectives) != len(self.players):
            raise ValidationError("one objective table per player is required")
        size = math.prod(len(p) for p in self.players)
        for space, table in zip(self.players, self.objectives):
            for idx in _full_indices(self.players):
                if idx not in table:
                    raise ValidationError(f"objective table incomplete: player {space.player_id!r} "
                                          f"missing at {idx}")
            if len(table) != size:
                raise ValidationError(f"objective table of player {space.player_id!r} has extra rows")
            if not all(math.isfinite(v) for v in table.values()):
                raise ValidationError(f"objective table of player {space.player_id!r} is not finite")

    def with_epsilon(self, epsilon: float) -> GNEPSpec:
        return GNEPSpec(self.players, self.objectives, self.constraints, epsilon, self.tolerances)


@dataclass(frozen=True)
class RelationSpec:
    """Finite game where ``dominance[nu][x]`` lists the actions strictly dominating ``x_nu``."""

    players: tuple[ActionSpace, ...]
    dominance: tuple[Mapping[GridIndex, FiniteCloud], ...]
    constraints: tuple[TabulatedConstraintMap, ...]
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)

    def __post_init__(self):
        object.__setattr__(self, "players", tuple(self.players))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "dominance", tuple(MappingProxyType(dict(d)) for d in self.dominance))


def _with_player(idx: GridIndex, k: int, y: int) -> GridIndex:
    return idx[:k] + (y,) + idx[k + 1:]


def from_gnep(spec: GNEPSpec) -> EconomyProfile:
    """Economy whose preference map is the strict epsilon-improvement set."""
    prefs = []
    for k, space in enumerate(spec.players):
        f = spec.objectives[k]
        table = {}
        for idx in _full_indices(spec.players):
            threshold = f[idx] - spec.epsilon
            better = [space.grid.points[y] for y in range(len(space))
                      if f[_with_player(idx, k, y)] < threshold]
            table[idx] = FiniteCloud(better, dim=space.dim, dedup=spec.tolerances.dedup)
        prefs.append(TabulatedPreferenceMap(space.player_id, table))
    return EconomyProfile(spec.players, spec.constraints, tuple(prefs), spec.tolerances)


def from_relation(spec: RelationSpec) -> EconomyProfile:
    """Economy with ``P_nu = D_nu``; rejects reflexive dominance tables."""
    tol = spec.tolerances
    for k, space in enumerate(spec.players):
        for idx, cloud in spec.dominance[k].items():
            own = space.grid.points[idx[k]]
            if displacement(own, cloud, tol.dedup) == 0.0:
                raise InvalidInputError(f"dominance relation of player {space.player_id!r} is "
                                        f"reflexive at {idx}: an action dominates itself")
    prefs = tuple(TabulatedPreferenceMap(space.player_id, spec.dominance[k])
                  for k, space in enumerate(spec.players))
    return EconomyProfile(spec.players, spec.constraints, prefs, tol)


def enumerate_eps_equilibria(spec: GNEPSpec, threads: int | None = None) -> EquilibriumSet:
    """Profiles where every player is feasible and within epsilon of its best feasible cost."""
    tol = spec.tolerances
    n = len(spec.players)

    def feasible_set(k: int, idx: GridIndex) -> list[int]:
        a = spec.constraints[k].table[idx[:k] + idx[k + 1:]]
        grid = spec.players[k].grid.points
        return [y for y in range(len(grid)) if displacement(grid[y], a, tol.dedup) <= tol.feas]

    def is_eq(idx: GridIndex) -> bool:
        for k in range(n):
            feas = feasible_set(k, idx)
            if idx[k] not in feas:
                return False
            f = spec.objectives[k]
            best = min(f[_with_player(idx, k, y)] for y in feas)
            if not f[idx] <= best + spec.epsilon:
                return False
        return True

    indices = list(_full_indices(spec.players))
    flags = ordered_map(is_eq, indices, threads)
    eqs = tuple(tuple(spec.players[k].grid.points[i] for k, i in enumerate(idx))
                for idx, ok in zip(indices, flags) if ok)
    return EquilibriumSet("enumeration", sum(p.dim for p in spec.players), eqs, (), ())


# -- JSON ----------------------------------------------------------------------

def _real(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ParseError("expected a finite real", path)
    return float(value)


def gnep_from_json(obj: Any) -> GNEPSpec:
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object at top level", "$")
    tol = parse_tolerances(obj.get("tolerances"))
    players = parse_players(_require(obj, "players", "$"), tol.dedup)
    cons = parse_constraint_maps(_require(obj, "constraints", "$"), players, tol.dedup)
    raw = _require(obj, "objectives", "$")
    if not isinstance(raw, dict):
        raise ParseError("expected an object keyed by player id", "objectives")
    raw = {str(k): v for k, v in raw.items()}
    objectives = tuple(parse_table(raw.get(p.player_id, []), players, p.dim, tol.dedup,
                                   f"objectives.{p.player_id}", _real) for p in players)
    eps = _real(obj.get("epsilon", 0.0), "epsilon")
    try:
        return GNEPSpec(players, objectives, cons, eps, tol)
    except InvalidInputError as exc:
        raise ParseError(str(exc), "epsilon") from exc


def parse_gnep(text: str) -> GNEPSpec:
    return gnep_from_json(load_json_text(text))


def gnep_to_json(spec: GNEPSpec) -> dict:
    base = problem_to_json(EconomyProfile(
        spec.players, spec.constraints,
        tuple(TabulatedPreferenceMap(p.player_id, {idx: FiniteCloud.empty(p.dim)
                                                    for idx in _full_indices(spec.players)})
              for p in spec.players), spec.tolerances))
    del base["preferences"]
    base["objectives"] = {
        p.player_id: [{"at": [list(p2.grid.points[i]) for p2, i in zip(spec.players, idx)],
                       "value": spec.objectives[k][idx]} for idx in _full_indices(spec.players)]
        for k, p in enumerate(spec.players)}
    base["epsilon"] = spec.epsilon
    return base


def serialize_gnep(spec: GNEPSpec, pretty: bool = False) -> str:
    return _jsonio.dumps(gnep_to_json(spec), pretty)


def relation_from_json(obj: Any) -> RelationSpec:
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object at top level", "$")
    tol = parse_tolerances(obj.get("tolerances"))
    players = parse_players(_require(obj, "players", "$"), tol.dedup)
    cons = parse_constraint_maps(_require(obj, "constraints", "$"), players, tol.dedup)
    raw = _require(obj, "dominance", "$")
    if not isinstance(raw, dict):
        raise ParseError("expected an object keyed by player id", "dominance")
    raw = {str(k): v for k, v in raw.items()}
    dominance = []
    for p in players:
        table = parse_table(raw.get(p.player_id, []), players, p.dim, tol.dedup,
                            f"dominance.{p.player_id}")
        for idx in _full_indices(players):
            table.setdefault(idx, FiniteCloud.empty(p.dim))
        dominance.append(table)
    return RelationSpec(players, tuple(dominance), cons, tol)


def parse_relation(text: str) -> RelationSpec:
    return relation_from_json(load_json_text(text))
