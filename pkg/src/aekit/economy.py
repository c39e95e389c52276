"""Abstract-economy instances over finite action grids.

Every player ``nu`` samples its action set by a nonempty grid. The constraint
map ``A_nu`` is tabulated on every combination of the *other* players' grid
actions and the preference map ``P_nu`` on every full grid profile. Map
values are arbitrary finite clouds; they need not consist of grid points.

Tables are keyed by grid-index tuples (players in canonical id order). The
public helpers take coordinate profiles and translate them with
:meth:`EconomyProfile.index_of`.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence, Tuple

import numpy as np

from . import _jsonio
from .errors import InvalidInputError, ParseError, ValidationError
from .setval import DEFAULT_DEDUP, FiniteCloud, Point, as_point

ProfilePoint = Tuple[Point, ...]
GridIndex = Tuple[int, ...]


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds carried by every profile.

    ``dedup`` merges points and snaps tiny distances to zero, ``feas`` decides
    ``x_nu in A_nu``, ``intersect`` decides whether ``A`` and ``P`` meet, and
    ``gap_zero`` decides whether the gap function vanishes.
    """

    dedup: float = DEFAULT_DEDUP
    feas: float = 1e-9
    intersect: float = 1e-9
    gap_zero: float = 1e-9

    def __post_init__(self):
        for name in ("dedup", "feas", "intersect", "gap_zero"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise InvalidInputError(f"tolerance {name} must be a finite nonnegative real, got {v!r}")
        if self.gap_zero < self.feas:
            raise InvalidInputError(f"gap_zero ({self.gap_zero}) must be >= feas ({self.feas})")

    def to_json(self) -> dict:
        return {"dedup": self.dedup, "feas": self.feas, "intersect": self.intersect,
                "gap_zero": self.gap_zero}

    def updated(self, **overrides: float) -> ToleranceConfig:
        unknown = set(overrides) - {"dedup", "feas", "intersect", "gap_zero"}
        if unknown:
            raise InvalidInputError(f"unknown tolerance(s): {', '.join(sorted(unknown))}")
        return replace(self, **{k: float(v) for k, v in overrides.items()})


def player_sort_key(player_id: str) -> tuple:
    return (0, int(player_id), "") if player_id.isdigit() else (1, 0, player_id)


@dataclass(frozen=True)
class ActionSpace:
    player_id: str
    grid: FiniteCloud

    def __post_init__(self):
        object.__setattr__(self, "player_id", str(self.player_id))
        if self.grid.is_empty():
            raise InvalidInputError(f"player {self.player_id!r} has an empty action grid")

    @property
    def dim(self) -> int:
        return self.grid.dim

    def __len__(self) -> int:
        return len(self.grid)


@dataclass(frozen=True)
class TabulatedConstraintMap:
    """``A_nu``: other players' grid indices -> cloud in player ``nu``'s space."""

    player_id: str
    table: Mapping[GridIndex, FiniteCloud]

    def __post_init__(self):
        object.__setattr__(self, "player_id", str(self.player_id))
        object.__setattr__(self, "table", MappingProxyType(dict(self.table)))


@dataclass(frozen=True)
class TabulatedPreferenceMap:
    """``P_nu``: full grid indices -> (possibly empty) cloud in player ``nu``'s space."""

    player_id: str
    table: Mapping[GridIndex, FiniteCloud]

    def __post_init__(self):
        object.__setattr__(self, "player_id", str(self.player_id))
        object.__setattr__(self, "table", MappingProxyType(dict(self.table)))


@dataclass(frozen=True)
class EconomyProfile:
    """A finite abstract economy ``(A_nu, P_nu)_nu`` with its tolerances.

    Construction checks alignment, table completeness and value dimensions.
    It does not require nonempty constraint values; see :func:`validate_economy`.
    """

    players: tuple[ActionSpace, ...]
    constraints: tuple[TabulatedConstraintMap, ...]
    preferences: tuple[TabulatedPreferenceMap, ...]
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)

    def __post_init__(self):
        object.__setattr__(self, "players", tuple(self.players))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "preferences", tuple(self.preferences))
        ids = [p.player_id for p in self.players]
        if not ids:
            raise InvalidInputError("an economy needs at least one player")
        if len(set(ids)) != len(ids):
            raise InvalidInputError(f"duplicate player ids: {ids}")
        if ids != sorted(ids, key=player_sort_key):
            raise InvalidInputError(f"players must be listed in canonical id order, got {ids}")
        if [c.player_id for c in self.constraints] != ids:
            raise InvalidInputError("constraint maps are not aligned with players")
        if [p.player_id for p in self.preferences] != ids:
            raise InvalidInputError("preference maps are not aligned with players")
        for k, pid in enumerate(ids):
            dim = self.players[k].dim
            ctab = self.constraints[k].table
            ptab = self.preferences[k].table
            for key in self.other_indices(k):
                if key not in ctab:
                    raise ValidationError(f"constraint table incomplete: player {pid!r} missing "
                                          f"at {self._others_coords(k, key)}")
            for key in self.grid_indices():
                if key not in ptab:
                    raise ValidationError(f"preference table incomplete: player {pid!r} missing "
                                          f"at {self._coords(key)}")
            expected_c = math.prod(len(p) for j, p in enumerate(self.players) if j != k)
            if len(ctab) != expected_c:
                raise ValidationError(f"constraint table of player {pid!r} has entries off the grid")
            if len(ptab) != math.prod(self.shape):
                raise ValidationError(f"preference table of player {pid!r} has entries off the grid")
            for cloud in itertools.chain(ctab.values(), ptab.values()):
                if cloud.dim != dim:
                    raise InvalidInputError(f"map value of player {pid!r} has dimension "
                                            f"{cloud.dim}, expected {dim}")

    # -- structure ---------------------------------------------------------

    @property
    def player_ids(self) -> tuple[str, ...]:
        return tuple(p.player_id for p in self.players)

    @property
    def n_players(self) -> int:
        return len(self.players)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.players)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(p.dim for p in self.players)

    def player_index(self, player: str | int) -> int:
        pid = str(player)
        for k, p in enumerate(self.players):
            if p.player_id == pid:
                return k
        raise InvalidInputError(f"unknown player id {player!r}; known: {list(self.player_ids)}")

    def grid_indices(self) -> Iterator[GridIndex]:
        """All full grid profiles, lexicographic."""
        return itertools.product(*(range(n) for n in self.shape))

    def other_indices(self, k: int) -> Iterator[GridIndex]:
        return itertools.product(*(range(n) for j, n in enumerate(self.shape) if j != k))

    def same_grids(self, other: EconomyProfile) -> bool:
        return self.players == other.players

    # -- coordinates <-> indices ------------------------------------------

    def point_at(self, idx: GridIndex) -> ProfilePoint:
        return tuple(self.players[k].grid.points[i] for k, i in enumerate(idx))

    def index_of(self, x: Sequence[Iterable[float]]) -> GridIndex:
        """Grid indices of a coordinate profile; components must sit on the grids (within dedup)."""
        if len(x) != self.n_players:
            raise InvalidInputError(f"profile has {len(x)} components, expected {self.n_players}")
        return tuple(self._grid_index(k, xk) for k, xk in enumerate(x))

    def _grid_index(self, k: int, xk: Iterable[float]) -> int:
        space = self.players[k]
        p = np.asarray(as_point(xk, space.dim))
        d = np.sqrt(((space.grid.array - p) ** 2).sum(axis=1))
        i = int(d.argmin())
        if d[i] > self.tolerances.dedup:
            raise InvalidInputError(f"{tuple(p.tolist())} is not on the grid of player "
                                    f"{space.player_id!r}")
        return i

    def others_of(self, idx: GridIndex, k: int) -> GridIndex:
        return idx[:k] + idx[k + 1:]

    def _coords(self, idx: GridIndex) -> list:
        return [list(c) for c in self.point_at(idx)]

    def _others_coords(self, k: int, key: GridIndex) -> list:
        others = [p for j, p in enumerate(self.players) if j != k]
        return [list(others[j].grid.points[i]) for j, i in enumerate(key)]

    # -- map values --------------------------------------------------------

    def constraint_value(self, k: int, idx: GridIndex) -> FiniteCloud:
        """``A_k(x_{-k})`` at the full grid profile ``idx``."""
        return self.constraints[k].table[self.others_of(idx, k)]

    def preference_value(self, k: int, idx: GridIndex) -> FiniteCloud:
        return self.preferences[k].table[idx]

    # -- derived profiles --------------------------------------------------

    def with_tolerances(self, tolerances: ToleranceConfig) -> EconomyProfile:
        return replace(self, tolerances=tolerances)

    def map_values(self, constraint: Callable[[int, GridIndex, FiniteCloud], FiniteCloud] | None = None,
                   preference: Callable[[int, GridIndex, FiniteCloud], FiniteCloud] | None = None
                   ) -> EconomyProfile:
        """New profile with each table entry passed through ``fn(k, key, value)``."""
        cons = self.constraints
        prefs = self.preferences
        if constraint is not None:
            cons = tuple(TabulatedConstraintMap(c.player_id, {key: constraint(k, key, v)
                                                              for key, v in c.table.items()})
                         for k, c in enumerate(cons))
        if preference is not None:
            prefs = tuple(TabulatedPreferenceMap(p.player_id, {key: preference(k, key, v)
                                                               for key, v in p.table.items()})
                          for k, p in enumerate(prefs))
        return replace(self, constraints=cons, preferences=prefs)

    @classmethod
    def from_functions(cls, players: Sequence[ActionSpace],
                       constraint: Callable[[str, ProfilePoint], Iterable[Iterable[float]]],
                       preference: Callable[[str, ProfilePoint], Iterable[Iterable[float]]],
                       tolerances: ToleranceConfig | None = None) -> EconomyProfile:
        """Tabulate ``constraint(pid, x_minus)`` and ``preference(pid, x)`` over the grids."""
        players = tuple(sorted(players, key=lambda p: player_sort_key(p.player_id)))
        tol = tolerances or ToleranceConfig()
        shape = tuple(len(p) for p in players)
        full = list(itertools.product(*(range(n) for n in shape)))
        cons, prefs = [], []
        for k, space in enumerate(players):
            others = [p for j, p in enumerate(players) if j != k]
            ctab = {}
            for key in itertools.product(*(range(len(p)) for p in others)):
                xm = tuple(others[j].grid.points[i] for j, i in enumerate(key))
                ctab[key] = FiniteCloud(list(constraint(space.player_id, xm)), dim=space.dim,
                                        dedup=tol.dedup)
            ptab = {}
            for idx in full:
                x = tuple(players[j].grid.points[i] for j, i in enumerate(idx))
                ptab[idx] = FiniteCloud(list(preference(space.player_id, x)), dim=space.dim,
                                        dedup=tol.dedup)
            cons.append(TabulatedConstraintMap(space.player_id, ctab))
            prefs.append(TabulatedPreferenceMap(space.player_id, ptab))
        return cls(players, tuple(cons), tuple(prefs), tol)


# -- profile decomposition ---------------------------------------------------

def split_profile(gamma: EconomyProfile, x: Sequence[Iterable[float]], player: str | int
                  ) -> tuple[Point, ProfilePoint]:
    """``x -> (x_nu, x_{-nu})`` with the other components in canonical order."""
    k = gamma.player_index(player)
    if len(x) != gamma.n_players:
        raise InvalidInputError(f"profile has {len(x)} components, expected {gamma.n_players}")
    pts = tuple(as_point(xj, gamma.players[j].dim) for j, xj in enumerate(x))
    return pts[k], pts[:k] + pts[k + 1:]


def recombine_profile(gamma: EconomyProfile, x_nu: Iterable[float], x_minus: Sequence[Point],
                      player: str | int) -> ProfilePoint:
    k = gamma.player_index(player)
    if len(x_minus) != gamma.n_players - 1:
        raise InvalidInputError("x_minus has the wrong number of components")
    x_minus = tuple(x_minus)
    return x_minus[:k] + (as_point(x_nu, gamma.players[k].dim),) + x_minus[k:]


# -- validation --------------------------------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    violations: tuple[str, ...]
    assumed: tuple[str, ...]

    def to_json(self) -> dict:
        return {"verdict": "PASS" if self.passed else "FAIL",
                "violations": list(self.violations), "assumed": list(self.assumed)}


_ASSUMED = (
    "constraint maps: upper semicontinuity, closed and convex values (continuum properties, not checkable on samples)",
    "improvement sets: openness (continuum property, not checkable on samples)",
)


def validate_economy(gamma: EconomyProfile) -> ValidationReport:
    """Check table completeness and nonempty constraint values."""
    violations = []
    for k, space in enumerate(gamma.players):
        n_other = math.prod(n for j, n in enumerate(gamma.shape) if j != k)
        if len(gamma.constraints[k].table) != n_other:
            violations.append(f"constraint table incomplete for player {space.player_id!r}")
        if len(gamma.preferences[k].table) != math.prod(gamma.shape):
            violations.append(f"preference table incomplete for player {space.player_id!r}")
        for key in gamma.other_indices(k):
            value = gamma.constraints[k].table.get(key)
            if value is not None and value.is_empty():
                violations.append(f"empty constraint value for player {space.player_id!r} "
                                  f"at {gamma._others_coords(k, key)}")
    return ValidationReport(not violations, tuple(violations), _ASSUMED)


# -- JSON ----------------------------------------------------------------------

def _cloud_json(c: FiniteCloud) -> list:
    return [list(p) for p in c.points]


def problem_to_json(gamma: EconomyProfile) -> dict:
    cons, prefs = {}, {}
    for k, space in enumerate(gamma.players):
        cons[space.player_id] = [{"at": gamma._others_coords(k, key),
                                  "value": _cloud_json(gamma.constraints[k].table[key])}
                                 for key in gamma.other_indices(k)]
        prefs[space.player_id] = [{"at": gamma._coords(idx),
                                   "value": _cloud_json(gamma.preferences[k].table[idx])}
                                  for idx in gamma.grid_indices()]
    return {
        "players": [{"id": p.player_id, "dim": p.dim, "grid": _cloud_json(p.grid)}
                    for p in gamma.players],
        "constraints": cons,
        "preferences": prefs,
        "tolerances": gamma.tolerances.to_json(),
    }


def serialize_problem(gamma: EconomyProfile, pretty: bool = False) -> str:
    """Canonical problem text; ``parse_problem(serialize_problem(g)) == g``."""
    return _jsonio.dumps(problem_to_json(gamma), pretty=pretty)


def load_json_text(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc


def parse_problem(text: str, validate: bool = True) -> EconomyProfile:
    """Parse problem JSON text. With ``validate`` an empty constraint value raises :class:`ValidationError`."""
    return problem_from_json(load_json_text(text), validate=validate)


def _require(obj: Any, key: str, path: str) -> Any:
    if not isinstance(obj, dict):
        raise ParseError("expected an object", path)
    if key not in obj:
        raise ParseError(f"missing key {key!r}", path)
    return obj[key]


def _as_list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise ParseError("expected a list", path)
    return value


def parse_cloud(value: Any, dim: int, path: str, dedup: float = DEFAULT_DEDUP) -> FiniteCloud:
    rows = _as_list(value, path)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim or not all(
                isinstance(c, (int, float)) and not isinstance(c, bool) for c in row):
            raise ParseError(f"expected a list of {dim} reals", f"{path}[{i}]")
    try:
        return FiniteCloud(rows, dim=dim, dedup=dedup)
    except InvalidInputError as exc:
        raise ParseError(str(exc), path) from exc


def parse_tolerances(obj: Any, path: str = "tolerances") -> ToleranceConfig:
    if obj is None:
        return ToleranceConfig()
    if not isinstance(obj, dict):
        raise ParseError("expected an object", path)
    try:
        return ToleranceConfig().updated(**{k: float(v) for k, v in obj.items()})
    except (InvalidInputError, TypeError, ValueError) as exc:
        raise ParseError(str(exc), path) from exc


def parse_players(value: Any, dedup: float, path: str = "players") -> tuple[ActionSpace, ...]:
    players = []
    for i, entry in enumerate(_as_list(value, path)):
        p = f"{path}[{i}]"
        pid = _require(entry, "id", p)
        if not isinstance(pid, (str, int)) or isinstance(pid, bool):
            raise ParseError("player id must be a string or integer", f"{p}.id")
        dim = _require(entry, "dim", p)
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
            raise ParseError("dim must be a positive integer", f"{p}.dim")
        grid = parse_cloud(_require(entry, "grid", p), dim, f"{p}.grid", dedup)
        if grid.is_empty():
            raise ParseError("grid must be nonempty", f"{p}.grid")
        players.append(ActionSpace(str(pid), grid))
    if not players:
        raise ParseError("at least one player is required", path)
    ids = [p.player_id for p in players]
    if len(set(ids)) != len(ids):
        raise ParseError(f"duplicate player ids {ids}", path)
    return tuple(sorted(players, key=lambda p: player_sort_key(p.player_id)))


def _locate(space: ActionSpace, coords: Any, dedup: float, path: str) -> int:
    if not isinstance(coords, list) or len(coords) != space.dim:
        raise ParseError(f"expected a point of dimension {space.dim}", path)
    try:
        p = np.asarray(as_point(coords))
    except InvalidInputError as exc:
        raise ParseError(str(exc), path) from exc
    d = np.sqrt(((space.grid.array - p) ** 2).sum(axis=1))
    i = int(d.argmin())
    if d[i] > dedup:
        raise ParseError(f"{coords} is not on the grid of player {space.player_id!r}", path)
    return i


def parse_table(value: Any, spaces: Sequence[ActionSpace], dim: int, dedup: float, path: str,
                value_parser: Callable[[Any, str], Any] | None = None) -> dict:
    """Parse a list of ``{at, value}`` rows keyed by grid indices of ``spaces``."""
    table = {}
    for i, row in enumerate(_as_list(value, path)):
        p = f"{path}[{i}]"
        at = _as_list(_require(row, "at", p), f"{p}.at")
        if len(at) != len(spaces):
            raise ParseError(f"expected {len(spaces)} coordinates", f"{p}.at")
        key = tuple(_locate(s, c, dedup, f"{p}.at[{j}]") for j, (s, c) in enumerate(zip(spaces, at)))
        if key in table:
            raise ParseError("duplicate table row", f"{p}.at")
        raw = _require(row, "value", p)
        table[key] = value_parser(raw, f"{p}.value") if value_parser else \
            parse_cloud(raw, dim, f"{p}.value", dedup)
    return table


def _player_tables(obj: Any, players: Sequence[ActionSpace], path: str) -> dict:
    if not isinstance(obj, dict):
        raise ParseError("expected an object keyed by player id", path)
    known = {p.player_id for p in players}
    for key in obj:
        if str(key) not in known:
            raise ParseError(f"unknown player id {key!r}", path)
    return {str(k): v for k, v in obj.items()}


def parse_constraint_maps(obj: Any, players: Sequence[ActionSpace], dedup: float,
                          path: str = "constraints") -> tuple[TabulatedConstraintMap, ...]:
    tables = _player_tables(obj, players, path)
    out = []
    for k, space in enumerate(players):
        others = [p for j, p in enumerate(players) if j != k]
        rows = tables.get(space.player_id, [])
        out.append(TabulatedConstraintMap(space.player_id, parse_table(
            rows, others, space.dim, dedup, f"{path}.{space.player_id}")))
    return tuple(out)


def problem_from_json(obj: Any, validate: bool = True) -> EconomyProfile:
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object at top level", "$")
    tol = parse_tolerances(obj.get("tolerances"))
    players = parse_players(_require(obj, "players", "$"), tol.dedup)
    cons = parse_constraint_maps(_require(obj, "constraints", "$"), players, tol.dedup)
    pref_tables = _player_tables(_require(obj, "preferences", "$"), players, "preferences")
    prefs = tuple(TabulatedPreferenceMap(space.player_id, parse_table(
        pref_tables.get(space.player_id, []), players, space.dim, tol.dedup,
        f"preferences.{space.player_id}")) for space in players)
    gamma = EconomyProfile(players, cons, prefs, tol)
    if validate:
        report = validate_economy(gamma)
        if not report.passed:
            raise ValidationError("; ".join(report.violations))
    return gamma


def load_reference(ref: Any, base_dir: str | None, path: str) -> Any:
    """Inline JSON object, or a file path (relative to ``base_dir``) holding one."""
    if isinstance(ref, dict):
        return ref
    if isinstance(ref, str):
        full = ref if base_dir is None or os.path.isabs(ref) else os.path.join(base_dir, ref)
        try:
            with open(full, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ParseError(f"cannot read {full!r}: {exc.strerror}", path) from exc
        try:
            return load_json_text(text)
        except ParseError as exc:
            raise ParseError(str(exc), f"{path} ({full})") from exc
    raise ParseError("expected an inline object or a file path", path)
