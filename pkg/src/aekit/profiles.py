"""Distances between economy profiles, regularity estimates and stability experiments.

The profile distance is::

    rho(g, h) = sum_nu [ sup_x H(A_nu(x_-nu), A'_nu(x_-nu)) + sup_x H(P_nu(x), P'_nu(x)) ]

with ``H`` the Hausdorff distance and the sups over the shared grids. Profiles
whose preference maps are empty at different places are infinitely far apart.

A family ``n -> gamma^n`` is *regular* when (1) one separation ``tau > 0``
keeps every feasible action at distance ``>= tau`` from its preferred set,
for all members, and (2) one ``alpha`` bounds how much the eps-neighborhoods
of ``A`` and ``P`` overshoot the eps-neighborhood of their intersection, at
every improvement point. Both are estimated on the grid, so the reported
numbers are only as good as the sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from ._parallel import ordered_map
from .economy import (EconomyProfile, GridIndex, ProfilePoint, _locate, _require, load_reference,
                      parse_cloud, problem_from_json)
from .equilibrium import ne_oracle
from .errors import (ConsistencyError, ImprovementSetMismatch, InvalidInputError, ParseError)
from .gapfun import _improvement, gap, gap_at_index
from .setval import FiniteCloud, displacement, excess, hausdorff, pairwise_distances

# -- the profile metric ---------------------------------------------------------


def _check_same_grids(g: EconomyProfile, h: EconomyProfile) -> None:
    if not g.same_grids(h):
        raise InvalidInputError("profiles are defined on different players or grids")


def _table_sup(t1: Mapping, t2: Mapping, dedup: float) -> float:
    return max((hausdorff(t1[key], t2[key], dedup) for key in t1), default=0.0)


def rho(gamma: EconomyProfile, gamma_hat: EconomyProfile) -> float:
    """Sum over players of the uniform Hausdorff distances of both maps."""
    _check_same_grids(gamma, gamma_hat)
    dedup = gamma.tolerances.dedup
    total = 0.0
    for k in range(gamma.n_players):
        total += _table_sup(gamma.constraints[k].table, gamma_hat.constraints[k].table, dedup)
        total += _table_sup(gamma.preferences[k].table, gamma_hat.preferences[k].table, dedup)
    return total


def sup_step(gamma: EconomyProfile, gamma_hat: EconomyProfile) -> float:
    """Largest Hausdorff distance between corresponding table entries."""
    _check_same_grids(gamma, gamma_hat)
    dedup = gamma.tolerances.dedup
    return max(max(_table_sup(gamma.constraints[k].table, gamma_hat.constraints[k].table, dedup),
                   _table_sup(gamma.preferences[k].table, gamma_hat.preferences[k].table, dedup))
               for k in range(gamma.n_players))


def improvement_sets(gamma: EconomyProfile) -> tuple[frozenset, ...]:
    """Per player, the grid indices where a feasible preferred action exists."""
    return tuple(frozenset(idx for idx in gamma.grid_indices() if _improvement(gamma, k, idx)[0].improving)
                 for k in range(gamma.n_players))


def emptiness_pattern(gamma: EconomyProfile) -> tuple[frozenset, ...]:
    return tuple(frozenset(idx for idx, v in p.table.items() if v.is_empty()) for p in gamma.preferences)


# -- separation (tau) -------------------------------------------------------------


@dataclass(frozen=True)
class TauEstimate:
    tau: float
    witness: tuple[str, ProfilePoint] | None  # (player, x) attaining the minimum

    @property
    def passed(self) -> bool:
        return self.tau > 0


def estimate_tau(gamma: EconomyProfile) -> TauEstimate:
    """Smallest distance from a feasible grid action to its preferred set.

    Any ``tau`` strictly below the estimate keeps the open ``tau``-ball around
    each feasible action clear of the preferred set.
    """
    tol = gamma.tolerances
    best, witness = math.inf, None
    for idx in gamma.grid_indices():
        x = gamma.point_at(idx)
        for k, space in enumerate(gamma.players):
            if displacement(x[k], gamma.constraint_value(k, idx), tol.dedup) > tol.feas:
                continue
            d = displacement(x[k], gamma.preference_value(k, idx), tol.dedup)
            if d < best:
                best, witness = d, (space.player_id, x)
    return TauEstimate(best, witness)


# -- families -------------------------------------------------------------------


class ProfileFamily:
    """An indexed sequence of profiles on shared grids, with an optional declared limit."""

    def __init__(self, generator: Callable[[int], EconomyProfile], indices: Iterable[int],
                 limit: EconomyProfile | None = None):
        self._generator = generator
        self.indices = tuple(indices)
        if not self.indices:
            raise InvalidInputError("a family needs at least one index")
        self.limit = limit
        self._cache: dict[int, EconomyProfile] = {}

    def member(self, n: int) -> EconomyProfile:
        if n not in self._cache:
            self._cache[n] = self._generator(n)
        return self._cache[n]

    def window(self, window: Iterable[int] | None = None) -> tuple[int, ...]:
        w = self.indices if window is None else tuple(window)
        if not w:
            raise InvalidInputError("window must be nonempty")
        return w

    @classmethod
    def constant(cls, gamma: EconomyProfile, count: int = 1) -> ProfileFamily:
        return cls(lambda n: gamma, range(1, count + 1), limit=gamma)

    @classmethod
    def from_magnitudes(cls, perturb: Callable[[float], EconomyProfile],
                        magnitudes: Sequence[float]) -> ProfileFamily:
        """Members ``perturb(m_n)`` for ``n = 1..len(magnitudes)``; the limit is ``perturb(0)``."""
        mags = tuple(float(m) for m in magnitudes)
        return cls(lambda n: perturb(mags[n - 1]), range(1, len(mags) + 1), limit=perturb(0.0))

    @classmethod
    def shifted(cls, base: EconomyProfile, vectors: Mapping[str, Sequence[float]],
                magnitudes: Sequence[float], targets: str = "both") -> ProfileFamily:
        """Translate every map value of player ``nu`` by ``m_n * vectors[nu]``."""
        if targets not in ("both", "constraints", "preferences"):
            raise InvalidInputError(f"unknown shift target {targets!r}")
        vecs = []
        for space in base.players:
            v = np.asarray(vectors.get(space.player_id, np.zeros(space.dim)), dtype=float)
            if v.shape != (space.dim,):
                raise InvalidInputError(f"shift vector of player {space.player_id!r} must have "
                                        f"dimension {space.dim}")
            vecs.append(v)

        def perturb(m: float) -> EconomyProfile:
            move = (lambda k, key, c: c.translate(m * vecs[k]))
            return base.map_values(move if targets != "preferences" else None,
                                   move if targets != "constraints" else None)
        return cls.from_magnitudes(perturb, magnitudes)

    @classmethod
    def overridden(cls, base: EconomyProfile, overrides: Sequence[TableOverride],
                   magnitudes: Sequence[float]) -> ProfileFamily:
        """Replace selected table entries by ``value + m_n * direction``."""
        for o in overrides:
            o.check(base)

        def perturb(m: float) -> EconomyProfile:
            def patch(which):
                def fn(k, key, cloud):
                    for o in overrides:
                        if o.table == which and o.k == k and o.key == key:
                            return o.value.translate(m * np.asarray(o.direction, dtype=float))
                    return cloud
                return fn
            return base.map_values(patch("constraints"), patch("preferences"))
        return cls.from_magnitudes(perturb, magnitudes)


@dataclass(frozen=True)
class TableOverride:
    table: str  # "constraints" or "preferences"
    k: int  # player position
    key: GridIndex
    value: FiniteCloud
    direction: tuple[float, ...]

    def check(self, base: EconomyProfile) -> None:
        if self.table not in ("constraints", "preferences"):
            raise InvalidInputError(f"unknown table {self.table!r}")
        space = base.players[self.k]
        if self.value.dim != space.dim or len(self.direction) != space.dim:
            raise InvalidInputError("override value/direction dimension mismatch")


def check_improvement_sets(family: ProfileFamily, window: Iterable[int] | None = None,
                           include_limit: bool = True) -> tuple[frozenset, ...]:
    """Common improvement sets of the family; raises if members disagree."""
    w = family.window(window)
    ref = improvement_sets(family.member(w[0]))
    for n in w[1:]:
        if improvement_sets(family.member(n)) != ref:
            raise ImprovementSetMismatch(f"member {n} has different improvement sets than member {w[0]}")
    if include_limit and family.limit is not None and improvement_sets(family.limit) != ref:
        raise ImprovementSetMismatch("the declared limit has different improvement sets")
    return ref


# -- intersection inflation (alpha) ------------------------------------------------


@dataclass(frozen=True)
class AlphaEstimate:
    alpha: float
    witness: dict | None  # member, player, point, eps, z of the largest observed ratio

    @property
    def passed(self) -> bool:
        return math.isfinite(self.alpha)


def _ambient_for(family: ProfileFamily, w: Sequence[int],
                 ambient: FiniteCloud | Mapping[str, FiniteCloud] | None) -> list[FiniteCloud]:
    first = family.member(w[0])
    out = []
    for k, space in enumerate(first.players):
        if ambient is None:
            clouds = [space.grid]
            for n in w:
                g = family.member(n)
                clouds.extend(g.constraints[k].table.values())
                clouds.extend(g.preferences[k].table.values())
            arr = np.vstack([c.array for c in clouds])
            out.append(FiniteCloud(arr, dim=space.dim))
            continue
        cloud = ambient.get(space.player_id) if isinstance(ambient, Mapping) else ambient
        if cloud is None or cloud.dim != space.dim or cloud.is_empty():
            raise InvalidInputError(f"no nonempty ambient cloud of dimension {space.dim} for "
                                    f"player {space.player_id!r}")
        out.append(cloud)
    return out


def estimate_alpha(family: ProfileFamily, eps_grid: Sequence[float],
                   ambient: FiniteCloud | Mapping[str, FiniteCloud] | None = None,
                   window: Iterable[int] | None = None) -> AlphaEstimate:
    """Sampled estimate of the neighborhood-inflation constant.

    For every member, player, improvement point ``x``, ``eps`` in ``eps_grid``
    and ambient point ``z`` with ``d(z, A) < eps`` and ``d(z, P) < eps`` the
    ratio ``d(z, A cap P) / eps`` is recorded. The estimate is the largest
    ratio, but never below 1: in a continuum, points just inside the
    eps-neighborhood of ``A cap P`` already force ``alpha >= 1``.

    ``ambient`` defaults to the grid plus every map value, per player.
    """
    eps = [float(e) for e in eps_grid]
    if not eps or not all(e > 0 for e in eps):
        raise InvalidInputError("eps_grid must be a nonempty list of positive reals")
    w = family.window(window)
    amb = _ambient_for(family, w, ambient)
    best, witness = 1.0, None
    for n in w:
        g = family.member(n)
        for k, space in enumerate(g.players):
            z = amb[k]
            for idx in g.grid_indices():
                imp, meet = _improvement(g, k, idx)
                if not imp.improving:
                    continue
                if meet.is_empty():
                    raise ConsistencyError("improvement point with empty intersection")
                d_a = pairwise_distances(z, g.constraint_value(k, idx)).min(axis=1)
                d_p = pairwise_distances(z, g.preference_value(k, idx)).min(axis=1)
                d_m = pairwise_distances(z, meet).min(axis=1)
                for e in eps:
                    mask = (d_a < e) & (d_p < e)
                    if not mask.any():
                        continue
                    ratios = np.where(mask, d_m / e, -np.inf)
                    j = int(ratios.argmax())
                    if ratios[j] > best:
                        best = float(ratios[j])
                        witness = {"member": n, "player": space.player_id,
                                   "point": [list(c) for c in g.point_at(idx)], "eps": e,
                                   "z": list(z.points[j])}
    return AlphaEstimate(best, witness)


@dataclass(frozen=True)
class RegularityCertificate:
    tau_hat: float
    tau_witness: tuple[str, ProfilePoint] | None
    failing_member: int | None
    alpha_hat: float
    alpha_witness: dict | None
    eps_grid: tuple[float, ...]

    @property
    def tau_passed(self) -> bool:
        return self.tau_hat > 0

    @property
    def alpha_passed(self) -> bool:
        return math.isfinite(self.alpha_hat)

    @property
    def passed(self) -> bool:
        return self.tau_passed and self.alpha_passed

    def to_json(self) -> dict:
        tw = None if self.tau_witness is None else {
            "player": self.tau_witness[0], "point": [list(c) for c in self.tau_witness[1]]}
        return {
            "verdict": "PASS" if self.passed else "FAIL",
            "tau": {"verdict": "PASS" if self.tau_passed else "FAIL", "tau_hat": self.tau_hat,
                    "witness": tw, "failing_member": self.failing_member},
            "alpha": {"verdict": "PASS" if self.alpha_passed else "FAIL",
                      "alpha_hat": self.alpha_hat, "witness": self.alpha_witness},
            "eps_grid": list(self.eps_grid),
        }


def check_regularity(family: ProfileFamily, eps_grid: Sequence[float],
                     ambient: FiniteCloud | Mapping[str, FiniteCloud] | None = None,
                     window: Iterable[int] | None = None) -> RegularityCertificate:
    """Uniform separation over the family plus the inflation estimate.

    Raises :class:`ImprovementSetMismatch` when members have different
    improvement sets.
    """
    w = family.window(window)
    check_improvement_sets(family, w, include_limit=False)
    tau, tau_witness, failing = math.inf, None, None
    for n in w:
        est = estimate_tau(family.member(n))
        if est.tau < tau:
            tau, tau_witness = est.tau, est.witness
        if not est.passed and failing is None:
            failing = n
    alpha = estimate_alpha(family, eps_grid, ambient, w)
    return RegularityCertificate(tau, tau_witness, failing, alpha.alpha, alpha.witness,
                                 tuple(float(e) for e in eps_grid))


# -- limits ---------------------------------------------------------------------


@dataclass(frozen=True)
class LimitResult:
    profile: EconomyProfile
    indices: tuple[int, ...]
    trace: tuple[float, ...]  # sup-Hausdorff step between consecutive members
    converged: bool
    improvement_preserved: bool

    def to_json(self) -> dict:
        return {"converged": self.converged, "status": "CONVERGED" if self.converged else "NOT-CONVERGED",
                "indices": list(self.indices), "trace": list(self.trace),
                "improvement_preserved": self.improvement_preserved}


def limit_profile(family: ProfileFamily, window: Iterable[int] | None = None,
                  tol: float | None = None) -> LimitResult:
    """Pointwise Hausdorff limit estimate: the last member of the window.

    ``converged`` holds when every step in the tail half of the window is at
    most ``tol`` (default: the dedup tolerance) and no step is infinite.
    """
    w = family.window(window)
    members = [family.member(n) for n in w]
    tol = members[-1].tolerances.dedup if tol is None else tol
    trace = tuple(sup_step(a, b) for a, b in zip(members, members[1:]))
    tail = trace[len(trace) // 2:]
    converged = all(math.isfinite(t) for t in trace) and all(t <= tol for t in tail)
    ref = improvement_sets(members[-1])
    preserved = all(improvement_sets(m) == ref for m in members)
    return LimitResult(members[-1], w, trace, converged, preserved)


# -- lower semicontinuity of the gap function --------------------------------------


@dataclass(frozen=True)
class LscReport:
    passed: bool
    indices: tuple[int, ...]
    gap_trace: tuple[float, ...]
    limit_gap: float
    rho_tail: float
    slack: float

    def to_json(self) -> dict:
        return {"verdict": "PASS" if self.passed else "FAIL", "indices": list(self.indices),
                "gap_trace": list(self.gap_trace), "limit_gap": self.limit_gap,
                "rho_tail": self.rho_tail, "slack": self.slack}


def _limit_of(family: ProfileFamily, limit: EconomyProfile | None) -> EconomyProfile:
    limit = limit if limit is not None else family.limit
    if limit is None:
        raise InvalidInputError("the family has no declared limit; pass one or compute it "
                                "with limit_profile")
    return limit


def lsc_probe(family: ProfileFamily, points: Callable[[int], Sequence] | Mapping[int, Sequence] | Sequence,
              x_hat: Sequence, window: Iterable[int] | None = None, slack: float | None = None,
              limit: EconomyProfile | None = None) -> LscReport:
    """Compare ``phi(gamma^n; x^n)`` on the tail with ``phi(gamma_hat; x_hat)``.

    ``points`` gives ``x^n`` as a callable, a mapping from index, or a single
    profile used for every ``n``. PASS iff the tail minimum is at least
    ``phi(gamma_hat; x_hat) - slack``; ``slack`` defaults to twice the largest
    tail value of ``rho(gamma^n, gamma_hat)``.
    """
    w = family.window(window)
    g_hat = _limit_of(family, limit)
    if callable(points):
        xs = [points(n) for n in w]
    elif isinstance(points, Mapping):
        xs = [points[n] for n in w]
    else:
        xs = [points] * len(w)
    trace = tuple(gap(family.member(n), x).gap for n, x in zip(w, xs))
    half = len(w) // 2
    rho_tail = max(rho(family.member(n), g_hat) for n in w[half:])
    if slack is None:
        slack = 2.0 * rho_tail
    limit_gap = gap(g_hat, x_hat).gap
    passed = min(trace[half:]) >= limit_gap - slack
    return LscReport(passed, w, trace, limit_gap, rho_tail, slack)


# -- upper semicontinuity of the equilibrium map --------------------------------------


@dataclass(frozen=True)
class StabilityReport:
    verdict: str  # PASS, FAIL or COUNTEREXAMPLE-CANDIDATE
    indices: tuple[int, ...]
    rho_trace: tuple[float, ...]
    excess_trace: tuple[float, ...]
    ne_counts: tuple[int, ...]
    limit_equilibria: tuple[ProfilePoint, ...]
    gap_traces: tuple[tuple[ProfilePoint, tuple[float, ...]], ...]
    bound: float

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "indices": list(self.indices),
            "rho_trace": list(self.rho_trace),
            "excess_trace": list(self.excess_trace),
            "ne_counts": list(self.ne_counts),
            "limit_equilibria": [[list(c) for c in x] for x in self.limit_equilibria],
            "gap_traces": [{"point": [list(c) for c in x], "trace": list(t)}
                           for x, t in self.gap_traces],
            "bound": self.bound,
        }


def stability_experiment(family: ProfileFamily, window: Iterable[int] | None = None,
                         limit: EconomyProfile | None = None,
                         threads: int | None = None) -> StabilityReport:
    """Trace ``e(NE(gamma^n), NE(gamma_hat))`` against ``rho(gamma^n, gamma_hat)``.

    The limit is ``limit``, else the family's declared limit, else the
    computed :func:`limit_profile`. PASS iff every tail excess is at most
    ``feas`` plus the last rho value. A nonempty tail equilibrium set facing
    an empty limit set is reported as ``COUNTEREXAMPLE-CANDIDATE``.
    """
    w = family.window(window)
    if limit is None:
        limit = family.limit if family.limit is not None else limit_profile(family, w).profile
    limit_ne = ne_oracle(limit)
    limit_cloud = limit_ne.cloud()

    def step(n: int):
        g = family.member(n)
        ne = ne_oracle(g)
        return rho(g, limit), excess(ne.cloud(), limit_cloud, g.tolerances.dedup), len(ne)

    rows = ordered_map(step, w, threads)
    rho_trace = tuple(r[0] for r in rows)
    excess_trace = tuple(r[1] for r in rows)
    counts = tuple(r[2] for r in rows)
    half = len(w) // 2
    bound = limit.tolerances.feas + rho_trace[-1]
    if len(limit_ne) == 0 and any(c > 0 for c in counts[half:]):
        verdict = "COUNTEREXAMPLE-CANDIDATE"
    elif all(e <= bound for e in excess_trace[half:]):
        verdict = "PASS"
    else:
        verdict = "FAIL"
    gap_traces = tuple(
        (x, tuple(gap_at_index(family.member(n), limit.index_of(x)).gap for n in w))
        for x in limit_ne.equilibria)
    return StabilityReport(verdict, w, rho_trace, excess_trace, counts, limit_ne.equilibria,
                           gap_traces, bound)


# -- family files ---------------------------------------------------------------------


def parse_schedule(obj: Any, path: str = "perturbation.schedule") -> list[float]:
    """``{"kind": "geometric", "ratio", "count", "start"?}`` or an explicit list of magnitudes."""
    if isinstance(obj, dict) and obj.get("kind") == "explicit":
        obj = _require(obj, "values", path)
    if isinstance(obj, list):
        if not obj or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            raise ParseError("expected a nonempty list of reals", path)
        return [float(v) for v in obj]
    if isinstance(obj, dict) and obj.get("kind") == "geometric":
        ratio = _require(obj, "ratio", path)
        count = _require(obj, "count", path)
        start = obj.get("start", 1.0)
        if not isinstance(count, int) or isinstance(count, bool) or count < 1:
            raise ParseError("count must be a positive integer", f"{path}.count")
        if not isinstance(ratio, (int, float)) or not 0 < ratio < 1:
            raise ParseError("ratio must lie in (0, 1)", f"{path}.ratio")
        return [float(start) * float(ratio) ** n for n in range(1, count + 1)]
    raise ParseError("expected a geometric schedule or a list of magnitudes", path)


def family_from_json(obj: Any, base_dir: str | None = None) -> ProfileFamily:
    """Build a family from its JSON description.

    ``base`` and ``limit`` are inline problem objects or file paths relative
    to ``base_dir``.
    """
    def load_problem(ref, path):
        return problem_from_json(load_reference(ref, base_dir, path))

    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object at top level", "$")
    base = load_problem(_require(obj, "base", "$"), "base")
    pert = _require(obj, "perturbation", "$")
    kind = _require(pert, "kind", "perturbation")
    mags = parse_schedule(_require(pert, "schedule", "perturbation"))
    if kind == "shift":
        raw = pert.get("vector")
        if raw is None:
            vectors = {p.player_id: [1.0] * p.dim for p in base.players}
        elif isinstance(raw, dict):
            vectors = {str(k): v for k, v in raw.items()}
        else:
            raise ParseError("expected an object keyed by player id", "perturbation.vector")
        try:
            family = ProfileFamily.shifted(base, vectors, mags, pert.get("targets", "both"))
        except InvalidInputError as exc:
            raise ParseError(str(exc), "perturbation") from exc
    elif kind == "table_override":
        overrides = []
        for i, e in enumerate(_require(pert, "entries", "perturbation")):
            p = f"perturbation.entries[{i}]"
            try:
                k = base.player_index(_require(e, "player", p))
            except InvalidInputError as exc:
                raise ParseError(str(exc), f"{p}.player") from exc
            table = _require(e, "table", p)
            if table not in ("constraints", "preferences"):
                raise ParseError("table must be 'constraints' or 'preferences'", f"{p}.table")
            space = base.players[k]
            spaces = base.players if table == "preferences" else \
                tuple(s for j, s in enumerate(base.players) if j != k)
            at = _require(e, "at", p)
            if not isinstance(at, list) or len(at) != len(spaces):
                raise ParseError(f"expected {len(spaces)} coordinates", f"{p}.at")
            key = tuple(_locate(s, c, base.tolerances.dedup, f"{p}.at[{j}]")
                        for j, (s, c) in enumerate(zip(spaces, at)))
            value = parse_cloud(_require(e, "value", p), space.dim, f"{p}.value")
            direction = e.get("direction", [0.0] * space.dim)
            overrides.append(TableOverride(table, k, key, value, tuple(float(c) for c in direction)))
        try:
            family = ProfileFamily.overridden(base, overrides, mags)
        except InvalidInputError as exc:
            raise ParseError(str(exc), "perturbation.entries") from exc
    else:
        raise ParseError(f"unknown perturbation kind {kind!r}", "perturbation.kind")
    if obj.get("limit") is not None:
        family.limit = load_problem(obj["limit"], "limit")
    return family
