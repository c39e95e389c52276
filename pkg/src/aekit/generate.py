"""Seeded random instances: economies, finite GNEPs, regular families, SLMFGs.

Grids are drawn from the lattice ``0.5 * Z^dim``, so distinct grid actions are
at least 0.5 apart. Generated economies never prefer a player's own action
(and keep every off-grid preferred point at least 0.05 away from it), which
is what makes the gap function vanish exactly on the equilibria.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .economy import (ActionSpace, EconomyProfile, GridIndex, ProfilePoint, TabulatedConstraintMap,
                      TabulatedPreferenceMap, ToleranceConfig)
from .profiles import ProfileFamily, check_improvement_sets
from .equilibrium import ne_oracle
from .reductions import GNEPSpec
from .setval import FiniteCloud
from .slmfg import SLMFGProblem

SPACING = 0.5
SELF_MARGIN = 0.05


def random_grid(rng: np.random.Generator, size: int, dim: int = 1, span: int = 10) -> FiniteCloud:
    lattice = list(itertools.product(range(span), repeat=dim))
    picks = rng.choice(len(lattice), size=size, replace=False)
    return FiniteCloud([[SPACING * c for c in lattice[i]] for i in picks], dim=dim)


def random_players(rng: np.random.Generator, n_players: int, sizes: Sequence[int] | None = None,
                   dim: int = 1) -> tuple[ActionSpace, ...]:
    if sizes is None:
        sizes = [int(rng.integers(2, 7)) for _ in range(n_players)]
    return tuple(ActionSpace(str(k + 1), random_grid(rng, s, dim)) for k, s in enumerate(sizes))


def _subset(rng: np.random.Generator, grid: FiniteCloud, p: float, exclude: int | None = None
            ) -> list:
    return [q for j, q in enumerate(grid.points) if j != exclude and rng.random() < p]


def _offgrid(rng: np.random.Generator, grid: FiniteCloud, avoid=None) -> list[float]:
    lo, hi = grid.array.min(axis=0), grid.array.max(axis=0) + SPACING
    while True:
        z = lo + rng.random(grid.dim) * (hi - lo)
        if avoid is None or np.linalg.norm(z - np.asarray(avoid)) >= SELF_MARGIN:
            return z.tolist()


def random_economy(rng: np.random.Generator, n_players: int | None = None,
                   sizes: Sequence[int] | None = None, dim: int = 1,
                   players: Sequence[ActionSpace] | None = None, p_feasible: float = 0.6,
                   p_prefer: float = 0.35, p_offgrid: float = 0.2,
                   tolerances: ToleranceConfig | None = None) -> EconomyProfile:
    """Random economy with nonempty constraint values and self-avoiding preferences."""
    if players is None:
        n_players = n_players if n_players is not None else int(rng.integers(2, 4))
        players = random_players(rng, n_players, sizes, dim)
    players = tuple(players)
    shape = [len(p) for p in players]
    cons, prefs = [], []
    for k, space in enumerate(players):
        ctab = {}
        for key in itertools.product(*(range(n) for j, n in enumerate(shape) if j != k)):
            pts = _subset(rng, space.grid, p_feasible)
            if not pts:
                pts = [space.grid.points[int(rng.integers(len(space.grid)))]]
            if rng.random() < p_offgrid:
                pts.append(_offgrid(rng, space.grid))
            ctab[key] = FiniteCloud(pts, dim=space.dim)
        ptab = {}
        for idx in itertools.product(*(range(n) for n in shape)):
            own = space.grid.points[idx[k]]
            pts = _subset(rng, space.grid, p_prefer, exclude=idx[k])
            if rng.random() < p_offgrid:
                pts.append(_offgrid(rng, space.grid, avoid=own))
            ptab[idx] = FiniteCloud(pts, dim=space.dim)
        cons.append(TabulatedConstraintMap(space.player_id, ctab))
        prefs.append(TabulatedPreferenceMap(space.player_id, ptab))
    return EconomyProfile(players, tuple(cons), tuple(prefs), tolerances or ToleranceConfig())


EPSILONS = (0.0, 0.1, 0.5, 1.0)


def random_gnep(rng: np.random.Generator, n_players: int | None = None,
                sizes: Sequence[int] | None = None, epsilon: float = 0.0,
                avoid: Sequence[float] = EPSILONS, margin: float = 1e-9) -> GNEPSpec:
    """Random cost tables whose unilateral cost differences stay away from every ``avoid`` value."""
    n_players = n_players if n_players is not None else int(rng.integers(2, 4))
    if sizes is None:
        sizes = [int(rng.integers(2, 5)) for _ in range(n_players)]
    players = random_players(rng, n_players, sizes)
    shape = [len(p) for p in players]
    full = list(itertools.product(*(range(n) for n in shape)))
    objectives = []
    for k in range(n_players):
        while True:
            f = {idx: float(rng.uniform(0.0, 2.0)) for idx in full}
            if _tie_free(f, k, shape, avoid, margin):
                break
        objectives.append(f)
    cons = []
    for k, space in enumerate(players):
        ctab = {}
        for key in itertools.product(*(range(n) for j, n in enumerate(shape) if j != k)):
            pts = _subset(rng, space.grid, 0.7) or [space.grid.points[int(rng.integers(len(space.grid)))]]
            ctab[key] = FiniteCloud(pts, dim=space.dim)
        cons.append(TabulatedConstraintMap(space.player_id, ctab))
    return GNEPSpec(players, tuple(objectives), tuple(cons), epsilon)


def _tie_free(f: dict, k: int, shape: Sequence[int], avoid: Sequence[float], margin: float) -> bool:
    for idx in f:
        for y in range(shape[k]):
            if y == idx[k]:
                continue
            diff = f[idx] - f[idx[:k] + (y,) + idx[k + 1:]]
            if any(abs(diff - e) <= margin for e in avoid):
                return False
    return True


@dataclass(frozen=True)
class RegularFamilyCase:
    family: ProfileFamily
    limit: EconomyProfile
    planted: ProfilePoint
    magnitudes: tuple[float, ...]


def random_regular_family(rng: np.random.Generator, count: int = 25, ratio: float = 0.5,
                          max_actions: int = 4) -> RegularFamilyCase:
    """A family converging geometrically to a random limit with a planted equilibrium.

    Selected constraint points that never meet a preferred set, and selected
    preferred points that never meet the constraint set, are moved by
    ``m_n * v`` with ``|v| <= 0.2`` and ``m_n = ratio**n``. Improvement sets
    and the separation constant are therefore shared by all members.
    """
    tol = ToleranceConfig(feas=1e-6, intersect=1e-9, gap_zero=1e-6)
    mags = tuple(ratio ** n for n in range(1, count + 1))
    while True:
        sizes = [int(rng.integers(2, max_actions + 1)) for _ in range(2)]
        base = random_economy(rng, sizes=sizes, p_offgrid=0.0, tolerances=tol)
        planted_idx = tuple(int(rng.integers(n)) for n in base.shape)
        limit = _plant(base, planted_idx)
        moves_a, moves_p = _pick_moves(rng, limit)
        if not moves_a and not moves_p:
            continue
        family = ProfileFamily.from_magnitudes(_mover(limit, moves_a, moves_p), mags)
        try:
            check_improvement_sets(family)
        except Exception:
            continue
        if len(ne_oracle(limit)) == 0:
            continue
        return RegularFamilyCase(family, limit, limit.point_at(planted_idx), mags)


def _plant(gamma: EconomyProfile, idx: GridIndex) -> EconomyProfile:
    x = gamma.point_at(idx)

    def cons(k, key, cloud):
        if key != gamma.others_of(idx, k):
            return cloud
        return cloud.union(FiniteCloud([x[k]], dim=cloud.dim))

    planted = gamma.map_values(constraint=cons)

    def prefs(k, key, cloud):
        if key != idx:
            return cloud
        a = planted.constraint_value(k, idx)
        keep = [p for p in cloud.points if p not in set(a.points)]
        return FiniteCloud(keep, dim=cloud.dim)

    return planted.map_values(preference=prefs)


def _direction(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v) * rng.uniform(0.05, 0.2)


def _pick_moves(rng: np.random.Generator, gamma: EconomyProfile):
    moves_a, moves_p = {}, {}
    for k, space in enumerate(gamma.players):
        for key, cloud in gamma.constraints[k].table.items():
            if rng.random() >= 0.5:
                continue
            rows = [gamma.preferences[k].table[key[:k] + (y,) + key[k:]] for y in range(len(space))]
            used = set(itertools.chain.from_iterable(r.points for r in rows))
            free = [a for a in cloud.points if a not in used]
            if free:
                moves_a[(k, key)] = (free[int(rng.integers(len(free)))], _direction(rng, space.dim))
        for idx, cloud in gamma.preferences[k].table.items():
            if cloud.is_empty() or rng.random() >= 0.5:
                continue
            a = set(gamma.constraint_value(k, idx).points)
            free = [p for p in cloud.points if p not in a]
            if free:
                moves_p[(k, idx)] = (free[int(rng.integers(len(free)))], _direction(rng, space.dim))
    return moves_a, moves_p


def _mover(gamma: EconomyProfile, moves_a: dict, moves_p: dict):
    def move(table_moves, m):
        def fn(k, key, cloud):
            if (k, key) not in table_moves:
                return cloud
            target, v = table_moves[(k, key)]
            return FiniteCloud([np.asarray(p) + m * v if p == target else p for p in cloud.points],
                               dim=cloud.dim)
        return fn

    def perturb(m: float) -> EconomyProfile:
        return gamma.map_values(move(moves_a, m), move(moves_p, m))
    return perturb


def random_slmfg(rng: np.random.Generator, max_leader: int = 5, max_actions: int = 4,
                 p_omega: float = 0.8, cost_levels: int = 5) -> SLMFGProblem:
    """Random problem with integer-valued leader costs, so ties are common."""
    n_leader = int(rng.integers(1, max_leader + 1))
    leader = random_grid(rng, n_leader, 1)
    omega = tuple(i for i in range(n_leader) if rng.random() < p_omega)
    players = random_players(rng, 2, [int(rng.integers(1, max_actions + 1)) for _ in range(2)])
    signal = {i: random_economy(rng, players=players) for i in range(n_leader)}
    shape = [len(p) for p in players]
    objective = {(i, idx): float(rng.integers(cost_levels))
                 for i in range(n_leader) for idx in itertools.product(*(range(n) for n in shape))}
    return SLMFGProblem(leader, omega, objective, signal)
