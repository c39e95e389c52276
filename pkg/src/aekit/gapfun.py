"""Improvement sets, the fixed-point map ``G_nu`` and the gap function.

For a profile ``gamma`` and a grid profile ``x``::

    x in I_nu        iff  A_nu(x_-nu) and P_nu(x) meet
    G_nu(gamma; x)   =    A_nu(x_-nu) "cap" P_nu(x)   if x in I_nu
                          A_nu(x_-nu)                 otherwise
    phi(gamma; x)    =    max_nu d(x_nu, G_nu(gamma; x))

Intersections are taken at the ``intersect`` tolerance and are one-sided:
``{a in A : d(a, P) <= intersect}``. Keeping only points of ``A`` makes
``G_nu`` a subset of ``A_nu`` on both branches.

``phi`` vanishes exactly on the equilibria when no feasible action is itself
preferred (``x_nu in A_nu`` implies ``x_nu not in P_nu(x)``). Without that
condition a profile can have ``phi = 0`` while ``A`` and ``P`` still meet.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._parallel import ordered_map
from .economy import EconomyProfile, GridIndex, ProfilePoint
from .errors import ConsistencyError
from .setval import FiniteCloud, Point, displacement, pairwise_distances


@dataclass(frozen=True)
class Improvement:
    improving: bool
    witness: tuple[Point, Point] | None  # (a in A, p in P) within the intersect tolerance


@dataclass(frozen=True)
class PlayerGap:
    player_id: str
    improving: bool
    g_value: FiniteCloud
    residual: float


@dataclass(frozen=True)
class GapEvaluation:
    point: ProfilePoint
    players: tuple[PlayerGap, ...]
    gap: float

    def to_json(self) -> dict:
        return {
            "point": [list(c) for c in self.point],
            "gap": self.gap,
            "players": [{"player": pg.player_id, "improving": pg.improving,
                         "g_value": [list(p) for p in pg.g_value.points],
                         "residual": pg.residual} for pg in self.players],
        }


def tolerance_intersection(a: FiniteCloud, p: FiniteCloud, tol: float) -> FiniteCloud:
    """Points of ``a`` within ``tol`` of ``p``."""
    if a.is_empty() or p.is_empty():
        return FiniteCloud.empty(a.dim)
    return a.select(pairwise_distances(a, p).min(axis=1) <= tol)


def _improvement(gamma: EconomyProfile, k: int, idx: GridIndex) -> tuple[Improvement, FiniteCloud]:
    a = gamma.constraint_value(k, idx)
    p = gamma.preference_value(k, idx)
    meet = tolerance_intersection(a, p, gamma.tolerances.intersect)
    if meet.is_empty():
        return Improvement(False, None), meet
    first = meet.points[0]
    nearest = p.points[int(pairwise_distances(FiniteCloud([first], dim=a.dim), p)[0].argmin())]
    return Improvement(True, (first, nearest)), meet


def improvement_membership(gamma: EconomyProfile, player: str | int,
                           x: Sequence[Iterable[float]]) -> Improvement:
    """Whether player ``player`` has a feasible preferred action at ``x``."""
    k = gamma.player_index(player)
    return _improvement(gamma, k, gamma.index_of(x))[0]


def _gmap(gamma: EconomyProfile, k: int, idx: GridIndex) -> tuple[bool, FiniteCloud]:
    imp, meet = _improvement(gamma, k, idx)
    value = meet if imp.improving else gamma.constraint_value(k, idx)
    if value.is_empty():
        raise ConsistencyError(f"G value of player {gamma.players[k].player_id!r} at "
                               f"{gamma.point_at(idx)} is empty; constraint map has an empty value")
    return imp.improving, value


def gmap(gamma: EconomyProfile, player: str | int, x: Sequence[Iterable[float]]) -> FiniteCloud:
    k = gamma.player_index(player)
    return _gmap(gamma, k, gamma.index_of(x))[1]


def gap_at_index(gamma: EconomyProfile, idx: GridIndex) -> GapEvaluation:
    point = gamma.point_at(idx)
    rows = []
    for k, space in enumerate(gamma.players):
        improving, value = _gmap(gamma, k, idx)
        rows.append(PlayerGap(space.player_id, improving, value,
                              displacement(point[k], value, gamma.tolerances.dedup)))
    return GapEvaluation(point, tuple(rows), max(r.residual for r in rows))


def gap(gamma: EconomyProfile, x: Sequence[Iterable[float]]) -> GapEvaluation:
    """Evaluate ``phi(gamma; x)`` with the per-player breakdown."""
    return gap_at_index(gamma, gamma.index_of(x))


def gap_sweep(gamma: EconomyProfile, threads: int | None = None) -> list[GapEvaluation]:
    """Gap evaluations at every grid profile, in lexicographic order."""
    return ordered_map(lambda idx: gap_at_index(gamma, idx), list(gamma.grid_indices()), threads)


def gap_values(gamma: EconomyProfile) -> np.ndarray:
    """Array of ``phi`` over the grid with shape ``gamma.shape``."""
    out = np.empty(gamma.shape)
    for idx in gamma.grid_indices():
        out[idx] = gap_at_index(gamma, idx).gap
    return out
