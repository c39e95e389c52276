"""Nash equilibria of a tabulated abstract economy, computed two ways.

:func:`ne_oracle` scans the grid and checks the equilibrium conditions
directly: every player is feasible and no feasible action is preferred.
:func:`ne_via_gap` keeps the grid profiles where the gap function vanishes.
The two agree whenever feasible actions are never self-preferred.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._parallel import ordered_map
from .economy import EconomyProfile, GridIndex, ProfilePoint
from .gapfun import GapEvaluation, gap_at_index, gap_sweep
from .setval import FiniteCloud, Point, displacement, pairwise_distances


@dataclass(frozen=True)
class PlayerCertificate:
    player_id: str
    feasibility_residual: float  # d(x_nu, A_nu(x_-nu))
    min_pair_distance: float  # min over A x P, inf when either is empty
    violating_pair: tuple[Point, Point] | None  # closest (a, p) when they meet
    feasible: bool
    unimprovable: bool

    def to_json(self) -> dict:
        return {
            "player": self.player_id,
            "feasibility_residual": self.feasibility_residual,
            "min_pair_distance": self.min_pair_distance,
            "violating_pair": None if self.violating_pair is None
            else [list(self.violating_pair[0]), list(self.violating_pair[1])],
            "feasible": self.feasible,
            "unimprovable": self.unimprovable,
        }


@dataclass(frozen=True)
class Certificate:
    point: ProfilePoint
    players: tuple[PlayerCertificate, ...]

    @property
    def accepted(self) -> bool:
        return all(p.feasible and p.unimprovable for p in self.players)

    def to_json(self) -> dict:
        return {"point": [list(c) for c in self.point], "accepted": self.accepted,
                "players": [p.to_json() for p in self.players]}


def certify_index(gamma: EconomyProfile, idx: GridIndex) -> Certificate:
    tol = gamma.tolerances
    point = gamma.point_at(idx)
    rows = []
    for k, space in enumerate(gamma.players):
        a = gamma.constraint_value(k, idx)
        p = gamma.preference_value(k, idx)
        feas_res = displacement(point[k], a, tol.dedup)
        if a.is_empty() or p.is_empty():
            dmin, pair = float("inf"), None
        else:
            dist = pairwise_distances(a, p)
            i, j = np.unravel_index(int(dist.argmin()), dist.shape)
            dmin = float(dist[i, j])
            pair = (a.points[i], p.points[j]) if dmin <= tol.intersect else None
        rows.append(PlayerCertificate(space.player_id, feas_res, dmin, pair,
                                      feas_res <= tol.feas, dmin > tol.intersect))
    return Certificate(point, tuple(rows))


def certify(gamma: EconomyProfile, x: Sequence[Iterable[float]]) -> Certificate:
    """Residual breakdown of the equilibrium conditions at ``x``."""
    return certify_index(gamma, gamma.index_of(x))


@dataclass(frozen=True)
class EquilibriumSet:
    method: str  # "oracle" or "gap"
    dim: int  # total dimension of a profile point
    equilibria: tuple[ProfilePoint, ...]
    evaluations: tuple[GapEvaluation, ...]
    certificates: tuple[Certificate, ...]

    def __len__(self) -> int:
        return len(self.equilibria)

    def __contains__(self, x) -> bool:
        return tuple(tuple(float(c) for c in xk) for xk in x) in self.equilibria

    def cloud(self) -> FiniteCloud:
        """The equilibria as one cloud of concatenated coordinates."""
        return FiniteCloud([sum(x, ()) for x in self.equilibria], dim=self.dim)

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "equilibria": [[list(c) for c in x] for x in self.equilibria],
            "gaps": [e.gap for e in self.evaluations],
            "certificates": [c.to_json() for c in self.certificates],
        }


def ne_oracle(gamma: EconomyProfile, threads: int | None = None) -> EquilibriumSet:
    """Exhaustive scan of the equilibrium conditions over the grid."""
    certs = ordered_map(lambda idx: certify_index(gamma, idx), list(gamma.grid_indices()), threads)
    certs = [c for c in certs if c.accepted]
    evals = [gap_at_index(gamma, gamma.index_of(c.point)) for c in certs]
    return EquilibriumSet("oracle", sum(gamma.dims), tuple(c.point for c in certs),
                          tuple(evals), tuple(certs))


def ne_via_gap(gamma: EconomyProfile, threads: int | None = None) -> EquilibriumSet:
    """Grid profiles where the gap function is at most ``gap_zero``."""
    zero = gamma.tolerances.gap_zero
    evals = [e for e in gap_sweep(gamma, threads) if e.gap <= zero]
    certs = [certify_index(gamma, gamma.index_of(e.point)) for e in evals]
    return EquilibriumSet("gap", sum(gamma.dims), tuple(e.point for e in evals),
                          tuple(evals), tuple(certs))
