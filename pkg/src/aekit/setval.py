"""Distances between points and finite point clouds.

A compact subset of R^d is represented by a :class:`FiniteCloud`. Clouds are
canonical: points are sorted lexicographically and near-duplicates (closer
than the dedup tolerance) are merged at construction, so two clouds that
describe the same set compare equal and iterate identically.

Empty-set conventions::

    d(x, {})  = inf
    e({}, D)  = 0          e(C, {}) = inf  (C nonempty)
    h({}, {}) = 0          h({}, D) = inf  (D nonempty)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Tuple

import numpy as np

from .errors import InvalidInputError

DEFAULT_DEDUP = 1e-12

Point = Tuple[float, ...]


def as_point(x: Iterable[float], dim: int | None = None) -> Point:
    """Coerce ``x`` to a tuple of finite floats, optionally checking its length."""
    try:
        p = tuple(float(c) for c in x)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"not a point: {x!r}") from exc
    if not p:
        raise InvalidInputError("points need at least one coordinate")
    if not all(math.isfinite(c) for c in p):
        raise InvalidInputError(f"point has non-finite coordinates: {p}")
    if dim is not None and len(p) != dim:
        raise InvalidInputError(f"point {p} has dimension {len(p)}, expected {dim}")
    return p


class FiniteCloud:
    """An immutable, canonicalized finite set of points in R^dim."""

    __slots__ = ("_arr", "_dim", "_points")

    def __init__(self, points: Iterable[Iterable[float]] | np.ndarray = (), dim: int | None = None,
                 dedup: float = DEFAULT_DEDUP):
        if isinstance(points, FiniteCloud):
            points = points.array
        arr = np.array(points if isinstance(points, np.ndarray) else [list(p) for p in points],
                       dtype=float)
        if arr.size == 0:
            if dim is None:
                if arr.ndim == 2 and arr.shape[1] > 0:
                    dim = arr.shape[1]
                else:
                    raise InvalidInputError("an empty cloud needs an explicit dim")
            arr = np.empty((0, dim))
        if arr.ndim != 2:
            raise InvalidInputError(f"cloud points must form a 2-d array, got shape {arr.shape}")
        if dim is not None and arr.shape[1] != dim:
            raise InvalidInputError(f"cloud has dimension {arr.shape[1]}, expected {dim}")
        if arr.shape[1] < 1:
            raise InvalidInputError("cloud dimension must be positive")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("cloud contains non-finite coordinates")
        arr = arr + 0.0  # fold -0.0 into 0.0
        if len(arr) > 1:
            arr = arr[np.lexsort(arr.T[::-1])]
            arr = _dedup_sorted(arr, dedup)
        arr.setflags(write=False)
        self._arr = arr
        self._dim = arr.shape[1]
        self._points: tuple[Point, ...] | None = None

    @classmethod
    def empty(cls, dim: int) -> FiniteCloud:
        return cls((), dim=dim)

    @property
    def array(self) -> np.ndarray:
        """Read-only ``(n, dim)`` array of the canonical points."""
        return self._arr

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def points(self) -> tuple[Point, ...]:
        if self._points is None:
            self._points = tuple(tuple(float(c) for c in row) for row in self._arr)
        return self._points

    def is_empty(self) -> bool:
        return len(self._arr) == 0

    def __len__(self) -> int:
        return len(self._arr)

    def __iter__(self):
        return iter(self.points)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteCloud):
            return NotImplemented
        return self._dim == other._dim and self.points == other.points

    def __hash__(self) -> int:
        return hash((self._dim, self.points))

    def __repr__(self) -> str:
        body = ", ".join("(" + ", ".join(f"{c:g}" for c in p) + ")" for p in self.points)
        return f"FiniteCloud({{{body}}}, dim={self._dim})"

    def translate(self, shift: Sequence[float]) -> FiniteCloud:
        v = np.asarray(shift, dtype=float)
        if v.shape != (self._dim,):
            raise InvalidInputError(f"shift has shape {v.shape}, expected ({self._dim},)")
        return FiniteCloud(self._arr + v, dim=self._dim)

    def union(self, other: FiniteCloud) -> FiniteCloud:
        _check_dims(self, other)
        return FiniteCloud(np.vstack([self._arr, other._arr]), dim=self._dim)

    def select(self, mask: Sequence[bool]) -> FiniteCloud:
        """Sub-cloud of the points where ``mask`` is true (order preserved)."""
        return FiniteCloud(self._arr[np.asarray(mask, dtype=bool)], dim=self._dim)


def _dedup_sorted(arr: np.ndarray, tol: float) -> np.ndarray:
    keep: list[int] = []
    for i in range(len(arr)):
        if keep:
            d = np.sqrt(((arr[keep] - arr[i]) ** 2).sum(axis=1))
            if d.min() <= tol:
                continue
        keep.append(i)
    return arr[keep]


def _check_dims(a: FiniteCloud, b: FiniteCloud) -> None:
    if a.dim != b.dim:
        raise InvalidInputError(f"dimension mismatch: {a.dim} vs {b.dim}")


def pairwise_distances(a: FiniteCloud, b: FiniteCloud) -> np.ndarray:
    """Euclidean distance matrix of shape ``(len(a), len(b))``."""
    _check_dims(a, b)
    diff = a.array[:, None, :] - b.array[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def _snap(d: float, dedup: float) -> float:
    return 0.0 if d <= dedup else d


def displacement(x: Iterable[float], s: FiniteCloud, dedup: float = DEFAULT_DEDUP) -> float:
    """Distance from the point ``x`` to the cloud ``s`` (``inf`` if ``s`` is empty).

    Distances within ``dedup`` are reported as exactly 0.
    """
    p = np.asarray(as_point(x), dtype=float)
    if p.shape[0] != s.dim:
        raise InvalidInputError(f"dimension mismatch: point {p.shape[0]} vs cloud {s.dim}")
    if s.is_empty():
        return math.inf
    diff = s.array - p
    return _snap(float(np.sqrt((diff * diff).sum(axis=1)).min()), dedup)


def excess(c: FiniteCloud, d: FiniteCloud, dedup: float = DEFAULT_DEDUP) -> float:
    """``sup_{x in c} d(x, d)``; asymmetric."""
    _check_dims(c, d)
    if c.is_empty():
        return 0.0
    if d.is_empty():
        return math.inf
    return _snap(float(pairwise_distances(c, d).min(axis=1).max()), dedup)


def hausdorff(c: FiniteCloud, d: FiniteCloud, dedup: float = DEFAULT_DEDUP) -> float:
    return max(excess(c, d, dedup), excess(d, c, dedup))


def min_pair_distance(a: FiniteCloud, b: FiniteCloud) -> float:
    """Smallest distance between a point of ``a`` and a point of ``b`` (``inf`` if either is empty)."""
    _check_dims(a, b)
    if a.is_empty() or b.is_empty():
        return math.inf
    return float(pairwise_distances(a, b).min())


def neighborhood_filter(s: FiniteCloud, candidates: FiniteCloud, eps: float,
                        dedup: float = DEFAULT_DEDUP) -> FiniteCloud:
    """Candidates lying in the open ball ``{x : d(x, s) < eps}``."""
    _check_dims(s, candidates)
    if not eps > 0:
        raise InvalidInputError(f"eps must be positive, got {eps}")
    if s.is_empty() or candidates.is_empty():
        return FiniteCloud.empty(candidates.dim)
    dist = pairwise_distances(candidates, s).min(axis=1)
    dist = np.where(dist <= dedup, 0.0, dist)
    return candidates.select(dist < eps)


@dataclass(frozen=True)
class PKReport:
    """Outcome of :func:`pk_limit_check` over a finite window."""

    converged: bool
    indices: tuple[int, ...]
    trace: tuple[float, ...]
    tail_start: int

    def to_json(self) -> dict:
        return {"converged": self.converged, "indices": list(self.indices),
                "trace": list(self.trace), "tail_start": self.tail_start}


def pk_limit_check(family: Callable[[int], FiniteCloud], candidate: FiniteCloud,
                   window: Iterable[int], tol: float) -> PKReport:
    """Estimate whether ``family(n)`` converges to ``candidate`` in the Painleve-Kuratowski sense.

    For compact sets PK convergence is Hausdorff convergence, so the check is
    on ``h(family(n), candidate)`` over ``window``: every distance in the tail
    half must be at most ``tol`` and the whole trace must be non-increasing up
    to ``tol``. A finite window is evidence, not proof; inspect ``trace``.
    """
    indices = tuple(window)
    if not indices:
        raise InvalidInputError("window must be nonempty")
    if not tol > 0:
        raise InvalidInputError(f"tol must be positive, got {tol}")
    trace = tuple(hausdorff(family(n), candidate) for n in indices)
    half = len(indices) // 2
    tail = trace[half:]
    monotone = all(b <= a + tol for a, b in zip(trace, trace[1:]))
    converged = all(t <= tol for t in tail) and monotone
    return PKReport(converged, indices, trace, indices[half])
