"""Finite metric measure spaces.

Points carry dense integer ids ``0..n-1``. A space stores either a
coordinate array with a standard metric (``euclidean`` or ``chebyshev``)
or a raw symmetric distance table, together with a strictly positive mass
per point. Every integral in the library is a mass-weighted sum over a
point subset, accumulated in ascending index order with compensated
summation, so results do not depend on evaluation order or worker count.

Balls are open: ``B(x, r) = {y : d(x, y) < r}``. In particular a radius
equal to an existing pairwise distance excludes the points at exactly that
distance, and ``r = 0`` gives the empty set.

The doubling behaviour of a space is summarized by :func:`doubling_profile`,
the maximum of ``mu(2B)/mu(B)`` over a finite ball set. Because the maximum
runs over finitely many balls it is a *lower* bound for the doubling
constant of any continuum parent; checkers that consume the profile accept
an explicit override and always report which value they used.
"""
from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from .errors import (
    EmptyBallError,
    InvalidGeneratorError,
    TooLargeError,
    WgrError,
)
from .util import fsum

METRIC_KINDS = ("euclidean", "chebyshev", "table")

#: Hard cap on generated grid sizes (points).
GRID_SIZE_CAP = 1_000_000

#: Spaces larger than this refuse the O(n^3) full metric validation.
VALIDATION_SIZE_CAP = 2048


@dataclass(frozen=True)
class DoublingProfile:
    """Doubling constant measured over a finite ball set.

    ``dimension_d`` is exactly ``log2(c_mu)``.
    """

    c_mu: float
    dimension_d: float

    @classmethod
    def from_c_mu(cls, c_mu: float) -> "DoublingProfile":
        if c_mu < 1.0:
            raise WgrError(f"doubling constant must be >= 1, got {c_mu}")
        return cls(float(c_mu), math.log2(c_mu))


@dataclass(frozen=True)
class MetricViolation:
    """One failed metric axiom; ``points`` names the offending tuple."""

    kind: str  # "diagonal" | "negative" | "asymmetry" | "triangle"
    points: tuple
    deficit: float


class FiniteMetricMeasureSpace:
    """Finite point set with a validated metric and positive point masses.

    Exactly one of ``coords`` (with ``metric_kind`` in ``{"euclidean",
    "chebyshev"}``) or ``distance_matrix`` must be supplied. Spaces are
    immutable after construction; all operations are pure reads.
    """

    def __init__(self, mass, *, coords=None, metric_kind=None, distance_matrix=None):
        mass = np.asarray(mass, dtype=float)
        if mass.ndim != 1 or mass.size == 0:
            raise WgrError("mass must be a nonempty 1-d array")
        if not np.all(np.isfinite(mass)) or np.any(mass <= 0.0):
            raise WgrError("masses must be finite and strictly positive")
        self._mass = mass
        self._mass.setflags(write=False)

        if (coords is None) == (distance_matrix is None):
            raise WgrError("exactly one of coords/distance_matrix is required")

        if coords is not None:
            coords = np.asarray(coords, dtype=float)
            if coords.ndim != 2 or coords.shape[0] != mass.size:
                raise WgrError("coords must be (n_points, dim)")
            if not np.all(np.isfinite(coords)):
                raise WgrError("coordinates must be finite")
            if metric_kind not in ("euclidean", "chebyshev"):
                raise WgrError(f"metric_kind must be euclidean or chebyshev, got {metric_kind!r}")
            self._coords = coords
            self._coords.setflags(write=False)
            self._dist = None
            self.metric_kind = metric_kind
        else:
            dist = np.asarray(distance_matrix, dtype=float)
            if dist.shape != (mass.size, mass.size):
                raise WgrError("distance_matrix must be square (n_points, n_points)")
            if not np.all(np.isfinite(dist)):
                raise WgrError("distances must be finite")
            self._coords = None
            self._dist = dist
            self._dist.setflags(write=False)
            self.metric_kind = "table"

    # -- basic structure ---------------------------------------------------

    @property
    def n_points(self) -> int:
        return self._mass.size

    @property
    def mass(self) -> np.ndarray:
        return self._mass

    @property
    def coords(self):
        return self._coords

    @property
    def total_mass(self) -> float:
        return fsum(self._mass)

    def dist_row(self, center: int) -> np.ndarray:
        """Distances from ``center`` to every point."""
        if self._dist is not None:
            return self._dist[center]
        diff = self._coords - self._coords[center]
        if self.metric_kind == "chebyshev":
            return np.abs(diff).max(axis=1)
        return np.sqrt((diff * diff).sum(axis=1))

    def distance(self, i: int, j: int) -> float:
        return float(self.dist_row(i)[j])

    # -- balls and measures ------------------------------------------------

    def ball_mask(self, center: int, r: float) -> np.ndarray:
        if r < 0:
            raise WgrError("ball radius must be >= 0")
        return self.dist_row(center) < r

    def ball_members(self, center: int, r: float) -> np.ndarray:
        """Point ids strictly inside B(center, r), ascending."""
        return np.flatnonzero(self.ball_mask(center, r))

    def set_measure(self, members) -> float:
        """Total mass of a point subset; the empty set has measure 0."""
        members = np.asarray(members)
        if members.size == 0:
            return 0.0
        if members.dtype == bool:
            members = np.flatnonzero(members)
        return fsum(self._mass[members])

    def min_positive_distance(self, members=None) -> float | None:
        """Smallest positive pairwise distance among ``members`` (default: all).

        Returns None when there is no pair of distinct points.
        """
        idx = np.arange(self.n_points) if members is None else np.asarray(members)
        if idx.size < 2:
            return None
        best = math.inf
        for i in idx:
            row = self.dist_row(int(i))[idx]
            positive = row[row > 0.0]
            if positive.size:
                best = min(best, float(positive.min()))
        return None if best == math.inf else best

    def coordinate_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Outer bounds of the populated region (cell edges for grids)."""
        if self._coords is None:
            raise WgrError("coordinate bounds are only defined for coordinate-backed spaces")
        half = self.min_positive_distance()
        pad = 0.0 if half is None else 0.5 * half
        return self._coords.min(axis=0) - pad, self._coords.max(axis=0) + pad

    # -- serialization -----------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "points": None if self._coords is None else self._coords.tolist(),
            "distance_matrix": None if self._dist is None else self._dist.tolist(),
            "mass": self._mass.tolist(),
            "metric_kind": self.metric_kind,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "FiniteMetricMeasureSpace":
        if obj.get("points") is not None:
            return cls(obj["mass"], coords=obj["points"], metric_kind=obj["metric_kind"])
        return cls(obj["mass"], distance_matrix=obj["distance_matrix"])


# -- validation --------------------------------------------------------------


def validate_metric(space: FiniteMetricMeasureSpace) -> list[MetricViolation]:
    """Check all metric axioms exactly (zero tolerance).

    Returns the violations as data; an empty list certifies the axioms.
    O(n^3) over the triangle inequality, so refuses very large spaces.
    """
    n = space.n_points
    if n > VALIDATION_SIZE_CAP:
        raise TooLargeError(f"metric validation is O(n^3); n={n} exceeds {VALIDATION_SIZE_CAP}")
    dist = np.vstack([space.dist_row(i) for i in range(n)])
    violations: list[MetricViolation] = []
    for i in range(n):
        if dist[i, i] != 0.0:
            violations.append(MetricViolation("diagonal", (i,), float(dist[i, i])))
    neg = np.argwhere(dist < 0.0)
    for i, j in neg:
        violations.append(MetricViolation("negative", (int(i), int(j)), float(-dist[i, j])))
    asym = np.argwhere(dist != dist.T)
    for i, j in asym:
        if i < j:
            violations.append(
                MetricViolation("asymmetry", (int(i), int(j)), float(abs(dist[i, j] - dist[j, i])))
            )
    for k in range(n):
        through = dist[:, k][:, None] + dist[k, :][None, :]
        bad = np.argwhere(dist > through)
        for i, j in bad:
            violations.append(
                MetricViolation(
                    "triangle",
                    (int(i), int(k), int(j)),
                    float(dist[i, j] - through[i, j]),
                )
            )
    return violations


# -- generators ----------------------------------------------------------------


def _grid_coords(n_dim: int, side: int, cell: float, offset: np.ndarray) -> np.ndarray:
    axes = [offset[d] + (np.arange(side) + 0.5) * cell for d in range(n_dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def grid_1d(a: float, b: float, n: int) -> FiniteMetricMeasureSpace:
    """n equispaced cell centers on [a, b], each with mass (b-a)/n."""
    if n < 1:
        raise InvalidGeneratorError(f"grid_1d needs n >= 1, got {n}")
    if not a < b:
        raise InvalidGeneratorError(f"grid_1d needs a < b, got a={a}, b={b}")
    h = (b - a) / n
    coords = _grid_coords(1, n, h, np.array([a]))
    return FiniteMetricMeasureSpace(
        np.full(n, h), coords=coords, metric_kind="euclidean"
    )


def grid_nd(n_dim: int, side: int, cell: float, metric_kind: str) -> FiniteMetricMeasureSpace:
    """side^n_dim cell centers with origin at 0 and mass cell^n_dim each.

    Chebyshev balls on this grid are axis-aligned cubes.
    """
    if n_dim < 1 or side < 1:
        raise InvalidGeneratorError("grid_nd needs n_dim >= 1 and side >= 1")
    if not cell > 0:
        raise InvalidGeneratorError(f"grid_nd needs cell > 0, got {cell}")
    if metric_kind not in ("euclidean", "chebyshev"):
        raise InvalidGeneratorError(f"unsupported metric_kind {metric_kind!r}")
    n = side**n_dim
    if n > GRID_SIZE_CAP:
        raise TooLargeError(f"grid of {n} points exceeds cap {GRID_SIZE_CAP}")
    coords = _grid_coords(n_dim, side, cell, np.zeros(n_dim))
    return FiniteMetricMeasureSpace(
        np.full(n, float(cell) ** n_dim), coords=coords, metric_kind=metric_kind
    )


# -- doubling ------------------------------------------------------------------


def doubling_profile(space: FiniteMetricMeasureSpace, ball_set) -> DoublingProfile:
    """Max of mu(2B)/mu(B) over the supplied balls, floored at 1.

    The profile is relative to the ball set: a richer set can only increase
    it. Every ball must be nonempty.
    """
    c_mu = 1.0
    for ball in ball_set:
        members = space.ball_members(ball.center, ball.radius)
        if members.size == 0:
            raise EmptyBallError(
                f"ball (center={ball.center}, radius={ball.radius}) is empty"
            )
        m1 = space.set_measure(members)
        m2 = space.set_measure(space.ball_members(ball.center, 2.0 * ball.radius))
        c_mu = max(c_mu, m2 / m1)
    return DoublingProfile.from_c_mu(c_mu)
