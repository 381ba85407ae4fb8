"""Discrete stopping-time (Calderon-Zygmund) decomposition.

Given a family over a base ball ``B0`` (dilate hat ``B0h = (1+eta) B0``),
the maximal function of a nonnegative ``f`` is the per-point supremum of
family-ball averages; the superlevel region ``E = {x in B0h : Mf(x) > lam}``
is then covered by disjoint stopping balls.

Stopping rule
-------------
For each family center ``y`` let ``R_y`` be the *largest* grid radius whose
ball average exceeds ``lam``. Since all larger radii at the same center are
exactly the power-of-two dilates on the grid, maximality certifies that
every admissible dilate ``tau B`` (``tau = 2, 4, 8, ...`` within the family)
has average at most ``lam``. A center is usable when ``R_y`` does not exceed
the cap ``eta r0 / (5 sigma)``; the admissibility precondition
``lam >= alpha * avg(f over B0h)`` with

    alpha = c_mu^2 (5 sigma)^D (1 + 1/eta)^D,   D = log2(c_mu)

guarantees the cap whenever ``c_mu`` was measured over a ball set closed
under the halving chains used here (see :func:`closure_ball_set`); an
understated profile surfaces as a loud construction error with a witness,
never as a silently wrong decomposition. Selection is Vitali-greedy in
decreasing radius (ties by center index), so unaccepted candidates meet an
accepted ball of at least their radius and land inside its 5-dilate.

Every returned decomposition is re-verified against its four advertised
properties before it escapes this module: the selected balls are pairwise
disjoint and sit inside ``E``, ``E`` sits inside their 5-dilates, radii
respect the cap, each average exceeds the level, and every certified
dilate average does not.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .balls import Ball, BallFamily
from .errors import CZConstructionError, CZPreconditionError, NestingError
from .space import DoublingProfile, FiniteMetricMeasureSpace, doubling_profile
from .weights import as_values, average
from .util import weighted_sum


@dataclass(frozen=True)
class JNConstants:
    """Constant chain for the oscillation decay estimate.

    alpha    = c_mu^2 (5 sigma)^D (1 + 1/eta)^D
    a_const  = c_mu (5 sigma)^D e
    lambda0  = alpha c_mu sigma^D eps
    c0       = e^(1 + alpha / (5^D e))
    c_final  = c_mu^2 c0 / (alpha sigma^D)
    """

    alpha: float
    a_const: float
    lambda0: float
    c0: float
    c_final: float
    eps: float


def jn_constants(profile: DoublingProfile, sigma: float, eta: float, eps: float) -> JNConstants:
    """Evaluate the decay-constant formulas exactly as written."""
    if not eps > 0:
        raise CZPreconditionError(f"eps must be > 0, got {eps}")
    if not sigma >= 1 or not eta > 0:
        raise CZPreconditionError("need sigma >= 1 and eta > 0")
    c_mu, d = profile.c_mu, profile.dimension_d
    alpha = c_mu**2 * (5.0 * sigma) ** d * (1.0 + 1.0 / eta) ** d
    a_const = c_mu * (5.0 * sigma) ** d * math.e
    lambda0 = alpha * c_mu * sigma**d * eps
    exponent = 1.0 + alpha / (5.0**d * math.e)
    # the formula can exceed float range on strongly doubling data; saturate
    c0 = math.exp(exponent) if exponent < 709.0 else math.inf
    c_final = c_mu**2 * c0 / (alpha * sigma**d)
    return JNConstants(alpha, a_const, lambda0, c0, c_final, float(eps))


def phi_sequence(a_const: float, eps: float, lambda0: float, m: int) -> list[float]:
    """Iterates of phi(d) = (A eps + 1) d + A eps starting at lambda0.

    Returns ``m + 1`` values; strictly increasing whenever ``A eps > 0``.
    """
    if m < 0:
        raise CZPreconditionError(f"m must be >= 0, got {m}")
    a_eps = a_const * eps
    seq = [float(lambda0)]
    for _ in range(m):
        seq.append((a_eps + 1.0) * seq[-1] + a_eps)
    return seq


def maximal_function(
    space: FiniteMetricMeasureSpace, f, family: BallFamily
) -> np.ndarray:
    """Per point, the max of avg_B |f| over member balls containing it.

    Points in no member ball get 0; in particular the result vanishes
    outside ``(1+eta) B0``.
    """
    values = np.abs(as_values(f))
    mf = np.zeros(space.n_points)
    for ball in family.members:
        members = space.ball_members(ball.center, ball.radius)
        if members.size == 0:
            continue
        avg = weighted_sum(values[members], space.mass[members]) / space.set_measure(members)
        np.maximum.at(mf, members, avg)
    return mf


def level_set(mf: np.ndarray, lam: float, region: np.ndarray) -> np.ndarray:
    """Strict superlevel set {x in region : mf(x) > lam}."""
    region = np.asarray(region)
    return region[mf[region] > lam]


def closure_ball_set(space: FiniteMetricMeasureSpace, family: BallFamily) -> list[Ball]:
    """Family balls plus their power-of-two dilates up to twice the hat radius.

    Doubling ratios measured over this set dominate the halving chains that
    compare any family ball against the hat ball, which is what makes the
    admissibility constant ``alpha`` effective on discrete data.
    """
    top = 2.0 * (1.0 + family.eta) * family.base_ball.radius
    centers = sorted({b.center for b in family.members})
    balls: list[Ball] = []
    for c in centers:
        for r in family.radius_grid:
            rho = r
            while True:
                balls.append(Ball(c, rho))
                if rho >= top:
                    break
                rho *= 2.0
    # dedupe, canonical order
    return sorted(set(balls), key=lambda b: (b.center, b.radius))


def closure_profile(space: FiniteMetricMeasureSpace, family: BallFamily) -> DoublingProfile:
    return doubling_profile(space, closure_ball_set(space, family))


@dataclass(frozen=True)
class BallCertificate:
    """Stopping certificate: the ball average and its in-family dilate averages."""

    ball: Ball
    average: float
    dilate_averages: dict[float, float] = field(default_factory=dict)


@dataclass
class CZDecomposition:
    """Disjoint stopping balls at one level with their certificates."""

    level: float
    balls: list[Ball]
    certificates: list[BallCertificate]
    cap_radius: float

    def to_json_obj(self, properties: dict | None = None) -> dict:
        obj = {
            "level": self.level,
            "balls": [
                {
                    "center": c.ball.center,
                    "radius": c.ball.radius,
                    "avg": c.average,
                    "doubled_avg": c.dilate_averages.get(2.0),
                }
                for c in self.certificates
            ],
        }
        if properties is not None:
            obj["properties"] = properties
        return obj


class _FamilyAverages:
    """Per (center, grid radius) averages of |f| with cached members."""

    def __init__(self, space, f, family: BallFamily):
        self.space = space
        self.family = family
        self.values = np.abs(as_values(f))
        self.grid = list(family.radius_grid)
        self.centers = sorted({b.center for b in family.members})
        self.avg: dict[tuple[int, float], float] = {}
        self.members: dict[tuple[int, float], np.ndarray] = {}
        for c in self.centers:
            row = space.dist_row(c)
            for r in self.grid:
                members = np.flatnonzero(row < r)
                self.members[(c, r)] = members
                if members.size:
                    self.avg[(c, r)] = weighted_sum(
                        self.values[members], space.mass[members]
                    ) / space.set_measure(members)


def _candidates(table: _FamilyAverages, lam: float, cap: float):
    """Per-center maximal exceeding radii, split into usable/oversized."""
    usable: list[Ball] = []
    oversized: list[Ball] = []
    tol = 1.0 + 1e-12
    for c in table.centers:
        best = None
        for r in table.grid:
            a = table.avg.get((c, r))
            if a is not None and a > lam:
                best = r
        if best is None:
            continue
        ball = Ball(c, best)
        if best <= cap * tol:
            usable.append(ball)
        else:
            oversized.append(ball)
    return usable, oversized


def _greedy_disjoint(table: _FamilyAverages, candidates: list[Ball]) -> list[Ball]:
    order = sorted(candidates, key=lambda b: (-b.radius, b.center))
    claimed = np.zeros(table.space.n_points, dtype=bool)
    accepted: list[Ball] = []
    for ball in order:
        members = table.members[(ball.center, ball.radius)]
        if not claimed[members].any():
            accepted.append(ball)
            claimed[members] = True
    return accepted


def _certify(table: _FamilyAverages, accepted: list[Ball]) -> list[BallCertificate]:
    top = table.family.eta * table.family.base_ball.radius
    certs = []
    for ball in accepted:
        dil = {}
        tau = 2.0
        while ball.radius * tau <= top * (1.0 + 1e-12):
            a = table.avg.get((ball.center, ball.radius * tau))
            if a is not None:
                dil[tau] = a
            tau *= 2.0
        certs.append(BallCertificate(ball, table.avg[(ball.center, ball.radius)], dil))
    return certs


def _verify(space, table: _FamilyAverages, lam: float, cap: float, dec: CZDecomposition,
            region: np.ndarray, mf: np.ndarray) -> None:
    claimed = np.zeros(space.n_points, dtype=bool)
    e_set = set(level_set(mf, lam, region).tolist())
    five = np.zeros(space.n_points, dtype=bool)
    for cert in dec.certificates:
        ball = cert.ball
        members = table.members[(ball.center, ball.radius)]
        if claimed[members].any():
            raise CZConstructionError("selected balls overlap", prop="disjoint", witness=ball)
        claimed[members] = True
        if not set(members.tolist()) <= e_set:
            raise CZConstructionError(
                "selected ball leaves the superlevel region", prop="i", witness=ball
            )
        if ball.radius > cap * (1.0 + 1e-12):
            raise CZConstructionError("selected radius exceeds the cap", prop="ii", witness=ball)
        if not cert.average > lam:
            raise CZConstructionError("selected average at or below level", prop="iii", witness=ball)
        if any(a > lam for a in cert.dilate_averages.values()):
            raise CZConstructionError("dilate average above level", prop="iv", witness=ball)
        five |= space.ball_mask(ball.center, 5.0 * ball.radius)
    uncovered = [x for x in e_set if not five[x]]
    if uncovered:
        raise CZConstructionError(
            "superlevel point outside all 5-dilates", prop="i", witness=uncovered[0]
        )


def cz_decompose(
    space: FiniteMetricMeasureSpace,
    f,
    lam: float,
    family: BallFamily,
    profile: DoublingProfile,
    *,
    _table: _FamilyAverages | None = None,
    _restrict_to: list[Ball] | None = None,
) -> CZDecomposition:
    """Stopping balls at level ``lam`` satisfying the four properties.

    Preconditions: the superlevel region is nonempty and
    ``lam >= alpha * avg(f over (1+eta) B0)``. Postconditions are verified
    before returning; a failure raises :class:`CZConstructionError` with
    the violated property and a witness.
    """
    table = _table or _FamilyAverages(space, f, family)
    hat_members = space.ball_members(family.hat_ball.center, family.hat_ball.radius)
    f_hat = average(space, table.values, hat_members)
    alpha = jn_constants(profile, family.sigma, family.eta, 1.0).alpha
    if lam < alpha * f_hat:
        raise CZPreconditionError(
            f"level {lam} below admissible threshold alpha*f_hat = {alpha * f_hat}"
        )
    mf = maximal_function(space, table.values, family)
    e_members = level_set(mf, lam, hat_members)
    if e_members.size == 0:
        raise CZPreconditionError("superlevel region is empty at this level")

    cap = family.eta * family.base_ball.radius / (5.0 * family.sigma)
    usable, oversized = _candidates(table, lam, cap)
    if _restrict_to is not None:
        keep = []
        for ball in usable:
            members = set(table.members[(ball.center, ball.radius)].tolist())
            if any(
                members <= set(space.ball_members(b.center, 5.0 * b.radius).tolist())
                for b in _restrict_to
            ):
                keep.append(ball)
        dropped = [b for b in usable if b not in keep]
        usable = keep
    else:
        dropped = []

    covered = np.zeros(space.n_points, dtype=bool)
    for ball in usable:
        covered[table.members[(ball.center, ball.radius)]] = True
    missing = [x for x in e_members.tolist() if not covered[x]]
    if missing:
        if _restrict_to is not None and dropped:
            raise NestingError(
                "no admissible candidate inside a coarse 5-dilate covers a superlevel point",
                witness=missing[0],
            )
        raise CZConstructionError(
            "superlevel point only reachable through an over-cap radius "
            "(admissibility constant understated by the supplied profile)",
            prop="ii",
            witness=(missing[0], oversized[:1]),
        )

    accepted = _greedy_disjoint(table, usable)
    dec = CZDecomposition(
        level=float(lam),
        balls=accepted,
        certificates=_certify(table, accepted),
        cap_radius=cap,
    )
    _verify(space, table, lam, cap, dec, hat_members, mf)
    return dec


def cz_nested(
    space: FiniteMetricMeasureSpace,
    f,
    lam_lo: float,
    lam_hi: float,
    family: BallFamily,
    profile: DoublingProfile,
) -> tuple[CZDecomposition, CZDecomposition, list[int]]:
    """Decompositions at two levels with each fine ball in a coarse 5-dilate.

    Builds the coarse (low) level first, restricts fine candidates to balls
    contained in some coarse 5-dilate, and returns the containment map
    (index into the low-level balls, parallel to the high-level balls).
    Impossibility raises :class:`NestingError` with a witness point.
    """
    if not lam_lo <= lam_hi:
        raise CZPreconditionError("need lam_lo <= lam_hi")
    table = _FamilyAverages(space, f, family)
    dec_lo = cz_decompose(space, f, lam_lo, family, profile, _table=table)
    dec_hi = cz_decompose(
        space, f, lam_hi, family, profile, _table=table, _restrict_to=dec_lo.balls
    )
    five_sets = [
        set(space.ball_members(b.center, 5.0 * b.radius).tolist()) for b in dec_lo.balls
    ]
    mapping: list[int] = []
    for ball in dec_hi.balls:
        members = set(table.members[(ball.center, ball.radius)].tolist())
        j = next((k for k, s in enumerate(five_sets) if members <= s), None)
        if j is None:
            raise NestingError("fine ball escaped every coarse 5-dilate", witness=ball)
        mapping.append(j)
    return dec_lo, dec_hi, mapping
