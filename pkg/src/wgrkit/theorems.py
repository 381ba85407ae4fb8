"""Numerical verifiers for the oscillation/decay inequality chain.

Every checker evaluates both sides of an inequality on a concrete
instance and reports the smallest signed gap (RHS - LHS) together with
the witness attaining it. Hypothesis constants (the oscillation constant
``eps``, superlevel constant ``beta``, sublevel constant ``alpha_m``) are
measured from the instance by default, as suprema over the supplied ball
system, and may instead be supplied explicitly; reports always record
which value was used and which doubling constant entered the formulas.

Margins are judged with a relative tolerance against the RHS scale;
margins within the tolerance band are flagged ``boundary``. A check whose
compared sets are all empty (nothing exceeds the level anywhere) passes
*vacuously* and says so: a vacuous pass is never presented as evidence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .balls import Ball, BallFamily, build_family, five_r_cover, verify_cover
from .czdecomp import JNConstants, closure_ball_set, jn_constants
from .errors import (
    DegenerateWeightError,
    DomainError,
    InvalidExponentError,
    InvalidParameterError,
    ThresholdError,
)
from .space import DoublingProfile, FiniteMetricMeasureSpace, doubling_profile
from .util import fsum, weighted_sum
from .weights import (
    as_values,
    average,
    family_balls,
    induced_measure,
    neg_oscillation_avg,
    pos_oscillation,
    rhi_constant,
    sublevel_alpha,
    weak_ainfty_beta,
    wgr_epsilon,
    wgr_minus_epsilon,
)

#: Relative tolerance for inequality margins, against the RHS scale.
MARGIN_RTOL = 1e-9


@dataclass
class CheckReport:
    """Outcome of one inequality check.

    ``margin`` is the smallest signed absolute gap RHS - LHS over all
    compared instances; ``margin_rel`` is that gap relative to the RHS
    scale at the witness. ``passed`` iff ``margin_rel >= -tolerance`` with
    the tolerance recorded in ``params``.
    """

    name: str
    passed: bool
    margin: float
    witness: object = None
    params: dict = field(default_factory=dict)
    vacuous: bool = False
    boundary: bool = False
    margin_rel: float = math.inf
    notes: str = ""
    table: list[tuple] = field(default_factory=list)

    def to_json_obj(self) -> dict:
        witness = self.witness
        if isinstance(witness, Ball):
            witness = {"center": witness.center, "radius": witness.radius}
        return {
            "name": self.name,
            "passed": self.passed,
            "vacuous": self.vacuous,
            "boundary": self.boundary,
            "margin": _finite_or_str(self.margin),
            "margin_rel": None if math.isinf(self.margin_rel) else self.margin_rel,
            "witness": witness,
            "params": _finite_or_str(self.params),
            "notes": self.notes,
        }


def _finite_or_str(obj):
    """Replace non-finite reals by their string form for serialization."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _finite_or_str(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite_or_str(v) for v in obj]
    return obj


class _MarginTracker:
    """Accumulates per-instance gaps and produces the report skeleton."""

    def __init__(self, name: str, params: dict):
        self.name = name
        self.params = dict(params)
        self.params.setdefault("tolerance", MARGIN_RTOL)
        self.margin = math.inf
        self.margin_rel = math.inf
        self.witness = None
        self.n_compared = 0
        self.n_vacuous = 0

    def add(self, lhs: float, rhs: float, witness, vacuous: bool = False) -> None:
        self.n_compared += 1
        if vacuous:
            self.n_vacuous += 1
        gap = rhs - lhs
        scale = max(abs(rhs), abs(lhs), 1e-300)
        rel = gap / scale
        if rel < self.margin_rel:
            self.margin_rel = rel
            self.margin = gap
            self.witness = witness

    def report(self, notes: str = "", table=None) -> CheckReport:
        tol = self.params["tolerance"]
        vacuous = self.n_compared > 0 and self.n_vacuous == self.n_compared
        if self.n_compared == 0:
            # nothing to compare: vacuous by construction
            return CheckReport(
                self.name, True, math.inf, None, self.params, True, False, math.inf, notes,
                table or [],
            )
        passed = self.margin_rel >= -tol
        boundary = abs(self.margin_rel) <= tol
        self.params["n_compared"] = self.n_compared
        self.params["n_vacuous"] = self.n_vacuous
        return CheckReport(
            self.name,
            passed,
            self.margin,
            self.witness,
            self.params,
            vacuous,
            boundary,
            self.margin_rel,
            notes,
            table or [],
        )


def _sigma_average(space, values, ball: Ball, sigma: float) -> float:
    ref = space.ball_members(ball.center, sigma * ball.radius)
    return average(space, values, ref)


# ---------------------------------------------------------------------------
# superlevel / sublevel equivalences
# ---------------------------------------------------------------------------


def check_superlevel_bound(
    space: FiniteMetricMeasureSpace,
    w,
    family,
    lam: float,
    eps: float | None = None,
    sigma: float | None = None,
) -> CheckReport:
    """Positive-part oscillation controls weighted superlevel sets.

    With S = sigma B and eps such that int_B (w - w_S)_+ dmu <= eps w(S)
    for all family balls (measured as the sup by default), verifies per
    ball, for eps < lam < 1:

        w(B n {(1 - eps/lam) w >= w_S}) <= lam w(S)
    """
    balls, fam_sigma = family_balls(family)
    sigma = fam_sigma if sigma is None else sigma
    values = as_values(w)
    measured = eps is None
    if measured:
        eps = wgr_epsilon(space, values, balls, sigma=sigma).value
    tracker = _MarginTracker(
        "superlevel_bound",
        {"sigma": sigma, "lambda": lam, "eps": eps, "eps_measured": measured},
    )
    if eps == 0.0:
        return tracker.report(notes="constant weight: oscillation constant is 0; vacuous")
    if not eps < lam < 1.0:
        raise InvalidParameterError(f"need eps < lambda < 1, got eps={eps}, lambda={lam}")
    factor = 1.0 - eps / lam
    for ball in balls:
        c = _sigma_average(space, values, ball, sigma)
        members = space.ball_members(ball.center, ball.radius)
        level = members[factor * values[members] >= c]
        lhs = induced_measure(space, values, level)
        rhs = lam * induced_measure(
            space, values, space.ball_members(ball.center, sigma * ball.radius)
        )
        tracker.add(lhs, rhs, ball, vacuous=level.size == 0)
    return tracker.report()


def check_osc_from_superlevel(
    space: FiniteMetricMeasureSpace,
    w,
    family,
    alpha: float,
    beta: float | None = None,
    sigma: float | None = None,
) -> CheckReport:
    """Weighted superlevel bound controls positive-part oscillation.

    With S = sigma B and beta such that w(B n {alpha w >= w_S}) <= beta w(S)
    for all family balls (measured by default), verifies per ball:

        int_B (w - w_S)_+ dmu <= (1 - alpha (1 - beta)) w(S)
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha must be in (0,1), got {alpha}")
    balls, fam_sigma = family_balls(family)
    sigma = fam_sigma if sigma is None else sigma
    values = as_values(w)
    measured = beta is None
    if measured:
        beta = weak_ainfty_beta(space, values, balls, alpha, sigma=sigma).value
    tracker = _MarginTracker(
        "osc_from_superlevel",
        {"sigma": sigma, "alpha": alpha, "beta": beta, "beta_measured": measured},
    )
    coeff = 1.0 - alpha * (1.0 - beta)
    for ball in balls:
        lhs = pos_oscillation(space, values, ball, sigma)
        rhs = coeff * induced_measure(
            space, values, space.ball_members(ball.center, sigma * ball.radius)
        )
        tracker.add(lhs, rhs, ball, vacuous=lhs == 0.0)
    return tracker.report()


def check_sublevel_bound(
    space: FiniteMetricMeasureSpace,
    w,
    family,
    lam: float,
    eps: float | None = None,
    sigma: float | None = None,
) -> CheckReport:
    """Negative-part oscillation controls plain-measure sublevel sets.

    With S = sigma B and eps such that avg_B (w - w_S)_- <= eps w_S for all
    family balls (measured by default), verifies per ball, eps < lam < 1:

        mu(B n {w <= (1 - eps/lam) w_S}) <= lam mu(B)
    """
    balls, fam_sigma = family_balls(family)
    sigma = fam_sigma if sigma is None else sigma
    values = as_values(w)
    measured = eps is None
    if measured:
        eps = wgr_minus_epsilon(space, values, balls, sigma=sigma).value
    tracker = _MarginTracker(
        "sublevel_bound",
        {"sigma": sigma, "lambda": lam, "eps": eps, "eps_measured": measured},
    )
    if eps == 0.0:
        return tracker.report(notes="constant weight: oscillation constant is 0; vacuous")
    if not eps < lam < 1.0:
        raise InvalidParameterError(f"need eps < lambda < 1, got eps={eps}, lambda={lam}")
    factor = 1.0 - eps / lam
    for ball in balls:
        c = _sigma_average(space, values, ball, sigma)
        members = space.ball_members(ball.center, ball.radius)
        level = members[values[members] <= factor * c]
        lhs = space.set_measure(level)
        rhs = lam * space.set_measure(members)
        tracker.add(lhs, rhs, ball, vacuous=level.size == 0)
    return tracker.report()


def check_neg_osc_from_sublevel(
    space: FiniteMetricMeasureSpace,
    w,
    family,
    beta: float,
    alpha_m: float | None = None,
    sigma: float | None = None,
) -> CheckReport:
    """Plain-measure sublevel bound controls negative-part oscillation.

    With S = sigma B and alpha_m such that mu(B n {w <= beta w_S}) <=
    alpha_m mu(B) for all family balls (measured by default), verifies:

        avg_B (w - w_S)_- <= (1 - (1 - alpha_m) beta) w_S
    """
    if not 0.0 < beta < 1.0:
        raise InvalidParameterError(f"beta must be in (0,1), got {beta}")
    balls, fam_sigma = family_balls(family)
    sigma = fam_sigma if sigma is None else sigma
    values = as_values(w)
    measured = alpha_m is None
    if measured:
        alpha_m = sublevel_alpha(space, values, balls, beta, sigma=sigma).value
    tracker = _MarginTracker(
        "neg_osc_from_sublevel",
        {"sigma": sigma, "beta": beta, "alpha": alpha_m, "alpha_measured": measured},
    )
    coeff = 1.0 - (1.0 - alpha_m) * beta
    for ball in balls:
        lhs = neg_oscillation_avg(space, values, ball, sigma)
        rhs = coeff * _sigma_average(space, values, ball, sigma)
        tracker.add(lhs, rhs, ball, vacuous=lhs == 0.0)
    return tracker.report()


# ---------------------------------------------------------------------------
# decay geometry: base ball, measuring system, constants
# ---------------------------------------------------------------------------


@dataclass
class BallSystem:
    """All ball machinery for decay checks over one base ball.

    ``measuring`` holds the family members plus the hat ball and the
    5-dilates of small members -- every ball whose sigma-dilate stays
    (by center/radius arithmetic) inside ``sigma * hat``, i.e. everything
    the decay argument compares against. The doubling profile defaults to
    the complete ball set used by the run (measuring set plus the
    power-of-two halving chains).
    """

    space: FiniteMetricMeasureSpace
    base_ball: Ball
    sigma: float
    eta: float
    family: BallFamily
    measuring: list[Ball]
    profile: DoublingProfile
    base_members: np.ndarray
    hat_members: np.ndarray
    sigma_hat_members: np.ndarray


def build_ball_system(
    space: FiniteMetricMeasureSpace,
    base_ball: Ball,
    sigma: float,
    eta: float,
    profile: DoublingProfile | None = None,
) -> BallSystem:
    family = build_family(space, base_ball, eta, sigma)
    measuring = list(family.members)
    measuring.append(family.hat_ball)
    lim = (sigma * (1.0 + eta) - 1.0) * base_ball.radius / (5.0 * sigma)
    measuring.extend(
        Ball(b.center, 5.0 * b.radius) for b in family.members if b.radius <= lim
    )
    measuring = sorted(set(measuring), key=lambda b: (b.center, b.radius))
    if profile is None:
        profile_set = sorted(
            set(measuring) | set(closure_ball_set(space, family)),
            key=lambda b: (b.center, b.radius),
        )
        profile = doubling_profile(space, profile_set)
    return BallSystem(
        space=space,
        base_ball=base_ball,
        sigma=sigma,
        eta=eta,
        family=family,
        measuring=measuring,
        profile=profile,
        base_members=space.ball_members(base_ball.center, base_ball.radius),
        hat_members=space.ball_members(base_ball.center, (1.0 + eta) * base_ball.radius),
        sigma_hat_members=space.ball_members(
            base_ball.center, sigma * (1.0 + eta) * base_ball.radius
        ),
    )


def _decay_inputs(system: BallSystem, w, eps: float | None):
    values = as_values(w)
    c = average(system.space, values, system.sigma_hat_members)
    if c <= 0.0:
        raise DegenerateWeightError("weight vanishes on the sigma-hat reference ball")
    measured = eps is None
    if measured:
        eps = wgr_epsilon(system.space, values, system.measuring, sigma=system.sigma).value
    excess = np.maximum(values - c, 0.0)
    return values, c, float(eps), measured, excess


def check_jn_decay(
    space: FiniteMetricMeasureSpace,
    w,
    sigma: float,
    eta: float,
    base_ball: Ball,
    lambda_grid,
    eps: float | None = None,
    profile: DoublingProfile | None = None,
    system: BallSystem | None = None,
) -> CheckReport:
    """Exponential decay of large positive oscillation.

    With c = avg of w over sigma*(1+eta)*B0 and constants A, C, lambda0
    from :func:`jn_constants` at the measured (or supplied) oscillation
    constant eps, verifies at every grid lambda >= lambda0:

        mu({x in B0 : (w - c)_+ > lambda c})
            <= (1/(1+lambda))^(1/(A eps)) * (C/(eps c)) * int_hat (w - c)_+ dmu

    Rows (lambda, lhs, rhs, margin, vacuous) are returned in the report
    table; a lambda whose superlevel set is empty is flagged vacuous.
    """
    system = system or build_ball_system(space, base_ball, sigma, eta, profile)
    values, c, eps, measured, excess = _decay_inputs(system, w, eps)
    params = {
        "sigma": sigma,
        "eta": eta,
        "c_mu": system.profile.c_mu,
        "D": system.profile.dimension_d,
        "eps": eps,
        "eps_measured": measured,
        "n_measuring_balls": len(system.measuring),
        "w_ref": c,
    }
    tracker = _MarginTracker("jn_decay", params)
    if eps == 0.0:
        return tracker.report(notes="constant weight: oscillation constant is 0; vacuous")
    consts = jn_constants(system.profile, sigma, eta, eps)
    tracker.params.update(
        {
            "alpha": consts.alpha,
            "A": consts.a_const,
            "lambda0": consts.lambda0,
            "C0": consts.c0,
            "C": consts.c_final,
        }
    )
    hat_excess = weighted_sum(excess[system.hat_members], space.mass[system.hat_members])
    rows = []
    for lam in lambda_grid:
        if lam < consts.lambda0 * (1.0 - 1e-12):
            raise InvalidParameterError(
                f"lambda grid entry {lam} below lambda0 = {consts.lambda0}"
            )
        sel = system.base_members[excess[system.base_members] > lam * c]
        lhs = space.set_measure(sel)
        rhs = (1.0 / (1.0 + lam)) ** (1.0 / (consts.a_const * eps)) * (
            consts.c_final / (eps * c)
        ) * hat_excess
        vac = sel.size == 0
        tracker.add(lhs, rhs, float(lam), vacuous=vac)
        rows.append((float(lam), lhs, rhs, rhs - lhs, int(vac)))
    return tracker.report(table=rows)


def _power_bound_constant(consts: JNConstants, profile: DoublingProfile, sigma: float,
                          p: float, eps: float) -> float:
    """Self-improvement constant with the exact beta-function value.

    C(p) = p (alpha c_mu sigma^D)^(p-1)
         + p * B(p, 1/(A eps) - p) * eps^(-p) * C_decay
    """
    y = 1.0 / (consts.a_const * eps)
    exact_beta = beta_fn(p, y - p)
    lead = consts.alpha * profile.c_mu * sigma**profile.dimension_d
    return p * lead ** (p - 1.0) + p * exact_beta * eps ** (-p) * consts.c_final


def _require_osc_range(consts: JNConstants, eps: float, p: float) -> None:
    if not eps < 1.0 / (2.0 * consts.a_const):
        raise ThresholdError(
            f"oscillation constant {eps} is not below 1/(2A) = {1.0 / (2.0 * consts.a_const)}"
        )
    if not 1.0 < p <= 1.0 / (2.0 * consts.a_const * eps):
        raise InvalidExponentError(
            f"need 1 < p <= 1/(2 A eps) = {1.0 / (2.0 * consts.a_const * eps)}, got {p}"
        )


def check_osc_power_bound(
    space: FiniteMetricMeasureSpace,
    w,
    sigma: float,
    eta: float,
    base_ball: Ball,
    p: float,
    eps: float | None = None,
    profile: DoublingProfile | None = None,
    system: BallSystem | None = None,
) -> CheckReport:
    """Self-improvement: p-th power of the positive oscillation.

    For measured eps < 1/(2A) and 1 < p <= 1/(2 A eps), with c the
    sigma-hat average, verifies

        int_B0 (w - c)_+^p dmu
            <= C(p) eps^(p-1) c^(p-1) int_hat (w - c)_+ dmu

    with the exact-beta constant of :func:`_power_bound_constant`.
    """
    system = system or build_ball_system(space, base_ball, sigma, eta, profile)
    values, c, eps, measured, excess = _decay_inputs(system, w, eps)
    params = {
        "sigma": sigma,
        "eta": eta,
        "p": p,
        "c_mu": system.profile.c_mu,
        "D": system.profile.dimension_d,
        "eps": eps,
        "eps_measured": measured,
        "w_ref": c,
    }
    tracker = _MarginTracker("osc_power_bound", params)
    if eps == 0.0:
        return tracker.report(notes="constant weight: oscillation constant is 0; vacuous")
    consts = jn_constants(system.profile, sigma, eta, eps)
    _require_osc_range(consts, eps, p)
    c_p = _power_bound_constant(consts, system.profile, sigma, p, eps)
    tracker.params.update({"alpha": consts.alpha, "A": consts.a_const, "C": c_p})
    lhs = weighted_sum(
        excess[system.base_members] ** p, space.mass[system.base_members]
    )
    hat_excess = weighted_sum(excess[system.hat_members], space.mass[system.hat_members])
    rhs = c_p * eps ** (p - 1.0) * c ** (p - 1.0) * hat_excess
    tracker.add(lhs, rhs, base_ball, vacuous=lhs == 0.0)
    return tracker.report()


def check_weak_rhi(
    space: FiniteMetricMeasureSpace,
    w,
    sigma: float,
    eta: float,
    base_ball: Ball,
    p: float,
    eps: float | None = None,
    profile: DoublingProfile | None = None,
    system: BallSystem | None = None,
) -> CheckReport:
    """Weak reverse Holder bound against the sigma-hat reference ball.

    Under the same ranges as :func:`check_osc_power_bound`, with
    C^p = C_power * c_mu * ((1+eta) sigma)^D, verifies

        (avg_B0 w^p)^(1/p) <= (C eps + 1) * avg over sigma*(1+eta)*B0 of w
    """
    system = system or build_ball_system(space, base_ball, sigma, eta, profile)
    values, c, eps, measured, _ = _decay_inputs(system, w, eps)
    params = {
        "sigma": sigma,
        "eta": eta,
        "p": p,
        "c_mu": system.profile.c_mu,
        "D": system.profile.dimension_d,
        "eps": eps,
        "eps_measured": measured,
        "w_ref": c,
    }
    tracker = _MarginTracker("weak_rhi", params)
    if eps == 0.0:
        mean_p = average(space, values**p, system.base_members) ** (1.0 / p)
        tracker.add(mean_p, c, base_ball)
        return tracker.report(notes="constant weight: bound reduces to the plain average")
    consts = jn_constants(system.profile, sigma, eta, eps)
    _require_osc_range(consts, eps, p)
    c_power = _power_bound_constant(consts, system.profile, sigma, p, eps)
    big_c = (
        c_power * system.profile.c_mu * ((1.0 + eta) * sigma) ** system.profile.dimension_d
    ) ** (1.0 / p)
    tracker.params.update({"alpha": consts.alpha, "A": consts.a_const, "C": big_c})
    mu_base = space.set_measure(system.base_members)
    lhs = (
        weighted_sum(values[system.base_members] ** p, space.mass[system.base_members])
        / mu_base
    ) ** (1.0 / p)
    rhs = (big_c * eps + 1.0) * c
    tracker.add(lhs, rhs, base_ball)
    return tracker.report()


def check_cover_rhi(
    space: FiniteMetricMeasureSpace,
    w,
    sigma: float,
    eta: float,
    base_ball: Ball,
    p: float,
    eps: float | None = None,
    profile: DoublingProfile | None = None,
) -> CheckReport:
    """Reverse Holder bound with the smaller sigma*B0 reference ball.

    Covers B0 with N balls of radius (sigma-1)/(sigma(1+eta)) * r0 via the
    greedy 5r construction, applies the weak bound on each piece with one
    shared oscillation constant (the max over the base system and every
    piece system), and verifies the assembled inequality

        (avg_B0 w^p)^(1/p)
            <= (C eps + 1) c_mu^(2 + 1/p) (sigma/(sigma-1))^D N^(1/p)
               * avg over sigma*B0 of w

    The cover postconditions (full coverage, disjoint fifth-dilates,
    containment in sigma*B0, count bound) are re-verified and reported.
    """
    if not sigma > 1.0:
        raise InvalidParameterError(f"cover bound needs sigma > 1, got {sigma}")
    system = build_ball_system(space, base_ball, sigma, eta, profile)
    values = as_values(w)
    cover = five_r_cover(space, base_ball, sigma, eta)
    cover_report = verify_cover(space, base_ball, cover, sigma, eta, system.profile)

    sub_systems = [
        build_ball_system(space, b, sigma, eta, profile=system.profile) for b in cover
    ]
    measured = eps is None
    if measured:
        eps = wgr_epsilon(space, values, system.measuring, sigma=sigma).value
        for sub in sub_systems:
            eps = max(
                eps, wgr_epsilon(space, values, sub.measuring, sigma=sigma).value
            )
    params = {
        "sigma": sigma,
        "eta": eta,
        "p": p,
        "c_mu": system.profile.c_mu,
        "D": system.profile.dimension_d,
        "eps": eps,
        "eps_measured": measured,
        "n_cover": len(cover),
        "cover_coverage": cover_report["coverage"],
        "cover_fifth_disjoint": cover_report["all_fifth_disjoint"],
        "cover_contained": cover_report["all_contained"],
        "cover_count_bound": cover_report["count_bound"],
        "cover_count_ok": cover_report["count_ok"],
    }
    tracker = _MarginTracker("cover_rhi", params)
    if eps == 0.0:
        mu_base = space.set_measure(system.base_members)
        lhs = (
            weighted_sum(values[system.base_members] ** p, space.mass[system.base_members])
            / mu_base
        ) ** (1.0 / p)
        rhs = average(
            space, values, space.ball_members(base_ball.center, sigma * base_ball.radius)
        )
        tracker.add(lhs, rhs, base_ball)
        return tracker.report(notes="constant weight: bound reduces to the plain average")

    consts = jn_constants(system.profile, sigma, eta, eps)
    _require_osc_range(consts, eps, p)
    # every piece must satisfy the weak bound at the shared eps
    for sub in sub_systems:
        piece = check_weak_rhi(
            space, values, sigma, eta, sub.base_ball, p, eps=eps, system=sub
        )
        if not piece.passed:
            tracker.add(-piece.margin, 0.0, sub.base_ball)
            return tracker.report(notes="a cover piece violates the weak bound")
    c_power = _power_bound_constant(consts, system.profile, sigma, p, eps)
    weak_c = (
        c_power * system.profile.c_mu * ((1.0 + eta) * sigma) ** system.profile.dimension_d
    ) ** (1.0 / p)
    c_mu, dim = system.profile.c_mu, system.profile.dimension_d
    big_c = (
        (weak_c * eps + 1.0)
        * c_mu ** (2.0 + 1.0 / p)
        * (sigma / (sigma - 1.0)) ** dim
        * len(cover) ** (1.0 / p)
    )
    tracker.params["C"] = big_c
    mu_base = space.set_measure(system.base_members)
    lhs = (
        weighted_sum(values[system.base_members] ** p, space.mass[system.base_members])
        / mu_base
    ) ** (1.0 / p)
    rhs = big_c * average(
        space, values, space.ball_members(base_ball.center, sigma * base_ball.radius)
    )
    tracker.add(lhs, rhs, base_ball)
    ok_cover = (
        cover_report["coverage"] == 1.0
        and cover_report["all_fifth_disjoint"]
        and cover_report["all_contained"]
        and cover_report["count_ok"]
    )
    rep = tracker.report(notes="" if ok_cover else "cover postcondition failed")
    rep.passed = rep.passed and ok_cover
    return rep


def check_rhi_equivalence_observed(
    space: FiniteMetricMeasureSpace,
    w,
    family,
    alpha: float,
    beta: float,
    p_grid,
    sigma: float | None = None,
    profile: DoublingProfile | None = None,
) -> CheckReport:
    """Observational log relating the superlevel condition to bounded RHI.

    Records whether the measured superlevel constant at ``alpha`` stays
    below ``beta`` with ``beta`` under the smallness threshold
    ``c_mu^(-floor(log2(5 sigma^2)) - 1)``, and the reverse Holder
    constants along ``p_grid``. Purely observational: always passes,
    both directions are logged for the reader.
    """
    balls, fam_sigma = family_balls(family)
    sigma = fam_sigma if sigma is None else sigma
    if profile is None:
        profile = doubling_profile(space, balls)
    values = as_values(w)
    measured_beta = weak_ainfty_beta(space, values, balls, alpha, sigma=sigma).value
    threshold = profile.c_mu ** (-(math.floor(math.log2(5.0 * sigma**2)) + 1.0))
    rhi_values = {}
    for p in p_grid:
        try:
            rhi_values[float(p)] = rhi_constant(space, values, balls, p, sigma=sigma).value
        except Exception as exc:  # degenerate instances logged, not raised
            rhi_values[float(p)] = f"error: {exc}"
    params = {
        "sigma": sigma,
        "alpha": alpha,
        "beta": beta,
        "c_mu": profile.c_mu,
        "beta_threshold": threshold,
        "beta_below_threshold": beta < threshold,
        "measured_beta": measured_beta,
        "superlevel_holds_at_beta": measured_beta <= beta,
        "rhi_values": rhi_values,
    }
    return CheckReport(
        name="rhi_equivalence_observed",
        passed=True,
        margin=beta - measured_beta,
        witness=None,
        params=params,
        notes="observational: no pass/fail claim",
    )


# ---------------------------------------------------------------------------
# special-function oracles
# ---------------------------------------------------------------------------


def beta_fn(p: float, q: float) -> float:
    """Euler beta via log-gamma: Gamma(p) Gamma(q) / Gamma(p + q)."""
    if not (p > 0 and q > 0):
        raise DomainError(f"beta function needs positive arguments, got ({p}, {q})")
    return math.exp(math.lgamma(p) + math.lgamma(q) - math.lgamma(p + q))


def beta_asymptotic_check(p: float, y_list) -> CheckReport:
    """Ratio B(p, y-p) y^p / Gamma(p) approaches 1 from above.

    Verifies the ratio exceeds 1, decreases along ``y_list`` (restricted
    to y >= 10 p), and reports the fitted constant K with
    |ratio - 1| <= K / y.
    """
    if not p > 0:
        raise DomainError(f"p must be positive, got {p}")
    ys = [float(y) for y in y_list]
    if any(y <= p for y in ys):
        raise DomainError("need y > p for every entry")
    gamma_p = math.exp(math.lgamma(p))
    ratios = [beta_fn(p, y - p) * y**p / gamma_p for y in ys]
    fitted_k = max(abs(r - 1.0) * y for r, y in zip(ratios, ys))
    tail = [(y, r) for y, r in zip(ys, ratios) if y >= 10.0 * p]
    monotone = all(
        abs(tail[i + 1][1] - 1.0) < abs(tail[i][1] - 1.0) for i in range(len(tail) - 1)
    )
    passed = monotone and len(tail) >= 2 and abs(tail[-1][1] - 1.0) <= fitted_k / tail[-1][0]
    return CheckReport(
        name="beta_asymptotic",
        passed=passed,
        margin=min(abs(r - 1.0) for r in ratios),
        witness=ys[-1],
        params={"p": p, "fitted_K": fitted_k, "ratios": ratios, "y": ys},
        table=[(y, r) for y, r in zip(ys, ratios)],
    )


def cavalieri_check(
    space: FiniteMetricMeasureSpace, f, p: float, region=None
) -> CheckReport:
    """Layer-cake identity for p-th powers on a finite space.

    Compares int f^p dmu against the exact piecewise integral
    p * int_0^inf t^(p-1) mu({f > t}) dt = sum_k mu({f > l_k}) (l_{k+1}^p - l_k^p)
    over the sorted distinct levels l_k of f (with l_0 = 0).
    """
    if not p > 0:
        raise DomainError(f"p must be positive, got {p}")
    values = as_values(f)
    region = np.arange(space.n_points) if region is None else np.asarray(region)
    direct = weighted_sum(values[region] ** p, space.mass[region])
    levels = np.unique(values[region])
    levels = levels[levels > 0.0]
    pieces = []
    prev = 0.0
    for level in levels:
        above = region[values[region] >= level]  # mu({f > t}) for t in [prev, level)
        pieces.append(space.set_measure(above) * (level**p - prev**p))
        prev = level
    layered = fsum(pieces)
    scale = max(abs(direct), abs(layered), 1e-300)
    margin = (layered - direct) / scale
    return CheckReport(
        name="cavalieri",
        passed=abs(margin) <= 1e-9,
        margin=layered - direct,
        margin_rel=margin,
        witness=None,
        params={"p": p, "direct": direct, "layered": layered, "tolerance": 1e-9},
    )
