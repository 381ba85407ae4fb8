"""Independent brute-force oracles.

Everything here recomputes from raw coordinates/masses with plain Python
loops, deliberately sharing no code path with the library reductions it
cross-checks.
"""
from __future__ import annotations

import math


def distance(space, i: int, j: int) -> float:
    if space.coords is None:
        return float(space.dist_row(i)[j])
    a, b = space.coords[i], space.coords[j]
    if space.metric_kind == "chebyshev":
        return max(abs(float(x) - float(y)) for x, y in zip(a, b))
    return math.sqrt(sum((float(x) - float(y)) ** 2 for x, y in zip(a, b)))


def ball(space, center: int, r: float) -> list[int]:
    return [j for j in range(space.n_points) if distance(space, center, j) < r]


def measure(space, pts) -> float:
    return math.fsum(float(space.mass[j]) for j in pts)


def w_measure(space, w, pts) -> float:
    vals = w.values if hasattr(w, "values") else w
    return math.fsum(float(vals[j]) * float(space.mass[j]) for j in pts)


def avg(space, w, pts) -> float:
    return w_measure(space, w, pts) / measure(space, pts)


def pos_osc(space, w, center: int, r: float, sigma: float) -> float:
    vals = w.values if hasattr(w, "values") else w
    c = avg(space, w, ball(space, center, sigma * r))
    return math.fsum(
        max(float(vals[j]) - c, 0.0) * float(space.mass[j]) for j in ball(space, center, r)
    )


def neg_osc_avg(space, w, center: int, r: float, sigma: float) -> float:
    vals = w.values if hasattr(w, "values") else w
    c = avg(space, w, ball(space, center, sigma * r))
    members = ball(space, center, r)
    return math.fsum(
        max(c - float(vals[j]), 0.0) * float(space.mass[j]) for j in members
    ) / measure(space, members)


def abs_osc(space, w, center: int, r: float) -> float:
    vals = w.values if hasattr(w, "values") else w
    members = ball(space, center, r)
    c = avg(space, w, members)
    return math.fsum(abs(float(vals[j]) - c) * float(space.mass[j]) for j in members)


def wgr_sup(space, w, balls, sigma: float) -> float:
    best = 0.0
    for b in balls:
        denom = w_measure(space, w, ball(space, b.center, sigma * b.radius))
        if denom <= 0.0:
            continue
        best = max(best, pos_osc(space, w, b.center, b.radius, sigma) / denom)
    return best


def maximal_function(space, f, balls) -> list[float]:
    vals = f.values if hasattr(f, "values") else f
    out = [0.0] * space.n_points
    for b in balls:
        members = ball(space, b.center, b.radius)
        if not members:
            continue
        a = math.fsum(
            abs(float(vals[j])) * float(space.mass[j]) for j in members
        ) / measure(space, members)
        for j in members:
            out[j] = max(out[j], a)
    return out


def cz_properties(space, f, lam: float, family, dec) -> dict:
    """Re-derive all four stopping properties from scratch."""
    mf = maximal_function(space, f, family.members)
    hat = ball(space, family.base_ball.center, (1.0 + family.eta) * family.base_ball.radius)
    e_set = {x for x in hat if mf[x] > lam}
    members = [ball(space, b.center, b.radius) for b in dec.balls]

    disjoint = True
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            if set(members[i]) & set(members[j]):
                disjoint = False
    union_in_e = all(set(m) <= e_set for m in members)
    five = set()
    for b in dec.balls:
        five |= set(ball(space, b.center, 5.0 * b.radius))
    e_in_five = e_set <= five
    cap = family.eta * family.base_ball.radius / (5.0 * family.sigma)
    radii_ok = all(b.radius <= cap * (1 + 1e-12) for b in dec.balls)
    avgs_above = all(
        avg(space, f, m) > lam for m in members
    )
    dilates_below = True
    for b in dec.balls:
        tau = 2.0
        while b.radius * tau <= family.eta * family.base_ball.radius * (1 + 1e-12):
            if b.radius * tau in family.radius_grid:
                if avg(space, f, ball(space, b.center, b.radius * tau)) > lam:
                    dilates_below = False
            tau *= 2.0
    return {
        "disjoint": disjoint,
        "i": union_in_e and e_in_five,
        "ii": radii_ok,
        "iii": avgs_above,
        "iv": dilates_below,
    }


def matrix_cz_scan(space, f, lam: float, family, dec) -> dict:
    """Vectorized independent re-scan of the stopping properties.

    Builds the full (ball x point) membership matrix by broadcasting raw
    coordinates and reduces with matrix products -- no shared reductions
    with the library's per-ball compensated sums.
    """
    import numpy as np

    vals = np.asarray(f.values if hasattr(f, "values") else f, dtype=float)
    coords = space.coords
    if space.metric_kind == "chebyshev":
        dmat = np.abs(coords[:, None, :] - coords[None, :, :]).max(axis=2)
    else:
        diff = coords[:, None, :] - coords[None, :, :]
        dmat = np.sqrt((diff * diff).sum(axis=2))
    mass = np.asarray(space.mass)

    fam_centers = np.array([b.center for b in family.members])
    fam_radii = np.array([b.radius for b in family.members])
    fam_mask = dmat[fam_centers] < fam_radii[:, None]
    fam_avg = (fam_mask @ (np.abs(vals) * mass)) / (fam_mask @ mass)
    mf = np.where(fam_mask, fam_avg[:, None], 0.0).max(axis=0)

    hat_mask = dmat[family.base_ball.center] < (1.0 + family.eta) * family.base_ball.radius
    e_mask = hat_mask & (mf > lam)

    centers = np.array([b.center for b in dec.balls], dtype=int)
    radii = np.array([b.radius for b in dec.balls])
    if centers.size == 0:
        return {"disjoint": True, "i": not e_mask.any(), "ii": True, "iii": True, "iv": True}
    mask = dmat[centers] < radii[:, None]
    five_mask = dmat[centers] < 5.0 * radii[:, None]
    avgs = (mask @ (np.abs(vals) * mass)) / (mask @ mass)

    disjoint = np.all(mask.sum(axis=0) <= 1)
    union_in_e = not np.any(mask.any(axis=0) & ~e_mask)
    e_in_five = not np.any(e_mask & ~five_mask.any(axis=0))
    cap = family.eta * family.base_ball.radius / (5.0 * family.sigma)
    radii_ok = bool(np.all(radii <= cap * (1 + 1e-12)))
    above = bool(np.all(avgs > lam))
    dilates_ok = True
    top = family.eta * family.base_ball.radius
    for c, r in zip(centers, radii):
        rho = 2.0 * r
        while rho <= top * (1 + 1e-12):
            m = dmat[c] < rho
            if (m @ (np.abs(vals) * mass)) / (m @ mass) > lam:
                dilates_ok = False
            rho *= 2.0
    return {
        "disjoint": bool(disjoint),
        "i": bool(union_in_e and e_in_five),
        "ii": radii_ok,
        "iii": above,
        "iv": dilates_ok,
    }
