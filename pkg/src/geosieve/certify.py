"""Quantitative checks on the deformation layer's curvature footprint.

Every check here compares two metrics on a lattice and reports residuals
against explicit bounds.  The difference identities live in the adapted
frame of a perturbation: with A the frame matrix, metric jets are pulled
back through y = A^{-1}(x - c) so the layer's wave varies along the first
adapted axis and couples the second and third.  In that frame the layer
changes the first-kind Christoffel symbols by exact combinations of the
profile derivatives, one curvature slot picks up -s/2 times the second
profile derivative, and all remaining slots stay O(eps * s).

Reports carry one row per (quantity, strength), each with its own bound,
so a failed run shows which inequality broke and by how much.  Fitted
constants are least-squares slopes of residual against eps * s; they make
the O(eps * s) claims auditable without hard-coding universal constants.

Profile oscillation makes some quantities enormous (third derivatives
scale like K^2 over the effective amplitude), so identity checks evaluate
the closed-form side at the same floating-point adapted coordinates the
metric pipeline sees; otherwise a one-ulp phase difference would swamp
the comparison.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .charts import (ChartMetric, MetricJet3, coordinate_lattice, inverse_jet,
                     metric_jet_many)
from .errors import ConfigurationError
from .grassmann import (TangentPlane, _frames_from_normals, generic_scores,
                        plane_distance, rigid_test)
from .perturb import PerturbationSpec, build_f, build_h
from .tensor import christoffel, covariant_R, curvature_point, riemann

__all__ = [
    "ResidualReport", "GrowthReport", "cq_distance",
    "check_wave_bounds", "check_field_bounds",
    "check_christoffel_diffs", "check_inverse_diffs", "check_curvature_diffs",
    "check_main_lemma", "check_lemC", "check_product_bounds",
    "report_to_json",
]


@dataclass(frozen=True)
class ResidualReport:
    """Residual check outcome: rows of (label, s, residual, bound).

    max_residual is the largest residual over all rows; fitted_constant is
    the least-squares C in residual <= C * eps * s for the report's
    headline law.  passed requires every row to satisfy its own bound in
    its own direction.
    """

    name: str
    params: dict
    grid: tuple
    s_values: tuple
    details: tuple
    max_residual: float
    fitted_constant: float
    passed: bool


@dataclass(frozen=True)
class GrowthReport:
    """Plane-score growth under a deformation family.

    minG[i] is the minimum score over the sampled planes at strength
    s_values[i]; slope_c the least-squares slope of that minimum through
    the origin; pass_Ks the headline growth criterion (score above
    0.9 * K * s at the center plane, or the off-neighborhood criterion for
    the persistence check); delta0 the margin of the undeformed scores off
    the deformed region.  applicable is False when the check's hypothesis
    failed (plane not rigid, or no positive margin), in which case passed
    is False and the summary row says why.
    """

    name: str
    params: dict
    plane: TangentPlane
    s_values: tuple
    minG: tuple
    slope_c: float
    pass_Ks: bool
    delta0: float
    applicable: bool
    details: tuple
    max_residual: float
    passed: bool


# ---------------------------------------------------------------------------
# Shared lattice and adapted-frame machinery
# ---------------------------------------------------------------------------

def _cube(half: float, counts) -> np.ndarray:
    axes = [np.linspace(-half, half, int(n)) for n in counts]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)


def _check_counts(grid) -> tuple:
    counts = (grid, grid, grid) if np.isscalar(grid) else tuple(grid)
    if len(counts) != 3 or any(int(n) < 2 for n in counts):
        raise ConfigurationError("check grid needs at least 2 samples per axis")
    return tuple(int(n) for n in counts)


def _adapted_lattice(metric: ChartMetric, spec: PerturbationSpec, counts):
    """Support-cube plus plateau-cube lattice in adapted coordinates.

    Returns chart points x, roundtripped adapted coordinates y (the exact
    floats the layer machinery evaluates the profile at), and the plateau
    mask on_u.
    """
    y0 = np.vstack([_cube(spec.outer, counts),
                    _cube(spec.rho / np.sqrt(3.0), counts)])
    a = np.asarray(spec.frame, dtype=float)
    c = np.asarray(spec.center, dtype=float)
    x = metric.wrap(c + y0 @ a.T)
    y = np.einsum("ik,...k->...i", np.linalg.inv(a),
                  metric.wrap_displacement(x - c))
    on_u = np.linalg.norm(y, axis=-1) <= spec.rho
    return x, y, on_u


def _adapted_jets(metric: ChartMetric, spec: PerturbationSpec, x: np.ndarray):
    """Metric, Christoffel, and curvature jets at x in the adapted frame."""
    a = np.asarray(spec.frame, dtype=float)
    jet = metric_jet_many(metric, x, check_positivity=False)
    yjet = MetricJet3(
        np.einsum("...ij,ia,jb->...ab", jet.g, a, a),
        np.einsum("...ijk,ia,jb,kc->...abc", jet.dg, a, a, a),
        np.einsum("...ijkl,ia,jb,kc,ld->...abcd", jet.ddg, a, a, a, a),
        np.einsum("...ijklm,ia,jb,kc,ld,me->...abcde",
                  jet.dddg, a, a, a, a, a))
    inv = inverse_jet(yjet)
    chris = christoffel(yjet, inv)
    riem, driem = riemann(chris, inv)
    covr = covariant_R(riem, driem, chris.gamma2)
    return yjet, inv, chris, riem, covr


def _one_layer_over(base: ChartMetric, deformed: ChartMetric,
                    spec: PerturbationSpec) -> None:
    if len(deformed.layers) != len(base.layers) + 1:
        raise ConfigurationError("deformed metric must add exactly one layer")
    extra = deformed.layers[-1]
    same = (extra.center == spec.center and extra.K == spec.K
            and extra.eps == spec.eps and extra.rho == spec.rho
            and extra.eta_pad == spec.eta_pad
            and np.array_equal(extra.frame, spec.frame))
    if not same:
        raise ConfigurationError("deformed metric's layer does not match spec")


def _fit_constant(residuals, scales) -> float:
    r = np.asarray(residuals, dtype=float)
    t = np.asarray(scales, dtype=float)
    den = float(t @ t)
    return float(r @ t) / den if den > 0.0 else 0.0


def _row(label: str, s: float, residual: float, bound: float,
         direction: str = "<=", **extra) -> dict:
    ok = residual <= bound if direction == "<=" else residual >= bound
    row = {"label": label, "s": float(s), "residual": float(residual),
           "bound": float(bound), "direction": direction, "pass": bool(ok)}
    row.update(extra)
    return row


def _finish(name, params, grid, s_values, rows, fitted) -> ResidualReport:
    return ResidualReport(
        name=name, params=params, grid=tuple(grid),
        s_values=tuple(float(s) for s in s_values), details=tuple(rows),
        max_residual=max((r["residual"] for r in rows), default=0.0),
        fitted_constant=float(fitted),
        passed=all(r["pass"] for r in rows))


# ---------------------------------------------------------------------------
# C^q distance
# ---------------------------------------------------------------------------

def cq_distance(g1: ChartMetric, g2: ChartMetric, q: int = 3,
                grid=(16, 16, 16)) -> float:
    """Sup over the lattice of coefficient differences and partials to order q.

    Both metrics must live on the same chart box with the same periodic
    axes; the lattice comes from coordinate_lattice on that shared domain.
    """
    if not 0 <= int(q) <= 3:
        raise ConfigurationError("cq_distance supports q in 0..3")
    if (tuple(g1.domain_lo) != tuple(g2.domain_lo)
            or tuple(g1.domain_hi) != tuple(g2.domain_hi)
            or tuple(g1.periodic) != tuple(g2.periodic)):
        raise ConfigurationError("cq_distance needs metrics on the same chart")
    pts = coordinate_lattice(g1, grid)
    ja = metric_jet_many(g1, pts, check_positivity=False)
    jb = metric_jet_many(g2, pts, check_positivity=False)
    sups = [float(np.abs(jb.g - ja.g).max()),
            float(np.abs(jb.dg - ja.dg).max()),
            float(np.abs(jb.ddg - ja.ddg).max()),
            float(np.abs(jb.dddg - ja.dddg).max())]
    return max(sups[:int(q) + 1])


# ---------------------------------------------------------------------------
# Profile bounds: the wave alone, then the windowed field
# ---------------------------------------------------------------------------

def check_wave_bounds(K: float = 100.0, eps: float = 0.01,
                      samples: int = 100000) -> ResidualReport:
    """Sampled bounds of the deformation wave h over t in [-1, 1].

    h and h' stay below eps, h'' below K/2, and wherever |h''| drops to
    sqrt(K) or less, |h'''| is at least K.  All four facts are elementary
    trigonometry, so the sampled sups double as an oracle for the jet
    implementation.
    """
    if int(samples) < 2:
        raise ConfigurationError("samples must be at least 2")
    j = build_h(K, eps).jet1(np.linspace(-1.0, 1.0, int(samples)))
    rows = [
        _row("value-sup", 0.0, float(np.abs(j.f0).max()), float(eps)),
        _row("derivative-sup", 0.0, float(np.abs(j.f1).max()), float(eps)),
        _row("second-derivative-sup", 0.0, float(np.abs(j.f2).max()),
             0.5 * float(K)),
    ]
    quiet = np.abs(j.f2) <= np.sqrt(K)
    loud = float(np.abs(j.f3[quiet]).min()) if quiet.any() else np.inf
    rows.append(_row("dichotomy", 0.0, loud, float(K), direction=">="))
    return _finish("wave-bounds",
                   {"K": float(K), "eps": float(eps),
                    "samples": int(samples)},
                   (int(samples),), (), rows, 0.0)


def check_field_bounds(K: float = 100.0, eps: float = 0.01,
                       rho: float = 0.2, eta_pad: float = 0.1,
                       grid=(16, 16, 16)) -> ResidualReport:
    """Bounds of the windowed wave f on a cube lattice in adapted coordinates.

    On the lattice over [-(rho+eta_pad), rho+eta_pad]^3: the C^1 norm stays
    below eps, mixed second derivatives below eps with the axis one below K,
    and on the plateau |y| <= rho every third derivative except the axis one
    vanishes exactly while max(|d11 f|, |d111 f|) exceeds sqrt(K).  A second
    lattice scaled to twice the support radius checks that all jets are
    exactly zero outside the support.
    """
    counts = _check_counts(grid)
    spec = PerturbationSpec(center=(0.0, 0.0, 0.0), frame=np.eye(3),
                            K=K, eps=eps, rho=rho, eta_pad=eta_pad)
    f = build_f(spec)
    outer = spec.outer
    y = _cube(outer, counts)
    j = f.jet3(y)

    hess_mixed = np.ones((3, 3), dtype=bool)
    hess_mixed[0, 0] = False
    third_mixed = np.ones((3, 3, 3), dtype=bool)
    third_mixed[0, 0, 0] = False
    rows = [
        _row("c1-sup", 0.0,
             max(float(np.abs(j.value).max()), float(np.abs(j.grad).max())),
             float(eps)),
        _row("mixed-hessian-sup", 0.0,
             float(np.abs(j.hess[:, hess_mixed]).max()), float(eps)),
        _row("axis-hessian-sup", 0.0,
             float(np.abs(j.hess[:, 0, 0]).max()), float(K)),
    ]

    plateau = np.linalg.norm(y, axis=-1) <= rho
    if not plateau.any():
        raise ConfigurationError("grid too coarse to sample the plateau")
    rows.append(_row("plateau-third-zero", 0.0,
                     float(np.abs(j.third[plateau][:, third_mixed]).max()),
                     0.0))
    winner = np.maximum(np.abs(j.hess[plateau, 0, 0]),
                        np.abs(j.third[plateau, 0, 0, 0]))
    rows.append(_row("plateau-dichotomy", 0.0, float(winner.min()),
                     float(np.sqrt(K)), direction=">="))

    y_out = _cube(2.0 * outer, counts)
    far = np.linalg.norm(y_out, axis=-1) >= outer
    jo = f.jet3(y_out[far])
    support_sup = max(float(np.abs(a).max()) for a in
                      (jo.value, jo.grad, jo.hess, jo.third))
    rows.append(_row("support-zero", 0.0, support_sup, 0.0))

    return _finish("field-bounds",
                   {"K": float(K), "eps": float(eps), "rho": float(rho),
                    "eta_pad": float(eta_pad)},
                   counts, (), rows, 0.0)


# ---------------------------------------------------------------------------
# Christoffel, inverse, and curvature difference laws
# ---------------------------------------------------------------------------

# Signed first-kind patterns whose v-derivative equals +-(s/2) d_v d_v f,
# 0-indexed (i, j, k) for Gamma_{ij,k}; v is the first adapted axis.
_SIGNED_PATTERNS = ((+1, (1, 0, 2)), (+1, (0, 2, 1)), (-1, (1, 2, 0)),
                    (+1, (0, 1, 2)), (+1, (2, 0, 1)), (-1, (2, 1, 0)))

# Curvature slot carrying the second profile derivative, 0-indexed.
_DISTINGUISHED = (1, 0, 0, 2)


def _slot_orbit(idx) -> set:
    """Images of a curvature slot under the pair symmetries."""
    i, j, k, l = idx
    out = set()
    for a, b in ((i, j), (j, i)):
        for c, d in ((k, l), (l, k)):
            out.add((a, b, c, d))
            out.add((c, d, a, b))
    return out


def check_christoffel_diffs(base: ChartMetric, deformed: ChartMetric,
                            spec: PerturbationSpec, s_values,
                            grid=(16, 16, 16)) -> ResidualReport:
    """First-kind Christoffel differences of one layer, in the adapted frame.

    Rows per strength: the sup of all components against the fitted
    O(eps * s) law, the first- and second-derivative identities on the
    plateau (absolute tolerances 1e-9 and 1e-8), and the six signed index
    patterns.  Zero strength must produce bitwise-zero differences.
    """
    counts = _check_counts(grid)
    _one_layer_over(base, deformed, spec)
    x, y, on_u = _adapted_lattice(base, spec, counts)
    fj = build_f(spec).jet3(y)
    _, _, chris0, _, _ = _adapted_jets(base, spec, x)

    sups, rows = [], []
    for s in s_values:
        met = base.with_layer(spec.with_s(float(s)))
        _, _, chris1, _, _ = _adapted_jets(met, spec, x)
        dg1 = chris1.gamma1 - chris0.gamma1
        dd1 = chris1.dgamma1 - chris0.dgamma1
        dd2 = chris1.ddgamma1 - chris0.ddgamma1
        sups.append((float(s), float(np.abs(dg1).max())))
        half = 0.5 * float(s)
        rb = np.abs(dd1[on_u][:, 1, 0, 2, 0] - half * fj.hess[on_u, 0, 0])
        rc = np.abs(dd2[on_u][:, 1, 0, 2, 0, 0]
                    - half * fj.third[on_u, 0, 0, 0])
        exact = 0.0 if s == 0.0 else None
        rows.append(_row("first-derivative", s, rb.max(),
                         1e-9 if exact is None else 0.0))
        rows.append(_row("second-derivative", s, rc.max(),
                         1e-8 if exact is None else 0.0))
        for sign, (i, j, k) in _SIGNED_PATTERNS:
            rp = np.abs(dd1[on_u][:, i, j, k, 0]
                        - sign * half * fj.hess[on_u, 0, 0])
            rows.append(_row(f"pattern {sign:+d}({i + 1},{j + 1},{k + 1})",
                             s, rp.max(), 1e-9 if exact is None else 0.0))

    fitted = _fit_constant([r for _, r in sups],
                           [spec.eps * s for s, _ in sups])
    for s, r in sups:
        bound = 0.0 if s == 0.0 else 1.05 * fitted * spec.eps * s
        rows.append(_row("sup", s, r, bound, ratio=(
            r / (spec.eps * s) if s > 0.0 else 0.0)))
    return _finish("christoffel-diffs",
                   {"spec": _spec_params(spec)}, counts, s_values, rows,
                   fitted)


def check_inverse_diffs(base: ChartMetric, deformed: ChartMetric,
                        spec: PerturbationSpec, s_values,
                        grid=(16, 16, 16)) -> ResidualReport:
    """C^1 sup of the inverse-metric difference against the O(eps * s) law."""
    counts = _check_counts(grid)
    _one_layer_over(base, deformed, spec)
    x, _, _ = _adapted_lattice(base, spec, counts)
    _, inv0, _, _, _ = _adapted_jets(base, spec, x)

    sups, rows = [], []
    for s in s_values:
        met = base.with_layer(spec.with_s(float(s)))
        _, inv1, _, _, _ = _adapted_jets(met, spec, x)
        c0 = float(np.abs(inv1.ginv - inv0.ginv).max())
        c1 = float(np.abs(inv1.dginv - inv0.dginv).max())
        sups.append((float(s), max(c0, c1), c0, c1))
    fitted = _fit_constant([r for _, r, _, _ in sups],
                           [spec.eps * s for s, _, _, _ in sups])
    for s, r, c0, c1 in sups:
        bound = 0.0 if s == 0.0 else 1.05 * fitted * spec.eps * s
        rows.append(_row("sup-c1", s, r, bound, value_sup=c0,
                         derivative_sup=c1))
    return _finish("inverse-diffs", {"spec": _spec_params(spec)}, counts,
                   s_values, rows, fitted)


def check_curvature_diffs(base: ChartMetric, deformed: ChartMetric,
                          spec: PerturbationSpec, s_values,
                          grid=(16, 16, 16)) -> ResidualReport:
    """Curvature differences of one layer: complement sup, headline law,
    and the two-branch growth dichotomy.

    The distinguished slot (second row vector, first twice, third) absorbs
    -s/2 times the second profile derivative; its symmetry orbit is
    excluded from the complement sup.  The dichotomy row checks that at
    every plateau point one of the curvature or derivative branches is at
    least 0.9 * s * sqrt(K).
    """
    counts = _check_counts(grid)
    _one_layer_over(base, deformed, spec)
    x, y, on_u = _adapted_lattice(base, spec, counts)
    fj = build_f(spec).jet3(y)
    _, _, _, riem0, covr0 = _adapted_jets(base, spec, x)

    comp = np.ones((3, 3, 3, 3), dtype=bool)
    for idx in _slot_orbit(_DISTINGUISHED):
        comp[idx] = False
    i, j, k, l = _DISTINGUISHED

    law, comp_sups, rows = [], [], []
    for s in s_values:
        met = base.with_layer(spec.with_s(float(s)))
        _, _, _, riem1, covr1 = _adapted_jets(met, spec, x)
        rdiff = riem1 - riem0
        cdiff = covr1 - covr0
        half = 0.5 * float(s)
        slot = rdiff[..., i, j, k, l]
        resid_law = float(np.abs(slot[on_u] + half * fj.hess[on_u, 0, 0]).max())
        law.append((float(s), resid_law))
        comp_sups.append((float(s), float(np.abs(rdiff[:, comp]).max())))
        both = np.maximum(np.abs(slot[on_u]),
                          np.abs(cdiff[on_u][:, i, j, k, l, 0]))
        rows.append(_row("dichotomy", s, float(both.min()),
                         0.9 * float(s) * np.sqrt(spec.K), direction=">="))

    fitted = _fit_constant([r for _, r in law],
                           [spec.eps * s for s, _ in law])
    fit_comp = _fit_constant([r for _, r in comp_sups],
                             [spec.eps * s for s, _ in comp_sups])
    for (s, r), (_, rc) in zip(law, comp_sups):
        law_bound = 0.0 if s == 0.0 else 1.05 * fitted * spec.eps * s
        comp_bound = 0.0 if s == 0.0 else 1.05 * fit_comp * spec.eps * s
        rows.append(_row("first-order-law", s, r, law_bound, ratio=(
            r / (spec.eps * s) if s > 0.0 else 0.0)))
        rows.append(_row("sup-complement", s, rc, comp_bound))
    return _finish("curvature-diffs", {"spec": _spec_params(spec)}, counts,
                   s_values, rows, fitted)


# ---------------------------------------------------------------------------
# Growth of the plane score
# ---------------------------------------------------------------------------

def _ball_planes(metric: ChartMetric, plane: TangentPlane,
                 frame: np.ndarray, rho: float, count: int, seed: int):
    """Center plane plus count planes within plane_distance rho of it.

    Base offsets are drawn in the adapted ball, normals tilted by small
    angles; offsets shrink deterministically until every sample sits
    strictly inside the ball.
    """
    rng = np.random.default_rng(seed)
    nvec = np.asarray(plane.n, dtype=float)
    dy = rng.normal(size=(count, 3))
    dy /= np.linalg.norm(dy, axis=1, keepdims=True)
    dy *= (0.7 * rho) * rng.random(count)[:, None] ** (1.0 / 3.0)
    theta = (0.7 * rho) * rng.random(count)
    taxis = rng.normal(size=(count, 3))
    taxis -= np.outer(taxis @ nvec, nvec) / float(nvec @ nvec)
    taxis /= np.linalg.norm(taxis, axis=1, keepdims=True)
    dirs = np.cos(theta)[:, None] * nvec + np.sin(theta)[:, None] * taxis
    center = np.asarray(plane.base, dtype=float)
    for _ in range(60):
        pts = metric.wrap(center + dy @ np.asarray(frame, dtype=float).T)
        dist = [plane_distance(TangentPlane(p, plane.e1, plane.e2, d), plane,
                               metric) for p, d in zip(pts, dirs)]
        if max(dist) < rho:
            break
        dy *= 0.8
    else:
        raise ConfigurationError("could not place ball samples inside rho")
    return (np.vstack([center[None], pts]),
            np.vstack([nvec[None] / np.linalg.norm(nvec), dirs]))


def _scores_at(metric: ChartMetric, pts: np.ndarray,
               dirs: np.ndarray) -> np.ndarray:
    cp = curvature_point(metric, pts)
    e1, e2, n = _frames_from_normals(cp.g, dirs)
    return generic_scores(cp, e1, e2, n)


def check_main_lemma(base: ChartMetric, P: TangentPlane,
                     spec: PerturbationSpec, s_values,
                     ball_samples: int = 120, *, seed: int = 0,
                     rigid_tol: float = 1e-8) -> GrowthReport:
    """Score growth over the ball around a rigid plane's constant extension.

    Samples planes within plane_distance spec.rho of P (offsets taken in
    the adapted frame, so samples stay on the layer's plateau), applies
    the layer at each strength, and reports the minimum score, the slope
    of that minimum, and whether the center plane's score clears
    0.9 * K * s.  A plane that is not rigid for the base makes the check
    vacuous: applicable and passed are both False.
    """
    params = {"spec": _spec_params(spec), "ball_samples": int(ball_samples),
              "seed": int(seed), "rigid_tol": float(rigid_tol)}
    cp0 = curvature_point(base, np.asarray(P.base, dtype=float)[None])
    if not rigid_test(cp0, P, tol=rigid_tol):
        row = {"label": "summary", "pass": False,
               "note": "plane is not rigid for the base metric; "
                       "growth claim is vacuous"}
        return GrowthReport(
            name="main-lemma", params=params, plane=P, s_values=tuple(),
            minG=tuple(), slope_c=0.0, pass_Ks=False, delta0=0.0,
            applicable=False, details=(row,), max_residual=0.0, passed=False)

    pts, dirs = _ball_planes(base, P, np.asarray(spec.frame), spec.rho,
                             int(ball_samples), seed)
    base_vals = _scores_at(base, pts, dirs)
    delta0 = float(base_vals.min())

    rows, mins, centers = [], [], []
    for s in s_values:
        met = base.with_layer(spec.with_s(float(s))) if s else base
        vals = _scores_at(met, pts, dirs)
        mins.append(float(vals.min()))
        centers.append(float(vals[0]))
        bound = 0.9 * spec.K * float(s)
        rows.append(_row("center-growth", s, float(vals[0]), bound,
                         direction=">=", min_over_ball=float(vals.min())))

    slope = _fit_constant(mins, [float(s) for s in s_values])
    monotone = all(b >= a for a, b in zip(mins, mins[1:]))
    pass_ks = all(r["pass"] for r in rows)
    resid = max(abs(m - slope * float(s)) for m, s in zip(mins, s_values))
    rows.insert(0, {"label": "summary", "pass": bool(pass_ks and monotone),
                    "slope_c": slope, "delta0": delta0,
                    "monotone": bool(monotone)})
    return GrowthReport(
        name="main-lemma", params=params, plane=P,
        s_values=tuple(float(s) for s in s_values), minG=tuple(mins),
        slope_c=slope, pass_Ks=bool(pass_ks), delta0=delta0, applicable=True,
        details=tuple(rows), max_residual=float(resid),
        passed=bool(pass_ks and monotone))


def check_lemC(base: ChartMetric, deformed_family, region_U,
               neighborhood_V, s_values, *, samples_per_ball: int = 60,
               seed: int = 0, tol: float = 1e-8) -> GrowthReport:
    """Off-neighborhood persistence: scores stay above min(delta/2, c*s).

    region_U and neighborhood_V are lists of (plane, radius) balls;
    deformed_family maps a strength to a metric.  delta is the minimum
    undeformed score over sampled region planes outside every
    neighborhood ball; the slope c is fitted on the in-neighborhood
    minima.  The criterion is checked for tested strengths up to the
    persistence threshold, the largest s whose off-neighborhood minimum
    still clears delta/2.  delta <= tol reports the hypothesis failure
    (applicable False) instead of raising.
    """
    params = {"samples_per_ball": int(samples_per_ball), "seed": int(seed),
              "tol": float(tol),
              "region_balls": len(region_U),
              "neighborhood_balls": len(neighborhood_V)}
    if not region_U:
        raise ConfigurationError("region_U needs at least one plane ball")

    pts_list, dirs_list = [], []
    for k, (plane, rho) in enumerate(region_U):
        frame = np.stack([plane.e1, plane.e2, plane.n], axis=-1)
        p, d = _ball_planes(base, plane, frame, float(rho),
                            int(samples_per_ball), seed + k)
        pts_list.append(p)
        dirs_list.append(d)
    pts = np.vstack(pts_list)
    dirs = np.vstack(dirs_list)

    off_v = np.ones(len(pts), dtype=bool)
    for plane, rho in neighborhood_V:
        for idx in range(len(pts)):
            stub = TangentPlane(pts[idx], plane.e1, plane.e2, dirs[idx])
            if plane_distance(stub, plane, base) < float(rho):
                off_v[idx] = False

    base_vals = _scores_at(base, pts, dirs)
    delta = float(base_vals[off_v].min()) if off_v.any() else np.inf
    applicable = delta > tol
    plane0 = region_U[0][0]

    if not applicable:
        row = {"label": "summary", "pass": False, "delta0": delta,
               "note": "no positive score margin off the neighborhood; "
                       "persistence hypothesis fails"}
        return GrowthReport(
            name="off-neighborhood-persistence", params=params, plane=plane0,
            s_values=tuple(float(s) for s in s_values), minG=tuple(),
            slope_c=0.0, pass_Ks=False, delta0=delta, applicable=False,
            details=(row,), max_residual=0.0, passed=False)

    mins, mins_off, mins_in = [], [], []
    for s in s_values:
        vals = _scores_at(deformed_family(float(s)), pts, dirs)
        mins.append(float(vals.min()))
        mins_off.append(float(vals[off_v].min()) if off_v.any() else np.inf)
        mins_in.append(float(vals[~off_v].min()) if (~off_v).any() else np.inf)

    in_ok = (~off_v).any()
    slope = _fit_constant([m for m in (mins_in if in_ok else mins)],
                          [float(s) for s in s_values]) if s_values else 0.0
    persist = [s for s, m in zip(s_values, mins_off) if m >= delta / 2.0]
    s1 = max(persist) if persist else 0.0

    rows = []
    for s, m in zip(s_values, mins):
        bound = min(delta / 2.0, 0.9 * slope * float(s))
        if float(s) <= s1:
            rows.append(_row("persistence", s, m, bound, direction=">="))
        else:
            rows.append({"label": "persistence", "s": float(s),
                         "residual": m, "bound": bound, "direction": ">=",
                         "pass": True, "note": "above persistence threshold"})
    ok = all(r["pass"] for r in rows)
    rows.insert(0, {"label": "summary", "pass": ok, "delta0": delta,
                    "slope_c": slope, "persistence_threshold": s1})
    return GrowthReport(
        name="off-neighborhood-persistence", params=params, plane=plane0,
        s_values=tuple(float(s) for s in s_values), minG=tuple(mins),
        slope_c=float(slope), pass_Ks=bool(ok), delta0=delta,
        applicable=True, details=tuple(rows),
        max_residual=max(mins) if mins else 0.0, passed=bool(ok))


# ---------------------------------------------------------------------------
# Product-difference bounds
# ---------------------------------------------------------------------------

def check_product_bounds(trials: int = 1000, seed: int = 0) -> ResidualReport:
    """Triple-product difference bounds for bounded cubic polynomials.

    Each trial draws three cubics and three cubic perturbations on [-1, 1],
    rescaled so all six factors are bounded by a prescribed C and each
    difference by D in C^1 norm; the measured grid constants then bound the
    product difference by 3 * D * C^2 in value and 9 * D * C^2 in C^1 norm.
    The first trial forces D = 0, where both sides must agree exactly.
    """
    if trials < 1:
        raise ConfigurationError("product-bound check needs at least 1 trial")
    rng = np.random.default_rng(seed)
    t = np.linspace(-1.0, 1.0, 1000)
    worst0 = worst1 = 0.0
    max_resid = 0.0
    viol0 = viol1 = exact_fail = 0
    for trial in range(int(trials)):
        c_target = rng.uniform(0.5, 2.0)
        lam = rng.uniform(0.05, 0.5)
        d_target = 0.0 if trial == 0 else rng.uniform(0.0, lam * c_target)
        vals, ders, dvals, dders = [], [], [], []
        for _ in range(3):
            p = rng.uniform(-1.0, 1.0, size=4)
            q = rng.uniform(-1.0, 1.0, size=4)
            pn = max(np.abs(np.polyval(p, t)).max(),
                     np.abs(np.polyval(np.polyder(p), t)).max())
            qn = max(np.abs(np.polyval(q, t)).max(),
                     np.abs(np.polyval(np.polyder(q), t)).max())
            ps = c_target * (1.0 - lam) / pn
            qs = min(d_target, lam * c_target) / qn
            vals.append(np.polyval(p, t) * ps)
            ders.append(np.polyval(np.polyder(p), t) * ps)
            dvals.append(np.polyval(q, t) * qs)
            dders.append(np.polyval(np.polyder(q), t) * qs)
        f, g, h = vals
        ft, gt, ht = f + dvals[0], g + dvals[1], h + dvals[2]
        fd, gd, hd = ders
        ftd, gtd, htd = fd + dders[0], gd + dders[1], hd + dders[2]
        c_meas = max(max(np.abs(v).max(), np.abs(d).max())
                     for v, d in zip((f, g, h, ft, gt, ht),
                                     (fd, gd, hd, ftd, gtd, htd)))
        d_meas = max(max(np.abs(v).max(), np.abs(d).max())
                     for v, d in zip(dvals, dders))
        # each side assembled separately so D = 0 cancels bitwise
        r0 = np.abs(f * g * h - ft * gt * ht)
        der0 = fd * g * h + f * gd * h + f * g * hd
        der1 = ftd * gt * ht + ft * gtd * ht + ft * gt * htd
        r1 = np.abs(der0 - der1)
        max_resid = max(max_resid, float(r0.max()), float(r1.max()))
        if d_meas == 0.0:
            if r0.max() != 0.0 or r1.max() != 0.0:
                exact_fail += 1
        else:
            dc2 = d_meas * c_meas ** 2
            if float(r0.max()) > 3.0 * dc2:
                viol0 += 1
            if not float(max(r0.max(), r1.max())) < 9.0 * dc2:
                viol1 += 1
            worst0 = max(worst0, float(r0.max()) / dc2)
            worst1 = max(worst1, float(max(r0.max(), r1.max())) / dc2)
    rows = (
        {"label": "value-bound", "trials": int(trials), "violations": viol0,
         "worst_ratio": worst0, "bound": 3.0, "pass": viol0 == 0},
        {"label": "c1-bound", "trials": int(trials), "violations": viol1,
         "worst_ratio": worst1, "bound": 9.0, "pass": viol1 == 0},
        {"label": "zero-difference", "trials": 1, "violations": exact_fail,
         "worst_ratio": 0.0, "bound": 0.0, "pass": exact_fail == 0},
    )
    return ResidualReport(
        name="product-bounds", params={"trials": int(trials),
                                       "seed": int(seed)},
        grid=(len(t),), s_values=tuple(), details=rows,
        max_residual=float(max_resid),
        fitted_constant=float(max(worst0, worst1)),
        passed=all(r["pass"] for r in rows))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _spec_params(spec: PerturbationSpec) -> dict:
    return {
        "center": [float(v) for v in spec.center],
        "frame": [float(v) for v in np.asarray(spec.frame).T.reshape(-1)],
        "K": float(spec.K), "eps": float(spec.eps), "rho": float(spec.rho),
        "eta_pad": float(spec.eta_pad), "s": float(spec.s),
    }


def _plane_doc(plane: TangentPlane) -> dict:
    return {"point": [float(v) for v in plane.base],
            "e1": [float(v) for v in plane.e1],
            "e2": [float(v) for v in plane.e2],
            "n": [float(v) for v in plane.n]}


def report_to_json(report) -> str:
    """Fixed-schema JSON for either report type.

    Keys: name, params, grid, s_values, rows, max_residual,
    fitted_constant, pass.  Growth reports put the plane and growth
    summary into params and report slope_c as the fitted constant.
    """
    if isinstance(report, ResidualReport):
        doc = {"name": report.name, "params": report.params,
               "grid": list(report.grid), "s_values": list(report.s_values),
               "rows": list(report.details),
               "max_residual": report.max_residual,
               "fitted_constant": report.fitted_constant,
               "pass": report.passed}
    else:
        params = dict(report.params)
        params["plane"] = _plane_doc(report.plane)
        params["pass_Ks"] = report.pass_Ks
        params["delta0"] = report.delta0
        params["applicable"] = report.applicable
        params["minG"] = list(report.minG)
        doc = {"name": report.name, "params": params,
               "grid": [len(report.minG)], "s_values": list(report.s_values),
               "rows": list(report.details),
               "max_residual": report.max_residual,
               "fitted_constant": report.slope_c,
               "pass": report.passed}
    return json.dumps(doc, indent=2)
