"""Tangent planes, the genericity score, and rigid-plane scans.

A plane at p is an oriented g(p)-orthonormal frame (e1, e2, n) with
det[e1 e2 n] > 0.  Writing v(a) = cos(a) e1 + sin(a) e2 and w(b) likewise,
the score maximises the two branch profiles

  F_R(a, b) = |R(w, v, v, n)|        F_D(a, b) = |(grad_v R)(w, v, v, n)|

over both angles.  For fixed a each profile is linear in w, so the maximum
over b is the Euclidean norm of a two-vector of coefficients, and what is
left is a trigonometric polynomial in a of degree 2 (curvature branch) or 3
(derivative branch).  Local maxima are bracketed on a uniform grid over
[0, pi) and polished by clamped Newton steps until they stop moving, which
makes the reported score insensitive to the grid resolution.  A plane is
rigid when every polynomial coefficient of both branches vanishes.

Scans enumerate a base lattice times a Fibonacci-sphere fiber of normal
directions, then refine the lowest-scoring planes by coordinate descent on
(point, normal).  All heavy evaluation goes through deterministic chunking,
so reports are independent of the worker count.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .charts import ChartMetric, lattice_axes, metric_jet, metric_jet_many
from .errors import ConfigurationError
from .parallel import chunked_map
from .tensor import CurvaturePoint, curvature_point

__all__ = [
    "TangentPlane", "GenericScore", "RigidReport",
    "orthonormal_plane", "plane_from_normal", "fibonacci_directions",
    "jacobi_apply", "generic_score", "generic_scores", "rigid_test",
    "rigid_mask", "scan_rigid", "plane_distance", "sample_planes",
    "rigid_report_to_json", "rigid_report_to_csv",
]

BRANCH_CURVATURE = "curvature"
BRANCH_DERIVATIVE = "derivative"


@dataclass(frozen=True)
class TangentPlane:
    """Oriented orthonormal plane frame at a chart point.

    e1, e2 span the plane, n is the unit normal; all three are unit length
    and mutually orthogonal for g(base), with det[e1 e2 n] > 0.
    """

    base: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    n: np.ndarray


@dataclass(frozen=True)
class GenericScore:
    """Score of one plane: the larger branch maximum and where it occurs.

    alpha_star and beta_star live in [0, pi); branch names the winning
    profile, with ties going to the curvature branch.  Both branch maxima
    are kept so callers can see how the winner was decided.
    """

    value: float
    alpha_star: float
    beta_star: float
    branch: str
    value_curvature: float
    value_derivative: float


@dataclass(frozen=True)
class RigidReport:
    """Scan outcome: every plane scoring at or below the threshold.

    planes holds (TangentPlane, GenericScore) pairs sorted by score and
    then by lexicographic position in the scan lattice; min_overall is the
    minimum over the full scan including refined candidates.
    """

    planes: list
    grid: dict
    threshold: float
    min_overall: float


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------

def _gdot(g: np.ndarray, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...i,...j->...", g, u, w)


def _gunit(g: np.ndarray, u: np.ndarray) -> np.ndarray:
    return u / np.sqrt(_gdot(g, u, u))[..., None]


def _complete_normal(g: np.ndarray, e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    """Unit normal completing (e1, e2) to a right-handed g-orthonormal frame.

    cross(g e1, g e2) is g-orthogonal to both spanning vectors and lands on
    the side making det[e1 e2 n] positive, so no sign fix is needed.
    """
    raw = np.cross(np.einsum("...ij,...j->...i", g, e1),
                   np.einsum("...ij,...j->...i", g, e2))
    return _gunit(g, raw)


def orthonormal_plane(metric: ChartMetric, p, u, w) -> TangentPlane:
    """Gram-Schmidt (u, w) at p into an oriented orthonormal plane frame."""
    p = np.asarray(p, dtype=float)
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    g = metric_jet(metric, p).g
    nu = _gdot(g, u, u)
    if not nu > 0:
        raise ConfigurationError("plane span u has zero length")
    e1 = u / np.sqrt(nu)
    w2 = w - _gdot(g, e1, w) * e1
    nw = _gdot(g, w2, w2)
    if not nw > 1e-26 * max(1.0, float(_gdot(g, w, w))):
        raise ConfigurationError("plane spans u, w are collinear")
    e2 = w2 / np.sqrt(nw)
    base = metric.wrap(p)
    return TangentPlane(base, e1, e2, _complete_normal(g, e1, e2))


def _frames_from_normals(g: np.ndarray, dirs: np.ndarray):
    """Deterministic frames (e1, e2, n) with n along dirs, batched.

    The in-plane seed axis is the coordinate axis least aligned with the
    direction, so equal inputs always produce equal frames.
    """
    n = _gunit(g, dirs)
    k = np.argmin(np.abs(dirs), axis=-1)
    axis = np.zeros(np.broadcast_shapes(n.shape, g.shape[:-1]), dtype=float)
    np.put_along_axis(axis, k[..., None], 1.0, axis=-1)
    u = axis - _gdot(g, axis, n)[..., None] * n
    e1 = _gunit(g, u)
    m = np.cross(np.einsum("...ij,...j->...i", g, e1),
                 np.einsum("...ij,...j->...i", g, n))
    # flip m so det[e1, e2, n] > 0
    frame = np.stack([e1, m, n], axis=-2)
    sign = np.where(np.linalg.det(frame) >= 0.0, 1.0, -1.0)
    e2 = _gunit(g, sign[..., None] * m)
    return e1, e2, n


def plane_from_normal(metric: ChartMetric, p, direction) -> TangentPlane:
    """The plane g-orthogonal to direction at p, with a deterministic basis."""
    p = np.asarray(p, dtype=float)
    d = np.asarray(direction, dtype=float)
    if not np.dot(d, d) > 0:
        raise ConfigurationError("normal direction has zero length")
    g = metric_jet(metric, p).g
    e1, e2, n = _frames_from_normals(g, d)
    return TangentPlane(metric.wrap(p), e1, e2, n)


def fibonacci_directions(count: int) -> np.ndarray:
    """count normal directions on the unit sphere, antipodal pairs merged.

    Golden-spiral samples are reflected into the z >= 0 hemisphere (ties
    broken toward positive x, then y) and exact duplicates dropped, so each
    direction names one plane.
    """
    if count < 1:
        raise ConfigurationError("fiber grid must be at least 1")
    f = np.arange(count, dtype=float)
    z = 1.0 - (2.0 * f + 1.0) / count
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    az = 2.0 * np.pi * f / ((1.0 + np.sqrt(5.0)) / 2.0)
    d = np.stack([r * np.cos(az), r * np.sin(az), z], axis=-1)
    flip = (d[:, 2] < 0) | ((d[:, 2] == 0) & (d[:, 0] < 0)) \
        | ((d[:, 2] == 0) & (d[:, 0] == 0) & (d[:, 1] < 0))
    d[flip] *= -1.0
    keep = np.ones(count, dtype=bool)
    for i in range(count):
        if keep[i]:
            dup = np.abs(d[i + 1:] @ d[i]) >= 1.0 - 1e-12
            keep[i + 1:][dup] = False
    return d[keep]


# ---------------------------------------------------------------------------
# Branch profiles
# ---------------------------------------------------------------------------

def _branch_matrices(riem: np.ndarray, cov_riem: np.ndarray,
                     e1: np.ndarray, e2: np.ndarray, n: np.ndarray):
    """Coefficient matrices Z so each branch is w . (Z u(a)).

    With M[b,a,c] = R(e_b, e_a, e_c, n) the curvature branch at angle a is
    w_b M[b,a,c] v_a v_c, a quadratic in (cos a, sin a) with coefficient
    rows zr[b] = (M[b00], M[b01]+M[b10], M[b11]); the derivative branch
    adds the grad slot and groups into cubics the same way.
    """
    P = np.stack([e1, e2], axis=-1)
    M = np.einsum("...ijkl,...ib,...ja,...kc,...l->...bac",
                  riem, P, P, P, n, optimize=True)
    zr = np.stack([M[..., 0, 0], M[..., 0, 1] + M[..., 1, 0], M[..., 1, 1]],
                  axis=-1)
    N = np.einsum("...ijklp,...ib,...ja,...kc,...l,...pm->...mbac",
                  cov_riem, P, P, P, n, P, optimize=True)
    zd = np.stack([
        N[..., 0, :, 0, 0],
        N[..., 1, :, 0, 0] + N[..., 0, :, 1, 0] + N[..., 0, :, 0, 1],
        N[..., 1, :, 1, 0] + N[..., 1, :, 0, 1] + N[..., 0, :, 1, 1],
        N[..., 1, :, 1, 1],
    ], axis=-1)
    return zr, zd


def _basis(alpha: np.ndarray, degree: int):
    """Monomial basis (cos^k a sin^(d-k) a) and its first two derivatives.

    Expressed through exact Fourier identities so the derivatives are free
    of cancellation: degree 2 uses frequency 2a, degree 3 uses a and 3a.
    """
    if degree == 2:
        c2, s2 = np.cos(2 * alpha), np.sin(2 * alpha)
        u = np.stack([(1 + c2) / 2, s2 / 2, (1 - c2) / 2], axis=-1)
        du = np.stack([-s2, c2, s2], axis=-1)
        ddu = np.stack([-2 * c2, -2 * s2, 2 * c2], axis=-1)
        return u, du, ddu
    c1, s1 = np.cos(alpha), np.sin(alpha)
    c3, s3 = np.cos(3 * alpha), np.sin(3 * alpha)
    u = np.stack([(3 * c1 + c3) / 4, (s1 + s3) / 4,
                  (c1 - c3) / 4, (3 * s1 - s3) / 4], axis=-1)
    du = np.stack([(-3 * s1 - 3 * s3) / 4, (c1 + 3 * c3) / 4,
                   (-s1 + 3 * s3) / 4, (3 * c1 - 3 * c3) / 4], axis=-1)
    ddu = np.stack([(-3 * c1 - 9 * c3) / 4, (-s1 - 9 * s3) / 4,
                    (-c1 + 9 * c3) / 4, (-3 * s1 + 9 * s3) / 4], axis=-1)
    return u, du, ddu


def _max_profile(z: np.ndarray, degree: int, n_alpha: int):
    """Maximise |z u(a)| over a in [0, pi) for a batch of coefficient rows.

    Grid local maxima of the squared profile seed clamped Newton iterations
    on each candidate; ties resolve to the smallest grid index so the
    result is deterministic.  Returns (value, alpha) per batch entry.
    """
    batch = z.shape[:-2]
    rows = int(np.prod(batch, dtype=int)) if batch else 1
    zf = z.reshape(rows, 2, z.shape[-1])
    grid = np.arange(n_alpha) * (np.pi / n_alpha)
    u, _, _ = _basis(grid, degree)
    c = np.einsum("rbq,nq->rnb", zf, u)
    phi = np.sum(c * c, axis=-1)
    mask = (phi > np.roll(phi, 1, axis=1)) & (phi >= np.roll(phi, -1, axis=1))
    mask[~mask.any(axis=1), 0] = True
    ridx, aidx = np.nonzero(mask)
    alpha = grid[aidx]
    zi = zf[ridx]
    clamp = np.pi / n_alpha
    for _ in range(12):
        ub, dub, ddub = _basis(alpha, degree)
        cb = np.einsum("kbq,kq->kb", zi, ub)
        dcb = np.einsum("kbq,kq->kb", zi, dub)
        ddcb = np.einsum("kbq,kq->kb", zi, ddub)
        f1 = 2 * np.sum(cb * dcb, axis=-1)
        f2 = 2 * np.sum(dcb * dcb + cb * ddcb, axis=-1)
        denom = np.where(f2 < 0, f2, -1.0)
        step = np.where(f2 < 0, -f1 / denom, 0.0)
        np.clip(step, -clamp, clamp, out=step)
        alpha = alpha + step
        if np.max(np.abs(step), initial=0.0) < 1e-13:
            break
    ub, _, _ = _basis(alpha, degree)
    cb = np.einsum("kbq,kq->kb", zi, ub)
    vals = np.sqrt(np.sum(cb * cb, axis=-1))
    order = np.lexsort((aidx, -vals, ridx))
    first = np.unique(ridx[order], return_index=True)[1]
    sel = order[first]
    return vals[sel].reshape(batch), np.mod(alpha[sel], np.pi).reshape(batch)


def _beta_star(z: np.ndarray, alpha: np.ndarray, degree: int) -> np.ndarray:
    u, _, _ = _basis(alpha, degree)
    c = np.einsum("...bq,...q->...b", z, u)
    return np.mod(np.arctan2(c[..., 1], c[..., 0]), np.pi)


def _score_arrays(riem, cov_riem, e1, e2, n, n_alpha: int) -> dict:
    """Batched branch maxima and winning angles for plane frames."""
    zr, zd = _branch_matrices(riem, cov_riem, e1, e2, n)
    vr, ar = _max_profile(zr, 2, n_alpha)
    vd, ad = _max_profile(zd, 3, n_alpha)
    deriv = vd > vr
    alpha = np.where(deriv, ad, ar)
    beta = np.where(deriv, _beta_star(zd, ad, 3), _beta_star(zr, ar, 2))
    return {
        "value": np.maximum(vr, vd), "alpha": alpha, "beta": beta,
        "deriv": deriv, "value_r": vr, "value_d": vd, "zr": zr, "zd": zd,
    }


def _single(cp: CurvaturePoint, plane: TangentPlane, n_alpha: int) -> dict:
    riem = cp.riemann.reshape((-1,) + cp.riemann.shape[-4:])[0]
    covr = cp.cov_riemann.reshape((-1,) + cp.cov_riemann.shape[-5:])[0]
    return _score_arrays(riem, covr, plane.e1, plane.e2, plane.n, n_alpha)


def _score_obj(s: dict) -> GenericScore:
    deriv = bool(s["deriv"])
    return GenericScore(
        value=float(s["value"]), alpha_star=float(s["alpha"]),
        beta_star=float(s["beta"]),
        branch=BRANCH_DERIVATIVE if deriv else BRANCH_CURVATURE,
        value_curvature=float(s["value_r"]), value_derivative=float(s["value_d"]),
    )


def generic_score(cp: CurvaturePoint, plane: TangentPlane,
                  n_alpha: int = 256) -> GenericScore:
    """Score one plane against curvature data at its base point.

    cp must hold exactly one point (the plane's base).  The score is the
    larger of the two branch maxima; the reported angles reproduce it when
    the winning profile is evaluated there.
    """
    if int(np.prod(cp.g.shape[:-2], dtype=int)) != 1:
        raise ConfigurationError("generic_score expects curvature at a single point")
    return _score_obj(_single(cp, plane, n_alpha))


def generic_scores(cp: CurvaturePoint, e1: np.ndarray, e2: np.ndarray,
                   n: np.ndarray, n_alpha: int = 256) -> np.ndarray:
    """Scores for a batch of frames; cp batch shape must broadcast to e1's."""
    riem, covr = cp.riemann, cp.cov_riemann
    extra = e1.ndim - 1 - (riem.ndim - 4)
    for _ in range(max(extra, 0)):
        riem = riem[..., None, :, :, :, :]
        covr = covr[..., None, :, :, :, :, :]
    return _score_arrays(riem, covr, e1, e2, n, n_alpha)["value"]


def rigid_test(cp: CurvaturePoint, plane: TangentPlane, tol: float = 1e-8) -> bool:
    """True iff every branch coefficient of the plane vanishes to tol."""
    if int(np.prod(cp.g.shape[:-2], dtype=int)) != 1:
        raise ConfigurationError("rigid_test expects curvature at a single point")
    riem = cp.riemann.reshape((-1,) + cp.riemann.shape[-4:])[0]
    covr = cp.cov_riemann.reshape((-1,) + cp.cov_riemann.shape[-5:])[0]
    zr, zd = _branch_matrices(riem, covr, plane.e1, plane.e2, plane.n)
    return bool(np.max(np.abs(zr)) <= tol and np.max(np.abs(zd)) <= tol)


def rigid_mask(cp: CurvaturePoint, e1: np.ndarray, e2: np.ndarray,
               n: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Batched rigid_test: boolean per frame, same broadcasting as scores."""
    riem, covr = cp.riemann, cp.cov_riemann
    extra = e1.ndim - 1 - (riem.ndim - 4)
    for _ in range(max(extra, 0)):
        riem = riem[..., None, :, :, :, :]
        covr = covr[..., None, :, :, :, :, :]
    zr, zd = _branch_matrices(riem, covr, e1, e2, n)
    return (np.max(np.abs(zr), axis=(-2, -1)) <= tol) \
        & (np.max(np.abs(zd), axis=(-2, -1)) <= tol)


def jacobi_apply(cp: CurvaturePoint, v, w) -> np.ndarray:
    """The vector R(w, v)v, index raised with the inverse metric.

    For constant curvature kappa this is kappa (g(v,v) w - g(w,v) v), and it
    vanishes identically when v = w.
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    return np.einsum("...ijkl,...i,...j,...k,...lt->...t",
                     cp.riemann, w, v, v, cp.ginv, optimize=True)


# ---------------------------------------------------------------------------
# Plane distance and sampling
# ---------------------------------------------------------------------------

def plane_distance(p1: TangentPlane, p2: TangentPlane,
                   metric: ChartMetric | None = None) -> float:
    """sqrt(base distance^2 + normal angle^2); angle in [0, pi/2].

    Base distance is chart-Euclidean; passing the metric makes it respect
    periodic axes.  Normals compare by principal angle, so orientation and
    basis choice do not matter.
    """
    delta = np.asarray(p1.base, dtype=float) - np.asarray(p2.base, dtype=float)
    if metric is not None:
        delta = metric.wrap_displacement(delta)
    n1, n2 = np.asarray(p1.n, dtype=float), np.asarray(p2.n, dtype=float)
    cosang = abs(float(np.dot(n1, n2))) / float(
        np.linalg.norm(n1) * np.linalg.norm(n2))
    ang = float(np.arccos(min(1.0, cosang)))
    return float(np.sqrt(float(delta @ delta) + ang * ang))


def sample_planes(metric: ChartMetric, count: int, seed: int):
    """count random planes: uniform base points, isotropic normals.

    Returns (points, e1, e2, n) arrays; frames are deterministic functions
    of the draws, so a fixed seed fixes the planes.
    """
    rng = np.random.default_rng(seed)
    lo = np.asarray(metric.domain_lo)
    hi = np.asarray(metric.domain_hi)
    pts = lo + (hi - lo) * rng.random((count, 3))
    dirs = rng.normal(size=(count, 3))
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    g = metric_jet_many(metric, pts).g
    e1, e2, n = _frames_from_normals(g, dirs)
    return pts, e1, e2, n


# ---------------------------------------------------------------------------
# Scanning
# ---------------------------------------------------------------------------

def _base_lattice(metric: ChartMetric, base_grid) -> list:
    return lattice_axes(metric, base_grid)


def _planes_scores(metric: ChartMetric, pts: np.ndarray, dirs: np.ndarray,
                   n_alpha: int) -> dict:
    """Scores (and frames) for each point in pts crossed with dirs."""
    cp = curvature_point(metric, pts)
    d = np.broadcast_to(dirs, (len(pts),) + dirs.shape[-2:])
    e1, e2, n = _frames_from_normals(cp.g[:, None], d)
    out = _score_arrays(cp.riemann[:, None], cp.cov_riemann[:, None],
                        e1, e2, n, n_alpha)
    out.update({"e1": e1, "e2": e2, "n": n})
    return out


_SCAN_FIELDS = ("value", "alpha", "beta", "deriv", "value_r", "value_d",
                "e1", "e2", "n")


def _tangent_pair(d: np.ndarray):
    k = int(np.argmin(np.abs(d)))
    axis = np.zeros(3)
    axis[k] = 1.0
    t1 = axis - np.dot(axis, d) * d
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(d, t1)
    return t1, t2


def _refine_candidate(metric: ChartMetric, p0, d0, steps_p, theta0,
                      steps: int, n_alpha: int):
    """Coordinate descent on (point, normal) from one scan candidate.

    Eleven proposals per step: stay, six axis nudges, four normal tilts.
    Ties prefer staying put; a step with no improvement halves both the
    spatial and the angular stride.
    """
    lo = np.asarray(metric.domain_lo)
    hi = np.asarray(metric.domain_hi)
    per = np.asarray(metric.periodic)
    p = np.array(p0, dtype=float)
    d = np.array(d0, dtype=float)
    hp = np.array(steps_p, dtype=float)
    th = float(theta0)
    for _ in range(steps):
        pts = np.repeat(p[None, :], 11, axis=0)
        dirs = np.repeat(d[None, :], 11, axis=0)
        for ax in range(3):
            pts[1 + 2 * ax, ax] += hp[ax]
            pts[2 + 2 * ax, ax] -= hp[ax]
        t1, t2 = _tangent_pair(d)
        dirs[7] = np.cos(th) * d + np.sin(th) * t1
        dirs[8] = np.cos(th) * d - np.sin(th) * t1
        dirs[9] = np.cos(th) * d + np.sin(th) * t2
        dirs[10] = np.cos(th) * d - np.sin(th) * t2
        free = ~per
        pts[:, free] = np.clip(pts[:, free], lo[free], hi[free])
        s = _planes_scores(metric, pts, dirs[:, None, :], n_alpha)
        best = int(np.argmin(s["value"][:, 0]))
        if best == 0:
            hp /= 2.0
            th /= 2.0
        else:
            p, d = pts[best], dirs[best] / np.linalg.norm(dirs[best])
    final = _planes_scores(metric, p[None, :], d[None, None, :], n_alpha)
    return p, d, {k: final[k][0, 0] for k in _SCAN_FIELDS}


def scan_rigid(metric: ChartMetric, base_grid=(8, 8, 8), fiber_grid: int = 32,
               threshold: float = 1e-6, *, n_alpha: int = 256,
               refine_steps: int = 20, refine_candidates: int = 8,
               chunk_size: int = 512) -> RigidReport:
    """Deterministic rigid-plane scan over a base lattice times normal fiber.

    Every lattice plane scoring at or below threshold is listed; the
    refine_candidates lowest scores additionally seed coordinate-descent
    refinement, and refined planes that improve on their seed join the
    listing.  min_overall covers lattice and refined planes alike.
    """
    base_grid = tuple(int(b) for b in base_grid)
    if len(base_grid) != 3 or min(base_grid) < 2 or fiber_grid < 2:
        raise ConfigurationError("scan grids need at least 2 samples per axis")
    if not threshold >= 0:
        raise ConfigurationError("threshold must be nonnegative")
    axes = _base_lattice(metric, base_grid)
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    dirs = fibonacci_directions(int(fiber_grid))
    nd = len(dirs)
    parts = chunked_map(
        lambda chunk: _planes_scores(metric, chunk, dirs, n_alpha),
        pts, chunk_size=chunk_size)
    data = {k: np.concatenate([p[k] for p in parts], axis=0)
            for k in _SCAN_FIELDS}
    value = data["value"]
    flat = value.ravel()
    min_overall = float(flat.min())

    spacing = np.array([(metric.domain_hi[a] - metric.domain_lo[a]) / base_grid[a]
                        for a in range(3)])
    theta0 = float(np.sqrt(2.0 * np.pi / nd))
    order = np.argsort(flat, kind="stable")
    entries = []
    for flat_idx in order[:min(refine_candidates, flat.size)]:
        ip, idir = divmod(int(flat_idx), nd)
        p, _, s = _refine_candidate(metric, pts[ip], dirs[idir], spacing / 2,
                                    theta0, refine_steps, n_alpha)
        ref_val = float(s["value"])
        min_overall = min(min_overall, ref_val)
        if ref_val < flat[flat_idx] and ref_val <= threshold:
            plane = TangentPlane(metric.wrap(p), s["e1"], s["e2"], s["n"])
            entries.append((ref_val, int(flat_idx), plane, _score_obj(s)))

    for flat_idx in np.nonzero(flat <= threshold)[0]:
        ip, idir = divmod(int(flat_idx), nd)
        plane = TangentPlane(pts[ip], data["e1"][ip, idir],
                             data["e2"][ip, idir], data["n"][ip, idir])
        s = {k: data[k][ip, idir] for k in _SCAN_FIELDS}
        entries.append((float(flat[flat_idx]), int(flat_idx), plane,
                        _score_obj(s)))

    entries.sort(key=lambda e: (e[0], e[1]))
    return RigidReport(
        planes=[(e[2], e[3]) for e in entries],
        grid={"base": list(base_grid), "fiber": int(fiber_grid)},
        threshold=float(threshold), min_overall=min_overall)


# ---------------------------------------------------------------------------
# Report serialization
# ---------------------------------------------------------------------------

def rigid_report_to_json(report: RigidReport) -> str:
    doc = {
        "grid": report.grid,
        "threshold": report.threshold,
        "min_overall": report.min_overall,
        "planes": [{
            "point": [float(x) for x in plane.base],
            "e1": [float(x) for x in plane.e1],
            "e2": [float(x) for x in plane.e2],
            "n": [float(x) for x in plane.n],
            "score": score.value,
            "branch": score.branch,
        } for plane, score in report.planes],
    }
    return json.dumps(doc, indent=2)


def rigid_report_to_csv(report: RigidReport) -> str:
    cols = ["point_x", "point_y", "point_z", "e1_x", "e1_y", "e1_z",
            "e2_x", "e2_y", "e2_z", "n_x", "n_y", "n_z", "score", "branch"]
    lines = [",".join(cols)]
    for plane, score in report.planes:
        nums = [*plane.base, *plane.e1, *plane.e2, *plane.n, score.value]
        lines.append(",".join([format(float(x), ".17g") for x in nums]
                              + [score.branch]))
    return "\n".join(lines) + "\n"
