"""Local metric deformations: a bump-windowed sine wave on an adapted frame.

A deformation layer is attached to a tangent plane.  In affine coordinates
y = A^{-1}(x - center), where the columns of A are the plane frame (v, T, n),
the layer adds

    (Delta g)(y) = s * f(y) * (dy2 (x) dy3 + dy3 (x) dy2),

with f = chi * (h o pi1): a one-dimensional wave h(y1) windowed by a radial
cutoff chi.  The wave oscillates fast enough that its second and third
derivatives cannot both be small, which is what later drives the curvature
of the deformed metric away from degeneracy; the cutoff confines everything
to the ball |y| <= rho + eta_pad, so the metric is untouched elsewhere, to
every derivative order, exactly.

The wave amplitude is not the nominal `eps`: the cutoff multiplies the wave,
so its measured C^3 size m3 feeds back into the amplitude as eps/(3*m3) to
keep the windowed product inside the same C^1/C^2 budget.  `build_f` applies
that replacement; `build_h` is the raw wave.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import jets as J
from .charts import ChartMetric, MetricJet3, metric_jet, metric_jet_many
from .errors import ConfigurationError, DeformationTooLargeError, DegenerateMetricError

__all__ = [
    "K0",
    "PerturbationSpec",
    "DeformedMetric",
    "SineProfile",
    "RadialBump",
    "LocalizedSine",
    "AdaptedChart",
    "build_h",
    "build_bump",
    "build_f",
    "adapted_chart",
    "layer_metric_jets",
    "deform",
]

# Reference frequency scale: above this the growth dichotomy below holds for
# any admissible eps with a wide margin.  Smaller K is accepted whenever the
# dichotomy inequality itself holds for the given (K, eps).
K0 = 64.0


def _require_wave_params(K: float, eps: float) -> None:
    """Validate (K, eps) for the sine wave, including the growth dichotomy.

    The wave h below satisfies |h''| <= K/2 and |h'''| = (K^2/(2 eps))|cos|.
    Whenever |h''| <= sqrt(K) the phase pins |cos| >= sqrt(1 - 4/K), so
    |h'''| >= K as soon as K^2 - 4K > 4 eps^2.  That inequality is the usable
    form of "K sufficiently large" and is enforced here per parameter pair.
    """
    if not K > 1.0:
        raise ConfigurationError(f"wave scale K must exceed 1, got {K}")
    if not 0.0 < eps < 1.0:
        raise ConfigurationError(f"wave amplitude eps must lie in (0, 1), got {eps}")
    if not K * K - 4.0 * K > 4.0 * eps * eps:
        raise ConfigurationError(
            f"(K, eps)=({K}, {eps}) too weak: need K^2 - 4K > 4 eps^2 "
            "so that |h''| <= sqrt(K) forces |h'''| >= K"
        )


@dataclass(frozen=True)
class SineProfile:
    """The wave h(t) = (K eta^2 / 2) sin(t / eta) with eta = eps/K.

    Closed-form jets to order 3.  The derivative bounds trade off through
    eta: |h| <= eps^2/(2K), |h'| <= eps/2, |h''| <= K/2, |h'''| <= K^2/(2 eps),
    so pushing |h| and |h'| below eps forces the third derivative large.
    """

    K: float
    eps: float

    @property
    def eta(self) -> float:
        return self.eps / self.K

    @property
    def amplitude(self) -> float:
        return 0.5 * self.K * self.eta * self.eta

    def __call__(self, t) -> np.ndarray:
        return self.amplitude * np.sin(np.asarray(t, dtype=float) / self.eta)

    def jet1(self, t) -> J.Jet1:
        t = np.asarray(t, dtype=float)
        a, eta = self.amplitude, self.eta
        u = t / eta
        sin, cos = np.sin(u), np.cos(u)
        return J.Jet1(a * sin, (a / eta) * cos,
                      -(a / eta**2) * sin, -(a / eta**3) * cos)


def build_h(K: float, eps: float) -> SineProfile:
    """The deformation wave; rejects parameter pairs without the dichotomy."""
    _require_wave_params(float(K), float(eps))
    return SineProfile(float(K), float(eps))


@dataclass(frozen=True)
class RadialBump:
    """Radial cutoff chi(y) = sigma((rho + eta_pad - |y|) / eta_pad).

    Identically 1 on |y| <= rho, identically 0 on |y| >= rho + eta_pad, and
    C^infinity in between (sigma is the standard smooth step).  m3 is the
    measured sup of all partials to order 3 along a radius, floored at 1;
    it is what the windowed-wave amplitude gets divided by.
    """

    rho: float
    eta_pad: float
    m3: float

    @property
    def outer(self) -> float:
        return self.rho + self.eta_pad

    def __call__(self, y) -> np.ndarray:
        r = np.linalg.norm(np.asarray(y, dtype=float), axis=-1)
        return J.smoothstep_jet1((self.outer - r) / self.eta_pad).f0

    def jet3(self, y) -> J.Jet3:
        y = np.asarray(y, dtype=float)
        batch = y.shape[:-1]
        r = np.linalg.norm(y, axis=-1)
        shell = (r > self.rho) & (r < self.outer)

        # Plateau and exterior are exactly constant; jets are computed on the
        # shell only, at a safe stand-in point elsewhere to avoid r = 0.
        safe = np.zeros(batch + (3,))
        safe[..., 0] = self.rho + 0.5 * self.eta_pad
        ys = np.where(shell[..., None], y, safe)

        x1, x2, x3 = J.coordinates(ys)
        rj = (x1 * x1 + x2 * x2 + x3 * x3).sqrt()
        prof = J.smoothstep_jet1((self.outer - rj.value) / self.eta_pad)
        k = -1.0 / self.eta_pad
        chi = rj.compose(prof.f0, k * prof.f1, k * k * prof.f2, k**3 * prof.f3)

        value = np.where(shell, chi.value, np.where(r <= self.rho, 1.0, 0.0))
        grad = np.where(shell[..., None], chi.grad, 0.0)
        hess = np.where(shell[..., None, None], chi.hess, 0.0)
        third = np.where(shell[..., None, None, None], chi.third, 0.0)
        return J.Jet3(value, grad, hess, third)


def build_bump(rho: float, eta_pad: float) -> RadialBump:
    """Radial cutoff with its C^3 size measured on a 200-point radial grid."""
    rho, eta_pad = float(rho), float(eta_pad)
    if rho <= 0.0 or eta_pad <= 0.0:
        raise ConfigurationError(
            f"bump radii must be positive, got rho={rho}, eta_pad={eta_pad}")
    bump = RadialBump(rho, eta_pad, 1.0)
    pts = np.zeros((200, 3))
    pts[:, 0] = np.linspace(0.0, rho + eta_pad, 200)
    jet = bump.jet3(pts)
    m3 = max(1.0, np.abs(jet.value).max(), np.abs(jet.grad).max(),
             np.abs(jet.hess).max(), np.abs(jet.third).max())
    return replace(bump, m3=float(m3))


@dataclass(frozen=True)
class LocalizedSine:
    """The windowed wave f(y) = chi(y) * h(y1) used by a deformation layer.

    The wave is built at the reduced amplitude eps_eff = eps/(3 m3) so the
    product stays within the C^1 budget eps despite the cutoff's derivatives.
    On the plateau of chi the jets of f are exactly those of h(y1); outside
    the support they are exactly zero.
    """

    wave: SineProfile
    bump: RadialBump
    eps_eff: float

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return self.bump(y) * self.wave(y[..., 0])

    def jet3(self, y) -> J.Jet3:
        y = np.asarray(y, dtype=float)
        batch = y.shape[:-1]
        chi = self.bump.jet3(y)
        h = self.wave.jet1(y[..., 0])
        grad = np.zeros(batch + (3,))
        grad[..., 0] = h.f1
        hess = np.zeros(batch + (3, 3))
        hess[..., 0, 0] = h.f2
        third = np.zeros(batch + (3, 3, 3))
        third[..., 0, 0, 0] = h.f3
        return chi * J.Jet3(h.f0, grad, hess, third)


@lru_cache(maxsize=64)
def _localized_sine(K: float, eps: float, rho: float, eta_pad: float) -> LocalizedSine:
    bump = build_bump(rho, eta_pad)
    eps_eff = eps / (3.0 * bump.m3)
    return LocalizedSine(build_h(K, eps_eff), bump, eps_eff)


@dataclass(frozen=True, eq=False)
class PerturbationSpec:
    """One deformation layer: where it sits, along which frame, how strong.

    frame holds the adapted-frame vectors (v, T, n) as columns; they must be
    orthonormal for the metric at the center (validated where a metric is in
    hand, in `adapted_chart` and `deform`).  s = 0 is the identity layer.
    """

    center: tuple
    frame: np.ndarray
    K: float
    eps: float
    rho: float
    eta_pad: float
    s: float = 0.0

    def __post_init__(self):
        center = tuple(float(c) for c in np.asarray(self.center, dtype=float))
        if len(center) != 3:
            raise ConfigurationError(f"center must have 3 coordinates, got {center}")
        frame = np.asarray(self.frame, dtype=float)
        if frame.shape != (3, 3):
            raise ConfigurationError(f"frame must be 3x3, got shape {frame.shape}")
        if abs(np.linalg.det(frame)) < 1e-14:
            raise ConfigurationError("frame matrix is singular")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "frame", frame)
        _require_wave_params(self.K, self.eps)
        if self.rho <= 0.0 or self.eta_pad <= 0.0:
            raise ConfigurationError(
                f"radii must be positive, got rho={self.rho}, eta_pad={self.eta_pad}")
        if self.s < 0.0:
            raise ConfigurationError(f"deformation scale s must be >= 0, got {self.s}")

    @property
    def eta_sin(self) -> float:
        """Nominal wave period scale eps/K (before the cutoff replacement)."""
        return self.eps / self.K

    @property
    def outer(self) -> float:
        return self.rho + self.eta_pad

    def with_s(self, s: float) -> "PerturbationSpec":
        return replace(self, s=float(s))


# A deformed metric is an ordinary chart metric carrying layers.
DeformedMetric = ChartMetric


def build_f(spec: PerturbationSpec) -> LocalizedSine:
    """The layer's scalar field in adapted coordinates (amplitude replaced)."""
    return _localized_sine(spec.K, spec.eps, spec.rho, spec.eta_pad)


@dataclass(frozen=True, eq=False)
class AdaptedChart:
    """Affine coordinates y = A^{-1}(x - center) aligned with a plane frame.

    The coordinate fields at the center are exactly (v, T, n).  Periodic
    chart axes are respected: displacements take the shortest representative.
    """

    metric: ChartMetric
    center: tuple
    frame: np.ndarray
    matrix: np.ndarray

    def to_adapted(self, pts) -> np.ndarray:
        d = self.metric.wrap_displacement(
            np.asarray(pts, dtype=float) - np.asarray(self.center))
        return np.einsum("ik,...k->...i", self.matrix, d)

    def from_adapted(self, y) -> np.ndarray:
        x = np.asarray(self.center) + np.einsum(
            "ik,...k->...i", self.frame, np.asarray(y, dtype=float))
        return self.metric.wrap(x)


def adapted_chart(metric: ChartMetric, plane, *, K: float = 100.0,
                  eps: float = 0.01, rho: float = 0.2,
                  eta_pad: float = 0.1) -> tuple:
    """Affine chart adapted to a tangent plane, plus a zero-strength layer.

    Returns (chart, spec) where spec has s = 0; callers pick the strength via
    spec.with_s.  Raises if the plane frame is not orthonormal at its base.
    """
    frame = np.stack([np.asarray(plane.e1, dtype=float),
                      np.asarray(plane.e2, dtype=float),
                      np.asarray(plane.n, dtype=float)], axis=-1)
    center = tuple(float(c) for c in np.asarray(plane.base, dtype=float))
    g = metric_jet(metric, center).g
    gram = frame.T @ g @ frame
    if np.abs(gram - np.eye(3)).max() > 1e-12:
        raise ConfigurationError(
            "plane frame is not g-orthonormal at its base point")
    chart = AdaptedChart(metric, center, frame, np.linalg.inv(frame))
    spec = PerturbationSpec(center=center, frame=frame, K=K, eps=eps,
                            rho=rho, eta_pad=eta_pad, s=0.0)
    return chart, spec


def layer_metric_jets(spec: PerturbationSpec, metric: ChartMetric,
                      pts: np.ndarray) -> MetricJet3:
    """Additive metric jets of one layer at chart points (already wrapped).

    The field f is evaluated in adapted coordinates and pulled back through
    the constant matrix M = A^{-1}; the layer is exactly linear in s.
    """
    pts = np.asarray(pts, dtype=float)
    m = np.linalg.inv(spec.frame)
    d = metric.wrap_displacement(pts - np.asarray(spec.center))
    y = np.einsum("ik,...k->...i", m, d)
    # f vanishes identically outside |y| < outer, so a batch that misses
    # the support entirely contributes exact zeros; skipping the jet and
    # pullback work keeps many-layer metrics affordable to evaluate.
    if not bool(((y * y).sum(axis=-1) < spec.outer ** 2).any()):
        batch = y.shape[:-1]
        return MetricJet3(np.zeros(batch + (3, 3)),
                          np.zeros(batch + (3, 3, 3)),
                          np.zeros(batch + (3, 3, 3, 3)),
                          np.zeros(batch + (3, 3, 3, 3, 3)))
    f = build_f(spec).jet3(y)

    # (Delta g)_pq = s f (m2_p m3_q + m3_p m2_q), with m_i the rows of M.
    sym = np.outer(m[1], m[2])
    sym = sym + sym.T
    gx = np.einsum("...i,ia->...a", f.grad, m)
    hx = np.einsum("...ij,ia,jb->...ab", f.hess, m, m)
    tx = np.einsum("...ijk,ia,jb,kc->...abc", f.third, m, m, m)
    unit = MetricJet3(
        f.value[..., None, None] * sym,
        np.einsum("...k,ij->...ijk", gx, sym),
        np.einsum("...kl,ij->...ijkl", hx, sym),
        np.einsum("...klm,ij->...ijklm", tx, sym))
    return unit.scaled(spec.s)


def _support_box(metric: ChartMetric, spec: PerturbationSpec) -> tuple:
    """Axis-aligned chart box containing the layer's support ellipsoid.

    Rejects supports that poke out of a non-periodic axis or wrap around a
    periodic one (the displacement convention would tear the field).
    """
    radius = spec.outer * np.linalg.norm(spec.frame, axis=1)
    center = np.asarray(spec.center)
    lo = np.asarray(metric.domain_lo)
    hi = np.asarray(metric.domain_hi)
    for ax in range(3):
        if metric.periodic[ax]:
            if 2.0 * radius[ax] >= hi[ax] - lo[ax]:
                raise ConfigurationError(
                    f"layer support (diameter {2 * radius[ax]:.4g}) does not fit "
                    f"inside the periodic cell on axis {ax}")
        elif center[ax] - radius[ax] < lo[ax] or center[ax] + radius[ax] > hi[ax]:
            raise ConfigurationError(
                f"layer support [{center[ax] - radius[ax]:.4g}, "
                f"{center[ax] + radius[ax]:.4g}] leaves the chart domain "
                f"on axis {ax}")
    return center - radius, center + radius


def _support_grid(metric: ChartMetric, spec: PerturbationSpec, n: int) -> np.ndarray:
    lo, hi = _support_box(metric, spec)
    axes = [np.linspace(lo[ax], hi[ax], n) for ax in range(3)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, 3)


def _positive_on(metric: ChartMetric, pts: np.ndarray) -> bool:
    try:
        metric_jet_many(metric, pts)
    except DegenerateMetricError:
        return False
    return True


def deform(metric: ChartMetric, spec: PerturbationSpec) -> DeformedMetric:
    """Append one deformation layer after validating it keeps the metric.

    Checks that the frame is g-orthonormal at the center, that the support
    fits in the chart, and that the deformed coefficients stay positive
    definite on a 16^3 grid over the support; on failure the largest
    admissible s is bisected and reported.
    """
    g = metric_jet(metric, spec.center).g
    gram = spec.frame.T @ g @ spec.frame
    if np.abs(gram - np.eye(3)).max() > 1e-12:
        raise ConfigurationError(
            "layer frame is not g-orthonormal at its center")
    grid = _support_grid(metric, spec, 16)
    layered = metric.with_layer(spec)
    if _positive_on(layered, grid):
        return layered
    lo, hi = 0.0, spec.s
    for _ in range(20):
        mid = 0.5 * (lo + hi)
        if _positive_on(metric.with_layer(spec.with_s(mid)), grid):
            lo = mid
        else:
            hi = mid
    raise DeformationTooLargeError(spec.s, lo)
