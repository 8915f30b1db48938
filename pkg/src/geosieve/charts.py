"""Coordinate charts and metric coefficient jets for the zoo of 3-manifolds.

Every metric is given by closed-form coefficients g_ij(x) on a single chart
(an axis-aligned box, optionally periodic per axis).  Coefficients are
evaluated through order-3 jet arithmetic, so dg, ddg, dddg are analytic.
Derivative axes always come last: dg[..., i, j, k] = d_k g_ij and so on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import jets as J
from .errors import ChartDomainError, ConfigurationError, DegenerateMetricError

__all__ = [
    "Point3", "MetricJet3", "InverseJet1", "ChartMetric",
    "zoo_metric", "zoo_names", "metric_jet", "metric_jet_many", "inverse_jet",
    "metric_to_json", "metric_from_json",
]


@dataclass(frozen=True)
class Point3:
    """A chart point."""

    x1: float
    x2: float
    x3: float

    def asarray(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3], dtype=float)


def _as_points(p) -> np.ndarray:
    if isinstance(p, Point3):
        return p.asarray()
    return np.asarray(p, dtype=float)


@dataclass(frozen=True)
class MetricJet3:
    """Metric coefficients with partials to order 3 at a batch of points.

    g[..., i, j], dg[..., i, j, k] = d_k g_ij, ddg[..., i, j, k, l] =
    d_k d_l g_ij, dddg[..., i, j, k, l, m] = d_k d_l d_m g_ij.
    """

    g: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray
    dddg: np.ndarray

    def __add__(self, other: "MetricJet3") -> "MetricJet3":
        return MetricJet3(self.g + other.g, self.dg + other.dg,
                          self.ddg + other.ddg, self.dddg + other.dddg)

    def scaled(self, c: float) -> "MetricJet3":
        return MetricJet3(self.g * c, self.dg * c, self.ddg * c, self.dddg * c)


@dataclass(frozen=True)
class InverseJet1:
    """Inverse metric with first partials: dginv[..., i, j, k] = d_k g^ij."""

    ginv: np.ndarray
    dginv: np.ndarray


@dataclass(frozen=True)
class ChartMetric:
    """A metric on one chart: a named analytic field plus perturbation layers.

    domain_lo/domain_hi bound the chart box; periodic marks axes that wrap
    with period hi - lo.  layers holds PerturbationSpec values applied on top
    of the base field (see geosieve.perturb).
    """

    name: str
    params: dict = field(default_factory=dict)
    domain_lo: tuple = (0.0, 0.0, 0.0)
    domain_hi: tuple = (1.0, 1.0, 1.0)
    periodic: tuple = (False, False, False)
    layers: tuple = ()

    def with_layer(self, spec) -> "ChartMetric":
        return replace(self, layers=self.layers + (spec,))

    def periods(self) -> np.ndarray:
        return np.asarray(self.domain_hi) - np.asarray(self.domain_lo)

    def wrap(self, pts: np.ndarray) -> np.ndarray:
        """Map periodic coordinates into the fundamental box; check the rest."""
        pts = np.array(pts, dtype=float)
        lo = np.asarray(self.domain_lo)
        hi = np.asarray(self.domain_hi)
        for ax in range(3):
            if self.periodic[ax]:
                w = hi[ax] - lo[ax]
                pts[..., ax] = lo[ax] + np.mod(pts[..., ax] - lo[ax], w)
            else:
                bad = (pts[..., ax] < lo[ax] - 1e-12) | (pts[..., ax] > hi[ax] + 1e-12)
                if np.any(bad):
                    flat = pts.reshape(-1, 3)
                    p = flat[np.flatnonzero(bad.reshape(-1))[0]]
                    raise ChartDomainError(p, lo, hi)
        return pts

    def wrap_displacement(self, delta: np.ndarray) -> np.ndarray:
        """Shortest displacement respecting periodic axes."""
        delta = np.array(delta, dtype=float)
        per = self.periods()
        for ax in range(3):
            if self.periodic[ax]:
                w = per[ax]
                delta[..., ax] = delta[..., ax] - w * np.round(delta[..., ax] / w)
        return delta


# ---------------------------------------------------------------------------
# Zoo coefficient fields
# ---------------------------------------------------------------------------

def _kron_jets(batch):
    zero = J.constant(0.0, batch)
    one = J.constant(1.0, batch)
    return one, zero


def _assemble(coeffs) -> MetricJet3:
    """Pack a 3x3 list of Jet3 into MetricJet3 arrays."""
    batch = coeffs[0][0].value.shape
    g = np.empty(batch + (3, 3))
    dg = np.empty(batch + (3, 3, 3))
    ddg = np.empty(batch + (3, 3, 3, 3))
    dddg = np.empty(batch + (3, 3, 3, 3, 3))
    for i in range(3):
        for j in range(3):
            c = coeffs[i][j]
            g[..., i, j] = c.value
            dg[..., i, j, :] = c.grad
            ddg[..., i, j, :, :] = c.hess
            dddg[..., i, j, :, :, :] = c.third
    return MetricJet3(g, dg, ddg, dddg)


def _diag_conformal(lam: J.Jet3) -> MetricJet3:
    zero = J.constant(0.0, lam.value.shape)
    rows = [[lam if i == j else zero for j in range(3)] for i in range(3)]
    return _assemble(rows)


def _flat(params, pts):
    batch = pts.shape[:-1]
    one, zero = _kron_jets(batch)
    return _assemble([[one if i == j else zero for j in range(3)] for i in range(3)])


def _round_sphere(params, pts):
    r = float(params.get("radius", 1.0))
    x1, x2, x3 = J.coordinates(pts)
    rr = x1 * x1 + x2 * x2 + x3 * x3
    lam = (rr + r * r).powi(-2) * (4.0 * r**4)
    return _diag_conformal(lam)


def _hyperbolic_ball(params, pts):
    x1, x2, x3 = J.coordinates(pts)
    rr = x1 * x1 + x2 * x2 + x3 * x3
    lam = (1.0 - rr).powi(-2) * 4.0
    return _diag_conformal(lam)


def _product_s2xr(params, pts):
    x1, x2, x3 = J.coordinates(pts)
    batch = pts.shape[:-1]
    one, zero = _kron_jets(batch)
    lam = (x1 * x1 + x2 * x2 + 1.0).powi(-2) * 4.0
    return _assemble([[lam, zero, zero], [zero, lam, zero], [zero, zero, one]])


def _nil(params, pts):
    # g = dx^2 + dy^2 + (dz - x dy)^2
    x1, x2, x3 = J.coordinates(pts)
    batch = pts.shape[:-1]
    one, zero = _kron_jets(batch)
    g22 = one + x1 * x1
    g23 = -x1
    return _assemble([[one, zero, zero], [zero, g22, g23], [zero, g23, one]])


def _sol(params, pts):
    # g = e^{2z} dx^2 + e^{-2z} dy^2 + dz^2
    x1, x2, x3 = J.coordinates(pts)
    batch = pts.shape[:-1]
    one, zero = _kron_jets(batch)
    e2z = (x3 * 2.0).exp()
    em2z = (x3 * (-2.0)).exp()
    return _assemble([[e2z, zero, zero], [zero, em2z, zero], [zero, zero, one]])


def _hopf_field(x1, x2, x3):
    """Left-invariant quaternionic field i on S^3 in stereographic coordinates.

    X(x) = (1 - |x|^2)/2 * e1 + x cross e1 + x1 * x, a polynomial field whose
    round length is 1 everywhere.
    """
    rr = x1 * x1 + x2 * x2 + x3 * x3
    half = (1.0 - rr) * 0.5
    # x cross e1 = (0, x3, -x2)
    c1 = half + x1 * x1
    c2 = x3 + x1 * x2
    c3 = -x2 + x1 * x3
    return c1, c2, c3


def _berger(params, pts):
    lam_sq = float(params.get("lam", 0.8)) ** 2
    x1, x2, x3 = J.coordinates(pts)
    rr = x1 * x1 + x2 * x2 + x3 * x3
    conf = (rr + 1.0).powi(-2) * 4.0
    X = _hopf_field(x1, x2, x3)
    # one-form omega = g_round(X, .) has components conf * X_i
    om = [conf * X[i] for i in range(3)]
    rows = []
    for i in range(3):
        row = []
        for j in range(3):
            c = om[i] * om[j] * (lam_sq - 1.0)
            if i == j:
                c = c + conf
            row.append(c)
        rows.append(row)
    return _assemble(rows)


_FOURIER_MODES = 6


def _fourier_table(seed: int, amp: float):
    """Deterministic mode table: per coefficient, waves k.x*2pi + phase."""
    rng = np.random.default_rng(int(seed))
    table = []
    for _ in range(6):  # upper-triangle coefficient slots 11,12,13,22,23,33
        ks, phases, amps = [], [], []
        for _ in range(_FOURIER_MODES):
            k = rng.integers(-2, 3, size=3)
            while not np.any(k):
                k = rng.integers(-2, 3, size=3)
            ks.append(k.astype(float))
            phases.append(rng.uniform(0.0, 2 * np.pi))
            amps.append(amp * rng.uniform(-1.0, 1.0))
        table.append((np.array(ks), np.array(phases), np.array(amps)))
    return table


def _random_fourier(params, pts):
    seed = int(params.get("seed", 0))
    amp = float(params.get("amp", 0.01))
    table = _fourier_table(seed, amp)
    x = J.coordinates(pts)
    batch = pts.shape[:-1]
    one, zero = _kron_jets(batch)
    slots = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
    coeffs = [[None] * 3 for _ in range(3)]
    for (i, j), (ks, phases, amps) in zip(slots, table):
        acc = J.constant(0.0, batch)
        for k, ph, a in zip(ks, phases, amps):
            phase = x[0] * (2 * np.pi * k[0]) + x[1] * (2 * np.pi * k[1]) \
                + x[2] * (2 * np.pi * k[2]) + ph
            acc = acc + phase.sin() * a
        coeffs[i][j] = acc + one if i == j else acc
        coeffs[j][i] = coeffs[i][j]
    return _assemble(coeffs)


_ZOO = {
    "flat_torus": {
        "build": _flat,
        "domain": lambda p: ((0.0, 0.0, 0.0),
                             (p.get("period", 1.0),) * 3,
                             (True, True, True)),
        "defaults": {"period": 1.0},
    },
    "round_sphere": {
        "build": _round_sphere,
        # one stereographic chart, scan region kept inside |x| <= 2
        "domain": lambda p: ((-2 / np.sqrt(3),) * 3, (2 / np.sqrt(3),) * 3,
                             (False, False, False)),
        "defaults": {"radius": 1.0},
    },
    "hyperbolic_ball": {
        "build": _hyperbolic_ball,
        "domain": lambda p: ((-0.5, -0.5, -0.5), (0.5, 0.5, 0.5),
                             (False, False, False)),
        "defaults": {},
    },
    "product_s2xr": {
        "build": _product_s2xr,
        "domain": lambda p: ((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0),
                             (False, False, False)),
        "defaults": {},
    },
    "berger": {
        "build": _berger,
        "domain": lambda p: ((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0),
                             (False, False, False)),
        "defaults": {"lam": 0.8},
    },
    "nil": {
        "build": _nil,
        "domain": lambda p: ((-3.0, -3.0, -3.0), (3.0, 3.0, 3.0),
                             (False, False, False)),
        "defaults": {},
    },
    "sol": {
        "build": _sol,
        "domain": lambda p: ((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0),
                             (False, False, False)),
        "defaults": {},
    },
    "random_fourier": {
        "build": _random_fourier,
        "domain": lambda p: ((0.0, 0.0, 0.0), (1.0, 1.0, 1.0),
                             (True, True, True)),
        "defaults": {"seed": 0, "amp": 0.01},
    },
}


def zoo_names() -> list:
    return sorted(_ZOO)


def zoo_metric(name: str, **params) -> ChartMetric:
    """Build a zoo metric by name.  Unknown names raise ConfigurationError."""
    if name not in _ZOO:
        raise ConfigurationError(f"unknown zoo metric {name!r}; known: {zoo_names()}")
    entry = _ZOO[name]
    full = dict(entry["defaults"])
    for k, v in params.items():
        if k != "scale" and k not in full:
            raise ConfigurationError(f"unknown parameter {k!r} for zoo metric {name!r}")
        full[k] = v
    lo, hi, per = entry["domain"](full)
    return ChartMetric(name=name, params=full, domain_lo=tuple(map(float, lo)),
                       domain_hi=tuple(map(float, hi)), periodic=tuple(per))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def lattice_axes(metric: ChartMetric, counts) -> list:
    """Per-axis sample coordinates: periodic axes exclude the wrap endpoint."""
    if np.ndim(counts) == 0:
        counts = (counts,) * 3
    axes = []
    for ax in range(3):
        lo, hi = metric.domain_lo[ax], metric.domain_hi[ax]
        cnt = int(counts[ax])
        if cnt < 1:
            raise ConfigurationError(f"lattice count must be >= 1, got {cnt}")
        if not hi > lo:
            raise ConfigurationError(f"chart domain is empty on axis {ax}")
        if metric.periodic[ax]:
            axes.append(lo + (hi - lo) * np.arange(cnt) / cnt)
        else:
            axes.append(np.linspace(lo, hi, cnt))
    return axes


def coordinate_lattice(metric: ChartMetric, counts) -> np.ndarray:
    """Flattened (N, 3) lattice over the chart domain."""
    mesh = np.meshgrid(*lattice_axes(metric, counts), indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, 3)


def metric_jet_many(metric: ChartMetric, points, check_positivity: bool = True) -> MetricJet3:
    """Evaluate metric coefficient jets at points of shape (..., 3)."""
    pts = metric.wrap(_as_points(points))
    if metric.name not in _ZOO:
        raise ConfigurationError(f"unknown zoo metric {metric.name!r}")
    out = _ZOO[metric.name]["build"](metric.params, pts)
    if metric.layers:
        from .perturb import layer_metric_jets  # deferred: perturb imports charts
        for spec in metric.layers:
            out = out + layer_metric_jets(spec, metric, pts)
    scale = float(metric.params.get("scale", 1.0))
    if scale != 1.0:
        out = out.scaled(scale * scale)
    if check_positivity:
        _check_positive(out.g, pts)
    return out


def metric_jet(metric: ChartMetric, p) -> MetricJet3:
    """Single-point evaluation; accepts Point3 or a length-3 array."""
    return metric_jet_many(metric, _as_points(p))


def _check_positive(g: np.ndarray, pts) -> None:
    # leading principal minors, checked lazily at evaluation time
    m1 = g[..., 0, 0]
    m2 = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    m3 = np.linalg.det(g)
    bad = (m1 <= 0) | (m2 <= 0) | (m3 <= 0)
    if np.any(bad):
        idx = np.argwhere(bad)
        det = m3[tuple(idx[0])] if idx.size else float(np.min(m3))
        point = pts[tuple(idx[0])] if pts.ndim > 1 else pts
        raise DegenerateMetricError(det, point)


def inverse_jet(j: MetricJet3) -> InverseJet1:
    """Inverse metric and its first partials.

    d_k g^{ij} = -g^{ia} (d_k g_ab) g^{bj}, exact given the inverse.
    """
    det = np.linalg.det(j.g)
    if np.any(det <= 0):
        raise DegenerateMetricError(np.min(det))
    ginv = np.linalg.inv(j.g)
    dginv = -np.einsum("...ia,...abk,...bj->...ijk", ginv, j.dg, ginv)
    return InverseJet1(ginv, dginv)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def metric_to_json(metric: ChartMetric) -> str:
    """Serialize a metric (with layers) to JSON; floats round-trip exactly."""
    doc = {
        "name": metric.name,
        "params": metric.params,
        "domain": {"lo": list(metric.domain_lo), "hi": list(metric.domain_hi)},
        "periodic": list(metric.periodic),
        "layers": [_spec_doc(s) for s in metric.layers],
    }
    return json.dumps(doc, indent=2)


def _spec_doc(spec) -> dict:
    return {
        "center": [float(c) for c in spec.center],
        "frame": [float(v) for v in np.asarray(spec.frame).flatten(order="F")],
        "K": float(spec.K),
        "eps": float(spec.eps),
        "rho": float(spec.rho),
        "eta_pad": float(spec.eta_pad),
        "s": float(spec.s),
    }


def metric_from_json(text: str) -> ChartMetric:
    doc = json.loads(text)
    if doc.get("layers"):
        from .perturb import PerturbationSpec  # deferred: perturb imports charts
    layers = tuple(
        PerturbationSpec(
            center=tuple(d["center"]),
            frame=np.array(d["frame"], dtype=float).reshape(3, 3, order="F"),
            K=d["K"], eps=d["eps"], rho=d["rho"], eta_pad=d["eta_pad"], s=d["s"],
        )
        for d in doc.get("layers", [])
    )
    return ChartMetric(
        name=doc["name"], params=dict(doc.get("params", {})),
        domain_lo=tuple(doc["domain"]["lo"]), domain_hi=tuple(doc["domain"]["hi"]),
        periodic=tuple(bool(b) for b in doc["periodic"]), layers=layers,
    )
