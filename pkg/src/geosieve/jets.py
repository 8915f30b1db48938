"""Truncated Taylor arithmetic for scalar fields on R^3, exact to order 3.

A Jet3 carries the value and the first three derivative tensors of a scalar
field at a batch of points.  All metric coefficients in the package are
evaluated through this arithmetic, so every derivative the curvature
pipeline consumes is analytic up to round-off; finite differences appear
only in test oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Jet3", "Jet1", "constant", "coordinates", "smoothstep_jet1"]


def _sym3(h: np.ndarray, v: np.ndarray) -> np.ndarray:
    # symmetrization h_{ij} v_k + h_{ik} v_j + h_{jk} v_i
    t = np.einsum("...ij,...k->...ijk", h, v)
    return t + np.einsum("...ik,...j->...ijk", h, v) + np.einsum("...jk,...i->...ijk", h, v)


@dataclass(frozen=True)
class Jet3:
    """Value and derivatives to order 3 of a scalar field at points.

    Attributes
    ----------
    value : ndarray, shape (...,)
    grad : ndarray, shape (..., 3)
        grad[..., i] = d_i f.
    hess : ndarray, shape (..., 3, 3)
        hess[..., i, j] = d_i d_j f, symmetric by construction.
    third : ndarray, shape (..., 3, 3, 3)
        third[..., i, j, k] = d_i d_j d_k f, fully symmetric by construction.
    """

    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    third: np.ndarray

    def __add__(self, other):
        if isinstance(other, Jet3):
            return Jet3(self.value + other.value, self.grad + other.grad,
                        self.hess + other.hess, self.third + other.third)
        return Jet3(self.value + other, self.grad, self.hess, self.third)

    __radd__ = __add__

    def __neg__(self):
        return Jet3(-self.value, -self.grad, -self.hess, -self.third)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet3) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet3):
            c = np.asarray(other)
            return Jet3(self.value * c, self.grad * c[..., None],
                        self.hess * c[..., None, None], self.third * c[..., None, None, None])
        a, b = self, other
        av = a.value[..., None]
        bv = b.value[..., None]
        grad = a.grad * bv + b.grad * av
        hess = (a.hess * bv[..., None] + b.hess * av[..., None]
                + np.einsum("...i,...j->...ij", a.grad, b.grad)
                + np.einsum("...i,...j->...ij", b.grad, a.grad))
        third = (a.third * bv[..., None, None] + b.third * av[..., None, None]
                 + _sym3(a.hess, b.grad) + _sym3(b.hess, a.grad))
        return Jet3(a.value * b.value, grad, hess, third)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet3):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def compose(self, d0, d1, d2, d3) -> "Jet3":
        """Chain rule for u(f) given derivatives d_k = u^(k)(f.value)."""
        g = self.grad
        gg = np.einsum("...i,...j->...ij", g, g)
        ggg = np.einsum("...ij,...k->...ijk", gg, g)
        value = np.asarray(d0)
        grad = d1[..., None] * g
        hess = d1[..., None, None] * self.hess + d2[..., None, None] * gg
        third = (d1[..., None, None, None] * self.third
                 + d2[..., None, None, None] * _sym3(self.hess, g)
                 + d3[..., None, None, None] * ggg)
        return Jet3(value, grad, hess, third)

    def reciprocal(self) -> "Jet3":
        v = self.value
        return self.compose(1.0 / v, -1.0 / v**2, 2.0 / v**3, -6.0 / v**4)

    def sqrt(self) -> "Jet3":
        r = np.sqrt(self.value)
        return self.compose(r, 0.5 / r, -0.25 / r**3, 0.375 / r**5)

    def exp(self) -> "Jet3":
        e = np.exp(self.value)
        return self.compose(e, e, e, e)

    def sin(self) -> "Jet3":
        s, c = np.sin(self.value), np.cos(self.value)
        return self.compose(s, c, -s, -c)

    def cos(self) -> "Jet3":
        s, c = np.sin(self.value), np.cos(self.value)
        return self.compose(c, -s, -c, s)

    def powi(self, n: int) -> "Jet3":
        """Integer power by chain rule (n may be negative; value must avoid 0)."""
        v = self.value
        d0 = v**n
        d1 = n * v ** (n - 1)
        d2 = n * (n - 1) * v ** (n - 2)
        d3 = n * (n - 1) * (n - 2) * v ** (n - 3)
        return self.compose(d0, d1, d2, d3)


def constant(c, batch_shape=()) -> Jet3:
    """Jet of a constant field over a batch of points."""
    c = np.broadcast_to(np.asarray(c, dtype=float), batch_shape).copy()
    z = np.zeros(batch_shape + (3,))
    return Jet3(c, z, np.zeros(batch_shape + (3, 3)), np.zeros(batch_shape + (3, 3, 3)))


def coordinates(points: np.ndarray) -> tuple[Jet3, Jet3, Jet3]:
    """Coordinate jets (x1, x2, x3) at points of shape (..., 3)."""
    points = np.asarray(points, dtype=float)
    batch = points.shape[:-1]
    out = []
    for i in range(3):
        g = np.zeros(batch + (3,))
        g[..., i] = 1.0
        out.append(Jet3(points[..., i].copy(), g,
                        np.zeros(batch + (3, 3)), np.zeros(batch + (3, 3, 3))))
    return tuple(out)


@dataclass(frozen=True)
class Jet1:
    """Univariate jet: value and first three derivatives, vectorized."""

    f0: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray

    def __add__(self, other):
        if isinstance(other, Jet1):
            return Jet1(self.f0 + other.f0, self.f1 + other.f1,
                        self.f2 + other.f2, self.f3 + other.f3)
        return Jet1(self.f0 + other, self.f1, self.f2, self.f3)

    __radd__ = __add__

    def __neg__(self):
        return Jet1(-self.f0, -self.f1, -self.f2, -self.f3)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet1) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet1):
            c = np.asarray(other)
            return Jet1(self.f0 * c, self.f1 * c, self.f2 * c, self.f3 * c)
        a, b = self, other
        return Jet1(a.f0 * b.f0,
                    a.f1 * b.f0 + a.f0 * b.f1,
                    a.f2 * b.f0 + 2 * a.f1 * b.f1 + a.f0 * b.f2,
                    a.f3 * b.f0 + 3 * a.f2 * b.f1 + 3 * a.f1 * b.f2 + a.f0 * b.f3)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet1):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other))

    def reciprocal(self) -> "Jet1":
        v = self.f0
        return self.compose(1.0 / v, -1.0 / v**2, 2.0 / v**3, -6.0 / v**4)

    def compose(self, d0, d1, d2, d3) -> "Jet1":
        # Faa di Bruno to order 3 for u(f(t))
        g1, g2, g3 = self.f1, self.f2, self.f3
        return Jet1(np.asarray(d0),
                    d1 * g1,
                    d2 * g1**2 + d1 * g2,
                    d3 * g1**3 + 3 * d2 * g1 * g2 + d1 * g3)

    def exp(self) -> "Jet1":
        e = np.exp(self.f0)
        return self.compose(e, e, e, e)


def variable_jet1(t) -> Jet1:
    t = np.asarray(t, dtype=float)
    return Jet1(t, np.ones_like(t), np.zeros_like(t), np.zeros_like(t))


def smoothstep_jet1(t) -> Jet1:
    """Jet of the standard mollifier step sigma(t) = e(t)/(e(t)+e(1-t)).

    Here e(t) = exp(-1/t) for t > 0 and 0 otherwise.  sigma is 0 for t <= 0,
    1 for t >= 1, strictly increasing in between, and C^infinity everywhere.
    Derivatives are exact where 0 < t < 1 and identically zero outside.
    """
    t = np.asarray(t, dtype=float)
    inner = (t > 0.0) & (t < 1.0)
    ts = np.where(inner, t, 0.5)  # safe argument, masked out afterwards

    x = variable_jet1(ts)
    e = (x.reciprocal() * -1.0).exp()
    one_minus = (1.0 - x)
    ebar = (one_minus.reciprocal() * -1.0).exp()
    # d/dt e(1-t) = -e'(1-t): compose handles it through one_minus' jet
    sig = e / (e + ebar)

    f0 = np.where(inner, sig.f0, np.where(t >= 1.0, 1.0, 0.0))
    f1 = np.where(inner, sig.f1, 0.0)
    f2 = np.where(inner, sig.f2, 0.0)
    f3 = np.where(inner, sig.f3, 0.0)
    return Jet1(f0, f1, f2, f3)
