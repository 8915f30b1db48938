"""Christoffel symbols, curvature, and its first covariant derivative.

Conventions, with derivative axes last throughout:

  Gamma_{ij,k} = (d_i g_jk + d_j g_ik - d_k g_ij) / 2
  Gamma^k_{ij} = g^{kl} Gamma_{ij,l}
  R_{ijkl} = d_i Gamma_{jk,l} - d_j Gamma_{ik,l}
             + g^{st} (Gamma_{ik,s} Gamma_{jl,t} - Gamma_{jk,s} Gamma_{il,t})
  covR_{ijkl;m} = d_m R_{ijkl} - Gamma^t_{mi} R_{tjkl} - Gamma^t_{mj} R_{itkl}
                  - Gamma^t_{mk} R_{ijtl} - Gamma^t_{ml} R_{ijkt}

With this sign choice sec(u, w) = R(u, w, w, u) / |u ^ w|^2, so the unit
round sphere scores +1.  All derivatives come from metric jets; nothing here
differentiates numerically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charts import ChartMetric, InverseJet1, MetricJet3, inverse_jet, metric_jet_many

__all__ = [
    "ChristoffelJet", "CurvaturePoint",
    "christoffel", "riemann", "covariant_R",
    "curvature_point", "sectional", "curvature_operator",
]


@dataclass(frozen=True)
class ChristoffelJet:
    """First-kind symbols with two derivative orders, plus the second kind.

    gamma1[..., i, j, k] = Gamma_{ij,k}; dgamma1 and ddgamma1 append
    derivative axes; gamma2[..., k, i, j] = Gamma^k_{ij}.
    """

    gamma1: np.ndarray
    dgamma1: np.ndarray
    ddgamma1: np.ndarray
    gamma2: np.ndarray


@dataclass(frozen=True)
class CurvaturePoint:
    """Everything the plane-scoring layer needs at a batch of points."""

    points: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    gamma2: np.ndarray
    riemann: np.ndarray
    cov_riemann: np.ndarray


def christoffel(jet: MetricJet3, inv: InverseJet1 | None = None) -> ChristoffelJet:
    """Koszul symbols and their coordinate derivatives from metric jets."""
    if inv is None:
        inv = inverse_jet(jet)
    dg, ddg, dddg = jet.dg, jet.ddg, jet.dddg
    gamma1 = 0.5 * (np.einsum("...jki->...ijk", dg)
                    + np.einsum("...ikj->...ijk", dg)
                    - dg)
    dgamma1 = 0.5 * (np.einsum("...jkim->...ijkm", ddg)
                     + np.einsum("...ikjm->...ijkm", ddg)
                     - ddg)
    ddgamma1 = 0.5 * (np.einsum("...jkimn->...ijkmn", dddg)
                      + np.einsum("...ikjmn->...ijkmn", dddg)
                      - dddg)
    gamma2 = np.einsum("...kl,...ijl->...kij", inv.ginv, gamma1)
    return ChristoffelJet(gamma1, dgamma1, ddgamma1, gamma2)


def riemann(chris: ChristoffelJet, inv: InverseJet1):
    """Curvature R_{ijkl} and its coordinate derivative d_m R_{ijkl}."""
    g1, dg1, ddg1 = chris.gamma1, chris.dgamma1, chris.ddgamma1
    ginv, dginv = inv.ginv, inv.dginv

    deriv = np.einsum("...jkli->...ijkl", dg1)
    quad = np.einsum("...st,...iks,...jlt->...ijkl", ginv, g1, g1)
    riem = (deriv - np.einsum("...jikl->...ijkl", deriv)
            + quad - np.einsum("...jikl->...ijkl", quad))

    dderiv = np.einsum("...jklim->...ijklm", ddg1)
    dquad = (np.einsum("...stm,...iks,...jlt->...ijklm", dginv, g1, g1)
             + np.einsum("...st,...iksm,...jlt->...ijklm", ginv, dg1, g1)
             + np.einsum("...st,...iks,...jltm->...ijklm", ginv, g1, dg1))
    driem = (dderiv - np.einsum("...jiklm->...ijklm", dderiv)
             + dquad - np.einsum("...jiklm->...ijklm", dquad))
    return riem, driem


def covariant_R(riem: np.ndarray, driem: np.ndarray,
                      gamma2: np.ndarray) -> np.ndarray:
    """covR_{ijkl;m}: the coordinate derivative with four index corrections."""
    return (driem
            - np.einsum("...tmi,...tjkl->...ijklm", gamma2, riem)
            - np.einsum("...tmj,...itkl->...ijklm", gamma2, riem)
            - np.einsum("...tmk,...ijtl->...ijklm", gamma2, riem)
            - np.einsum("...tml,...ijkt->...ijklm", gamma2, riem))


def curvature_point(metric: ChartMetric, points) -> CurvaturePoint:
    """Full curvature data at points of shape (..., 3) (single points allowed)."""
    pts = np.asarray(points, dtype=float)
    jet = metric_jet_many(metric, pts)
    inv = inverse_jet(jet)
    chris = christoffel(jet, inv)
    riem, driem = riemann(chris, inv)
    cov = covariant_R(riem, driem, chris.gamma2)
    return CurvaturePoint(points=pts, g=jet.g, ginv=inv.ginv,
                          gamma2=chris.gamma2, riemann=riem, cov_riemann=cov)


def sectional(g: np.ndarray, riem: np.ndarray, u, w):
    """Sectional curvature of span(u, w); batched over leading axes."""
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    num = np.einsum("...ijkl,...i,...j,...k,...l->...", riem, u, w, w, u)
    guu = np.einsum("...ij,...i,...j->...", g, u, u)
    gww = np.einsum("...ij,...i,...j->...", g, w, w)
    guw = np.einsum("...ij,...i,...j->...", g, u, w)
    return num / (guu * gww - guw**2)


_PAIRS = ((1, 2), (2, 0), (0, 1))


def curvature_operator(g: np.ndarray, riem: np.ndarray,
                       frame: np.ndarray) -> np.ndarray:
    """Curvature operator on 2-forms in a g-orthonormal frame.

    frame holds the basis as columns; entry (a, b) is
    R(E_{a+1}, E_{a+2}, E_{b+2}, E_{b+1}) with cyclic index pairs, the usual
    identification of 2-vectors with axis directions in dimension 3.  Slots
    are ordered so diagonal entries equal sectional curvatures of the
    coordinate planes; the matrix is symmetric by the pair symmetry of R.
    """
    rf = np.einsum("...ijkl,...ia,...jb,...kc,...ld->...abcd",
                   riem, frame, frame, frame, frame)
    out = np.empty(rf.shape[:-4] + (3, 3))
    for a, (i, j) in enumerate(_PAIRS):
        for b, (k, l) in enumerate(_PAIRS):
            out[..., a, b] = rf[..., i, j, l, k]
    return out
