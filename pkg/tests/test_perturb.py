"""Deformation layers: the sine wave, the radial cutoff, and the layer jets.

Expected numbers come from three independent sources: closed-form derivative
identities of the wave, nested central differences bypassing the jet
arithmetic (see oracles.py for the philosophy), and a hand-written product
rule/pullback assembly done with plain einsums inside the tests.
"""

import json
from dataclasses import replace

import numpy as np
import pytest

import geosieve as gs
from geosieve import jets as J
from geosieve.charts import metric_from_json, metric_jet_many, metric_to_json, zoo_metric
from geosieve.errors import ConfigurationError, DeformationTooLargeError
from geosieve.grassmann import TangentPlane
from geosieve.perturb import (
    AdaptedChart,
    PerturbationSpec,
    adapted_chart,
    build_bump,
    build_f,
    build_h,
    deform,
    layer_metric_jets,
)

# Measured C^3 size of the default cutoff (rho=0.2, eta_pad=0.1); validated
# against a finite-difference estimate below, frozen here for determinism.
M3_DEFAULT = 110563.41347961387


def flat_box(lo=-4.0, hi=4.0):
    """Flat metric on a large non-periodic box."""
    return replace(zoo_metric("flat_torus"),
                   domain_lo=(lo,) * 3, domain_hi=(hi,) * 3,
                   periodic=(False, False, False))


def tame_spec(s=0.7):
    """Layer whose derivatives are small enough for finite differences."""
    frame = np.array([[0.36, 0.48, 0.8], [-0.8, 0.6, 0.0], [0.48, 0.64, -0.6]]).T
    return PerturbationSpec(center=(0.3, -0.2, 0.1), frame=frame, K=5.0,
                            eps=0.9, rho=0.2, eta_pad=2.0, s=s)


class TestWave:
    def test_paper_point_values(self):
        h = build_h(100.0, 0.01)
        j = h.jet1(0.0)
        assert j.f0 == 0.0
        assert j.f1 == pytest.approx(0.005, rel=1e-12)
        eta = h.eta
        assert h.jet1(np.pi * eta / 2).f2 == pytest.approx(-50.0, rel=1e-12)

    @pytest.mark.parametrize("K,eps", [(100.0, 0.01), (400.0, 0.005)])
    def test_derivative_bounds_on_dense_grid(self, K, eps):
        h = build_h(K, eps)
        t = np.linspace(-1.0, 1.0, 100_000)
        j = h.jet1(t)
        assert np.abs(j.f0).max() < eps
        assert np.abs(j.f1).max() <= eps / 2 + 1e-15
        assert max(np.abs(j.f0).max(), np.abs(j.f1).max()) < eps
        assert np.abs(j.f2).max() <= K / 2 + 1e-9

    @pytest.mark.parametrize("K,eps", [(100.0, 0.01), (400.0, 0.005)])
    def test_growth_dichotomy(self, K, eps):
        h = build_h(K, eps)
        t = np.linspace(-1.0, 1.0, 100_000)
        j = h.jet1(t)
        quiet = np.abs(j.f2) <= np.sqrt(K)
        assert quiet.any()
        assert np.abs(j.f3[quiet]).min() >= K

    def test_sharp_dichotomy_at_reference_params(self):
        j = build_h(100.0, 0.01).jet1(np.linspace(-1.0, 1.0, 100_000))
        quiet = np.abs(j.f2) <= 10.0
        assert quiet.any()
        assert np.abs(j.f3[quiet]).min() >= 100.0

    def test_jets_match_finite_differences(self):
        h = build_h(5.0, 0.9)
        t = np.linspace(-1.0, 1.0, 101)
        j = h.jet1(t)
        step = 1e-5
        jp, jm = h.jet1(t + step), h.jet1(t - step)
        assert np.abs((jp.f0 - jm.f0) / (2 * step) - j.f1).max() < 1e-7
        assert np.abs((jp.f1 - jm.f1) / (2 * step) - j.f2).max() < 1e-7
        assert np.abs((jp.f2 - jm.f2) / (2 * step) - j.f3).max() < 1e-6

    def test_odd_symmetry(self):
        h = build_h(100.0, 0.01)
        t = np.linspace(0.0, 1.0, 1000)
        assert np.array_equal(h(-t), -h(t))

    @pytest.mark.parametrize("K,eps", [(0.5, 0.01), (100.0, 0.0), (100.0, 1.0),
                                       (4.1, 0.9), (-3.0, 0.5)])
    def test_rejects_weak_parameters(self, K, eps):
        with pytest.raises(ConfigurationError):
            build_h(K, eps)


class TestBump:
    def test_plateau_support_and_midpoint(self):
        bump = build_bump(0.2, 0.1)
        j = bump.jet3(np.array([[0.1, 0.0, 0.0], [0.0, 0.05, 0.08]]))
        assert np.all(j.value == 1.0)
        for arr in (j.grad, j.hess, j.third):
            assert np.all(arr == 0.0)
        outside = np.array([[0.4, 0.0, 0.0], [0.25, 0.25, 0.25]])
        jo = bump.jet3(outside)
        assert np.all(jo.value == 0.0) and np.all(jo.third == 0.0)
        mid = bump(np.array([0.25, 0.0, 0.0]))
        assert mid == pytest.approx(0.5, abs=1e-14)

    def test_m3_frozen_and_against_finite_differences(self):
        bump = build_bump(0.2, 0.1)
        assert bump.m3 == pytest.approx(M3_DEFAULT, rel=1e-9)
        step = 2e-4
        r = np.linspace(0.0, 0.3, 200)

        def vals(dx=0.0, dy=0.0):
            p = np.zeros((200, 3))
            p[:, 0] = r + dx
            p[:, 1] = dy
            return bump(p)

        v0 = vals()
        d1 = (vals(dx=step) - vals(dx=-step)) / (2 * step)
        d2 = (vals(dx=step) - 2 * v0 + vals(dx=-step)) / step**2
        d3 = (vals(dx=2 * step) - 2 * vals(dx=step) + 2 * vals(dx=-step)
              - vals(dx=-2 * step)) / (2 * step**3)
        m3_fd = max(1.0, np.abs(v0).max(), np.abs(d1).max(),
                    np.abs(d2).max(), np.abs(d3).max())
        assert bump.m3 == pytest.approx(m3_fd, rel=0.02)

    def test_m3_floor_for_gentle_bumps(self):
        assert build_bump(1.0, 50.0).m3 == 1.0

    def test_jets_match_finite_differences_on_shell(self, rng):
        bump = build_bump(0.2, 0.1)
        dirs = rng.normal(size=(64, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        pts = dirs * (0.2 + 0.1 * rng.uniform(0.05, 0.95, size=64))[:, None]
        j = bump.jet3(pts)
        step = 1e-5
        for ax in range(3):
            e = np.zeros(3)
            e[ax] = step
            jp, jm = bump.jet3(pts + e), bump.jet3(pts - e)
            for got, lo_p, lo_m in ((j.grad[:, ax], jp.value, jm.value),
                                    (j.hess[..., ax], jp.grad, jm.grad),
                                    (j.third[..., ax], jp.hess, jm.hess)):
                fd = (lo_p - lo_m) / (2 * step)
                scale = max(1.0, np.abs(got).max())
                assert np.abs(fd - got).max() < 2e-5 * scale

    def test_rotation_invariance(self, rng):
        bump = build_bump(0.2, 0.1)
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        pts = rng.uniform(-0.35, 0.35, size=(200, 3))
        np.testing.assert_allclose(bump(pts @ q.T), bump(pts), rtol=1e-9, atol=1e-12)

    def test_jets_vanish_approaching_outer_boundary(self):
        bump = build_bump(0.2, 0.1)
        r = 0.3 * (1.0 - 1e-9)
        j = bump.jet3(np.array([[r, 0.0, 0.0]]))
        for arr in (j.value, j.grad, j.hess, j.third):
            assert np.abs(arr).max() <= 1e-10

    def test_rejects_bad_radii(self):
        with pytest.raises(ConfigurationError):
            build_bump(0.0, 0.1)
        with pytest.raises(ConfigurationError):
            build_bump(0.2, -1.0)


class TestSpec:
    def test_derived_quantities(self):
        spec = PerturbationSpec(center=(0.5, 0.5, 0.5), frame=np.eye(3),
                                K=100.0, eps=0.01, rho=0.2, eta_pad=0.1)
        assert spec.s == 0.0
        assert spec.eta_sin == pytest.approx(1e-4, rel=1e-12)
        assert spec.outer == pytest.approx(0.3)
        assert spec.with_s(0.25).s == 0.25
        assert spec.with_s(0.25).K == spec.K

    @pytest.mark.parametrize("kw", [
        dict(center=(0.0, 0.0)),
        dict(frame=np.eye(2)),
        dict(frame=np.zeros((3, 3))),
        dict(K=0.5),
        dict(eps=1.5),
        dict(K=4.1, eps=0.9),
        dict(rho=-0.1),
        dict(eta_pad=0.0),
        dict(s=-1e-3),
    ])
    def test_rejects_invalid_fields(self, kw):
        base = dict(center=(0.5, 0.5, 0.5), frame=np.eye(3), K=100.0,
                    eps=0.01, rho=0.2, eta_pad=0.1, s=0.0)
        base.update(kw)
        with pytest.raises(ConfigurationError):
            PerturbationSpec(**base)

    def test_json_round_trip_with_layer(self, rng):
        torus = zoo_metric("flat_torus")
        frame = np.eye(3)
        spec = PerturbationSpec(center=(0.5, 0.25, 0.75), frame=frame,
                                K=10.0, eps=0.01, rho=0.2, eta_pad=0.1, s=1e-2)
        layered = torus.with_layer(spec)
        text = metric_to_json(layered)
        back = metric_from_json(text)
        assert len(back.layers) == 1
        got = back.layers[0]
        for name in ("K", "eps", "rho", "eta_pad", "s"):
            assert getattr(got, name) == getattr(spec, name)
        assert got.center == spec.center
        assert np.array_equal(got.frame, spec.frame)
        pts = rng.uniform(0.0, 1.0, size=(50, 3))
        a = metric_jet_many(layered, pts)
        b = metric_jet_many(back, pts)
        np.testing.assert_allclose(b.g, a.g, rtol=1e-15, atol=0)
        np.testing.assert_allclose(b.dddg, a.dddg, rtol=1e-15, atol=1e-300)


class TestField:
    def spec(self):
        return PerturbationSpec(center=(0.5, 0.5, 0.5), frame=np.eye(3),
                                K=100.0, eps=0.01, rho=0.2, eta_pad=0.1, s=1e-3)

    def test_amplitude_replacement(self):
        f = build_f(self.spec())
        assert f.eps_eff == 0.01 / (3.0 * f.bump.m3)
        assert f.wave.eps == f.eps_eff

    def test_shared_between_strengths(self):
        spec = self.spec()
        assert build_f(spec) is build_f(spec.with_s(0.37))

    def test_plateau_jets_equal_wave_lift(self, rng):
        f = build_f(self.spec())
        y = rng.uniform(-0.11, 0.11, size=(60, 3))
        j = f.jet3(y)
        h = f.wave.jet1(y[:, 0])
        assert np.array_equal(j.value, h.f0)
        assert np.array_equal(j.grad[:, 0], h.f1)
        assert np.all(j.grad[:, 1:] == 0.0)
        assert np.array_equal(j.hess[:, 0, 0], h.f2)
        assert np.array_equal(j.third[:, 0, 0, 0], h.f3)
        mask = np.ones((3, 3, 3), dtype=bool)
        mask[0, 0, 0] = False
        assert np.all(j.third[:, mask] == 0.0)

    def test_zero_outside_support(self, rng):
        f = build_f(self.spec())
        dirs = rng.normal(size=(60, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        y = dirs * rng.uniform(0.301, 2.0, size=60)[:, None]
        j = f.jet3(y)
        for arr in (j.value, j.grad, j.hess, j.third):
            assert np.all(arr == 0.0)

    def grid16(self):
        ax = np.linspace(-0.3, 0.3, 16)
        return np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1).reshape(-1, 3)

    def test_c1_bound_part1(self):
        j = build_f(self.spec()).jet3(self.grid16())
        assert max(np.abs(j.value).max(), np.abs(j.grad).max()) < 0.01

    def test_mixed_second_derivatives_part2(self):
        j = build_f(self.spec()).jet3(self.grid16())
        mask = np.ones((3, 3), dtype=bool)
        mask[0, 0] = False
        assert np.abs(j.hess[:, mask]).max() < 0.01
        assert np.abs(j.hess[:, 0, 0]).max() < 100.0

    def test_third_derivatives_vanish_on_plateau_part3(self):
        y = self.grid16()
        j = build_f(self.spec()).jet3(y)
        on_u = np.linalg.norm(y, axis=1) <= 0.2
        assert on_u.any()
        mask = np.ones((3, 3, 3), dtype=bool)
        mask[0, 0, 0] = False
        assert np.all(j.third[on_u][:, mask] == 0.0)

    def test_growth_dichotomy_on_plateau_part5(self):
        y = self.grid16()
        j = build_f(self.spec()).jet3(y)
        on_u = np.linalg.norm(y, axis=1) <= 0.2
        winner = np.maximum(np.abs(j.hess[on_u, 0, 0]),
                            np.abs(j.third[on_u, 0, 0, 0]))
        assert winner.min() > np.sqrt(100.0)


class TestLayerJets:
    def test_matches_finite_differences(self, rng):
        metric = flat_box()
        spec = tame_spec()
        pts = np.asarray(spec.center) + rng.uniform(-1.2, 1.2, size=(48, 3))
        lay = layer_metric_jets(spec, metric, pts)
        step = 1e-4
        for ax in range(3):
            e = np.zeros(3)
            e[ax] = step
            lp = layer_metric_jets(spec, metric, pts + e)
            lm = layer_metric_jets(spec, metric, pts - e)
            for got, hi_j, lo_j in ((lay.dg[..., ax], lp.g, lm.g),
                                    (lay.ddg[..., ax], lp.dg, lm.dg),
                                    (lay.dddg[..., ax], lp.ddg, lm.ddg)):
                fd = (hi_j - lo_j) / (2 * step)
                scale = max(1.0, np.abs(got).max())
                assert np.abs(fd - got).max() < 1e-3 * scale

    def test_matches_hand_assembly(self, rng):
        metric = flat_box()
        spec = tame_spec()
        pts = np.asarray(spec.center) + rng.uniform(-1.5, 1.5, size=(40, 3))
        lay = layer_metric_jets(spec, metric, pts)

        minv = np.linalg.inv(spec.frame)
        y = (pts - np.asarray(spec.center)) @ minv.T
        f = build_f(spec)
        chi, h = f.bump.jet3(y), f.wave.jet1(y[:, 0])
        val = chi.value * h.f0
        gr = chi.grad * h.f0[:, None]
        gr[:, 0] += chi.value * h.f1
        he = chi.hess * h.f0[:, None, None]
        he[:, 0, :] += chi.grad * h.f1[:, None]
        he[:, :, 0] += chi.grad * h.f1[:, None]
        he[:, 0, 0] += chi.value * h.f2
        th = chi.third * h.f0[:, None, None, None]
        for axes in ((0, slice(None), slice(None)),
                     (slice(None), 0, slice(None)),
                     (slice(None), slice(None), 0)):
            th[(slice(None),) + axes] += chi.hess * h.f1[:, None, None]
        for axes in ((0, 0, slice(None)), (0, slice(None), 0), (slice(None), 0, 0)):
            th[(slice(None),) + axes] += chi.grad * h.f2[:, None]
        th[:, 0, 0, 0] += chi.value * h.f3

        sym = np.outer(minv[1], minv[2])
        sym = sym + sym.T
        gx = gr @ minv
        hx = np.einsum("...ab,ai,bj->...ij", he, minv, minv)
        tx = np.einsum("...abc,ai,bj,ck->...ijk", th, minv, minv, minv)
        s = spec.s
        assert np.abs(s * val[:, None, None] * sym - lay.g).max() < 1e-12
        assert np.abs(s * np.einsum("...k,ij->...ijk", gx, sym) - lay.dg).max() < 1e-12
        assert np.abs(s * np.einsum("...kl,ij->...ijkl", hx, sym) - lay.ddg).max() < 1e-10
        assert np.abs(s * np.einsum("...klm,ij->...ijklm", tx, sym) - lay.dddg).max() < 1e-8

    def test_exactly_linear_in_s(self, rng):
        metric = flat_box()
        pts = rng.uniform(-1.0, 1.0, size=(30, 3))
        unit = layer_metric_jets(tame_spec(s=1.0), metric, pts)
        lay = layer_metric_jets(tame_spec(s=0.37), metric, pts)
        assert np.array_equal(lay.g, unit.g * 0.37)
        assert np.array_equal(lay.dg, unit.dg * 0.37)
        assert np.array_equal(lay.ddg, unit.ddg * 0.37)
        assert np.array_equal(lay.dddg, unit.dddg * 0.37)

    def test_zero_strength_and_locality(self, rng):
        metric = flat_box()
        spec = tame_spec(s=0.0)
        pts = rng.uniform(-3.0, 3.0, size=(100, 3))
        lay = layer_metric_jets(spec, metric, pts)
        for arr in (lay.g, lay.dg, lay.ddg, lay.dddg):
            assert np.all(arr == 0.0)
        spec = tame_spec(s=0.9)
        far = np.asarray(spec.center) + np.array([2.3, 0.0, 0.0])
        pts = far + rng.uniform(0.0, 1.0, size=(50, 3))
        lay = layer_metric_jets(spec, metric, pts)
        assert np.all(lay.g == 0.0) and np.all(lay.dddg == 0.0)
        base = metric_jet_many(metric, pts)
        layered = metric_jet_many(metric.with_layer(spec), pts)
        assert np.array_equal(layered.g, base.g)
        assert np.array_equal(layered.dddg, base.dddg)

    def test_symmetric_coefficients(self, rng):
        metric = flat_box()
        spec = tame_spec()
        pts = rng.uniform(-1.0, 1.0, size=(40, 3))
        lay = layer_metric_jets(spec, metric, pts)
        assert np.array_equal(lay.g, np.swapaxes(lay.g, -1, -2))
        assert np.array_equal(lay.dg, np.swapaxes(lay.dg, -3, -2))

    def test_periodic_seam(self):
        torus = zoo_metric("flat_torus")
        spec = PerturbationSpec(center=(0.02, 0.5, 0.5), frame=np.eye(3),
                                K=100.0, eps=0.01, rho=0.2, eta_pad=0.1, s=1e-2)
        f = build_f(spec)
        pt = np.array([[0.9, 0.5, 0.5]])
        lay = layer_metric_jets(spec, torus, pt)
        expect = spec.s * f(np.array([-0.12, 0.0, 0.0]))
        assert lay.g[0, 1, 2] == pytest.approx(expect, rel=1e-12)
        assert expect != 0.0


class TestAdaptedChart:
    def test_flat_axis_plane_gives_identity(self):
        torus = zoo_metric("flat_torus")
        plane = gs.orthonormal_plane(torus, (0.5, 0.5, 0.5),
                                     (1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
        chart, spec = adapted_chart(torus, plane)
        assert np.allclose(chart.frame, np.eye(3), atol=1e-15)
        assert np.allclose(chart.matrix, np.eye(3), atol=1e-15)
        assert spec.center == (0.5, 0.5, 0.5)
        assert spec.s == 0.0

    def test_tilted_plane_matches_hand_gram_schmidt(self):
        torus = zoo_metric("flat_torus")
        plane = gs.orthonormal_plane(torus, (0.5, 0.5, 0.5),
                                     (1.0, 1.0, 0.0), (0.0, 0.0, 1.0))
        chart, _ = adapted_chart(torus, plane)
        s2 = 1.0 / np.sqrt(2.0)
        expect = np.array([[s2, 0.0, s2], [s2, 0.0, -s2], [0.0, 1.0, 0.0]])
        assert np.abs(chart.frame - expect).max() < 1e-15

    def test_round_chart_frame_is_half_orthogonal(self):
        sphere = zoo_metric("round_sphere")
        plane = gs.orthonormal_plane(sphere, (0.0, 0.0, 0.0),
                                     (1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
        chart, _ = adapted_chart(sphere, plane)
        atta = chart.frame.T @ chart.frame
        assert np.abs(atta - np.eye(3) / 4.0).max() < 1e-14

    def test_round_trip_with_periodic_wrap(self, rng):
        torus = zoo_metric("flat_torus")
        plane = gs.plane_from_normal(torus, (0.05, 0.9, 0.5), (0.3, -0.2, 0.93))
        chart, _ = adapted_chart(torus, plane)
        y = rng.uniform(-0.2, 0.2, size=(40, 3))
        x = chart.from_adapted(y)
        assert np.all((x >= 0.0) & (x < 1.0))
        np.testing.assert_allclose(chart.to_adapted(x), y, atol=1e-12)

    def test_skeleton_frame_columns_are_plane_frame(self):
        nil = zoo_metric("nil")
        plane = gs.plane_from_normal(nil, (0.3, 0.6, 0.4), (0.2, -0.5, 0.84))
        _, spec = adapted_chart(nil, plane, K=10.0, eps=0.02, rho=0.1, eta_pad=0.05)
        assert np.array_equal(spec.frame[:, 0], plane.e1)
        assert np.array_equal(spec.frame[:, 1], plane.e2)
        assert np.array_equal(spec.frame[:, 2], plane.n)
        assert (spec.K, spec.eps, spec.rho, spec.eta_pad) == (10.0, 0.02, 0.1, 0.05)

    def test_rejects_non_orthonormal_frame(self):
        torus = zoo_metric("flat_torus")
        fake = TangentPlane(base=np.array([0.5, 0.5, 0.5]),
                            e1=np.array([2.0, 0.0, 0.0]),
                            e2=np.array([0.0, 1.0, 0.0]),
                            n=np.array([0.0, 0.0, 1.0]))
        with pytest.raises(ConfigurationError):
            adapted_chart(torus, fake)


class TestDeform:
    def spec(self, **kw):
        base = dict(center=(0.5, 0.5, 0.5), frame=np.eye(3), K=100.0,
                    eps=0.01, rho=0.2, eta_pad=0.1, s=1e-3)
        base.update(kw)
        return PerturbationSpec(**base)

    def test_zero_strength_is_identity(self, rng):
        torus = zoo_metric("flat_torus")
        g_s = deform(torus, self.spec(s=0.0))
        pts = rng.uniform(0.0, 1.0, size=(80, 3))
        a, b = metric_jet_many(torus, pts), metric_jet_many(g_s, pts)
        for x, y in ((a.g, b.g), (a.dg, b.dg), (a.ddg, b.ddg), (a.dddg, b.dddg)):
            assert np.array_equal(x, y)

    def test_untouched_outside_outer_ball(self, rng):
        torus = zoo_metric("flat_torus")
        spec = self.spec()
        g_s = deform(torus, spec)
        pts = rng.uniform(0.0, 1.0, size=(400, 3))
        d = torus.wrap_displacement(pts - np.asarray(spec.center))
        outside = np.linalg.norm(d, axis=1) > spec.outer
        assert outside.sum() > 100
        a = metric_jet_many(torus, pts[outside])
        b = metric_jet_many(g_s, pts[outside])
        assert np.array_equal(a.g, b.g)
        assert np.array_equal(a.dddg, b.dddg)

    def test_center_identities(self):
        torus = zoo_metric("flat_torus")
        spec = self.spec()
        g_s = deform(torus, spec)
        c = np.array([list(spec.center)])
        diff_g = metric_jet_many(g_s, c).g - metric_jet_many(torus, c).g
        diff_dg = metric_jet_many(g_s, c).dg - metric_jet_many(torus, c).dg
        assert diff_g[0, 1, 2] == 0.0
        eps_eff = build_f(spec).eps_eff
        assert diff_dg[0, 1, 2, 0] == pytest.approx(spec.s * eps_eff / 2, rel=1e-14)
        assert diff_dg[0, 0, 1, 0] == 0.0

    def test_too_large_scale_reports_max_admissible(self):
        metric = flat_box()
        f = build_f(tame_spec())
        line = np.zeros((2001, 3))
        line[:, 0] = np.linspace(-2.2, 2.2, 2001)
        sup_f = np.abs(f(line)).max()
        bad = tame_spec(s=5.0 / sup_f)
        with pytest.raises(DeformationTooLargeError) as err:
            deform(metric, bad)
        assert 0.0 < err.value.s_max < err.value.s_requested
        ok = deform(metric, tame_spec(s=0.5 * err.value.s_max))
        assert len(ok.layers) == 1

    def test_support_must_fit_in_chart(self):
        box = replace(zoo_metric("flat_torus"), periodic=(False, False, False))
        with pytest.raises(ConfigurationError):
            deform(box, self.spec(center=(0.1, 0.5, 0.5)))

    def test_support_must_fit_in_periodic_cell(self):
        torus = zoo_metric("flat_torus")
        with pytest.raises(ConfigurationError):
            deform(torus, self.spec(rho=0.3, eta_pad=0.25))

    def test_rejects_frame_not_orthonormal_for_metric(self):
        sphere = zoo_metric("round_sphere")
        spec = self.spec(center=(0.0, 0.0, 0.0))
        with pytest.raises(ConfigurationError):
            deform(sphere, spec)

    def test_json_round_trip_of_deformed_metric(self, rng):
        torus = zoo_metric("flat_torus")
        g_s = deform(torus, self.spec(s=1e-2))
        back = metric_from_json(metric_to_json(g_s))
        assert len(back.layers) == 1
        pts = rng.uniform(0.0, 1.0, size=(60, 3))
        a, b = metric_jet_many(g_s, pts), metric_jet_many(back, pts)
        np.testing.assert_allclose(b.g, a.g, rtol=1e-15, atol=0)
        np.testing.assert_allclose(b.ddg, a.ddg, rtol=1e-15, atol=1e-300)
