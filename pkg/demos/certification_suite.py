"""Run every certification check once and print one verdict per line.

Same checks the CLI exposes under `geosieve certify`, called through the
library.  The difference laws run on a flat torus with an axis-aligned
layer; the growth checks use the scenarios frozen in the test suite.
"""

from geosieve import (adapted_chart, check_christoffel_diffs,
                      check_curvature_diffs, check_field_bounds,
                      check_inverse_diffs, check_lemC, check_main_lemma,
                      check_product_bounds, check_wave_bounds,
                      plane_from_normal, zoo_metric)

torus = zoo_metric("flat_torus")
plane = plane_from_normal(torus, (0.5, 0.5, 0.5), (0.0, 0.0, 1.0))
_, spec = adapted_chart(torus, plane, K=100.0, eps=0.01, rho=0.2,
                        eta_pad=0.1)
layered = torus.with_layer(spec)
s_values = (0.0, 1e-3, 1e-2)

bumpy = zoo_metric("random_fourier", seed=7, amp=0.01)
bumpy_plane = plane_from_normal(bumpy, (0.5, 0.5, 0.5), (0.2, -0.3, 0.93))
_, bumpy_spec = adapted_chart(bumpy, bumpy_plane, K=100.0, eps=0.01,
                              rho=0.2, eta_pad=0.1)


def family(s):
    return bumpy.with_layer(bumpy_spec.with_s(s)) if s else bumpy


reports = [
    check_wave_bounds(K=100.0, eps=0.01),
    check_field_bounds(K=100.0, eps=0.01, rho=0.2, eta_pad=0.1),
    check_christoffel_diffs(torus, layered, spec, s_values),
    check_inverse_diffs(torus, layered, spec, s_values),
    check_curvature_diffs(torus, layered, spec, s_values),
    check_main_lemma(torus, plane, spec, (1e-3, 1e-2)),
    check_lemC(bumpy, family, [(bumpy_plane, 0.35)], [(bumpy_plane, 0.15)],
               (1e-3, 1e-2), seed=5),
    check_product_bounds(trials=1000, seed=7),
]

for report in reports:
    verdict = "PASS" if report.passed else "FAIL"
    fitted = getattr(report, "fitted_constant", None)
    if fitted is None:
        fitted = report.slope_c
    print(f"{report.name:32s} {verdict}  max_residual={report.max_residual:.6g}"
          f"  fitted={fitted:.6g}")
