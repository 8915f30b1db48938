"""A small budgeted genericization run, end to end.

Scans a flat torus (rigid everywhere), covers the rigid planes with
deformation balls, spends the C^3 budget, and prints the certificate:
per-iteration history, budget accounting, and the final scan minimum.
Deliberately small so it finishes in well under a minute; the flagship
configuration (8^3 base, 32 fiber) lives in the acceptance suite.
"""

from geosieve import RunConfig, genericize, zoo_metric

cfg = RunConfig(metric=zoo_metric("flat_torus"), xi=0.05,
                base_grid=(6, 6, 6), fiber_grid=4, max_iterations=2,
                seed=0)
cert = genericize(cfg)

print(f"succeeded    : {cert.succeeded}")
print(f"stop reason  : {cert.stop_reason}")
print(f"iterations   : {cert.iterations}")
print(f"balls placed : {len(cert.balls)}")
print(f"final min G  : {cert.final_minG:.6g} (target {cert.target_margin})")
print(f"C^3 used     : {cert.c3_used:.6g} of budget {cert.xi}")
print(f"sum of costs : {sum(b['cost'] for b in cert.balls):.6g}")
print()
for row in cert.history:
    flag = "accepted" if row["accepted"] else "rejected"
    print(f"iteration {row['iteration']}: {flag}, {row['balls']} balls, "
          f"min {row['min_before']:.3g} -> {row['min_after']:.3g}")
print()

# Already-generic input: the loop exits before placing anything.
bumpy = zoo_metric("random_fourier", seed=7, amp=0.01)
cert2 = genericize(RunConfig(metric=bumpy, xi=0.05, base_grid=(4, 4, 4),
                             fiber_grid=8, seed=7))
print(f"random_fourier: succeeded={cert2.succeeded} with "
      f"{len(cert2.balls)} balls in {cert2.iterations} iterations "
      f"(min G = {cert2.final_minG:.6g})")
