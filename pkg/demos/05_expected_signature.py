"""Expected signature of Brownian motion stopped at the unit circle.

The tensor-valued expectation solves a ladder of Poisson problems: each
level's components have sources built from the two levels below.  The demo
solves the recurrence on a grid, checks the center values against the
analytic ones (level-2 diagonal 1/4, level-4 paired words 1/64), compares
with a stopped-path Monte Carlo, and prints the radius diagnostic profile.
"""

import numpy as np

from sigstream import DiskDomain, GridDomain, mc_expected_sig, radius_diagnostic, solve_recurrence

disk = DiskDomain(1.0)

print("=== PDE recurrence on the unit disk (grid h = 0.02) ===")
grid = GridDomain(disk, 0.02)
field = solve_recurrence(grid, 4)
center = field.center_values()
lvl2 = center.levels[2].reshape(2, 2)
lvl4 = center.levels[4].reshape(2, 2, 2, 2)
print(f"  E<S,(1,1)> at centre = {lvl2[0, 0]:.8f}   (analytic 1/4)")
print(f"  E<S,(1,2)> at centre = {lvl2[0, 1]:+.1e}    (vanishes by symmetry)")
print(f"  E<S,(1,1,2,2)> at centre = {lvl4[0, 0, 1, 1]:.8f}   (analytic 1/64 = {1 / 64:.8f})")
print(f"  odd levels at centre: max |f3| = {np.abs(center.levels[3]).max():.1e}\n")

print("=== Monte Carlo cross-check (20k paths, dt = 5e-4) ===")
mc = mc_expected_sig(disk, (0.0, 0.0), 3, paths=20_000, dt=5e-4, seed=12)
for k in range(1, 4):
    diff = np.abs(mc.mean.levels[k] - center.levels[k][: 2**k])
    z = diff / np.maximum(mc.stderr[k], 1e-15)
    print(f"  level {k}: max |PDE - MC| = {diff.max():.2e}  (worst z = {z.max():.2f})")
print()

print("=== Radius diagnostic at the centre ===")
diag = radius_diagnostic(field)
print("  level:     " + "  ".join(f"{n:>9d}" for n in range(5)))
print("  |f_n| l1:  " + "  ".join(f"{v:9.3e}" for v in diag.norms_l1))
print("  ratios:    " + "  ".join(f"{v:9.3e}" for v in diag.ratios_l1))
print("Odd levels vanish (the stopped law is symmetric), so consecutive")
print("ratios alternate with zero; the even-level profile stays finite and")
print("positive.  No determinacy claim follows - the profile is reported")
print("for extrapolation only.")
