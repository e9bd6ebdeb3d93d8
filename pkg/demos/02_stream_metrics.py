"""Canonical stream transforms and the p-variation distance profile.

Shows time augmentation and the lead-lag embedding (which exposes
quadratic-variation information as Levy area), then the dyadic-refinement
lower bounds for the signature p-variation distance between two streams.
"""

import numpy as np

from sigstream import Stream, dp_distance_estimate, lead_lag, signature, time_augment
from sigstream.tensor_algebra import Word, inner

print("=== Time augmentation ===")
flat = Stream([0.0, 1.0, 2.0], [[5.0], [5.0], [5.0]])
aug = time_augment(flat)
print(f"  constant 1-D stream -> {aug.dimension}-D; level-1 signature:",
      signature(aug, 1).levels[1], "(only the time coordinate moves)\n")

print("=== Lead-lag embedding ===")
steps = Stream([0.0, 1.0, 2.0], [[0.0], [1.0], [3.0]])
ll = lead_lag(steps)
sig = signature(ll, 2)
area = 0.5 * (inner(Word((1, 2)), sig) - inner(Word((2, 1)), sig))
quad_var = float((steps.increments() ** 2).sum())
print(f"  samples double: {steps.n_samples} -> {ll.n_samples}")
print(f"  Levy area of the lead-lag path = {area:.6f}")
print(f"  half the quadratic variation   = {quad_var / 2:.6f}")
print("  (lead moves first, so the area accumulates half of sum dx^2)\n")

print("=== p-variation distance estimates ===")
rng = np.random.default_rng(3)
base = rng.standard_normal((17, 2)).cumsum(axis=0) * 0.4
times = np.linspace(0.0, 1.0, 17)
a = Stream(times, base)
b = Stream(times, base + 0.05 * rng.standard_normal((17, 2)))
for p in (1.0, 2.0):
    report = dp_distance_estimate(a, b, p=p, max_level=6)
    profile = ", ".join(f"{v:.4f}" for v in report.estimates)
    print(f"  p = {p}: dyadic lower bounds by level: [{profile}]")
print("Each entry refines the partition; the sequence climbs toward the")
print("supremum over all partitions and certifies it from below.")
