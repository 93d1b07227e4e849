"""Walkthrough: verifying smoothness and locality claims.

Run: python demos/verify_properties.py
"""

import numpy as np

from ossmax import (
    OssObjective,
    make_coverage_instance,
    make_semimetric_instance,
    verify_eta_local,
    verify_oss,
    verify_semimetric,
)

print("=" * 70)
print("1. Distance matrices satisfy the semi-metric triple bound at sigma=1")
print("=" * 70)

quadratic = make_semimetric_instance([0.0, 1.0, 3.0], [1.0, 1.0, 1.0])
print("M =")
print(quadratic.M)
print(verify_semimetric(quadratic.M, 1.0).summary())
print("(the 0-2 distance is tight: 3 = 1 + 2, so the worst violation is 0)")

print()
print("corrupting one entry breaks the bound and names the triple:")
corrupted = quadratic.M.copy()
corrupted[0, 2] = corrupted[2, 0] = 10.0
report = verify_semimetric(corrupted, 1.0)
print(report.summary())

print()
print("=" * 70)
print("2. Sampled smoothness checks")
print("=" * 70)

coverage = make_coverage_instance(n=5, m=7, density=0.4, seed=41)
print("coverage objective,", verify_oss(coverage, 0.0, trials=1000, seed=1).summary())
print("quadratic objective,", verify_oss(quadratic, 1.0, trials=1000, seed=2).summary())

# A convex quartic violates one-sided 0-smoothness at every sampled point.
quartic = OssObjective(
    3,
    lambda x: (x.sum() / 3.0) ** 4,
    lambda x: np.full(3, 4.0 * x.sum() ** 3 / 81.0),
    lambda x, u: 12.0 * x.sum() ** 2 * u.sum() ** 2 / 81.0,
)
bad = verify_oss(quartic, 0.0, trials=100, seed=3)
print("convex quartic,", bad.summary())
x, u = bad.witness
print(f"  witness: x={np.round(x, 3)}, u={np.round(u, 3)}")

print()
print("=" * 70)
print("3. Gradient locality along feasible rays")
print("=" * 70)

print("quadratic (gradient nondecreasing),", verify_eta_local(quadratic, 0.0, trials=500, seed=4).summary())
print("coverage at eta=0 (gradient decays),", verify_eta_local(coverage, 0.0, trials=500, seed=5).summary())
print("coverage at eta=12,", verify_eta_local(coverage, 12.0, trials=500, seed=6).summary())
