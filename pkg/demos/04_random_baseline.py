#!/usr/bin/env python3
"""Monte-Carlo random baselines and normalized skill scores.

Estimates the mean unique-interacting-pair count of uniformly random
scenarios at several traffic volumes, shows the controllability analog
(mean absolute deviation from a requested pair count), and turns a
hypothetical model result into a normalized skill.
"""

from atcgen import baseline, metrics, sectors

suite = sectors.generate_suite(0, 10, 7, 7)

print("MUIP of random scenarios (500 samples over 10 sectors, T=12):")
for n in (2, 5, 8, 15, 30):
    est = baseline.estimate_muip_rand(suite, n, 12, samples=500)
    print(f"  N={n:2d}:  {est.mean:6.2f}  (stderr {est.stderr:.3f})")

print("\nMADIP of random scenarios (N=10, T=12):")
for k in (1, 3, 5):
    est = baseline.estimate_madip_rand(suite, 10, 12, k, samples=500)
    print(f"  target k={k}:  {est.mean:5.2f}")

# A model that leaves 0.9 residual interactions against a 28.4 random
# baseline earns a skill just under 1; matching the baseline earns 0.
rand = baseline.estimate_muip_rand(suite, 30, 12, samples=500).mean
for value in (0.0, 0.9, rand / 2, rand):
    mu = metrics.normalized_skill(value, rand)
    print(f"\n  model MUIP {value:6.2f} vs random {rand:.2f} "
          f"-> skill {mu:.4f}", end="")
print()
