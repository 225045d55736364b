"""Show why a causal estimator wants all pilot energy on the last pilot.

For a few Gauss-Markov correlations, enumerate every split of a fixed pilot
budget across four clustered pilots and compare the best split with the
all-on-last corner.  Then print the resulting data-slot error variances.
"""
import numpy as np

from psamtrain import PilotPattern, causal_error_variance_gm, theory

K, BUDGET, NOISE = 4, 4.0, 1.0

for alpha in (0.5, 0.9, 0.99):
    rep = theory.verify_theorem1(alpha, K, BUDGET, NOISE, BUDGET / 40)
    print(f"alpha={alpha}: best of {rep.n_points} splits {np.round(rep.best_allocation, 3)} "
          f"phi={rep.best_phi:.6f}, corner phi={rep.corner_phi:.6f}")

alpha = 0.99
for powers in ((1.0, 1.0, 1.0, 1.0), (0.0, 0.0, 0.0, 4.0)):
    pat = PilotPattern(12, K, "causal", powers)
    v = causal_error_variance_gm(alpha, pat, NOISE).variances
    print(f"pilots {powers}: data-slot error variances {np.round(v, 4)}")
