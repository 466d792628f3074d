"""
Assigning observations to the two groups
========================================

Label each observation by whether its posterior probability of the first
shift exceeds 1/2, under four models for the common component.
"""

import numpy as np

from slcmix.cluster import classify, misclassification_count
from slcmix.simulate import Scenario, generate_labeled

for component in ("normal", "uniform"):
    x, truth = generate_labeled(Scenario(component, 0.2, 0.0, 1.0, 500, seed=4))
    print(f"{component}: pi = 0.2, shifts 0 and 1, n = 500")
    for method in ("g", "hg", "slc", "kde"):
        res = classify(x, method, param_method="symmetry_md")
        print(f"  {method:3s} misclassified {misclassification_count(res.labels, truth):3d}  "
              f"group sizes {np.bincount(res.labels)[1:]}")

# the rule splits the line into two half-lines: one crossing between the centres
x, truth = generate_labeled(Scenario("normal", 0.3, 0.0, 3.0, 500, seed=2))
res = classify(x, "slc")
order = np.argsort(x)
changes = np.flatnonzero(np.diff(res.labels[order]))
print("label changes along the sorted sample:", changes.size, "at x =", np.round(x[order][changes], 3))
