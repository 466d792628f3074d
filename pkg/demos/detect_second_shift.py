"""
Is there one component or two?
==============================

Bootstrap tests of u1 = u2 on data with and without a second shift.
"""

from slcmix.hypotest import lr_test, lrskde_test, nsbs_test, nsbskde_test
from slcmix.simulate import Scenario, generate, power_study

tests = {"lr": lr_test, "nsbs": nsbs_test, "nsbskde": nsbskde_test, "lrskde": lrskde_test}

for delta in (0.0, 3.0):
    x = generate(Scenario("normal", 0.2, 0.0, delta, 250, seed=11))
    print(f"delta = {delta}")
    for name, test in tests.items():
        rep = test(x, B=49, alpha=0.1, seed=5)
        print(f"  {name:8s} statistic {rep.statistic:8.3f}  critical {rep.critical_value:8.3f}  "
              f"p {rep.p_value:.2f}  reject {rep.reject}")

# a small power study; every replication has its own random substream
summary = power_study("normal", 0.2, 3.0, n=150, reps=10, B=19, alpha=0.1, seed=1, methods=("lr", "nsbs"))
print("rejection rates over 10 replications:", {m: summary[m] for m in ("lr", "nsbs")})
