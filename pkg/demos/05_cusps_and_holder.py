"""
Cusps, corners and Holder exponents
===================================

For a product G x R with distance sqrt(N^2 + t^2), the sphere near the
pole along a top-layer direction Z behaves like |z| ~ (1 - t)^e.  The
exponent tells a cusp (e > 1) from a corner (e = 1) and a smooth cap.
"""
from carnot_spheres import algebra as alg
from carnot_spheres import experiments
from carnot_spheres import norms
from carnot_spheres import spheres

E = alg.engel()
ball = norms.euclidean_ball_candidate(E, 0.5)
print("Engel Euclidean ball r = 0.5 is a unit ball:",
      norms.verify_ball_conditions(E, ball, 5000, seed=0)["passed"])

for label, gauge, Z in (("Engel", experiments.engel_gauge(), [0, 0, 0, 1]),
                        ("Heisenberg", norms.heisenberg_cc_gauge(), [0, 0, 1]),
                        ("abelian", norms.euclidean_gauge(), [1, 0])):
    fit = spheres.product_cusp_exponent(gauge, Z)
    print(f"{label:<11} e = {fit['estimate']:.3f}  {fit['classification']}")

cc = norms.heisenberg_cc_gauge()
for name, region in (("center line", {"kind": "line", "base": [0, 0, 0], "direction": [0, 0, 1]}),
                     ("horizontal", {"kind": "line", "base": [1, 0, 0], "direction": [0, 1, 0]})):
    est = spheres.graph_regularity_estimate(cc, region)
    print(f"Heisenberg gauge along the {name}: exponent {est['holder_exponent']:.3f}")
