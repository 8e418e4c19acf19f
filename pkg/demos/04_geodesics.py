"""
Geodesic values in the Heisenberg group
=======================================

A penalty method over piecewise-constant controls finds controls of
small L-infinity energy reaching a target; their energy bounds the
distance from above.
"""
import numpy as np

from carnot_spheres import algebra as alg
from carnot_spheres import control as ctl
from carnot_spheres import norms

H = alg.heisenberg()
z = 1 / (4 * np.pi)

cases = [("euclidean", [1.0, 0.0, 0.0], 16), ("l1", [1.0, 1.0, 0.0], 16),
         ("euclidean", [0.0, 0.0, z], 64)]
for norm, target, m in cases:
    sol = ctl.geodesic_solve(H, norm, target, m=m, restarts=4, seed=0)
    print(f"{norm:<9} {target} -> {sol.value:.5f}  (end-point error {sol.endpoint_error:.1e})")

print("closed form on the center axis:", np.sqrt(4 * np.pi * z))
print("closed form at a generic point:", norms.heisenberg_cc_norm(np.array([0.3, 0.4, 0.05])))
