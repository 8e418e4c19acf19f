"""
A sphere with a fractal arc in the (2,2) plane
==============================================

With both coordinates of weight 2, any convex-looking region whose
boundary is "square-root regular" can serve as a unit ball.  Intersecting
rotated square-root regions along a Weierstrass-type profile gives a ball
whose boundary arc is a rough graph.
"""
import time

import numpy as np

from carnot_spheres import algebra as alg
from carnot_spheres import norms
from carnot_spheres import plane
from carnot_spheres import spheres

P = alg.builtin("plane22")

# the square-root region Y_C is a ball exactly up to C = 1
for C in (1.0, 1.25):
    rep = norms.verify_ball_conditions(P, plane.y_c(C).ball(), 50_000, seed=0, which=("combination",))
    print(f"Y_{C}: combination violations = {rep['checks'][0]['violations']}")
print("explicit witness for C = 1.25:", plane.y_region_witness(1.25))

params = plane.FractalBallParams.default()
print("parameters:", params.to_dict())
ball = plane.build_fractal_ball(params)

t0 = time.perf_counter()
ts = plane.arc_samples(params, 100_000)
dim = spheres.box_counting_dimension(graph=(ts, params.f(np.pi / 2 + ts)), scales=(4, 11))
print(f"box dimension of the arc: {dim['dimension']:.3f} +- {dim['ci']:.3f} "
      f"({time.perf_counter() - t0:.1f} s)")

rep = norms.verify_ball_conditions(P, ball, 20_000, seed=1)
print("ball verified:", rep["passed"])

# a Lipschitz domain whose gauge is only 1/2-Holder at the top point
g = norms.ball_gauge(P, plane.remark_ball())
est = spheres.graph_regularity_estimate(g, {"kind": "line", "base": [0, 1], "direction": [1, 0]})
print("remark ball exponent at (0, 1):", round(est["holder_exponent"], 3))
