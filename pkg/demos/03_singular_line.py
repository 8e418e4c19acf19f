"""
Singular controls and minimal stretching
========================================

tau measures how much of a neighborhood the end-point differential
covers.  In the Heisenberg group times a line, moving straight along the
extra factor is a singular curve, while every other constant direction
is regular.
"""
import numpy as np

from carnot_spheres import algebra as alg
from carnot_spheres import control as ctl

HR = alg.heisenberg_times_line()

for d in ([0, 0, 1], [1, 0, 0], [1, 1, 1]):
    u = ctl.ControlSignal.constant(np.array(d, float) / np.linalg.norm(d), 16)
    print(d, "tau =", f"{ctl.tau(HR, u):.3e}")

scan = ctl.singular_scan(HR, m=16, count=60)
print("flagged direction classes:", [c["label"] for c in scan["classes"]])
print("smallest tau among the rest:", round(scan["min_unflagged_tau"], 4))

E = alg.engel()
scan = ctl.singular_scan(E, m=16, count=60)
print("Engel flagged classes:", [c["label"] for c in scan["classes"]])
