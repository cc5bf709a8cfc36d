"""Narrative demo: optimizing the measurement orientations of the
three-outcome (intermediate) discrimination scheme when the unknown state
is uniform over a Bloch cap of half-angle Delta around the reference.

For small and moderate caps the best choice is theta_M = theta_f = pi/2
(measure orthogonally, postselect orthogonally); once the prior covers the
full sphere (Delta = pi/2 in the coefficient-angle gauge) the optimal
theta_M collapses to 0.
"""
import math

from nullvalue import CapPrior, optimize_orientations

P = 0.1

for delta_max, label in ((0.1, "small cap"),
                         (math.pi / 4, "moderate cap"),
                         (math.pi / 2, "full sphere")):
    opt = optimize_orientations(P, CapPrior(delta_max), phi_f=0.0, grid=101)
    print(f"Delta = {delta_max:6.4f} ({label:12s}) -> "
          f"theta_M* = {opt.theta_M:6.4f}, theta_f* = {opt.theta_f:6.4f}, "
          f"mean error = {opt.p_err:.6f}")
