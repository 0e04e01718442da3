"""
Recovering flat space by collocation
====================================

Start from the flat coefficients plus noise and let Levenberg-Marquardt find
its way back to a solution of the reduced system.  Solutions are not unique,
so the recovered coefficients need not equal the flat ones; only the
residual is judged.
"""

import logging

import numpy as np

from hkreduce import solver

logging.basicConfig(level=logging.INFO)

pts = solver.collocation_points(400, seed=0)
start = solver.perturbed_start(degree=3, noise=1e-2, seed=0)
out = solver.solve(start, pts)

print(out.message, "after", out.iterations, "iterations")
for k, (s, r) in enumerate(zip(out.sup_history, out.rms_history)):
    print(f"  step {k:2d}: sup {s:.3e}  rms {r:.3e}")

fresh = solver.collocation_points(400, seed=1)
print("sup residual on a fresh point set:", solver.verify_on(out.coefficients, fresh))

drift = out.coefficients.coefficients - solver.BasisExpansion.flat(3).coefficients
print("distance from the flat coefficients:", np.linalg.norm(drift))

# a linear basis cannot represent any solution
low = solver.solve(solver.BasisExpansion.zeros(1), pts, solver.SolveConfig(max_iter=10))
print("degree 1:", low.converged, "best sup residual", min(low.sup_history))
