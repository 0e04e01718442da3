"""
The Calabi metric on T*(CP^2)
=============================

Calabi's potential is checked twice: in the affine chart ``(z, w)`` against
the full system, and through the standard-form substitution as a function of
the reduced coordinates against the reduced system.
"""

import numpy as np

from hkreduce import coords, forms, potentials, residuals

Omega = potentials.calabi_omega_full()
print("Omega at z=(1,1), w=(0,-i):", Omega.value(coords.CalabiPoint(1, 1, 0, -1j)))

grid = coords.default_calabi_grid(50)
rep = residuals.report(Omega, "full", grid)
print("full system sup-norm:", rep.sup_norm, "pass:", rep.passed, "scale:", rep.detected_scale)

# the Kähler form is positive: smallest eigenvalue of the complex Hessian
h = forms.complex_hessian(Omega, grid)
print("min eigenvalue of the complex Hessian:", np.linalg.eigvalsh(h).min())

H = potentials.calabi_H_reduced()
x = coords.default_reduced_grid(50, 0, coords.CALABI_BOX)
print("reduced system sup-norm:", residuals.reduced_residuals(H, x).sup())

# outside the documented safe box the reduced potential refuses to evaluate
try:
    H.value(coords.ReducedPoint(0, 0, 0, 10.0))
except ValueError as exc:
    print("domain check:", exc)
