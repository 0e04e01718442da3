"""
Flat space in both charts
=========================

The flat potential on C^4 solves the symplectic Monge-Ampère system exactly.
After the gauge shift that removes its dependence on Re q1 it becomes a
function of the reduced coordinates, and that function solves the reduced
system.
"""

import numpy as np

from hkreduce import coords, potentials, residuals

# a seeded grid in the reduced box, and full points built from it
reduced = coords.default_reduced_grid(1000, seed=0)
full = coords.default_full_grid(1000, seed=0)

H = potentials.flat_H()
res = residuals.reduced_residuals(H, reduced)
print("reduced residuals, max |r_k| per equation:")
print(np.abs(res.stack()).max(axis=0))

# the full system sees exactly zero for both flat potentials
for pot in (potentials.flat_omega(), potentials.flat_omega_prime()):
    print(pot.name, "full sup-norm:", residuals.full_residuals(pot, full).sup())

# lifting H back to C^4 reproduces the gauge-shifted potential
lift = residuals.lift_potential(H)
gap = np.abs(lift.value(full) - potentials.flat_omega_prime().value(full)).max()
print("max |lift(H) - Omega'|:", gap)
