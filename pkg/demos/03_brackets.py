"""
The reduced Poisson bracket
===========================

Brackets act on jets, so nesting them only costs one extra derivative order.
That makes the Jacobi identity a direct numerical check.
"""

import numpy as np

from hkreduce import brackets, coords, jets, potentials

x = coords.ReducedPoint(0.2 + 0.1j, 0.5 - 0.3j, 0.4, 0.0).to_real()
print("{rho, v} at rho = 0:",
      brackets.reduced_bracket(lambda q, zeta, v, rho: rho, lambda q, zeta, v, rho: v, x))

defects = brackets.jacobi_suite(trials=100, seed=1)
print("Jacobi defect over 100 random cubic triples: max %.2e" % defects.max())

# the reduced bracket is the original one divided by conj(p1), on invariant functions
full = coords.default_full_grid(200, seed=2)
H = potentials.flat_H()


def H_rho(q, zeta, v, rho):
    return jets.exp(rho) * (1 + jets.abs2(zeta))


d = brackets.remark2_relation_defect(H_rho, H, full)
print("bracket relation defect on 200 points: %.2e" % np.abs(d).max())
