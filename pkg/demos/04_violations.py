"""
When the equations fail
=======================

Small perturbations of flat H break the system.  The reduced residuals, the
residuals of the lift and the form-algebra defect all notice, and the exact
map between the two residual vectors holds whether or not they vanish.
"""

from hkreduce import coords, forms, potentials, residuals

x = coords.default_full_grid(300, seed=4)
print(f"{'potential':26s} {'reduced':>9s} {'full':>9s} {'forms':>9s} {'map':>9s}")
for name, H in {"flat-H": potentials.flat_H(), **potentials.violation_suite()}.items():
    c = residuals.reduction_consistency(H, x)
    algebra = forms.hyperkahler_algebra_defect(residuals.lift_potential(H), x).max
    print(f"{name:26s} {c.sup_reduced:9.2e} {c.sup_full:9.2e} {algebra:9.2e} {c.max_deviation:9.2e}")
