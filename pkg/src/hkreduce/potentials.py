"""Built-in Kähler potentials and holomorphic gauge shifts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Tuple

import numpy as np

from . import coords, jets
from .jets import DomainError, Jet, RealCoordsLayout


def _no_check(values):
    pass


@dataclass(frozen=True)
class Potential:
    """A named real scalar field on one of the coordinate charts.

    ``expression`` is called with keyword arguments named after the chart's
    coordinates (complex ones assembled) and must be built from the
    vocabulary in :mod:`hkreduce.jets`, so it accepts plain arrays and jets.
    ``check`` receives the plain coordinate values and raises
    :class:`DomainError` if the point is outside the domain.
    """

    name: str
    coords: str
    expression: Callable = field(repr=False)
    domain: str = "everywhere"
    check: Callable = field(default=_no_check, repr=False)

    @property
    def layout(self) -> RealCoordsLayout:
        return coords.LAYOUTS[self.coords]

    def to_real(self, point) -> np.ndarray:
        return coords.point_to_real(point, self.layout)

    def _checked(self, x):
        x = self.to_real(x)
        if not np.all(np.isfinite(x)):
            raise DomainError("non-finite coordinates")
        self.check(self.layout.values(x))
        return x

    def value(self, point) -> np.ndarray:
        x = self._checked(point)
        return np.asarray(self.expression(**self.layout.values(x)))

    def jet(self, point, order: int = 2) -> Jet:
        x = self._checked(point)
        out = self.expression(**self.layout.variables(x, order))
        if not isinstance(out, Jet):
            # constant field
            out = Jet._lift(np.broadcast_to(out, x.shape[:-1]), order, self.layout.dim)
        return out

    def __call__(self, **kw):
        return self.expression(**kw)


# -- flat space -------------------------------------------------------------

def _flat_omega(q1, q2, p1, p2):
    return jets.abs2(q1) + jets.abs2(q2) + jets.abs2(p1) + jets.abs2(p2)


def _flat_H(q, zeta, v, rho):
    return 0.5 * v * v + jets.abs2(q) + jets.exp(rho) * (1 + jets.abs2(zeta))


def flat_omega() -> Potential:
    return Potential("flat-omega", "full", _flat_omega)


def flat_omega_prime() -> Potential:
    """Flat potential with the gauge ``F = -(q1)^2 / 2`` that removes the u-dependence."""
    p = apply_gauge(flat_omega(), GaugeFunction({(2, 0, 0, 0): -0.5}))
    return Potential("flat-omega-prime", "full", p.expression)


def flat_H() -> Potential:
    """``H = v^2/2 + |q|^2 + e^rho (1 + |zeta|^2)``."""
    return Potential("flat-H", "reduced", _flat_H)


# -- Calabi metric on T*(CP^2) ------------------------------------------------

def calabi_formula(zsq, wsq, cross):
    """Calabi potential from ``|z|^2``, ``|w|^2`` and ``|z.w|^2``."""
    t = (1 + zsq) * (wsq + cross)
    root = jets.sqrt(1 + 4 * t)
    return jets.log(1 + zsq) + root - jets.log(1 + root)


def _calabi_omega(z1, z2, w1, w2):
    zsq = jets.abs2(z1) + jets.abs2(z2)
    wsq = jets.abs2(w1) + jets.abs2(w2)
    cross = jets.abs2(z1 * w1 + z2 * w2)
    return calabi_formula(zsq, wsq, cross)


def _calabi_H(q, zeta, v, rho):
    return calabi_formula(*coords.calabi_moduli_fields(q, zeta, v, rho))


def _safe_box_check(values):
    ok = coords.in_safe_box(values["q"], values["zeta"], values["v"], values["rho"])
    if not np.all(ok):
        bad = int(np.flatnonzero(np.ravel(~ok))[0])
        raise DomainError(f"point {bad} is outside the Calabi safe box "
                          "(|Im q| <= 1, |zeta| <= 2, |v| <= 2, |rho| <= 2)")


def calabi_omega_full() -> Potential:
    return Potential("calabi-omega", "calabi", _calabi_omega)


def calabi_H_reduced() -> Potential:
    return Potential("calabi-H", "reduced", _calabi_H,
                     domain="Calabi safe box", check=_safe_box_check)


# -- gauge shifts -------------------------------------------------------------

@dataclass(frozen=True)
class GaugeFunction:
    """Holomorphic polynomial ``F``: exponent tuple -> complex coefficient.

    Exponents refer to the complex coordinates of the base chart in order,
    e.g. ``(q1, q2, p1, p2)``.
    """

    terms: Mapping[Tuple[int, ...], complex]

    def __call__(self, *zs):
        total = 0
        for powers, c in self.terms.items():
            if len(powers) != len(zs):
                raise ValueError("exponent tuple does not match the number of coordinates")
            term = c
            for z, k in zip(zs, powers):
                if k:
                    term = z ** int(k) * term
            total = term + total
        return total


def apply_gauge(base: Potential, F: GaugeFunction) -> Potential:
    """``base + F + conj(F)``."""
    if base.coords == "reduced":
        raise ValueError("gauge shifts act on holomorphic charts only")
    names = base.layout.complex_names

    def expression(**kw):
        shift = F(*(kw[n] for n in names))
        return base.expression(**kw) + 2 * jets.real(shift)

    return Potential(f"{base.name}+gauge", base.coords, expression, base.domain, base.check)


BUILTINS: Dict[str, Callable[[], Potential]] = {
    "flat-omega": flat_omega,
    "flat-omega-prime": flat_omega_prime,
    "flat-H": flat_H,
    "calabi-omega": calabi_omega_full,
    "calabi-H": calabi_H_reduced,
}


def get(name: str) -> Potential:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown potential {name!r}; choose from {sorted(BUILTINS)}") from None


# -- perturbations of flat H that break the system ------------------------------

def _perturbed_H(name, extra):
    def expression(q, zeta, v, rho):
        return _flat_H(q, zeta, v, rho) + extra(q, zeta, v, rho)
    return Potential(name, "reduced", expression)


VIOLATIONS: Dict[str, Callable[[], Potential]] = {
    "flat-H+0.1v^3": lambda: _perturbed_H(
        "flat-H+0.1v^3", lambda q, zeta, v, rho: 0.1 * v ** 3),
    "flat-H+0.05|q|^4": lambda: _perturbed_H(
        "flat-H+0.05|q|^4", lambda q, zeta, v, rho: 0.05 * jets.abs2(q) ** 2),
    "flat-H+0.1e^rho|zeta|^4": lambda: _perturbed_H(
        "flat-H+0.1e^rho|zeta|^4", lambda q, zeta, v, rho: 0.1 * jets.exp(rho) * jets.abs2(zeta) ** 2),
    "flat-H+0.1v e^rho": lambda: _perturbed_H(
        "flat-H+0.1v e^rho", lambda q, zeta, v, rho: 0.1 * v * jets.exp(rho)),
    "flat-H+0.1(Re q)^2 v": lambda: _perturbed_H(
        "flat-H+0.1(Re q)^2 v", lambda q, zeta, v, rho: 0.1 * jets.real(q) ** 2 * v),
}


def violation_suite() -> Dict[str, Potential]:
    """Five small perturbations of flat H, none of which solves the system."""
    return {name: make() for name, make in VIOLATIONS.items()}
