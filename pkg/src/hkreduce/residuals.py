"""Residuals of the reduced system and of the full symplectic Monge-Ampère system.

Reduced system for ``H(q, zeta, v, rho)``::

    r1 = {H_rho, i H_v} - 1        r4 = {i H_v, H_zetabar}
    r2 = {H_zetabar, H_qbar} - 1   r5 = {H_rho, H_zetabar}
    r3 = {H_rho, H_qbar} - zetabar r6 = {i H_v, H_qbar}

Full system for ``Omega(q1, q2, p1, p2)`` with the original bracket::

    C[i, j] = {Omega_pbar_i, Omega_qbar_j} - delta_ij
    A       = {Omega_qbar_1, Omega_qbar_2}
    B       = {Omega_pbar_1, Omega_pbar_2}
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import coords
from .brackets import original_bracket_jet, reduced_bracket_jet
from .jets import DomainError, WirtingerView
from .potentials import Potential

REDUCED_NAMES = ("r1", "r2", "r3", "r4", "r5", "r6")
FULL_NAMES = ("C11", "C12", "C21", "C22", "A", "B")

TOL_FLAT = 1e-10
TOL_CALABI = 1e-8


@dataclass(frozen=True)
class ReducedResiduals:
    r1: np.ndarray
    r2: np.ndarray
    r3: np.ndarray
    r4: np.ndarray
    r5: np.ndarray
    r6: np.ndarray

    def stack(self) -> np.ndarray:
        """Shape ``batch + (6,)``."""
        return np.stack([self.r1, self.r2, self.r3, self.r4, self.r5, self.r6], axis=-1)

    def sup(self) -> float:
        return float(np.max(np.abs(self.stack()))) if self.stack().size else 0.0


@dataclass(frozen=True)
class FullResiduals:
    C: np.ndarray  # batch + (2, 2); C[i, j] pairs Omega_pbar_i with Omega_qbar_j
    A: np.ndarray
    B: np.ndarray

    def stack(self) -> np.ndarray:
        """Shape ``batch + (6,)`` in the order C11, C12, C21, C22, A, B."""
        C = self.C
        return np.stack([C[..., 0, 0], C[..., 0, 1], C[..., 1, 0], C[..., 1, 1],
                         self.A, self.B], axis=-1)

    def sup(self) -> float:
        return float(np.max(np.abs(self.stack()))) if self.stack().size else 0.0


def reduced_residuals(H: Potential, at) -> ReducedResiduals:
    """The six reduced residuals at one or many reduced points."""
    if H.coords != "reduced":
        raise ValueError(f"{H.name} is not a potential in reduced coordinates")
    x = H._checked(at)
    frame = coords.REDUCED.variables(x, 1)
    D = WirtingerView(H.jet(x, 2), coords.REDUCED)
    h_rho = D.partial("rho")
    ih_v = 1j * D.partial("v")
    h_zb = D.dbar("zeta")
    h_qb = D.dbar("q")

    def br(a, b):
        return reduced_bracket_jet(a, b, frame).value

    zeta_bar = np.conj(frame["zeta"].value)
    return ReducedResiduals(
        r1=br(h_rho, ih_v) - 1,
        r2=br(h_zb, h_qb) - 1,
        r3=br(h_rho, h_qb) - zeta_bar,
        r4=br(ih_v, h_zb),
        r5=br(h_rho, h_zb),
        r6=br(ih_v, h_qb),
    )


def full_residuals(Omega: Potential, at) -> FullResiduals:
    """Residuals of the symplectic Monge-Ampère system on a Darboux chart."""
    layout = Omega.layout
    if len(layout.darboux) != 2:
        raise ValueError(f"{Omega.name} is not a potential on a Darboux chart")
    x = Omega._checked(at)
    D = WirtingerView(Omega.jet(x, 2), layout)
    (q1, p1), (q2, p2) = layout.darboux
    qb = [D.dbar(q1), D.dbar(q2)]
    pb = [D.dbar(p1), D.dbar(p2)]

    def br(a, b):
        return original_bracket_jet(a, b, layout).value

    C = np.empty(x.shape[:-1] + (2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            C[..., i, j] = br(pb[i], qb[j]) - (1.0 if i == j else 0.0)
    return FullResiduals(C=C, A=br(qb[0], qb[1]), B=br(pb[0], pb[1]))


def lift_potential(H: Potential) -> Potential:
    """``Omega(q1, q2, p1, p2) = H(q2, p2/p1, i(conj(q1) - q1), ln|p1|^2)``."""
    if H.coords != "reduced":
        raise ValueError(f"{H.name} is not a potential in reduced coordinates")

    def expression(q1, q2, p1, p2):
        return H.expression(**coords.reduced_fields(q1, q2, p1, p2))

    def check(values):
        p1 = np.asarray(values["p1"])
        if np.any(p1 == 0):
            bad = int(np.flatnonzero(np.ravel(p1 == 0))[0])
            raise DomainError(f"point {bad}: p1 = 0, the lift is undefined")
        H.check(coords.reduced_fields(values["q1"], values["q2"], p1, values["p2"]))

    return Potential(f"lift({H.name})", "full", expression, "p1 != 0", check)


def reduced_from_full_residuals(full: FullResiduals, at) -> np.ndarray:
    """Recover ``r1..r6`` from the full residuals of the lift.

    For ``Omega = lift(H)`` the two systems are related pointwise by::

        C11 = r1 + zetabar r4    C21 = -r4     A = conj(p1) r6
        C12 = r3 - zetabar r2    C22 = r2      B = r5 / conj(p1)
    """
    x = coords.point_to_real(at, coords.FULL)
    p1b = x[..., 4] - 1j * x[..., 5]
    zb = np.conj((x[..., 6] + 1j * x[..., 7]) / (x[..., 4] + 1j * x[..., 5]))
    C = full.C
    r2 = C[..., 1, 1]
    r4 = -C[..., 1, 0]
    r1 = C[..., 0, 0] + zb * C[..., 1, 0]
    r3 = C[..., 0, 1] + zb * C[..., 1, 1]
    return np.stack([r1, r2, r3, r4, p1b * full.B, full.A / p1b], axis=-1)


def consistency_bound(at) -> np.ndarray:
    """Per-point constant ``kappa`` bounding either system by the other."""
    x = coords.point_to_real(at, coords.FULL)
    p1 = np.hypot(x[..., 4], x[..., 5])
    zeta = np.abs((x[..., 6] + 1j * x[..., 7]) / (x[..., 4] + 1j * x[..., 5]))
    return np.maximum.reduce([1 + zeta, p1, 1 / p1])


@dataclass(frozen=True)
class Consistency:
    sup_reduced: float
    sup_full: float
    max_deviation: float  # largest |r - recovered r| over points
    bound_ok: bool        # both directions of the kappa bound hold


def reduction_consistency(H: Potential, at, tol: float = 1e-12) -> Consistency:
    """Compare the reduced residuals of H with the full residuals of its lift."""
    x = coords.point_to_real(at, coords.FULL)
    if np.any((x[..., 4] == 0) & (x[..., 5] == 0)):
        raise DomainError("p1 = 0: the reduced chart is undefined")
    r, _ = coords.full_to_reduced(coords.FullPoint.from_real(x))
    red = reduced_residuals(H, r.to_real()).stack()
    full = full_residuals(lift_potential(H), x)
    recovered = reduced_from_full_residuals(full, x)
    scale = 1 + np.max(np.abs(red), axis=-1)
    kappa = consistency_bound(x)
    sup_r = np.max(np.abs(red), axis=-1)
    sup_f = np.max(np.abs(full.stack()), axis=-1)
    bound_ok = bool(np.all(sup_f <= kappa * sup_r + tol) and np.all(sup_r <= kappa * sup_f + tol))
    dev = np.max(np.abs(red - recovered), axis=-1) / scale
    return Consistency(float(sup_r.max()), float(sup_f.max()), float(dev.max()), bound_ok)


@dataclass
class ResidualReport:
    """Per-point residuals of one system plus aggregates."""

    potential: str
    system: str
    tolerance: float
    points: np.ndarray                 # real coordinates, shape (N, dim)
    names: tuple
    residuals: np.ndarray              # complex, shape (N, k)
    detected_scale: Optional[float] = None

    @property
    def max_abs(self) -> dict:
        a = np.abs(self.residuals)
        return {n: float(a[:, k].max()) if len(a) else 0.0 for k, n in enumerate(self.names)}

    @property
    def argmax(self) -> dict:
        a = np.abs(self.residuals)
        return {n: int(a[:, k].argmax()) for k, n in enumerate(self.names)} if len(a) else {}

    @property
    def sup_norm(self) -> float:
        return float(np.abs(self.residuals).max()) if self.residuals.size else 0.0

    @property
    def passed(self) -> bool:
        return self.sup_norm <= self.tolerance


def detect_scale(C: np.ndarray, spread: float = 1e-6) -> Optional[float]:
    """Common scale ``s`` with ``C + I == s I`` at every point, if there is one.

    Returns ``None`` unless the off-diagonal entries vanish relative to ``s``
    and all diagonal entries agree to within ``spread`` (relative).
    """
    diag = np.concatenate([C[..., 0, 0].ravel(), C[..., 1, 1].ravel()]) + 1
    if diag.size == 0:
        return None
    s = np.mean(diag.real)
    if not np.isfinite(s) or s == 0:
        return None
    off = np.concatenate([C[..., 0, 1].ravel(), C[..., 1, 0].ravel()])
    if np.max(np.abs(diag - s)) / abs(s) >= spread or np.max(np.abs(off)) / abs(s) >= spread:
        return None
    return float(s)


def report(potential: Potential, system: str, points, tol: Optional[float] = None) -> ResidualReport:
    """Evaluate one system over a batch of points and assemble a report.

    When the full system fails only through a constant multiple of the identity
    in C (and A, B pass) the scale is recorded and C is judged against it.
    """
    x = np.atleast_2d(potential.to_real(points))
    if tol is None:
        tol = TOL_CALABI if potential.name.startswith("calabi") else TOL_FLAT
    if system == "reduced":
        res = reduced_residuals(potential, x).stack()
        return ResidualReport(potential.name, system, tol, x, REDUCED_NAMES, res)
    if system == "full":
        full = full_residuals(potential, x)
        res = full.stack()
        scale = None
        if np.abs(res).max() > tol:
            s = detect_scale(full.C)
            if s is not None and s != 1.0:
                ab = np.abs(res[:, 4:]).max()
                if ab <= tol:
                    scale = s
                    C = full.C.copy()
                    C[..., 0, 0] -= s - 1
                    C[..., 1, 1] -= s - 1
                    res = FullResiduals(C, full.A, full.B).stack()
        return ResidualReport(potential.name, system, tol, x, FULL_NAMES, res, scale)
    raise ValueError(f"unknown system {system!r}")
