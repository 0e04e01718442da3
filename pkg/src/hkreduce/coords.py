"""Coordinate systems and the exact transforms between them.

Three charts are used throughout:

* full Darboux coordinates ``(q1, q2, p1, p2)`` on C^4,
* reduced coordinates ``(q, zeta, v, rho)`` together with the fibre
  coordinates ``(u, theta)`` of the U(1) x R action,
* Calabi coordinates ``(z1, z2, w1, w2)`` on T*(CP^2).

Every transform is written with numpy ufuncs and accepts scalars or arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from . import jets
from .jets import DomainError, RealCoordsLayout

REDUCED = RealCoordsLayout(
    names=("q.re", "q.im", "zeta.re", "zeta.im", "v", "rho"),
    complex_pairs=(("q", 0, 1), ("zeta", 2, 3)),
)
FULL = RealCoordsLayout(
    names=("q1.re", "q1.im", "q2.re", "q2.im", "p1.re", "p1.im", "p2.re", "p2.im"),
    complex_pairs=(("q1", 0, 1), ("q2", 2, 3), ("p1", 4, 5), ("p2", 6, 7)),
    darboux=(("q1", "p1"), ("q2", "p2")),
)
CALABI = RealCoordsLayout(
    names=("z1.re", "z1.im", "z2.re", "z2.im", "w1.re", "w1.im", "w2.re", "w2.im"),
    complex_pairs=(("z1", 0, 1), ("z2", 2, 3), ("w1", 4, 5), ("w2", 6, 7)),
    darboux=(("z1", "w1"), ("z2", "w2")),
)
LAYOUTS = {"reduced": REDUCED, "full": FULL, "calabi": CALABI}

# Box where the Calabi standard-form chart is used; bounds are per real coordinate
# except zeta, which is bounded in modulus.
SAFE_BOX = {"q.im": 1.0, "zeta.abs": 2.0, "v": 2.0, "rho": 2.0}


@dataclass(frozen=True)
class FullPoint:
    q1: complex
    q2: complex
    p1: complex
    p2: complex

    layout = FULL

    def to_real(self) -> np.ndarray:
        return _pack(self.q1, self.q2, self.p1, self.p2)

    @classmethod
    def from_real(cls, x) -> "FullPoint":
        return cls(*_unpack(x, 4))


@dataclass(frozen=True)
class CalabiPoint:
    z1: complex
    z2: complex
    w1: complex
    w2: complex

    layout = CALABI

    def to_real(self) -> np.ndarray:
        return _pack(self.z1, self.z2, self.w1, self.w2)

    @classmethod
    def from_real(cls, x) -> "CalabiPoint":
        return cls(*_unpack(x, 4))


@dataclass(frozen=True)
class ReducedPoint:
    q: complex
    zeta: complex
    v: float
    rho: float

    layout = REDUCED

    def __post_init__(self):
        for name in ("q", "zeta", "v", "rho"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise DomainError(f"reduced coordinate {name} is not finite")

    def to_real(self) -> np.ndarray:
        q, zeta = np.asarray(self.q), np.asarray(self.zeta)
        return np.stack(np.broadcast_arrays(q.real, q.imag, zeta.real, zeta.imag,
                                            np.asarray(self.v, dtype=float),
                                            np.asarray(self.rho, dtype=float)), axis=-1)

    @classmethod
    def from_real(cls, x) -> "ReducedPoint":
        x = np.asarray(x, dtype=float)
        return cls(x[..., 0] + 1j * x[..., 1], x[..., 2] + 1j * x[..., 3], x[..., 4], x[..., 5])


@dataclass(frozen=True)
class FiberPoint:
    u: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", np.mod(self.theta, 2 * np.pi))


def _pack(*zs) -> np.ndarray:
    parts = []
    for z in zs:
        z = np.asarray(z, dtype=complex)
        parts += [z.real, z.imag]
    return np.stack(np.broadcast_arrays(*parts), axis=-1)


def _unpack(x, count):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 2 * count:
        raise ValueError(f"expected {2 * count} real coordinates, got {x.shape[-1]}")
    return [x[..., 2 * k] + 1j * x[..., 2 * k + 1] for k in range(count)]


def point_to_real(point, layout: RealCoordsLayout) -> np.ndarray:
    """Real coordinate array for a point dataclass or raw array."""
    if hasattr(point, "to_real"):
        if point.layout is not layout:
            raise TypeError(f"{type(point).__name__} does not live in this chart")
        return point.to_real()
    x = np.asarray(point, dtype=float)
    if x.shape[-1] != layout.dim:
        raise ValueError(f"expected {layout.dim} real coordinates, got {x.shape[-1]}")
    return x


def reduced_fields(q1, q2, p1, p2) -> Dict[str, object]:
    """``(q, zeta, v, rho)`` as functions of the full coordinates.

    Works on plain numbers and on jets alike.
    """
    if isinstance(p1, jets.Jet):
        zero = np.any(p1.value == 0)
    else:
        zero = np.any(np.asarray(p1) == 0)
    if zero:
        raise DomainError("p1 = 0: zeta = p2/p1 is undefined")
    return {
        "q": q2,
        "zeta": p2 / p1,
        # i (conj(q1) - q1) = 2 Im q1
        "v": 2 * jets.imag(q1),
        "rho": jets.log(jets.abs2(p1)),
    }


def full_to_reduced(p: FullPoint) -> Tuple[ReducedPoint, FiberPoint]:
    """Split a full point into reduced coordinates and the fibre ``(u, theta)``."""
    p1 = np.asarray(p.p1, dtype=complex)
    f = reduced_fields(np.asarray(p.q1, dtype=complex), p.q2, p1, p.p2)
    u = 2 * np.real(p.q1)
    theta = np.angle(p1)
    return ReducedPoint(**f), FiberPoint(u, theta)


def reduced_to_full(r: ReducedPoint, f: FiberPoint) -> FullPoint:
    lam = np.exp(0.5 * np.asarray(r.rho) + 1j * np.asarray(f.theta))
    return FullPoint(q1=0.5 * (f.u + 1j * np.asarray(r.v)), q2=r.q, p1=lam, p2=lam * r.zeta)


def darboux_to_calabi(p: FullPoint) -> CalabiPoint:
    """Standard-form Darboux coordinates to the Calabi affine chart."""
    q1, q2 = np.asarray(p.q1, dtype=complex), np.asarray(p.q2, dtype=complex)
    p1, p2 = np.asarray(p.p1, dtype=complex), np.asarray(p.p2, dtype=complex)
    return CalabiPoint(
        z1=np.exp(1j * (q1 - q2)),
        z2=np.exp(1j * (q1 + q2)),
        w1=0.5j * (p2 - p1) * np.exp(1j * (q2 - q1)),
        w2=-0.5j * (p1 + p2) * np.exp(-1j * (q1 + q2)),
    )


def darboux_to_calabi_fields(q1, q2, p1, p2) -> Dict[str, object]:
    """Jet-generic version of :func:`darboux_to_calabi`."""
    return {
        "z1": jets.exp(1j * (q1 - q2)),
        "z2": jets.exp(1j * (q1 + q2)),
        "w1": 0.5j * (p2 - p1) * jets.exp(1j * (q2 - q1)),
        "w2": -0.5j * (p1 + p2) * jets.exp(-1j * (q1 + q2)),
    }


def calabi_moduli_fields(q, zeta, v, rho):
    """``(|z|^2, |w|^2, |z.w|^2)`` in reduced coordinates; jet-generic."""
    # i (conj(q) - q) = 2 Im q
    a = jets.exp(2 * jets.imag(q))
    b = jets.exp(-2 * jets.imag(q))
    zsq = jets.exp(-v) * (a + b)
    wsq = 0.25 * jets.exp(rho + v) * (jets.abs2(1 - zeta) * b + jets.abs2(1 + zeta) * a)
    cross = jets.exp(rho)
    return zsq, wsq, cross


def calabi_reduced_moduli(r: ReducedPoint):
    """Return ``(zsq, wsq, cross)`` at a reduced point."""
    zsq, wsq, cross = calabi_moduli_fields(np.asarray(r.q, dtype=complex),
                                           np.asarray(r.zeta, dtype=complex),
                                           np.asarray(r.v, dtype=float),
                                           np.asarray(r.rho, dtype=float))
    return zsq, wsq, cross


def in_safe_box(q, zeta, v, rho) -> np.ndarray:
    return ((np.abs(np.imag(q)) <= SAFE_BOX["q.im"])
            & (np.abs(zeta) <= SAFE_BOX["zeta.abs"])
            & (np.abs(v) <= SAFE_BOX["v"])
            & (np.abs(rho) <= SAFE_BOX["rho"]))


def sample_box(bounds: Dict[str, Tuple[float, float]], layout: RealCoordsLayout,
               n: int, seed: int) -> np.ndarray:
    """Seeded uniform samples, shape ``(n, layout.dim)``, in a per-coordinate box."""
    if n <= 0:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    lo = np.array([bounds[name][0] for name in layout.names], dtype=float)
    hi = np.array([bounds[name][1] for name in layout.names], dtype=float)
    return lo + (hi - lo) * rng.random((n, layout.dim))


UNIT_BOX = {
    "q.re": (-1.0, 1.0), "q.im": (-1.0, 1.0),
    "zeta.re": (-1.0, 1.0), "zeta.im": (-1.0, 1.0),
    "v": (-1.0, 1.0), "rho": (float(np.log(0.5)), float(np.log(2.0))),
}
# components of zeta kept within |zeta| <= 2
CALABI_BOX = {
    "q.re": (-1.0, 1.0), "q.im": (-1.0, 1.0),
    "zeta.re": (-1.4, 1.4), "zeta.im": (-1.4, 1.4),
    "v": (-2.0, 2.0), "rho": (-2.0, 2.0),
}


def default_reduced_grid(n: int = 1000, seed: int = 0, box=None) -> np.ndarray:
    return sample_box(box or UNIT_BOX, REDUCED, n, seed)


def default_full_grid(n: int = 1000, seed: int = 0) -> np.ndarray:
    """Full points obtained from the unit reduced box and random fibre data."""
    r = ReducedPoint.from_real(default_reduced_grid(n, seed))
    rng = np.random.default_rng(seed + 1)
    f = FiberPoint(rng.uniform(-1, 1, n), rng.uniform(0, 2 * np.pi, n))
    return reduced_to_full(r, f).to_real()


def default_calabi_grid(n: int = 50, seed: int = 0) -> np.ndarray:
    """Calabi-chart points: the Calabi box pushed through the Darboux substitution."""
    r = ReducedPoint.from_real(default_reduced_grid(n, seed, CALABI_BOX))
    rng = np.random.default_rng(seed + 1)
    f = FiberPoint(rng.uniform(-np.pi, np.pi, n), rng.uniform(0, 2 * np.pi, n))
    return darboux_to_calabi(reduced_to_full(r, f)).to_real()
