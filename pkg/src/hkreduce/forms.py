"""Pointwise exterior algebra in 8 real dimensions.

Two-forms are stored as antisymmetric 8x8 matrices ``W`` with
``omega = sum_{a<b} W[a, b] dx^a ^ dx^b`` over the real basis
``(x1, y1, ..., x4, y4)``, ``z_k = x_k + i y_k``.  Four-forms are stored
densely over the 70 increasing index quadruples.

The hyperkähler check does not use any bracket.  Writing ``K2 = W1^-1 W2`` and
``K3 = W1^-1 W3`` for the endomorphisms relating the Kähler form to the real
and imaginary parts of the holomorphic symplectic form, a hyperkähler triple
has ``K2^2 = K3^2 = -c`` and ``K2 K3 = -K3 K2``; in particular all three
forms have the same volume and ``omega1^3 ^ omega2 = omega1^3 ^ omega3 = 0``.
The constant ``c`` absorbs the factor 1/2 in ``omega1 = (i/2) d dbar Omega``
and is measured once on flat space.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Tuple

import numpy as np

from . import coords
from .jets import RealCoordsLayout
from .potentials import Potential, flat_omega

DIM = 8
QUADS: Tuple[Tuple[int, int, int, int], ...] = tuple(combinations(range(DIM), 4))


@dataclass(frozen=True)
class TwoForm8:
    matrix: np.ndarray  # batch + (8, 8), antisymmetric

    @classmethod
    def from_matrix(cls, M) -> "TwoForm8":
        M = np.asarray(M)
        return cls(0.5 * (M - np.swapaxes(M, -1, -2)))

    def __add__(self, other):
        return TwoForm8(self.matrix + other.matrix)

    def __sub__(self, other):
        return TwoForm8(self.matrix - other.matrix)

    def coefficient(self, a: int, b: int):
        return self.matrix[..., a, b]


@dataclass(frozen=True)
class FourForm8:
    coeffs: np.ndarray  # batch + (70,)

    def __sub__(self, other):
        return FourForm8(self.coeffs - other.coeffs)


def _complex_covectors(layout: RealCoordsLayout) -> np.ndarray:
    """Row k holds the real-basis components of dz_k."""
    Z = np.zeros((len(layout.complex_pairs), layout.dim), dtype=complex)
    for k, (_, i, j) in enumerate(layout.complex_pairs):
        Z[k, i] = 1.0
        Z[k, j] = 1j
    return Z


def complex_hessian(Omega: Potential, at) -> np.ndarray:
    """``d^2 Omega / dz_a dzbar_b`` over the chart's complex coordinates."""
    x = Omega._checked(at)
    hess = Omega.jet(x, 2).hess
    Z = _complex_covectors(Omega.layout)
    d = 0.5 * Z.conj()   # d/dz_a = (d_x - i d_y)/2
    dbar = 0.5 * Z       # d/dzbar_b = (d_x + i d_y)/2
    return np.einsum("ai,...ij,bj->...ab", d, hess, dbar)


def omega1_at(Omega: Potential, at) -> TwoForm8:
    """``(i/2) d dbar Omega`` as a real 2-form."""
    h = complex_hessian(Omega, at)
    Z = _complex_covectors(Omega.layout)
    # (i/2) sum h_ab dz_a ^ dzbar_b
    M = 0.5j * np.einsum("...ab,ai,bj->...ij", h, Z, Z.conj())
    return TwoForm8.from_matrix(2 * M.real)


def omega_plus_at(layout: RealCoordsLayout = coords.FULL) -> Tuple[TwoForm8, TwoForm8]:
    """``(omega2, omega3)``: real and imaginary parts of ``sum dq_j ^ dp_j``."""
    Z = _complex_covectors(layout)
    names = layout.complex_names
    M = np.zeros((layout.dim, layout.dim), dtype=complex)
    for q, p in layout.darboux:
        a, b = Z[names.index(q)], Z[names.index(p)]
        M += np.outer(a, b) - np.outer(b, a)
    return TwoForm8(M.real.copy()), TwoForm8(M.imag.copy())


def wedge(alpha: TwoForm8, beta: TwoForm8) -> FourForm8:
    """``alpha ^ beta``; paired terms make the product exactly commutative."""
    A, B = alpha.matrix, beta.matrix
    out = []
    for a, b, c, d in QUADS:
        out.append((A[..., a, b] * B[..., c, d] + A[..., c, d] * B[..., a, b])
                   - (A[..., a, c] * B[..., b, d] + A[..., b, d] * B[..., a, c])
                   + (A[..., a, d] * B[..., b, c] + A[..., b, c] * B[..., a, d]))
    return FourForm8(np.stack(out, axis=-1))


@lru_cache(maxsize=None)
def _top_pairing() -> Tuple[np.ndarray, np.ndarray]:
    # for every quadruple I: index of its complement and the sign of (I, I^c)
    index = {q: k for k, q in enumerate(QUADS)}
    comp = np.empty(len(QUADS), dtype=np.intp)
    sign = np.empty(len(QUADS))
    for k, q in enumerate(QUADS):
        rest = tuple(i for i in range(DIM) if i not in q)
        comp[k] = index[rest]
        perm = q + rest
        inversions = sum(1 for i in range(DIM) for j in range(i + 1, DIM) if perm[i] > perm[j])
        sign[k] = -1.0 if inversions % 2 else 1.0
    return comp, sign


def wedge_top(mu: FourForm8, nu: FourForm8) -> np.ndarray:
    """Coefficient of ``dx1 ^ dy1 ^ ... ^ dy4`` in ``mu ^ nu``."""
    comp, sign = _top_pairing()
    return np.sum(sign * mu.coeffs * nu.coeffs[..., comp], axis=-1)


def _endomorphisms(Omega: Potential, at):
    w1 = omega1_at(Omega, at)
    w2, w3 = omega_plus_at(Omega.layout)
    K2 = np.linalg.solve(w1.matrix, np.broadcast_to(w2.matrix, w1.matrix.shape))
    K3 = np.linalg.solve(w1.matrix, np.broadcast_to(w3.matrix, w1.matrix.shape))
    return w1, w2, w3, K2, K3


@lru_cache(maxsize=None)
def calibration_constant() -> float:
    """``c`` with ``K2^2 = -c`` on flat space; measured once and frozen."""
    x = coords.FullPoint(0.3 + 0.1j, -0.2j, 1.0, 0.5).to_real()
    _, _, _, K2, _ = _endomorphisms(flat_omega(), x)
    return float(-np.mean(np.diagonal(K2 @ K2)))


@dataclass(frozen=True)
class AlgebraDefect:
    mixed12: np.ndarray   # |omega1^3 ^ omega2| / |omega1^4|
    mixed13: np.ndarray   # |omega1^3 ^ omega3| / |omega1^4|
    anticommutator: np.ndarray  # max |K2 K3 + K3 K2|
    square2: np.ndarray   # max |K2^2 + c|
    square3: np.ndarray   # max |K3^2 + c|

    NAMES = ("mixed12", "mixed13", "anticommutator", "square2", "square3")

    def stack(self) -> np.ndarray:
        return np.stack([getattr(self, n) for n in self.NAMES], axis=-1)

    @property
    def max(self) -> float:
        return float(np.max(self.stack()))


def hyperkahler_algebra_defect(Omega: Potential, at, c: float = None) -> AlgebraDefect:
    """Pointwise hyperkähler defects of ``((i/2) d dbar Omega, Re w+, Im w+)``."""
    if c is None:
        c = calibration_constant()
    w1, w2, w3, K2, K3 = _endomorphisms(Omega, at)
    eye = np.eye(DIM)
    w11 = wedge(w1, w1)
    vol = wedge_top(w11, w11)
    m12 = wedge_top(w11, wedge(w1, w2)) / np.abs(vol)
    m13 = wedge_top(w11, wedge(w1, w3)) / np.abs(vol)

    def sup(M):
        return np.max(np.abs(M), axis=(-2, -1))

    return AlgebraDefect(
        mixed12=np.abs(m12),
        mixed13=np.abs(m13),
        anticommutator=sup(K2 @ K3 + K3 @ K2),
        square2=sup(K2 @ K2 + c * eye),
        square3=sup(K3 @ K3 + c * eye),
    )
