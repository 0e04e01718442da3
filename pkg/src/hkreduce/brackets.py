"""The reduced and the original holomorphic Poisson brackets.

Wedge convention: ``a d_A ^ d_B`` acts as ``a (d_A f d_B g - d_B f d_A g)``.
The reduced bracket on functions of ``(q, zeta, v, rho)`` is::

    {f, g} = e^-rho [ i (f_v g_rho - f_rho g_v)
                      + i zeta (f_zeta g_v - f_v g_zeta)
                      + (f_zeta g_q - f_q g_zeta) ]

with holomorphic Wirtinger derivatives in ``zeta`` and ``q``.  The original
bracket on a Darboux chart is ``sum_j (f_pj g_qj - f_qj g_pj)``.

Brackets act on jets and return a jet one order lower, so they nest.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import coords, jets
from .jets import DomainError, Jet, RealCoordsLayout, WirtingerView


def reduced_bracket_jet(f: Jet, g: Jet, frame) -> Jet:
    """Reduced bracket of two jets over the reduced layout.

    ``frame`` is the dict of reduced coordinate jets (``zeta``, ``rho``)
    the bivector coefficients are built from; its order must be at least
    that of the result.
    """
    F = WirtingerView(f, coords.REDUCED)
    G = WirtingerView(g, coords.REDUCED)
    fv, fr, fz, fq = F.partial("v"), F.partial("rho"), F.d("zeta"), F.d("q")
    gv, gr, gz, gq = G.partial("v"), G.partial("rho"), G.d("zeta"), G.d("q")
    order = min(f.order, g.order) - 1
    zeta = frame["zeta"].truncate(order)
    scale = jets.exp(-frame["rho"].truncate(order))
    inner = (1j * (fv * gr - fr * gv)
             + 1j * zeta * (fz * gv - fv * gz)
             + (fz * gq - fq * gz))
    return scale * inner


def original_bracket_jet(f: Jet, g: Jet, layout: RealCoordsLayout = coords.FULL) -> Jet:
    """``sum_j (d_pj f d_qj g - d_qj f d_pj g)`` over the layout's Darboux pairs."""
    F = WirtingerView(f, layout)
    G = WirtingerView(g, layout)
    total = None
    for q, p in layout.darboux:
        term = F.d(p) * G.d(q) - F.d(q) * G.d(p)
        total = term if total is None else total + term
    return total


def _field_jet(field, variables, order):
    if isinstance(field, Jet):
        return field
    out = field(**variables)
    if not isinstance(out, Jet):
        n = next(iter(variables.values())).n
        shape = next(iter(variables.values())).value.shape
        out = Jet._lift(np.broadcast_to(np.asarray(out), shape), order, n)
    return out


def reduced_bracket(f: Callable, g: Callable, at) -> np.ndarray:
    """Value of ``{f, g}`` at a reduced point.

    ``f`` and ``g`` are expressions in ``(q, zeta, v, rho)`` (such as
    :class:`~hkreduce.potentials.Potential` objects or plain functions).
    """
    x = coords.point_to_real(at, coords.REDUCED)
    frame = coords.REDUCED.variables(x, 1)
    return reduced_bracket_jet(_field_jet(f, frame, 1), _field_jet(g, frame, 1), frame).value


def original_bracket(f: Callable, g: Callable, at, layout: RealCoordsLayout = coords.FULL) -> np.ndarray:
    """Value of the original bracket of two expressions in the full chart."""
    x = coords.point_to_real(at, layout)
    frame = layout.variables(x, 1)
    return original_bracket_jet(_field_jet(f, frame, 1), _field_jet(g, frame, 1), layout).value


def jacobi_defect(f: Callable, g: Callable, h: Callable, at) -> np.ndarray:
    """``{f,{g,h}} + {g,{h,f}} + {h,{f,g}}`` at reduced points (order-3 jets)."""
    x = coords.point_to_real(at, coords.REDUCED)
    frame = coords.REDUCED.variables(x, 3)
    F, G, Hh = (_field_jet(k, frame, 3) for k in (f, g, h))

    def br(a, b):
        return reduced_bracket_jet(a, b, frame)

    return (br(F, br(G, Hh)) + br(G, br(Hh, F)) + br(Hh, br(F, G))).value


def pullback(field: Callable) -> Callable:
    """Expression on the full chart: ``field`` composed with the projection."""

    def pulled(q1, q2, p1, p2):
        return field(**coords.reduced_fields(q1, q2, p1, p2))

    return pulled


def remark2_relation_defect(f: Callable, g: Callable, at) -> np.ndarray:
    """``{f,g}`` minus ``original{f*, g*} / conj(p1)`` for reduced fields f, g.

    Both brackets are evaluated at the same geometric point; ``f*`` is the
    pullback of ``f`` along the projection to reduced coordinates.
    """
    x = coords.point_to_real(at, coords.FULL)
    p1 = x[..., 4] + 1j * x[..., 5]
    if np.any(p1 == 0):
        raise DomainError("p1 = 0: the reduced chart is undefined")
    r, _ = coords.full_to_reduced(coords.FullPoint.from_real(x))
    lhs = reduced_bracket(f, g, r.to_real())
    rhs = original_bracket(pullback(f), pullback(g), x) / np.conj(p1)
    return lhs - rhs


def random_cubic(rng: np.random.Generator) -> Callable:
    """Real cubic polynomial in ``(Re q, Im q, Re zeta, Im zeta, v, rho)``.

    Coefficients are uniform in ``[-1, 1]``; the constant term is dropped.
    """
    lin = rng.uniform(-1, 1, 6)
    quad = rng.uniform(-1, 1, (6, 6))
    cub = rng.uniform(-1, 1, (6, 6, 6))

    def field(q, zeta, v, rho):
        xs = [jets.real(q), jets.imag(q), jets.real(zeta), jets.imag(zeta), v, rho]
        total = 0.0
        for i in range(6):
            inner = lin[i]
            for j in range(i, 6):
                inner2 = quad[i, j]
                for k in range(j, 6):
                    inner2 = inner2 + cub[i, j, k] * xs[k]
                inner = inner + inner2 * xs[j]
            total = total + inner * xs[i]
        return total

    return field


def jacobi_suite(trials: int = 100, seed: int = 1, n_points: int = 4) -> np.ndarray:
    """Largest Jacobi defect for each of ``trials`` random cubic triples."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(seed)
    out = np.empty(trials)
    for t in range(trials):
        f, g, h = random_cubic(rng), random_cubic(rng), random_cubic(rng)
        x = coords.sample_box(coords.UNIT_BOX, coords.REDUCED, n_points, int(rng.integers(2**31)))
        out[t] = np.max(np.abs(jacobi_defect(f, g, h, x)))
    return out
