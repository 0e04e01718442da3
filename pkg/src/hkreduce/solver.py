"""Least-squares collocation for the reduced system.

Candidates ``H`` are real polynomials in ``(Re q, Im q, Re zeta, Im zeta, v, s)``
with ``s = e^rho``, so the flat solution ``v^2/2 + |q|^2 + s + s|zeta|^2`` is
an exact degree-3 element.  Derivatives in rho follow from the chain rule
``H_rho = s H_s`` and ``H_rho,rho = s H_s + s^2 H_ss``.

Each residual is a bracket of two linear functionals of ``H``.  Writing ``M``
for the real Hessian of ``H`` in reduced coordinates, ``P`` for the bivector
as a matrix acting on real gradients and ``a``, ``b`` for the functionals::

    {a.grad H, b.grad H} = (M a)^T P (M b)

which is quadratic in the coefficients, so the Jacobian is assembled exactly
from two bilinear contractions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import comb
from typing import Dict, List, Tuple

import numpy as np

from . import jets
from .potentials import Potential

log = logging.getLogger(__name__)

VARIABLES = ("q.re", "q.im", "zeta.re", "zeta.im", "v", "s")
NVAR = len(VARIABLES)
_S = 5  # index of s


def monomial_exponents(degree: int) -> np.ndarray:
    """Exponent rows of all monomials up to ``degree``, graded then lexicographic."""
    rows = []
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(NVAR), d):
            e = np.zeros(NVAR, dtype=int)
            for i in combo:
                e[i] += 1
            rows.append(e)
    out = np.array(rows, dtype=int).reshape(-1, NVAR)
    assert len(out) == comb(NVAR + degree, degree)
    return out


def monomial_label(e) -> str:
    parts = [f"{n}^{k}" if k > 1 else n for n, k in zip(VARIABLES, e) if k]
    return "*".join(parts) or "1"


@dataclass(frozen=True)
class BasisExpansion:
    """``H = sum_k coefficients[k] * monomial_k``."""

    coefficients: np.ndarray
    degree: int

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.shape != (comb(NVAR + self.degree, self.degree),):
            raise ValueError(f"degree {self.degree} needs {comb(NVAR + self.degree, self.degree)} "
                             f"coefficients, got {c.shape}")
        object.__setattr__(self, "coefficients", c)

    @property
    def exponents(self) -> np.ndarray:
        return monomial_exponents(self.degree)

    @classmethod
    def zeros(cls, degree: int) -> "BasisExpansion":
        return cls(np.zeros(comb(NVAR + degree, degree)), degree)

    @classmethod
    def from_terms(cls, terms: Dict[Tuple[int, ...], float], degree: int) -> "BasisExpansion":
        E = monomial_exponents(degree)
        index = {tuple(e): k for k, e in enumerate(E)}
        c = np.zeros(len(E))
        for powers, value in terms.items():
            c[index[tuple(powers)]] += value
        return cls(c, degree)

    @classmethod
    def flat(cls, degree: int = 3) -> "BasisExpansion":
        """The flat solution ``v^2/2 + |q|^2 + s (1 + |zeta|^2)``."""
        return cls.from_terms({
            (0, 0, 0, 0, 2, 0): 0.5,
            (2, 0, 0, 0, 0, 0): 1.0, (0, 2, 0, 0, 0, 0): 1.0,
            (0, 0, 0, 0, 0, 1): 1.0,
            (0, 0, 2, 0, 0, 1): 1.0, (0, 0, 0, 2, 0, 1): 1.0,
        }, degree)

    def potential(self, name: str = "basis-H") -> Potential:
        """The expansion as a jet-evaluable potential in reduced coordinates."""
        E, c = self.exponents, self.coefficients

        def expression(q, zeta, v, rho):
            xs = [jets.real(q), jets.imag(q), jets.real(zeta), jets.imag(zeta), v, jets.exp(rho)]
            total = 0.0
            for e, ck in zip(E, c):
                if ck == 0:
                    continue
                term = ck
                for var, k in zip(xs, e):
                    if k:
                        term = term * var ** int(k)
                total = total + term
            return total

        return Potential(name, "reduced", expression)


@dataclass(frozen=True)
class CollocationSet:
    points: np.ndarray   # reduced real coordinates, shape (N, 6)
    box: Dict[str, Tuple[float, float]]
    seed: int
    count: int


DEFAULT_BOX = {
    "q.re": (-1.0, 1.0), "q.im": (-1.0, 1.0),
    "zeta.re": (-1.0, 1.0), "zeta.im": (-1.0, 1.0),
    "v": (-1.0, 1.0), "s": (0.5, 2.0),
}


def collocation_points(n: int = 400, seed: int = 0, box=None) -> CollocationSet:
    """Seeded uniform samples in a box over ``(Re q, Im q, Re zeta, Im zeta, v, s)``."""
    if n <= 0:
        raise ValueError("n must be positive")
    box = dict(box or DEFAULT_BOX)
    if box["s"][0] <= 0:
        raise ValueError("s = e^rho must stay positive")
    rng = np.random.default_rng(seed)
    lo = np.array([box[k][0] for k in VARIABLES])
    hi = np.array([box[k][1] for k in VARIABLES])
    y = lo + (hi - lo) * rng.random((n, NVAR))
    x = y.copy()
    x[:, _S] = np.log(y[:, _S])
    return CollocationSet(x, box, seed, n)


def basis_hessians(points, degree: int) -> np.ndarray:
    """Real Hessians of every monomial in reduced coordinates, shape ``(N, K, 6, 6)``."""
    x = np.asarray(points, dtype=float)
    y = x.copy()
    s = np.exp(x[:, _S])
    y[:, _S] = s
    E = monomial_exponents(degree)
    N, K = len(y), len(E)
    # powers[n, i, k] = y_i^k
    powers = y[:, :, None] ** np.arange(degree + 1)[None, None, :]

    def mono(shift):
        # prod_i coef * y_i^(e_i - shift_i), zero when an exponent goes negative
        out = np.ones((N, K))
        for i in range(NVAR):
            k = E[:, i] - shift[i]
            coef = np.ones(K)
            for t in range(shift[i]):
                coef = coef * (E[:, i] - t)
            ok = k >= 0
            vals = np.zeros((N, K))
            vals[:, ok] = powers[:, i, k[ok]]
            out *= coef[None, :] * vals
        return out

    grad_y = np.empty((N, K, NVAR))
    hess_y = np.empty((N, K, NVAR, NVAR))
    for i in range(NVAR):
        sh = [0] * NVAR
        sh[i] += 1
        grad_y[:, :, i] = mono(sh)
        for j in range(i, NVAR):
            sh2 = list(sh)
            sh2[j] += 1
            hess_y[:, :, i, j] = hess_y[:, :, j, i] = mono(sh2)
    # y -> reduced coordinates: only s = e^rho is nonlinear
    hess = hess_y.copy()
    sk = s[:, None]
    hess[:, :, _S, :] *= sk[..., None]
    hess[:, :, :, _S] *= sk[..., None]
    hess[:, :, _S, _S] += sk * grad_y[:, :, _S]
    return hess


def _functionals() -> Dict[str, np.ndarray]:
    n = NVAR
    e = np.eye(n)
    return {
        "rho": e[5].astype(complex),
        "iv": 1j * e[4],
        "zbar": 0.5 * (e[2] + 1j * e[3]),
        "qbar": 0.5 * (e[0] + 1j * e[1]),
    }


EQUATIONS = (("rho", "iv"), ("zbar", "qbar"), ("rho", "qbar"),
             ("iv", "zbar"), ("rho", "zbar"), ("iv", "qbar"))


def bivector_matrix(points) -> np.ndarray:
    """``P`` with ``{f, g} = grad f . P . grad g``, shape ``(N, 6, 6)``."""
    x = np.asarray(points, dtype=float)
    zeta = x[:, 2] + 1j * x[:, 3]
    scale = np.exp(-x[:, 5])
    e = np.eye(NVAR)
    d_zeta = 0.5 * (e[2] - 1j * e[3])
    d_q = 0.5 * (e[0] - 1j * e[1])
    ev, er = e[4], e[5]

    def wedge(a, b):
        return np.outer(a, b) - np.outer(b, a)

    P = (1j * wedge(ev, er)[None]
         + 1j * zeta[:, None, None] * wedge(d_zeta, ev)[None]
         + wedge(d_zeta, d_q)[None])
    return scale[:, None, None] * P


def _targets(points) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    t = np.zeros((len(x), 6), dtype=complex)
    t[:, 0] = 1
    t[:, 1] = 1
    t[:, 2] = x[:, 2] - 1j * x[:, 3]
    return t


class _Problem:
    """Cached per-point data for one collocation set and degree."""

    def __init__(self, pts: CollocationSet, degree: int):
        x = pts.points
        self.degree = degree
        self.phi = basis_hessians(x, degree)           # (N, K, 6, 6)
        self.P = bivector_matrix(x)
        self.targets = _targets(x)
        f = _functionals()
        # U[name][n, k, :] = Phi_k a
        self.U = {k: np.einsum("nkij,j->nki", self.phi, a) for k, a in f.items()}

    def brackets(self, c):
        Mv = {k: np.einsum("k,nki->ni", c, U) for k, U in self.U.items()}
        return Mv

    def complex_residuals(self, c) -> np.ndarray:
        Mv = self.brackets(c)
        out = np.empty(self.targets.shape, dtype=complex)
        for e, (a, b) in enumerate(EQUATIONS):
            out[:, e] = np.einsum("ni,nij,nj->n", Mv[a], self.P, Mv[b])
        return out - self.targets

    def complex_jacobian(self, c) -> np.ndarray:
        Mv = self.brackets(c)
        N, K = self.phi.shape[:2]
        J = np.empty((N, 6, K), dtype=complex)
        for e, (a, b) in enumerate(EQUATIONS):
            PMb = np.einsum("nij,nj->ni", self.P, Mv[b])
            MaP = np.einsum("ni,nij->nj", Mv[a], self.P)
            J[:, e, :] = (np.einsum("nki,ni->nk", self.U[a], PMb)
                          + np.einsum("nj,nkj->nk", MaP, self.U[b]))
        return J


def _split(z: np.ndarray) -> np.ndarray:
    # complex (N, 6, ...) -> real rows ordered (point, equation, re/im)
    out = np.stack([z.real, z.imag], axis=2)
    return out.reshape((-1,) + z.shape[2:])


def residual_vector(c: BasisExpansion, pts: CollocationSet) -> np.ndarray:
    """Real residuals: per point ``Re r1, Im r1, ..., Re r6, Im r6``."""
    return _split(_Problem(pts, c.degree).complex_residuals(c.coefficients))


def residual_jacobian(c: BasisExpansion, pts: CollocationSet) -> np.ndarray:
    """Exact derivative of :func:`residual_vector` in the coefficients."""
    return _split(_Problem(pts, c.degree).complex_jacobian(c.coefficients))


@dataclass(frozen=True)
class SolveConfig:
    max_iter: int = 50
    tol: float = 1e-8
    lm_lambda0: float = 1e-6
    tikhonov: float = 1e-8
    null_rel: float = 1e-12

    def __post_init__(self):
        if self.max_iter <= 0 or not (self.tol > 0 and self.lm_lambda0 > 0
                                      and self.tikhonov >= 0 and self.null_rel > 0):
            raise ValueError("solver configuration values must be positive")


@dataclass
class SolveOutcome:
    coefficients: BasisExpansion
    sup_history: List[float]
    rms_history: List[float]
    converged: bool
    iterations: int
    message: str = ""


def _best_scale(r, lin, curv, hi: float = 4.0) -> float:
    """Minimizer over ``(0, hi]`` of ``|r + a lin + a^2 curv|^2``."""
    # derivative of the quartic, divided by 2
    coeffs = [2 * curv @ curv, 3 * lin @ curv, lin @ lin + 2 * r @ curv, r @ lin]
    roots = np.roots(coeffs) if coeffs[0] != 0 else np.roots(coeffs[1:])
    cands = [1.0, hi] + [z.real for z in roots if abs(z.imag) < 1e-12 and 0 < z.real <= hi]

    def f(a):
        e = r + a * lin + a * a * curv
        return e @ e

    return min(cands, key=f)


def _null_space(J: np.ndarray, rel: float) -> np.ndarray:
    _, sv, vt = np.linalg.svd(J, full_matrices=False)
    return vt[sv <= rel * sv[0]] if sv[0] > 0 else vt


def solve(start: BasisExpansion, pts: CollocationSet, config: SolveConfig = SolveConfig()) -> SolveOutcome:
    """Levenberg-Marquardt on ``0.5 |r(c)|^2 + tikhonov |N^T (c - start)|^2``.

    ``N`` spans the numerical null space of the Jacobian at the current
    iterate (singular values below ``null_rel`` of the largest).  Those are
    the gauge directions along which solutions are not unique; anchoring
    only them keeps the iterate near ``start`` without pulling the residual
    away from zero.  A step is accepted when it does not raise the RMS
    residual (positive gain ratio).
    """
    prob = _Problem(pts, start.degree)
    c0 = start.coefficients.copy()
    c = c0.copy()
    K = len(c)
    tik = np.sqrt(2 * config.tikhonov)
    lam = config.lm_lambda0
    nu = 2.0

    def residual(cv):
        return _split(prob.complex_residuals(cv))

    r = residual(c)
    sup_h = [float(np.max(np.abs(r)))]
    rms_h = [float(np.sqrt(np.mean(r ** 2)))]
    message = "max_iter reached"
    converged = False
    it = 0
    J = None
    while True:
        if not np.all(np.isfinite(r)):
            message = f"non-finite residual at iteration {it}"
            log.warning(message)
            break
        if sup_h[-1] <= config.tol:
            converged, message = True, "converged"
            break
        if it >= config.max_iter:
            break
        it += 1
        if J is None:
            J = _split(prob.complex_jacobian(c))
            N = _null_space(J, config.null_rel)
        A = np.vstack([J, tik * N, np.sqrt(lam) * np.eye(K)])
        b = np.concatenate([-r, -tik * (N @ (c - c0)), np.zeros(K)])
        step = np.linalg.lstsq(A, b, rcond=1e-12)[0]
        # r is quadratic in c: r(c + a d) = r + a J d + a^2 Q(d) exactly
        lin = J @ step
        curv = _split(prob.complex_residuals(step) + prob.targets)
        unit = r + lin + curv
        predicted = r @ r - (r + lin) @ (r + lin)
        gain = (r @ r - unit @ unit) / predicted if predicted > 0 else -1.0
        trial = c + _best_scale(r, lin, curv) * step
        r_new = residual(trial)
        if not np.all(np.isfinite(r_new)):
            message = f"non-finite residual at iteration {it}"
            log.warning(message)
            break
        if r_new @ r_new < r @ r:
            c, r, J = trial, r_new, None
            sup_h.append(float(np.max(np.abs(r))))
            rms_h.append(float(np.sqrt(np.mean(r ** 2))))
        # gains near 0.5 are typical at the rank-deficient solution set, so any
        # gain above 0.25 counts as good; below 1e-15 the step is plain Gauss-Newton
        if gain >= 0.25:
            lam = lam / 10.0 if lam >= 1e-14 else 0.0
            nu = 2.0
        else:
            lam = max(lam, 1e-15) * nu
            nu *= 2.0
            if lam > 1e16:
                message = "damping exhausted"
                break
        log.debug("iter %d sup %.3e lambda %.1e gain %.2f", it, sup_h[-1], lam, gain)
    return SolveOutcome(BasisExpansion(c, start.degree), sup_h, rms_h, converged, it, message)


def perturbed_start(degree: int = 3, noise: float = 1e-2, seed: int = 0) -> BasisExpansion:
    """Flat coefficients plus seeded uniform noise in ``[-noise, noise]``."""
    flat = BasisExpansion.flat(degree)
    rng = np.random.default_rng(seed)
    return BasisExpansion(flat.coefficients + rng.uniform(-noise, noise, flat.coefficients.shape), degree)


def verify_on(c: BasisExpansion, pts: CollocationSet) -> float:
    """Sup residual of ``c`` on a point set via the jet-based reduced residuals."""
    from .residuals import reduced_residuals
    return reduced_residuals(c.potential(), pts.points).sup()
