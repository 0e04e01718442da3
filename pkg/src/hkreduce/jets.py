"""Forward-mode jets: exact first, second and third partial derivatives.

A :class:`Jet` carries the value of a scalar field together with its gradient,
Hessian and (optionally) third-derivative tensor with respect to a fixed list
of real coordinates.  Arithmetic on jets propagates all of them exactly, so
evaluating a closed-form expression on seeded coordinate jets yields exact
derivatives with no truncation error.

All arrays carry arbitrary leading batch dimensions, so a single pass can
differentiate a field at many points at once.

Complex coordinates are pairs of real coordinates (``z = x + iy``).  The
Wirtinger operators are fixed as::

    d_z    = (d_x - i d_y) / 2
    d_zbar = (d_x + i d_y) / 2
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np

__all__ = [
    "DomainError",
    "RealCoordsLayout",
    "Jet",
    "WirtingerView",
    "exp",
    "log",
    "sqrt",
    "conj",
    "abs2",
    "real",
    "imag",
    "evaluate_jet",
    "finite_difference_check",
]


class DomainError(ValueError):
    """Raised when a field is evaluated outside its domain."""


@dataclass(frozen=True)
class RealCoordsLayout:
    """Ordered real coordinates, some of which pair up into complex ones.

    Parameters
    ----------
    names : tuple of str
        Labels of the real coordinates, in order.
    complex_pairs : tuple of (str, int, int)
        ``(label, index_re, index_im)`` for every complex coordinate.
    darboux : tuple of (str, str)
        Optional ``(q, p)`` label pairs of complex coordinates forming a
        holomorphic Darboux frame ``sum dq ^ dp``.
    """

    names: Tuple[str, ...]
    complex_pairs: Tuple[Tuple[str, int, int], ...] = ()
    darboux: Tuple[Tuple[str, str], ...] = ()
    _index: Dict[str, Tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.names)
        if len(set(self.names)) != n:
            raise ValueError("duplicate coordinate names")
        used = set()
        index = {name: (i,) for i, name in enumerate(self.names)}
        for label, i_re, i_im in self.complex_pairs:
            for i in (i_re, i_im):
                if not 0 <= i < n:
                    raise ValueError(f"pair index {i} out of range for {n} coordinates")
                if i in used:
                    raise ValueError(f"coordinate {i} used in more than one complex pair")
                used.add(i)
            if label in index:
                raise ValueError(f"complex label {label!r} clashes with a real name")
            index[label] = (i_re, i_im)
        for q, p in self.darboux:
            if len(index.get(q, ())) != 2 or len(index.get(p, ())) != 2:
                raise ValueError(f"Darboux pair ({q}, {p}) must name complex coordinates")
        object.__setattr__(self, "_index", index)

    @property
    def dim(self) -> int:
        return len(self.names)

    def real_index(self, name: str) -> int:
        idx = self._index[name]
        if len(idx) != 1:
            raise KeyError(f"{name!r} is a complex coordinate")
        return idx[0]

    def pair(self, name: str) -> Tuple[int, int]:
        idx = self._index[name]
        if len(idx) != 2:
            raise KeyError(f"{name!r} is not a complex coordinate")
        return idx

    @property
    def complex_names(self) -> Tuple[str, ...]:
        return tuple(label for label, _, _ in self.complex_pairs)

    @property
    def free_real_names(self) -> Tuple[str, ...]:
        """Real coordinates not absorbed in a complex pair."""
        paired = {i for _, a, b in self.complex_pairs for i in (a, b)}
        return tuple(n for i, n in enumerate(self.names) if i not in paired)

    def variables(self, x, order: int) -> Dict[str, "Jet"]:
        """Seed coordinate jets at real points ``x`` of shape ``(..., dim)``.

        Complex coordinates are returned assembled as ``x + iy``; real
        coordinates not part of a pair are returned as-is.
        """
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected {self.dim} real coordinates, got {x.shape[-1]}")
        seeds = [Jet.variable(x[..., i], i, self.dim, order) for i in range(self.dim)]
        out = {}
        for label, i_re, i_im in self.complex_pairs:
            out[label] = seeds[i_re] + 1j * seeds[i_im]
        for name in self.free_real_names:
            out[name] = seeds[self.names.index(name)]
        return out

    def values(self, x) -> Dict[str, np.ndarray]:
        """Plain (non-jet) coordinate values at real points ``x``."""
        x = np.asarray(x, dtype=float)
        out = {}
        for label, i_re, i_im in self.complex_pairs:
            out[label] = x[..., i_re] + 1j * x[..., i_im]
        for name in self.free_real_names:
            out[name] = x[..., self.names.index(name)]
        return out


@lru_cache(maxsize=None)
def _sorted_triple_index(n: int) -> np.ndarray:
    # flat index of the sorted (i, j, k) for every (i, j, k)
    idx = np.empty((n, n, n), dtype=np.intp)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                a, b, c = sorted((i, j, k))
                idx[i, j, k] = (a * n + b) * n + c
    return idx


def _symmetrize3(t):
    n = t.shape[-1]
    flat = t.reshape(t.shape[:-3] + (n * n * n,))
    return np.take(flat, _sorted_triple_index(n), axis=-1)


def _outer(a, b):
    return a[..., :, None] * b[..., None, :]


def _outer3(a, b, c):
    return a[..., :, None, None] * b[..., None, :, None] * c[..., None, None, :]


def _sym_hg(h, g):
    # h_ij g_k + h_ik g_j + h_jk g_i
    return (h[..., :, :, None] * g[..., None, None, :]
            + h[..., :, None, :] * g[..., None, :, None]
            + h[..., None, :, :] * g[..., :, None, None])


class Jet:
    """Value and exact partial derivatives of a scalar field.

    Attributes
    ----------
    order : int
        Highest derivative order carried (0 to 3).
    value : ndarray
        Shape ``batch``.
    grad : ndarray or None
        Shape ``batch + (n,)``; present when ``order >= 1``.
    hess : ndarray or None
        Shape ``batch + (n, n)``; present when ``order >= 2``.
    third : ndarray or None
        Shape ``batch + (n, n, n)``; present when ``order == 3``.
    """

    __slots__ = ("order", "value", "grad", "hess", "third")
    __array_priority__ = 1000

    def __init__(self, value, grad=None, hess=None, third=None):
        self.value = np.asarray(value)
        self.grad = None if grad is None else np.asarray(grad)
        self.hess = None if hess is None else np.asarray(hess)
        self.third = None if third is None else np.asarray(third)
        if self.grad is None:
            self.order = 0
        elif self.hess is None:
            self.order = 1
        elif self.third is None:
            self.order = 2
        else:
            self.order = 3

    @classmethod
    def variable(cls, x, index: int, n: int, order: int) -> "Jet":
        """Seed jet of the ``index``-th of ``n`` real coordinates."""
        if order not in (0, 1, 2, 3):
            raise ValueError(f"unsupported jet order {order}")
        x = np.asarray(x, dtype=float)
        grad = hess = third = None
        if order >= 1:
            grad = np.zeros(x.shape + (n,))
            grad[..., index] = 1.0
        if order >= 2:
            hess = np.zeros(x.shape + (n, n))
        if order >= 3:
            third = np.zeros(x.shape + (n, n, n))
        return cls(x, grad, hess, third)

    @property
    def n(self) -> int:
        return self.grad.shape[-1]

    def __repr__(self):
        return f"Jet(order={self.order}, value={self.value!r})"

    def truncate(self, order: int) -> "Jet":
        """Drop derivatives above ``order``."""
        if order > self.order:
            raise ValueError(f"cannot raise jet order {self.order} to {order}")
        parts = [self.grad, self.hess, self.third][:order]
        return Jet(self.value, *parts)

    def partial(self, index: int) -> "Jet":
        """Jet of the partial derivative along real coordinate ``index``."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        grad = hess = None
        if self.order >= 2:
            grad = self.hess[..., index, :]
        if self.order >= 3:
            hess = self.third[..., index, :, :]
        return Jet(self.grad[..., index], grad, hess)

    # -- elementwise helpers -------------------------------------------

    def _map(self, fn) -> "Jet":
        return Jet(*(fn(p) if p is not None else None
                     for p in (self.value, self.grad, self.hess, self.third)))

    def conj(self) -> "Jet":
        return self._map(np.conj)

    @property
    def real(self) -> "Jet":
        return self._map(np.real)

    @property
    def imag(self) -> "Jet":
        return self._map(np.imag)

    def _chain(self, f0, f1, f2=None, f3=None) -> "Jet":
        # f(a) for a scalar function with derivatives f1, f2, f3 at a.value
        a = self
        grad = hess = third = None
        if a.order >= 1:
            grad = f1[..., None] * a.grad
        if a.order >= 2:
            hess = f1[..., None, None] * a.hess + f2[..., None, None] * _outer(a.grad, a.grad)
        if a.order >= 3:
            third = (f1[..., None, None, None] * a.third
                     + f2[..., None, None, None] * _sym_hg(a.hess, a.grad)
                     + f3[..., None, None, None] * _outer3(a.grad, a.grad, a.grad))
            third = _symmetrize3(third)
        return Jet(f0, grad, hess, third)

    # -- arithmetic ----------------------------------------------------

    @staticmethod
    def _lift(other, order, n):
        if isinstance(other, Jet):
            return other
        c = np.asarray(other)
        grad = hess = third = None
        if order >= 1:
            grad = np.zeros(c.shape + (n,), dtype=c.dtype)
        if order >= 2:
            hess = np.zeros(c.shape + (n, n), dtype=c.dtype)
        if order >= 3:
            third = np.zeros(c.shape + (n, n, n), dtype=c.dtype)
        return Jet(c, grad, hess, third)

    def __neg__(self):
        return self._map(np.negative)

    def __pos__(self):
        return self

    def __add__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.value + other, self.grad, self.hess, self.third)
        order = min(self.order, other.order)
        a, b = self.truncate(order), other.truncate(order)
        return Jet(*(None if x is None else x + y
                     for x, y in zip((a.value, a.grad, a.hess, a.third),
                                     (b.value, b.grad, b.hess, b.third))))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other)
            parts = [self.value * c]
            for k, p in enumerate((self.grad, self.hess, self.third), start=1):
                parts.append(None if p is None else p * c[(...,) + (None,) * k])
            return Jet(*parts)
        order = min(self.order, other.order)
        a, b = self.truncate(order), other.truncate(order)
        av, bv = a.value, b.value
        grad = hess = third = None
        if order >= 1:
            grad = av[..., None] * b.grad + bv[..., None] * a.grad
        if order >= 2:
            hess = (bv[..., None, None] * a.hess
                    + (_outer(a.grad, b.grad) + _outer(b.grad, a.grad))
                    + av[..., None, None] * b.hess)
        if order >= 3:
            third = (bv[..., None, None, None] * a.third
                     + (_sym_hg(a.hess, b.grad) + _sym_hg(b.hess, a.grad))
                     + av[..., None, None, None] * b.third)
            third = _symmetrize3(third)
        return Jet(av * bv, grad, hess, third)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        x = self.value
        if np.any(x == 0):
            raise DomainError("division by zero")
        r = 1.0 / x
        return self._chain(r, -r * r, 2 * r ** 3, -6 * r ** 4)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other)
            if np.any(other == 0):
                raise DomainError("division by zero")
            return self * (1.0 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        if isinstance(k, Jet):
            return exp(log(self) * k)
        x = self.value
        if isinstance(k, (int, np.integer)):
            k = int(k)
            if k == 0:
                return Jet._lift(np.ones_like(x), self.order, self.n if self.order else 0)
            if k < 0:
                return (self ** (-k)).reciprocal()
            f0 = x ** k
            f1 = k * x ** (k - 1)
            f2 = k * (k - 1) * x ** (k - 2) if k >= 2 else np.zeros_like(x)
            f3 = k * (k - 1) * (k - 2) * x ** (k - 3) if k >= 3 else np.zeros_like(x)
            return self._chain(f0, f1, f2, f3)
        if np.any(np.real(x) <= 0) and not np.iscomplexobj(x):
            raise DomainError("non-integer power of a nonpositive number")
        return self._chain(x ** k, k * x ** (k - 1), k * (k - 1) * x ** (k - 2),
                           k * (k - 1) * (k - 2) * x ** (k - 3))

    def exp(self) -> "Jet":
        e = np.exp(self.value)
        return self._chain(e, e, e, e)

    def log(self) -> "Jet":
        x = self.value
        if np.iscomplexobj(x):
            if np.any(x == 0):
                raise DomainError("log of zero")
        elif np.any(x <= 0):
            raise DomainError("log of a nonpositive argument")
        r = 1.0 / x
        return self._chain(np.log(x), r, -r * r, 2 * r ** 3)

    def sqrt(self) -> "Jet":
        x = self.value
        if np.iscomplexobj(x):
            if np.any(x == 0):
                raise DomainError("sqrt is not differentiable at zero")
        elif np.any(x <= 0):
            raise DomainError("sqrt of a nonpositive argument")
        s = np.sqrt(x)
        r = 1.0 / x
        return self._chain(s, 0.5 / s, -0.25 * r / s, 0.375 * r * r / s)


def exp(x):
    return x.exp() if isinstance(x, Jet) else np.exp(x)


def log(x):
    if isinstance(x, Jet):
        return x.log()
    x = np.asarray(x)
    if not np.iscomplexobj(x) and np.any(x <= 0):
        raise DomainError("log of a nonpositive argument")
    return np.log(x)


def sqrt(x):
    if isinstance(x, Jet):
        return x.sqrt()
    x = np.asarray(x)
    if not np.iscomplexobj(x) and np.any(x < 0):
        raise DomainError("sqrt of a negative argument")
    return np.sqrt(x)


def conj(x):
    return x.conj() if isinstance(x, Jet) else np.conj(x)


def real(x):
    return x.real if isinstance(x, Jet) else np.real(x)


def imag(x):
    return x.imag if isinstance(x, Jet) else np.imag(x)


def abs2(x):
    """``|x|**2`` as a real quantity."""
    re, im = real(x), imag(x)
    return re * re + im * im


class WirtingerView:
    """Wirtinger and real partial derivatives of a jet under a layout."""

    def __init__(self, jet: Jet, layout: RealCoordsLayout):
        self.jet = jet
        self.layout = layout

    def partial(self, name: str) -> Jet:
        return self.jet.partial(self.layout.real_index(name))

    def d(self, name: str) -> Jet:
        i, j = self.layout.pair(name)
        return 0.5 * (self.jet.partial(i) - 1j * self.jet.partial(j))

    def dbar(self, name: str) -> Jet:
        i, j = self.layout.pair(name)
        return 0.5 * (self.jet.partial(i) + 1j * self.jet.partial(j))

    def __getitem__(self, name: str) -> Jet:
        """``view['zeta']``, ``view['zeta~']`` (conjugate) or ``view['v']``."""
        if name.endswith("~"):
            return self.dbar(name[:-1])
        if len(self.layout._index[name]) == 2:
            return self.d(name)
        return self.partial(name)

    def mixed(self, a: str, b: str) -> np.ndarray:
        """Second Wirtinger derivative; ``~`` suffix marks a conjugate slot."""
        first = self[a]
        return WirtingerView(first, self.layout)[b].value


def evaluate_jet(field, point, order: int = 2) -> Jet:
    """Exact jet of ``field`` at ``point``.

    Parameters
    ----------
    field : Potential
        Anything with ``layout``, ``to_real(point)`` and ``expression``.
    point : point dataclass or array_like
        A point in the field's coordinate system, or real coordinates of
        shape ``(..., dim)``.
    order : {1, 2, 3}
    """
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    return field.jet(point, order)


def _central_grad(fn, x, step):
    n = x.shape[-1]
    g = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = step
        g.append((fn(x + e) - fn(x - e)) / (2 * step))
    return np.stack(g, axis=x.ndim - 1)


def finite_difference_check(field, point, step: float = 1e-5) -> float:
    """Largest deviation between jet derivatives and central differences.

    First partials are compared with central differences of the value.
    Second partials are compared with central differences of the exact
    first-order jet, which keeps round-off at ``eps / step`` instead of
    ``eps / step**2``.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    x = np.asarray(field.to_real(point), dtype=float)
    jet = field.jet(x, 2)
    # probes every stencil point, raising DomainError if any leaves the domain
    fd_grad = _central_grad(lambda y: field.value(y), x, step)
    fd_hess = _central_grad(lambda y: field.jet(y, 1).grad, x, step)
    dev_g = np.max(np.abs(jet.grad - fd_grad))
    dev_h = np.max(np.abs(jet.hess - fd_hess))
    return float(max(dev_g, dev_h))
