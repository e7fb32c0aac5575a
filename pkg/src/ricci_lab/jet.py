"""Second-order forward-mode differentiation on numpy arrays.

A :class:`Jet` carries a value together with its gradient and Hessian with
respect to a fixed set of ``d`` input variables.  Values may have any leading
shape (a batch of points, tensor indices, ...); the derivative axes are always
the trailing ones, so ``grad`` has shape ``val.shape + (d,)`` and ``hess`` has
shape ``val.shape + (d, d)``.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


def _normalize_key(key, ndim: int) -> tuple:
    if not isinstance(key, tuple):
        key = (key,)
    if any(k is Ellipsis for k in key):
        pos = next(i for i, k in enumerate(key) if k is Ellipsis)
        used = sum(1 for k in key if k is not None and k is not Ellipsis)
        key = key[:pos] + (slice(None),) * (ndim - used) + key[pos + 1:]
    return key


class Jet:
    """Value, gradient and Hessian of an array-valued function."""

    __slots__ = ("val", "grad", "hess")
    __array_priority__ = 1000

    def __init__(self, val, grad, hess):
        self.val = np.asarray(val, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = np.asarray(hess, dtype=float)

    # construction -----------------------------------------------------
    @classmethod
    def variables(cls, x) -> "Jet":
        """Independent variables: ``x`` has shape ``(..., d)``."""
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        grad = np.broadcast_to(np.eye(d), x.shape + (d,)).copy()
        return cls(x, grad, np.zeros(x.shape + (d, d)))

    @classmethod
    def constant(cls, c, nvars: int) -> "Jet":
        c = np.asarray(c, dtype=float)
        return cls(c, np.zeros(c.shape + (nvars,)), np.zeros(c.shape + (nvars, nvars)))

    @property
    def nvars(self) -> int:
        return self.grad.shape[-1]

    @property
    def shape(self) -> tuple:
        return self.val.shape

    @property
    def ndim(self) -> int:
        return self.val.ndim

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, nvars={self.nvars})"

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.nvars)

    # indexing and shape -----------------------------------------------
    def __getitem__(self, key) -> "Jet":
        key = _normalize_key(key, self.ndim)
        return Jet(self.val[key], self.grad[key + (Ellipsis,)], self.hess[key + (Ellipsis,)])

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        d = self.nvars
        val = self.val.reshape(shape)
        return Jet(val, self.grad.reshape(val.shape + (d,)), self.hess.reshape(val.shape + (d, d)))

    def swap(self, a: int, b: int) -> "Jet":
        """Swap two value axes (negative axes count from the value's end)."""
        a %= self.ndim
        b %= self.ndim
        return Jet(self.val.swapaxes(a, b), self.grad.swapaxes(a, b), self.hess.swapaxes(a, b))

    @property
    def T(self) -> "Jet":
        return self.swap(-1, -2)

    def sum(self, axis: int) -> "Jet":
        axis %= self.ndim
        return Jet(self.val.sum(axis), self.grad.sum(axis), self.hess.sum(axis))

    # arithmetic -------------------------------------------------------
    def __neg__(self) -> "Jet":
        return Jet(-self.val, -self.grad, -self.hess)

    def __add__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            val = self.val + c
            return Jet(val, np.broadcast_to(self.grad, val.shape + (self.nvars,)),
                       np.broadcast_to(self.hess, val.shape + (self.nvars,) * 2))
        return Jet(self.val + other.val, self.grad + other.grad, self.hess + other.hess)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            return Jet(self.val * c, self.grad * c[..., None], self.hess * c[..., None, None])
        a, b = self, other
        ga, gb = a.grad, b.grad
        hess = (a.hess * b.val[..., None, None] + a.val[..., None, None] * b.hess
                + ga[..., :, None] * gb[..., None, :] + ga[..., None, :] * gb[..., :, None])
        return Jet(a.val * b.val, ga * b.val[..., None] + a.val[..., None] * gb, hess)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        v = self.val
        return self.apply(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "Jet":
        return self.reciprocal() * other

    def __pow__(self, p) -> "Jet":
        if isinstance(p, Jet):
            return exp(log(self) * p)
        p = float(p)
        if p == 2.0:
            return self * self
        v = self.val
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.apply(v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    # chain rule -------------------------------------------------------
    def apply(self, f0, f1, f2) -> "Jet":
        """Compose with a scalar function given its value and two derivatives at ``val``."""
        f0, f1, f2 = (np.asarray(f, dtype=float) for f in (f0, f1, f2))
        g = self.grad
        hess = f2[..., None, None] * (g[..., :, None] * g[..., None, :]) + f1[..., None, None] * self.hess
        return Jet(f0, f1[..., None] * g, hess)


# elementwise functions ------------------------------------------------

def exp(a: Jet) -> Jet:
    e = np.exp(a.val)
    return a.apply(e, e, e)


def log(a: Jet) -> Jet:
    v = a.val
    return a.apply(np.log(v), 1.0 / v, -1.0 / v**2)


def sqrt(a: Jet) -> Jet:
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.sqrt(a.val)
        return a.apply(s, 0.5 / s, -0.25 / (s * a.val))


def sin(a: Jet) -> Jet:
    s, c = np.sin(a.val), np.cos(a.val)
    return a.apply(s, c, -s)


def cos(a: Jet) -> Jet:
    s, c = np.sin(a.val), np.cos(a.val)
    return a.apply(c, -s, -c)


def arctan(a: Jet) -> Jet:
    v = a.val
    q = 1.0 / (1.0 + v * v)
    return a.apply(np.arctan(v), q, -2.0 * v * q * q)


def compose(a: Jet, fn: Callable[[np.ndarray], tuple]) -> Jet:
    """Apply ``fn`` returning ``(f, f', f'')`` arrays elementwise."""
    f0, f1, f2 = fn(a.val)
    return a.apply(f0, f1, f2)


def where(cond, a, b) -> Jet:
    """Branch selection; non-finite values in the rejected branch are discarded."""
    if not isinstance(a, Jet):
        a = b._lift(a)
    if not isinstance(b, Jet):
        b = a._lift(b)
    cond = np.asarray(cond, dtype=bool)
    return Jet(np.where(cond, a.val, b.val),
               np.where(cond[..., None], a.grad, b.grad),
               np.where(cond[..., None, None], a.hess, b.hess))


# structural helpers ---------------------------------------------------

def stack(items: Sequence, axis: int = 0) -> Jet:
    jets = [it for it in items if isinstance(it, Jet)]
    if not jets:
        raise ValueError("stack needs at least one Jet")
    d = jets[0].nvars
    items = [it if isinstance(it, Jet) else Jet.constant(it, d) for it in items]
    shape = np.broadcast_shapes(*(it.shape for it in items))
    items = [broadcast_to(it, shape) for it in items]
    ndim = len(shape) + 1
    axis %= ndim
    return Jet(np.stack([it.val for it in items], axis),
               np.stack([it.grad for it in items], axis),
               np.stack([it.hess for it in items], axis))


def concatenate(items: Sequence[Jet], axis: int = 0) -> Jet:
    axis %= items[0].ndim
    return Jet(np.concatenate([it.val for it in items], axis),
               np.concatenate([it.grad for it in items], axis),
               np.concatenate([it.hess for it in items], axis))


def broadcast_to(a: Jet, shape: tuple) -> Jet:
    d = a.nvars
    shape = tuple(shape)
    if a.shape == shape:
        return a
    return Jet(np.broadcast_to(a.val, shape),
               np.broadcast_to(a.grad, shape + (d,)),
               np.broadcast_to(a.hess, shape + (d, d)))


def _spare_letters(spec: str, count: int) -> str:
    free = [c for c in "zyxwvutsrqponmlkjihgfedcba" if c not in spec]
    return "".join(free[:count])


def einsum(spec: str, a, b) -> Jet:
    """Bilinear contraction of two operands, at least one a Jet.

    ``spec`` must be explicit (``'...ij,...jk->...ik'``).
    """
    lhs, out = spec.split("->")
    sa, sb = lhs.split(",")
    q, r = _spare_letters(spec, 2)
    if not isinstance(a, Jet):
        a = Jet.constant(a, b.nvars)
    if not isinstance(b, Jet):
        b = Jet.constant(b, a.nvars)
    val = np.einsum(spec, a.val, b.val)
    grad = (np.einsum(f"{sa}{q},{sb}->{out}{q}", a.grad, b.val)
            + np.einsum(f"{sa},{sb}{q}->{out}{q}", a.val, b.grad))
    cross = np.einsum(f"{sa}{q},{sb}{r}->{out}{q}{r}", a.grad, b.grad)
    hess = (np.einsum(f"{sa}{q}{r},{sb}->{out}{q}{r}", a.hess, b.val)
            + np.einsum(f"{sa},{sb}{q}{r}->{out}{q}{r}", a.val, b.hess)
            + cross + np.swapaxes(cross, -1, -2))
    return Jet(val, grad, hess)


def matmul(a, b) -> Jet:
    return einsum("...ij,...jk->...ik", a, b)


def inv(a: Jet) -> Jet:
    """Inverse of a batch of square matrices (value axes ``(..., n, n)``)."""
    ai = np.linalg.inv(a.val)
    da, dda = a.grad, a.hess
    grad = -np.einsum("...ij,...jkq,...kl->...ilq", ai, da, ai, optimize=True)
    # B_q = Ai dA_q Ai ; then Ai dA_r B_q etc.
    bq = -grad
    t1 = np.einsum("...ij,...jkr,...klq->...ilqr", ai, da, bq, optimize=True)
    t2 = np.einsum("...ij,...jkqr,...kl->...ilqr", ai, dda, ai, optimize=True)
    hess = t1 + np.swapaxes(t1, -1, -2) - t2
    return Jet(ai, grad, hess)
