"""Point-wise multilinear algebra.

Wedge-space indexing, Kulkarni-Nomizu products, orthonormalization,
curvature-operator packing and the sampled C^0 / C^1 norms of symmetric
2-tensor fields.

Curvature convention used throughout the package::

    R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
    R(X, Y, Z, W) = g(R(X, Y)Z, W)
    sec(u, v) = R(u, v, v, u) / |u ^ v|^2

so the unit sphere has ``R = g o g`` with the Kulkarni-Nomizu product below.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ConsistencyError, DegeneracyError, InputError
from .fields import TensorField, as_batch, sample_id


# ---------------------------------------------------------------------------
# value types

@dataclass(frozen=True)
class TangentVector:
    chart_id: str
    base_point: tuple
    components: tuple

    def __post_init__(self):
        if len(self.base_point) != len(self.components):
            raise InputError("components length must equal the chart dimension")
        object.__setattr__(self, "base_point", tuple(float(c) for c in self.base_point))
        object.__setattr__(self, "components", tuple(float(c) for c in self.components))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.components)


@dataclass(frozen=True)
class TwoTensor:
    base_point: tuple
    entries: np.ndarray
    symmetry_flag: bool = True

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise InputError("TwoTensor entries must be a square matrix")
        if self.symmetry_flag and not np.array_equal(e, e.T):
            raise InputError("symmetric TwoTensor must have exactly symmetric entries")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "base_point", tuple(float(c) for c in self.base_point))


def _vec(v) -> np.ndarray:
    return np.asarray(v.components if isinstance(v, TangentVector) else v, dtype=float)


def _mat(a) -> np.ndarray:
    return np.asarray(a.entries if isinstance(a, TwoTensor) else a, dtype=float)


@dataclass(frozen=True)
class WedgeBasis:
    """Lexicographically ordered pairs ``(i, j)``, ``i < j``."""

    dimension: int
    pairs: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "pairs", wedge_pairs(self.dimension))

    def index(self, i: int, j: int) -> int:
        return self.pairs.index((i, j))

    def __len__(self) -> int:
        return len(self.pairs)


@lru_cache(maxsize=None)
def wedge_pairs(n: int) -> tuple:
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


def _pair_index_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    pairs = np.array(wedge_pairs(n), dtype=int).reshape(-1, 2)
    return pairs[:, 0], pairs[:, 1]


def wedge(u, v) -> np.ndarray:
    """Coordinates of ``u ^ v`` in the wedge basis (batched over leading axes)."""
    u, v = np.asarray(u, float), np.asarray(v, float)
    ii, jj = _pair_index_arrays(u.shape[-1])
    return u[..., ii] * v[..., jj] - u[..., jj] * v[..., ii]


def wedge_gram(g) -> np.ndarray:
    """Gram matrix of the wedge basis induced by ``g`` (batched)."""
    g = np.asarray(g, float)
    ii, jj = _pair_index_arrays(g.shape[-1])
    gik = g[..., ii[:, None], ii[None, :]]
    gjl = g[..., jj[:, None], jj[None, :]]
    gil = g[..., ii[:, None], jj[None, :]]
    gjk = g[..., jj[:, None], ii[None, :]]
    return gik * gjl - gil * gjk


# ---------------------------------------------------------------------------
# Kulkarni-Nomizu

def kn_tensor(alpha, beta) -> np.ndarray:
    """Full 4-index Kulkarni-Nomizu product of two symmetric tensors (batched)."""
    a, b = np.asarray(alpha, float), np.asarray(beta, float)
    t = (np.einsum("...ad,...bc->...abcd", a, b) + np.einsum("...bc,...ad->...abcd", a, b)
         - np.einsum("...ac,...bd->...abcd", a, b) - np.einsum("...bd,...ac->...abcd", a, b))
    return 0.5 * t


def kulkarni_nomizu(alpha, beta, v1, v2, v3, v4) -> float:
    a, b = _mat(alpha), _mat(beta)
    vs = [_vec(v) for v in (v1, v2, v3, v4)]
    n = a.shape[0]
    if b.shape != a.shape or any(v.shape != (n,) for v in vs):
        raise InputError("dimension mismatch in Kulkarni-Nomizu product")
    for v in (v1, v2, v3, v4):
        if isinstance(v, TangentVector) and isinstance(v1, TangentVector) and v.base_point != v1.base_point:
            raise InputError("vectors must share a base point")
    x1, x2, x3, x4 = vs

    def q(m, x, y):
        return float(x @ m @ y)

    return (0.5 * (q(a, x1, x4) * q(b, x2, x3) + q(a, x2, x3) * q(b, x1, x4))
            - 0.5 * (q(a, x1, x3) * q(b, x2, x4) + q(a, x2, x4) * q(b, x1, x3)))


def curvature_symmetry_residual(R) -> float:
    """Largest violation of the algebraic curvature identities, relative to ``max|R|``."""
    R = np.asarray(R, float)
    scale = max(np.max(np.abs(R)), 1.0)
    res = max(
        np.max(np.abs(R + np.swapaxes(R, -4, -3))),
        np.max(np.abs(R + np.swapaxes(R, -2, -1))),
        np.max(np.abs(R - np.moveaxis(R, (-4, -3), (-2, -1)))),
        np.max(np.abs(R + np.einsum("...ijkl->...jkil", R) + np.einsum("...ijkl->...kijl", R))),
    )
    return float(res / scale)


# ---------------------------------------------------------------------------
# curvature operators

def curvature_form(R) -> np.ndarray:
    """Symmetric bilinear form on the wedge basis: entry ``[(ij),(kl)] = R_{ijlk}``."""
    R = np.asarray(R, float)
    ii, jj = _pair_index_arrays(R.shape[-1])
    return R[..., ii[:, None], jj[:, None], jj[None, :], ii[None, :]]


def form_to_tensor(form, n: int) -> np.ndarray:
    """Inverse of :func:`curvature_form` for forms of algebraic curvature tensors."""
    form = np.asarray(form, float)
    R = np.zeros(form.shape[:-2] + (n, n, n, n))
    for a, (i, j) in enumerate(wedge_pairs(n)):
        for b, (k, l) in enumerate(wedge_pairs(n)):
            val = form[..., a, b]
            R[..., i, j, l, k] = val
            R[..., j, i, l, k] = -val
            R[..., i, j, k, l] = -val
            R[..., j, i, k, l] = val
    return R


@dataclass(frozen=True)
class CurvatureOperator:
    """Self-adjoint operator on the wedge space at a point.

    ``form`` is the symmetric bilinear form ``(xi, zeta) -> g(R xi, zeta)``;
    the operator matrix is ``metric_on_wedges^{-1} form``.
    """

    base_point: tuple
    form: np.ndarray
    metric_on_wedges: np.ndarray
    metric: np.ndarray

    @property
    def n(self) -> int:
        return self.metric.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return np.linalg.solve(self.metric_on_wedges, self.form)

    def eigenvalues(self) -> np.ndarray:
        from scipy.linalg import eigh
        return eigh(self.form, self.metric_on_wedges, eigvals_only=True)

    def quadratic(self, u, v) -> float:
        """``g(R(u ^ v), u ^ v) = R(u, v, v, u)``."""
        xi = wedge(_vec(u), _vec(v))
        return float(xi @ self.form @ xi)

    def tensor(self) -> np.ndarray:
        return form_to_tensor(self.form, self.n)

    def __sub__(self, other: "CurvatureOperator") -> "CurvatureOperator":
        if not np.allclose(self.metric, other.metric, rtol=1e-12, atol=1e-12):
            raise InputError("operators live on different wedge Gram structures")
        return CurvatureOperator(self.base_point, self.form - other.form, self.metric_on_wedges, self.metric)

    def self_adjointness_residual(self) -> float:
        return float(np.max(np.abs(self.form - self.form.T)) / max(1.0, np.max(np.abs(self.form))))


def pack_curvature_operator(R, g, base_point=None, tol: float = 1e-8) -> CurvatureOperator:
    R = np.asarray(R, float)
    g = _mat(g)
    if R.ndim != 4 or R.shape != (g.shape[0],) * 4:
        raise InputError("R must be a 4-index array matching the metric dimension")
    res = curvature_symmetry_residual(R)
    if res > tol:
        raise ConsistencyError(f"curvature symmetry residual {res:.3e} exceeds {tol:.1e}")
    form = curvature_form(R)
    form = 0.5 * (form + form.T)
    if base_point is None:
        base_point = tuple([float("nan")] * g.shape[0])
    return CurvatureOperator(tuple(float(c) for c in base_point), form, wedge_gram(g), g)


def block_operator(dims: Sequence[int], lambdas: dict) -> np.ndarray:
    """Form (in an orthonormal frame) of the operator that is ``lambda_ij`` on ``V_i ^ V_j``.

    ``dims`` gives the dimensions of the orthogonal summands ``V_1, V_2, ...``
    spanned by consecutive frame vectors; ``lambdas`` maps ``(i, j)`` with
    ``i <= j`` (1-based) to the eigenvalue.
    """
    labels = np.concatenate([[i + 1] * d for i, d in enumerate(dims)]).astype(int)
    n = int(sum(dims))
    diag = []
    for i, j in wedge_pairs(n):
        a, b = sorted((labels[i], labels[j]))
        diag.append(float(lambdas.get((a, b), 0.0)))
    return np.diag(np.array(diag))


# ---------------------------------------------------------------------------
# frames

def gram_schmidt(vectors: Sequence, g, tol: float = 1e-12) -> np.ndarray:
    """g-orthonormalize ``vectors``; returns an array whose rows are the frame."""
    G = _mat(g)
    vs = [_vec(v) for v in vectors]
    out: list[np.ndarray] = []
    for v in vs:
        scale = np.sqrt(abs(v @ G @ v))
        w = v.copy()
        for _ in range(2):  # second pass for numerical orthogonality
            for e in out:
                w = w - (e @ G @ w) * e
        nrm = np.sqrt(max(w @ G @ w, 0.0))
        if scale == 0.0 or nrm <= tol * max(scale, 1.0):
            raise DegeneracyError("vectors are linearly dependent")
        out.append(w / nrm)
    return np.array(out)


def orthonormal_frame(G) -> np.ndarray:
    """Columns of ``E`` are g-orthonormal: ``E^T G E = I`` (batched)."""
    G = np.asarray(G, float)
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise DegeneracyError("metric is not positive definite") from exc
    n = G.shape[-1]
    Linv = np.linalg.solve(L, np.broadcast_to(np.eye(n), G.shape))
    return np.swapaxes(Linv, -1, -2)


def to_frame(R, E) -> np.ndarray:
    """Components of a 4-tensor in the frame whose vectors are the columns of ``E``."""
    return np.einsum("...ijkl,...ia,...jb,...kc,...ld->...abcd", R, E, E, E, E, optimize=True)


# ---------------------------------------------------------------------------
# norms

@dataclass(frozen=True)
class NormResult:
    value: float
    c0: float
    c1: float | None
    c1_upper: float | None
    argmax: tuple
    sample_set: str

    def __float__(self) -> float:
        return float(self.value)


def _h_and_frame(h, g0, pts):
    hj = h.jet(pts) if isinstance(h, TensorField) else None
    gj = g0.jet(pts)
    try:
        E = orthonormal_frame(gj.val)
    except Exception as exc:
        raise InputError("background metric is not positive definite at a sample") from exc
    return hj, gj, E


def _c0_pointwise(hval, E) -> np.ndarray:
    m = np.einsum("...ia,...ij,...jb->...ab", E, hval, E)
    m = 0.5 * (m + np.swapaxes(m, -1, -2))
    return np.max(np.abs(np.linalg.eigvalsh(m)), axis=-1)


def c0_norm(h: TensorField, g0: TensorField, samples, seed=None) -> NormResult:
    """Sampled sup of ``|h(u,u)| / g0(u,u)``, exact at each sample point."""
    pts, _ = as_batch(samples, g0.dim)
    if len(pts) == 0:
        raise InputError("empty sample set")
    hj, gj, E = _h_and_frame(h, g0, pts)
    vals = _c0_pointwise(hj.val, E)
    i = int(np.argmax(vals))
    return NormResult(float(vals[i]), float(vals[i]), None, None, tuple(pts[i]), sample_id(pts, seed))


def _sup_trilinear(T: np.ndarray, iters: int = 40) -> np.ndarray:
    """Per-point ``sup_{|u|=1} |T(., u, u)|`` for orthonormal-frame components ``T[..., a, b, c]``
    symmetric in ``(b, c)``; alternating maximization from every axis direction."""
    n = T.shape[-1]
    best = np.zeros(T.shape[:-3])
    for a0 in range(n):
        w = np.zeros(T.shape[:-3] + (n,))
        w[..., a0] = 1.0
        for _ in range(iters):
            M = np.einsum("...a,...abc->...bc", w, T)
            ev, evec = np.linalg.eigh(M)
            idx = np.argmax(np.abs(ev), axis=-1)
            u = np.take_along_axis(evec, idx[..., None, None], axis=-1)[..., 0]
            v = np.einsum("...abc,...b,...c->...a", T, u, u)
            nv = np.linalg.norm(v, axis=-1)
            best = np.maximum(best, nv)
            w = np.where(nv[..., None] > 0, v / np.where(nv > 0, nv, 1.0)[..., None], w)
    return best


def c1_norm(h: TensorField, g0: TensorField, samples, seed=None) -> NormResult:
    """Max of the C^0 norm and the sampled sup of ``|(nabla_w h)(u,u)|`` over g0-unit ``u, w``.

    ``c1_upper`` is a Frobenius-type upper bound of the derivative part at
    the same samples (``sum_w ||sym(nabla_w h)||_op^2`` square-rooted).
    """
    from .metric_calculus import christoffel_from_jet

    pts, _ = as_batch(samples, g0.dim)
    if len(pts) == 0:
        raise InputError("empty sample set")
    hj, gj, E = _h_and_frame(h, g0, pts)
    c0 = _c0_pointwise(hj.val, E)
    gam = christoffel_from_jet(gj)  # gam[..., m, i, j] = Gamma^m_ij
    dh = np.einsum("...ijk->...kij", hj.grad)  # dh[k, i, j] = d_k h_ij
    T = (dh - np.einsum("...mki,...mj->...kij", gam, hj.val)
         - np.einsum("...mkj,...im->...kij", gam, hj.val))
    Tf = np.einsum("...kij,...ka,...ib,...jc->...abc", T, E, E, E, optimize=True)
    Tf = 0.5 * (Tf + np.swapaxes(Tf, -1, -2))
    c1 = _sup_trilinear(Tf)
    upper = np.sqrt(np.sum(np.max(np.abs(np.linalg.eigvalsh(Tf)), axis=-1) ** 2, axis=-1))
    total = np.maximum(c0, c1)
    i = int(np.argmax(total))
    return NormResult(float(total[i]), float(np.max(c0)), float(np.max(c1)), float(np.max(upper)),
                      tuple(pts[i]), sample_id(pts, seed))
