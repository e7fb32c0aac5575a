"""Second-order calculus on chart-presented metrics.

Christoffel symbols, the Riemann tensor, sectional / Ricci / intermediate
Ricci curvature, and gradients and Hessians of scalar fields.  All arrays
carry an optional leading batch axis; index conventions:

* ``christoffel[..., m, i, j] = Gamma^m_ij``
* ``riemann[..., i, j, k, l] = R(d_i, d_j, d_k, d_l)``
* ``riemann_up[..., m, i, j, k]`` = ``m``-th component of ``R(d_i, d_j) d_k``
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegeneracyError, InputError
from .fields import MetricField, ScalarField, TensorField, as_batch
from .jet import Jet
from .tensor_core import CurvatureOperator, _vec, curvature_form, wedge_gram

__all__ = [
    "MetricField", "ScalarField", "CurvaturePointData", "christoffel", "christoffel_from_jet",
    "riemann", "curvature_from_jet", "sectional", "sectional_batch", "gradient", "hessian",
    "ric_k_min", "covariant_hessian",
]


def _inverse(G: np.ndarray) -> np.ndarray:
    try:
        np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise DegeneracyError("metric is singular or indefinite at a sample point") from exc
    return np.linalg.inv(G)


def _lowered(dG: np.ndarray) -> np.ndarray:
    # Gamma_{k,ij} = 1/2 (d_i g_jk + d_j g_ik - d_k g_ij); dG[a, b, c] = d_c g_ab
    return 0.5 * (np.einsum("...jki->...kij", dG) + np.einsum("...ikj->...kij", dG)
                  - np.einsum("...ijk->...kij", dG))


def christoffel_from_jet(gj: Jet) -> np.ndarray:
    Ginv = _inverse(gj.val)
    return np.einsum("...mk,...kij->...mij", Ginv, _lowered(gj.grad))


@dataclass(frozen=True)
class CurvaturePointData:
    base_point: np.ndarray
    metric: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    riemann_up: np.ndarray
    ricci: np.ndarray

    @property
    def batched(self) -> bool:
        return self.metric.ndim == 3

    def __len__(self) -> int:
        return self.metric.shape[0] if self.batched else 1

    @property
    def n(self) -> int:
        return self.metric.shape[-1]

    def at(self, i: int) -> "CurvaturePointData":
        if not self.batched:
            return self
        return CurvaturePointData(self.base_point[i], self.metric[i], self.christoffel[i],
                                  self.riemann[i], self.riemann_up[i], self.ricci[i])

    @property
    def operator(self) -> CurvatureOperator:
        if self.batched:
            raise InputError("operator is defined per point; use .at(i).operator")
        form = curvature_form(self.riemann)
        form = 0.5 * (form + form.T)
        return CurvatureOperator(tuple(self.base_point), form, wedge_gram(self.metric), self.metric)

    def curvature_vector(self, X, Y, Z) -> np.ndarray:
        """Components of ``R(X, Y)Z`` (vectors may be batched alongside the data)."""
        return np.einsum("...mijk,...i,...j,...k->...m", self.riemann_up, X, Y, Z)


def curvature_from_jet(gj: Jet, points: Optional[np.ndarray] = None) -> CurvaturePointData:
    """Curvature quantities from exact metric derivatives (batched over the leading axis)."""
    G, dG, ddG = gj.val, gj.grad, gj.hess
    Ginv = _inverse(G)
    low = _lowered(dG)
    gam = np.einsum("...mk,...kij->...mij", Ginv, low)
    dlow = 0.5 * (np.einsum("...jkil->...kijl", ddG) + np.einsum("...ikjl->...kijl", ddG)
                  - np.einsum("...ijkl->...kijl", ddG))
    dGinv = -np.einsum("...ma,...abl,...bk->...mkl", Ginv, dG, Ginv, optimize=True)
    # dgam[m, i, j, l] = d_l Gamma^m_ij
    dgam = (np.einsum("...mkl,...kij->...mijl", dGinv, low)
            + np.einsum("...mk,...kijl->...mijl", Ginv, dlow))
    # R(d_i, d_j) d_k = (d_i Gamma^m_jk - d_j Gamma^m_ik + Gamma^p_jk Gamma^m_ip - Gamma^p_ik Gamma^m_jp) d_m
    Rup = (np.einsum("...mjki->...mijk", dgam) - np.einsum("...mikj->...mijk", dgam)
           + np.einsum("...pjk,...mip->...mijk", gam, gam)
           - np.einsum("...pik,...mjp->...mijk", gam, gam))
    R = np.einsum("...lm,...mijk->...ijkl", G, Rup)
    ric = np.einsum("...mmjk->...jk", Rup)
    ric = 0.5 * (ric + np.swapaxes(ric, -1, -2))
    if points is None:
        points = np.full(G.shape[:-1], np.nan)
    return CurvaturePointData(points, G, gam, R, Rup, ric)


def christoffel(g: TensorField, x) -> np.ndarray:
    pts, single = as_batch(x, g.dim)
    gam = christoffel_from_jet(g.jet(pts))
    return gam[0] if single else gam


def riemann(g: TensorField, x) -> CurvaturePointData:
    pts, single = as_batch(x, g.dim)
    data = curvature_from_jet(g.jet(pts), pts)
    return data.at(0) if single else data


def _plane_area_sq(G, u, v):
    uu = np.einsum("...i,...ij,...j->...", u, G, u)
    vv = np.einsum("...i,...ij,...j->...", v, G, v)
    uv = np.einsum("...i,...ij,...j->...", u, G, v)
    return uu * vv - uv * uv, uu * vv


def sectional_batch(data: CurvaturePointData, u, v) -> np.ndarray:
    u, v = np.asarray(u, float), np.asarray(v, float)
    area, prod = _plane_area_sq(data.metric, u, v)
    if np.any(area <= 1e-14 * prod) or np.any(prod == 0):
        raise DegeneracyError("degenerate plane: |u ^ v|^2 below tolerance")
    num = np.einsum("...ijkl,...i,...j,...k,...l->...", data.riemann, u, v, v, u)
    return num / area


def sectional(data: CurvaturePointData, u, v) -> float:
    """``R(u, v, v, u) / |u ^ v|^2`` at a single point."""
    if data.batched:
        raise InputError("sectional expects single-point data; use sectional_batch")
    return float(sectional_batch(data, _vec(u), _vec(v)))


def gradient(f: ScalarField, g: TensorField, x) -> np.ndarray:
    pts, single = as_batch(x, g.dim)
    fj = f.jet(pts)
    G = g.jet(pts).val
    grad = np.linalg.solve(G, fj.grad[..., None])[..., 0]
    return grad[0] if single else grad


def covariant_hessian(fj: Jet, gam: np.ndarray) -> np.ndarray:
    """``Hess f_ij = d_i d_j f - Gamma^k_ij d_k f`` from a scalar jet and Christoffel symbols."""
    H = fj.hess - np.einsum("...kij,...k->...ij", gam, fj.grad)
    return 0.5 * (H + np.swapaxes(H, -1, -2))


def hessian(f: ScalarField, g: TensorField, x) -> np.ndarray:
    pts, single = as_batch(x, g.dim)
    H = covariant_hessian(f.jet(pts), christoffel_from_jet(g.jet(pts)))
    return H[0] if single else H


def ric_k_min(data: CurvaturePointData, k: int, budget=None):
    """Approximate minimum over g-orthonormal ``(k+1)``-frames of ``sum_i sec(u, v_i)``.

    Returns a :class:`~ricci_lab.frames.FrameSearchResult`; ``frame`` has
    the frame vectors ``u, v_1, ..., v_k`` as rows in chart coordinates.
    """
    from .frames import FrameSearchConfig, minimize_frame_sum

    if data.batched:
        raise InputError("ric_k_min expects single-point data")
    n = data.n
    if not 1 <= k <= n - 1:
        raise InputError(f"k must lie in [1, {n - 1}], got {k}")
    return minimize_frame_sum(data.riemann, data.metric, k, budget or FrameSearchConfig())
