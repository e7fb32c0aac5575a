"""Minimization of frame sums ``sum_i F(u ^ v_i, u ^ v_i)`` over orthonormal frames.

Two independent strategies are provided:

* a reduction to a search over the unit sphere: for fixed unit ``u`` the
  minimum over orthonormal ``v_1..v_k`` in ``u``-perp is the sum of the ``k``
  smallest eigenvalues of ``v -> F(u ^ v, u ^ v)`` restricted to ``u``-perp
  (Ky Fan).  The sphere is covered by a deterministic grid, then refined;
* random-restart projected descent directly on the Stiefel set.

Forms live on an orthonormal wedge basis (obtained from a g-orthonormal
frame), so all geometry here is Euclidean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .tensor_core import curvature_form, orthonormal_frame, wedge, wedge_pairs


@dataclass(frozen=True)
class FrameSearchConfig:
    restarts: int = 8
    max_iters: int = 300
    step: float = 0.2
    seed: int = 0
    exhaustive_grid: Optional[int] = None
    refine: bool = True

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass(frozen=True)
class FrameSearchResult:
    value: float
    frame: np.ndarray  # rows u, v_1, ..., v_k in chart coordinates
    method: str
    grid_value: Optional[float] = None
    grid_tolerance: Optional[float] = None
    search_value: Optional[float] = None
    seed: Optional[int] = None
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "value": float(self.value),
            "frame": np.asarray(self.frame).tolist(),
            "method": self.method,
            "grid_value": None if self.grid_value is None else float(self.grid_value),
            "grid_tolerance": None if self.grid_tolerance is None else float(self.grid_tolerance),
            "search_value": None if self.search_value is None else float(self.search_value),
            "seed": self.seed,
        }


# ---------------------------------------------------------------------------

def wedge_matrix(u: np.ndarray) -> np.ndarray:
    """Matrix of ``v -> u ^ v``: shape ``(..., m, n)``."""
    n = u.shape[-1]
    cols = wedge(np.broadcast_to(u[..., None, :], u.shape[:-1] + (n, n)), np.eye(n))
    return np.swapaxes(cols, -1, -2)


def wedge_power(E: np.ndarray) -> np.ndarray:
    """Matrix of the map induced by ``E`` on the wedge basis: column ``(a,b)`` = ``E_a ^ E_b``."""
    n = E.shape[-1]
    cols = [wedge(E[..., :, a], E[..., :, b]) for a, b in wedge_pairs(n)]
    return np.stack(cols, axis=-1)


def orthonormal_form(form: np.ndarray, metric: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Express a wedge form in a g-orthonormal frame; returns ``(form_o, E)``."""
    E = orthonormal_frame(metric)
    P = wedge_power(E)
    fo = np.swapaxes(P, -1, -2) @ form @ P
    return 0.5 * (fo + np.swapaxes(fo, -1, -2)), E


def frame_sum(form_o: np.ndarray, frame: np.ndarray) -> np.ndarray:
    """``sum_i F(q0 ^ q_i, q0 ^ q_i)`` for orthonormal rows ``q0..qk`` (batched)."""
    q0 = frame[..., :1, :]
    xi = wedge(np.broadcast_to(q0, frame[..., 1:, :].shape), frame[..., 1:, :])
    return np.einsum("...ia,...ab,...ib->...", xi, form_o, xi)


def _complement_basis(u: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ``u``-perp as columns, via a Householder reflection (batched)."""
    n = u.shape[-1]
    s = np.where(u[..., :1] >= 0, 1.0, -1.0)
    w = u.copy()
    w[..., 0] += s[..., 0]
    H = np.eye(n) - 2.0 * w[..., :, None] * w[..., None, :] / np.sum(w * w, axis=-1)[..., None, None]
    return H[..., :, 1:]


def restricted_spectrum(form_o: np.ndarray, u: np.ndarray):
    """Eigen-decomposition of ``v -> F(u ^ v, u ^ v)`` on ``u``-perp for unit ``u`` (batched)."""
    Wu = wedge_matrix(u)
    Q = np.swapaxes(Wu, -1, -2) @ form_o @ Wu
    N = _complement_basis(u)
    Qr = np.swapaxes(N, -1, -2) @ Q @ N
    Qr = 0.5 * (Qr + np.swapaxes(Qr, -1, -2))
    ev, evec = np.linalg.eigh(Qr)
    return ev, N @ evec


def kyfan_value(form_o: np.ndarray, u: np.ndarray, k: int) -> np.ndarray:
    u = u / np.linalg.norm(u, axis=-1, keepdims=True)
    ev, _ = restricted_spectrum(form_o, u)
    return np.sum(ev[..., :k], axis=-1)


def sphere_grid(n: int, resolution: int) -> np.ndarray:
    """Deterministic grid on the unit sphere modulo ``u ~ -u`` (faces ``x_a = +1`` of the cube)."""
    if n == 1:
        return np.ones((1, 1))
    if n == 2:
        t = np.linspace(0.0, np.pi, 4 * resolution, endpoint=False)
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    ticks = np.linspace(-1.0, 1.0, resolution)
    mesh = np.stack(np.meshgrid(*([ticks] * (n - 1)), indexing="ij"), axis=-1).reshape(-1, n - 1)
    pts = []
    for a in range(n):
        face = np.insert(mesh, a, 1.0, axis=1)
        pts.append(face)
    pts = np.concatenate(pts)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _default_resolution(n: int) -> int:
    return {2: 90, 3: 24, 4: 12, 5: 8}.get(n, 5)


def _frame_from_u(form_o, u, k):
    u = u / np.linalg.norm(u)
    ev, vecs = restricted_spectrum(form_o, u)
    return float(np.sum(ev[:k])), np.vstack([u, vecs[:, :k].T])


def kyfan_search(form_o: np.ndarray, k: int, config: FrameSearchConfig):
    """Grid over the sphere then local refinement; returns ``(value, frame, grid_value, tol)``."""
    m = form_o.shape[-1]
    n = int(round((1 + np.sqrt(1 + 8 * m)) / 2))
    res = config.exhaustive_grid or _default_resolution(n)
    grid = sphere_grid(n, res)
    vals = kyfan_value(form_o, grid, k)
    order = np.argsort(vals, kind="stable")
    grid_value = float(vals[order[0]])
    spacing = 2.0 / max(res - 1, 1) if n > 2 else np.pi / (4 * res)
    tol = 4.0 * k * float(np.max(np.abs(np.linalg.eigvalsh(form_o)))) * spacing
    best_val, best_frame = _frame_from_u(form_o, grid[order[0]], k)
    if config.refine:
        for idx in order[:3]:
            r = minimize(lambda x: float(kyfan_value(form_o, x[None, :], k)[0]), grid[idx],
                         method="Nelder-Mead",
                         options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 400 * n})
            val, frame = _frame_from_u(form_o, r.x, k)
            if val < best_val:
                best_val, best_frame = val, frame
    return best_val, best_frame, grid_value, tol


def _qr_rows(A: np.ndarray) -> np.ndarray:
    """Orthonormalize the rows of each matrix in the batch (sign-fixed QR)."""
    Q, R = np.linalg.qr(np.swapaxes(A, -1, -2))
    s = np.sign(np.diagonal(R, axis1=-2, axis2=-1))
    s = np.where(s == 0, 1.0, s)
    return np.swapaxes(Q * s[..., None, :], -1, -2)


def stiefel_search(form_o: np.ndarray, k: int, config: FrameSearchConfig):
    """Random-restart projected descent on orthonormal ``(k+1)``-frames."""
    m = form_o.shape[-1]
    n = int(round((1 + np.sqrt(1 + 8 * m)) / 2))
    rng = np.random.default_rng(config.seed)
    Q = _qr_rows(rng.standard_normal((config.restarts, k + 1, n)))
    f = frame_sum(form_o, Q)
    scale = float(np.max(np.abs(np.linalg.eigvalsh(form_o))))
    if scale == 0.0:
        return 0.0, Q[0]
    step = np.full(config.restarts, config.step / scale)
    step_max = 1e3 * config.step / scale
    for _ in range(config.max_iters):
        q0 = Q[:, 0, :]
        Wq = wedge_matrix(Q)  # (r, k+1, m, n)
        Qmats = np.swapaxes(Wq, -1, -2) @ form_o @ Wq  # (r, k+1, n, n)
        grad = np.empty_like(Q)
        grad[:, 0, :] = 2.0 * np.einsum("rinm,rm->rn", Qmats[:, 1:], q0)
        grad[:, 1:, :] = 2.0 * np.einsum("rnm,rim->rin", Qmats[:, 0], Q[:, 1:, :])
        trial = _qr_rows(Q - step[:, None, None] * grad)
        ft = frame_sum(form_o, trial)
        ok = ft <= f
        Q = np.where(ok[:, None, None], trial, Q)
        f = np.where(ok, ft, f)
        step = np.where(ok, np.minimum(step * 1.2, step_max), step * 0.5)
        if np.all(step < 1e-14 / scale):
            break
    i = int(np.argmin(f))
    return float(f[i]), Q[i]


def minimize_form(form_o: np.ndarray, k: int, config: FrameSearchConfig, E=None) -> FrameSearchResult:
    """Minimize frame sums of a form given on an orthonormal wedge basis."""
    gv, gframe, grid_value, tol = kyfan_search(form_o, k, config)
    sv, sframe = stiefel_search(form_o, k, config)
    if gv <= sv:
        value, frame, method = gv, gframe, "sphere-grid+refine"
    else:
        value, frame, method = sv, sframe, "stiefel-descent"
    if E is not None:
        frame = frame @ np.swapaxes(E, -1, -2)
    return FrameSearchResult(value, frame, method, grid_value, tol, sv, config.seed)


def minimize_frame_sum(R: np.ndarray, G: np.ndarray, k: int, config: FrameSearchConfig,
                       cross_check: bool = False) -> FrameSearchResult:
    """Minimum over g-orthonormal ``(k+1)``-frames of ``sum_i R(u, v_i, v_i, u)``.

    For ``k = n - 1`` the minimum equals the smallest Ricci eigenvalue and is
    returned exactly; with ``cross_check`` the frame search runs as well and
    its values are recorded.
    """
    n = G.shape[-1]
    form = curvature_form(R)
    form = 0.5 * (form + form.T)
    form_o, E = orthonormal_form(form, G)
    if k == n - 1:
        Ro = np.einsum("ijkl,ia,jb,kc,ld->abcd", R, E, E, E, E, optimize=True)
        ric = np.einsum("abca->bc", Ro)
        ev, evec = np.linalg.eigh(0.5 * (ric + ric.T))
        u = evec[:, 0]
        _, frame = _frame_from_u(form_o, u, k)
        if not cross_check:
            return FrameSearchResult(float(ev[0]), frame @ E.T, "ricci-eigenvalue", seed=config.seed)
        res = minimize_form(form_o, k, config)
        return FrameSearchResult(float(ev[0]), frame @ E.T, "ricci-eigenvalue", res.grid_value,
                                 res.grid_tolerance, res.search_value, config.seed)
    return minimize_form(form_o, k, config, E)
