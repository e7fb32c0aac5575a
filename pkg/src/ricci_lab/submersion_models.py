"""Built-in Riemannian submersions and their fundamental tensors.

Every model is presented in an adapted chart of the total space in which
the projection is ``pi(x) = x[:b]``.  Vertical spaces are therefore spanned
by the last ``n - b`` coordinate vectors, and horizontal lifts of base
coordinate fields are the columns of ``L = [I_b ; -G_ff^{-1} G_fb]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from . import jet as J
from .errors import InputError
from .fields import MetricField, as_batch, euclidean_metric
from .jet import Jet
from .metric_calculus import christoffel_from_jet, curvature_from_jet, sectional_batch
from .tensor_core import gram_schmidt

# ---------------------------------------------------------------------------
# distances


def _arcsin_sq_series(n_terms: int = 24) -> np.ndarray:
    """Coefficients ``c_k`` of ``arcsin(sqrt(u))^2 = sum_k c_k u^k``."""
    from math import comb
    return np.array([4.0**k / (2.0 * k * k * comb(2 * k, k)) for k in range(1, n_terms + 1)])


_H_COEF = _arcsin_sq_series()


def _arcsin_sq(u):
    """``H(u) = arcsin(sqrt(u))^2`` and two derivatives; series near 0, closed form elsewhere."""
    u = np.asarray(u, dtype=float)
    k = np.arange(1, len(_H_COEF) + 1)
    small = u < 0.05
    us = np.where(small, u, 0.0)
    pw = us[..., None] ** (k - 1)
    h0s = np.sum(_H_COEF * pw * us[..., None], axis=-1)
    h1s = np.sum(_H_COEF * k * pw, axis=-1)
    pw2 = np.where(k >= 2, us[..., None] ** np.maximum(k - 2, 0), 0.0)
    h2s = np.sum(_H_COEF * k * (k - 1) * pw2, axis=-1)
    ub = np.where(small, 0.25, np.clip(u, 0.0, 1.0 - 1e-16))
    a = np.arcsin(np.sqrt(ub))
    q = ub * (1.0 - ub)
    h0b = a * a
    h1b = a / np.sqrt(q)
    h2b = 1.0 / (2.0 * q) - 0.5 * a * (1.0 - 2.0 * ub) / q**1.5
    return np.where(small, h0s, h0b), np.where(small, h1s, h1b), np.where(small, h2s, h2b)


def sphere_dist_sq(radius: float) -> Callable[[Jet, np.ndarray], Jet]:
    """Squared distance on a round sphere in stereographic coordinates."""
    R2x4 = 4.0 * radius * radius

    def dist_sq(Y: Jet, q: np.ndarray) -> Jet:
        q = np.asarray(q, dtype=float)
        diff = Y - q
        num = (diff * diff).sum(-1)
        den = (1.0 + (Y * Y).sum(-1)) * (1.0 + float(q @ q))
        return J.compose(num / den, _arcsin_sq) * R2x4

    return dist_sq


def flat_dist_sq(Y: Jet, q: np.ndarray) -> Jet:
    diff = Y - np.asarray(q, dtype=float)
    return (diff * diff).sum(-1)


# ---------------------------------------------------------------------------
# base manifolds


@dataclass(frozen=True)
class BaseManifold:
    name: str
    metric: MetricField
    inj_radius: float
    dist_sq: Callable[[Jet, np.ndarray], Jet]
    max_abs_sec: float

    @property
    def dim(self) -> int:
        return self.metric.dim

    def dist(self, y, p) -> np.ndarray:
        pts, single = as_batch(y, self.dim)
        d = np.sqrt(np.maximum(self.dist_sq(Jet.variables(pts), np.asarray(p, float)).val, 0.0))
        return d[0] if single else d

    def point_at_distance(self, p, direction, d: float) -> np.ndarray:
        """Point at distance ``d`` from ``p`` on the chart ray ``p + s * direction``."""
        p = np.asarray(p, float)
        u = np.asarray(direction, float)
        u = u / np.linalg.norm(u)
        if d == 0:
            return p.copy()

        def f(s):
            return float(self.dist(p + s * u, p)) - d

        hi = d
        for _ in range(200):
            if f(hi) >= 0:
                break
            hi *= 2.0
        lo = hi
        for _ in range(2000):
            lo *= 0.5
            if f(lo) <= 0:
                break
        s = brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        return p + s * u


def round_sphere(n: int, radius: float = 1.0, name: Optional[str] = None) -> BaseManifold:
    R = float(radius)

    def coeffs(X: Jet) -> Jet:
        r2 = (X * X).sum(-1)
        c = (1.0 + r2) ** -2.0 * (4.0 * R * R)
        return c[:, None, None] * np.eye(n)

    metric = MetricField(n, coeffs, f"stereo_S{n}")
    return BaseManifold(name or f"S{n}({R:g})", metric, np.pi * R, sphere_dist_sq(R), 1.0 / (R * R))


def flat_torus(n: int, period: float = 2 * np.pi) -> BaseManifold:
    return BaseManifold(f"T{n}", euclidean_metric(n, f"torus_T{n}"), period / 2.0, flat_dist_sq, 0.0)


def euclidean(n: int) -> BaseManifold:
    return BaseManifold(f"R{n}", euclidean_metric(n), np.inf, flat_dist_sq, 0.0)


def sphere_polar_metric() -> MetricField:
    """Unit S^2 in polar coordinates ``(theta, phi)``: ``d theta^2 + sin^2(theta) d phi^2``."""

    def coeffs(X: Jet) -> Jet:
        s = J.sin(X[:, 0])
        one = Jet.constant(np.ones(X.shape[0]), X.nvars)
        zero = Jet.constant(np.zeros(X.shape[0]), X.nvars)
        return J.stack([J.stack([one, zero], -1), J.stack([zero, s * s], -1)], -2)

    return MetricField(2, coeffs, "polar_S2", lambda x: (x[:, 0] > 0) & (x[:, 0] < np.pi))


BASES: dict[str, Callable[[], BaseManifold]] = {
    "s2half": lambda: round_sphere(2, 0.5, "S2(1/2)"),
    "s2": lambda: round_sphere(2, 1.0, "S2(1)"),
    "s3": lambda: round_sphere(3, 1.0, "S3(1)"),
    "flat2": lambda: flat_torus(2),
}


# ---------------------------------------------------------------------------
# submersions


@dataclass(frozen=True)
class SubmersionModel:
    name: str
    total: MetricField
    base: BaseManifold
    fiber_ranges: tuple  # (lo, hi) per fiber coordinate, used for sampling
    embedding: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @property
    def n(self) -> int:
        return self.total.dim

    @property
    def b(self) -> int:
        return self.base.dim

    def project(self, x) -> np.ndarray:
        return np.asarray(x, float)[..., : self.b]

    def dpi(self) -> np.ndarray:
        return np.hstack([np.eye(self.b), np.zeros((self.b, self.n - self.b))])

    def lift_points(self, base_pts, rng) -> np.ndarray:
        base_pts = np.atleast_2d(np.asarray(base_pts, float))
        lo = np.array([r[0] for r in self.fiber_ranges])
        hi = np.array([r[1] for r in self.fiber_ranges])
        fib = lo + (hi - lo) * rng.random((len(base_pts), self.n - self.b))
        return np.hstack([base_pts, fib])

    def horizontal_lift_matrix(self, x) -> np.ndarray:
        pts, single = as_batch(x, self.n)
        L = lift_matrix_jet(self.total.jet(pts), self.b).val
        return L[0] if single else L

    def vertical_projector(self, x) -> np.ndarray:
        pts, single = as_batch(x, self.n)
        gj = self.total.jet(pts)
        Pv = projectors(gj.val, lift_matrix_jet(gj, self.b).val)[1]
        return Pv[0] if single else Pv


def lift_matrix_jet(gj: Jet, b: int) -> Jet:
    """Jet of ``L = [I_b ; -G_ff^{-1} G_fb]`` whose columns lift the base coordinate fields."""
    N = gj.shape[0]
    Gff = gj[:, b:, b:]
    Gfb = gj[:, b:, :b]
    bottom = -J.matmul(J.inv(Gff), Gfb)
    top = Jet.constant(np.broadcast_to(np.eye(b), (N, b, b)), gj.nvars)
    return J.concatenate([top, bottom], axis=1)


def projectors(G: np.ndarray, L: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(P_h, P_v)``: g-orthogonal projectors onto the horizontal and vertical spaces."""
    gB = np.einsum("...ia,...ij,...jb->...ab", L, G, L)
    Ph = L @ np.linalg.solve(gB, np.swapaxes(L, -1, -2) @ G)
    n = G.shape[-1]
    return Ph, np.eye(n) - Ph


def _hopf_like(t: float):
    tt = float(t) ** 2

    def coeffs(X: Jet) -> Jet:
        y1, y2 = X[:, 0], X[:, 1]
        s = 1.0 + y1 * y1 + y2 * y2
        c = s ** -2.0
        one = Jet.constant(np.ones(X.shape[0]), X.nvars)
        eta = J.stack([-y2 / s, y1 / s, one], -1)  # d theta + alpha
        gb = c[:, None, None] * np.diag([1.0, 1.0, 0.0])
        return gb + J.einsum("...i,...j->...ij", eta, eta) * tt

    return coeffs


def hopf_embedding(x) -> np.ndarray:
    """Map bundle coordinates ``(y1, y2, theta)`` to the unit sphere in R^4."""
    x = np.atleast_2d(np.asarray(x, float))
    y1, y2, th = x[:, 0], x[:, 1], x[:, 2]
    s = np.sqrt(1.0 + y1 * y1 + y2 * y2)
    z1 = np.exp(1j * th) / s
    z2 = np.exp(1j * th) * (y1 + 1j * y2) / s
    return np.stack([z1.real, z1.imag, z2.real, z2.imag], axis=1)


def hopf() -> SubmersionModel:
    base = round_sphere(2, 0.5, "S2(1/2)")
    total = MetricField(3, _hopf_like(1.0), "hopf_bundle")
    return SubmersionModel("hopf", total, base, ((0.0, 2 * np.pi),), hopf_embedding)


def berger(t: float) -> SubmersionModel:
    base = round_sphere(2, 0.5, "S2(1/2)")
    total = MetricField(3, _hopf_like(t), f"berger_{t:g}")
    return SubmersionModel(f"berger:{t:g}", total, base, ((0.0, 2 * np.pi),))


def product_s2xs2() -> SubmersionModel:
    base = round_sphere(2, 1.0, "S2(1)")
    fib = round_sphere(2, 1.0).metric

    def coeffs(X: Jet) -> Jet:
        g1 = base.metric.coefficients(X[:, :2])
        g2 = fib.coefficients(X[:, 2:])
        N = X.shape[0]
        z = Jet.constant(np.zeros((N, 2, 2)), X.nvars)
        top = J.concatenate([g1, z], axis=2)
        bot = J.concatenate([z, g2], axis=2)
        return J.concatenate([top, bot], axis=1)

    total = MetricField(4, coeffs, "s2xs2")
    return SubmersionModel("product:s2xs2", total, base, ((-1.5, 1.5), (-1.5, 1.5)))


def nil_torus(a: float = 1.0) -> SubmersionModel:
    """Heisenberg nilmanifold over the flat 2-torus: ``dx^2 + dy^2 + (dz + a/2 (x dy - y dx))^2``."""
    base = flat_torus(2)

    def coeffs(X: Jet) -> Jet:
        x, y = X[:, 0], X[:, 1]
        one = Jet.constant(np.ones(X.shape[0]), X.nvars)
        eta = J.stack([-0.5 * a * y, 0.5 * a * x, one], -1)
        flat = Jet.constant(np.broadcast_to(np.diag([1.0, 1.0, 0.0]), (X.shape[0], 3, 3)), X.nvars)
        return flat + J.einsum("...i,...j->...ij", eta, eta)

    total = MetricField(3, coeffs, f"nil_{a:g}")
    return SubmersionModel(f"torus:{a:g}", total, base, ((0.0, 1.0),))


def twisted_bundle() -> SubmersionModel:
    """Plane bundle over the unit sphere with a non-flat connection and fiber metrics varying
    along base and fiber, so that A, S and sigma are all nonzero."""
    base = round_sphere(2, 1.0, "S2(1)")

    def coeffs(X: Jet) -> Jet:
        y1, y2, z1, z2 = X[:, 0], X[:, 1], X[:, 2], X[:, 3]
        N = X.shape[0]
        one = Jet.constant(np.ones(N), X.nvars)
        zero = Jet.constant(np.zeros(N), X.nvars)
        th = J.stack([J.stack([0.3 * y2, -0.2 * y1 * y1, one, zero], -1),
                      J.stack([0.1 * y1 * y2, 0.4 * J.sin(y1), zero, one], -1)], 1)
        h11 = J.exp(0.3 * z1 * y1 + 0.2 * z2 * z2)
        h22 = 1.0 + 0.25 * J.cos(z1 * y2) + 0.1 * y1 * y1
        h12 = 0.1 * J.sin(z1 + z2 + y2)
        H = J.stack([J.stack([h11, h12], -1), J.stack([h12, h22], -1)], 1)
        gB = base.metric.coefficients(X[:, :2])
        top = J.concatenate([gB, Jet.constant(np.zeros((N, 2, 2)), X.nvars)], 2)
        pad = J.concatenate([top, Jet.constant(np.zeros((N, 2, 4)), X.nvars)], 1)
        return pad + J.matmul(J.matmul(th.swap(1, 2), H), th)

    total = MetricField(4, coeffs, "twisted")
    return SubmersionModel("twisted", total, base, ((-1.0, 1.0), (-1.0, 1.0)))


def get_model(name: str) -> SubmersionModel:
    """Registry lookup: ``hopf``, ``berger:<t>``, ``product:s2xs2``, ``torus[:<a>]`` or ``twisted``."""
    key, _, arg = name.partition(":")
    if key == "hopf" and not arg:
        return hopf()
    if key == "berger":
        return berger(float(arg or 1.0))
    if key == "product" and arg in ("", "s2xs2"):
        return product_s2xs2()
    if key == "torus":
        return nil_torus(float(arg or 1.0))
    if key == "twisted" and not arg:
        return twisted_bundle()
    raise InputError(f"unknown model {name!r}")


def get_base(name: str) -> BaseManifold:
    if name in BASES:
        return BASES[name]()
    try:
        return get_model(name).base
    except InputError:
        raise InputError(f"unknown base manifold {name!r}") from None


# ---------------------------------------------------------------------------
# fundamental tensors


@dataclass(frozen=True)
class FundamentalTensors:
    """A, A*, S and sigma at points of M, stored on the adapted coordinate basis.

    ``A_arr[..., a, c, :] = A(L_a, L_c)``; ``S_arr[..., a, f, :] = S_{L_a} d_f``;
    ``sigma_arr[..., f, h, :] = sigma(d_f, d_h)`` where ``L_a`` lift the base
    coordinate fields and ``d_f`` are the fiber coordinate fields.
    """

    base_point: np.ndarray
    b: int
    G: np.ndarray
    L: np.ndarray
    Pv: np.ndarray
    A_arr: np.ndarray
    S_arr: np.ndarray
    sigma_arr: np.ndarray
    frame: Optional[np.ndarray] = None

    @property
    def gB(self) -> np.ndarray:
        return np.einsum("...ia,...ij,...jb->...ab", self.L, self.G, self.L)

    def A(self, X, Y) -> np.ndarray:
        b = self.b
        return np.einsum("...a,...c,...acm->...m", np.asarray(X)[..., :b], np.asarray(Y)[..., :b], self.A_arr)

    def S(self, X, U) -> np.ndarray:
        b = self.b
        return np.einsum("...a,...f,...afm->...m", np.asarray(X)[..., :b], np.asarray(U)[..., b:], self.S_arr)

    def sigma(self, U, V) -> np.ndarray:
        b = self.b
        return np.einsum("...f,...h,...fhm->...m", np.asarray(U)[..., b:], np.asarray(V)[..., b:],
                         self.sigma_arr)

    def A_star(self, X, U) -> np.ndarray:
        b = self.b
        AX = np.einsum("...a,...acm->...cm", np.asarray(X)[..., :b], self.A_arr)
        rhs = np.einsum("...i,...ij,...cj->...c", np.asarray(U), self.G, AX)
        beta = np.linalg.solve(self.gB, rhs[..., None])[..., 0]
        return np.einsum("...ia,...a->...i", self.L, beta)


def fundamental_tensors_from_metric(metric: MetricField, b: int, x, frame=None) -> FundamentalTensors:
    pts, single = as_batch(x, metric.dim)
    gj = metric.jet(pts)
    G = gj.val
    gam = christoffel_from_jet(gj)
    Lj = lift_matrix_jet(gj, b)
    L, dL = Lj.val, Lj.grad  # dL[N, m, c, k] = d_k L^m_c
    Ph, Pv = projectors(G, L)
    # nabla_{L_a} L_c
    cov = (np.einsum("nmck,nka->nacm", dL, L)
           + np.einsum("nmij,nia,njc->nacm", gam, L, L))
    A_arr = np.einsum("npm,nacm->nacp", Pv, cov)
    # S_{L_a} d_f = -(nabla_{d_f} L_a)^v
    dLf = dL[..., b:]  # d_f L^m_a -> [n, m, a, f]
    cov_f = np.einsum("nmaf->nafm", dLf) + np.einsum("nmfa->nafm", np.einsum("nmij,nja->nmia", gam, L)[:, :, b:, :])
    S_arr = -np.einsum("npm,nafm->nafp", Pv, cov_f)
    sigma_arr = np.einsum("npm,nmfh->nfhp", Ph, gam[:, :, b:, b:])
    fr = None
    if frame is not None:
        fr = np.asarray(frame, float)
        _check_adapted_frame(fr, G[0], Pv[0], b)
    out = FundamentalTensors(pts, b, G, L, Pv, A_arr, S_arr, sigma_arr, fr)
    if single:
        out = FundamentalTensors(pts[0], b, G[0], L[0], Pv[0], A_arr[0], S_arr[0], sigma_arr[0], fr)
    return out


def _check_adapted_frame(frame, G, Pv, b, tol: float = 1e-9) -> None:
    n = G.shape[0]
    if frame.shape != (n, n):
        raise InputError("frame must list n vectors of dimension n")
    gram = frame @ G @ frame.T
    if np.max(np.abs(gram - np.eye(n))) > tol:
        raise InputError("frame is not g-orthonormal")
    if np.max(np.abs(frame[:b] @ Pv.T)) > tol:
        raise InputError("frame not adapted: first b vectors must be horizontal")
    if np.max(np.abs(frame[b:, :b])) > tol:
        raise InputError("frame not adapted: last n-b vectors must be vertical")


def adapted_frame(model_or_metric, x, b: Optional[int] = None) -> np.ndarray:
    """g-orthonormal frame (rows): lifts of base coordinate fields, then fiber coordinate fields."""
    metric = getattr(model_or_metric, "total", model_or_metric)
    b = model_or_metric.b if b is None else b
    x = np.asarray(x, float)
    gj = metric.jet(x[None])
    G = gj.val[0]
    L = lift_matrix_jet(gj, b).val[0]
    hor = gram_schmidt(list(L.T), G)
    ver = gram_schmidt(list(np.eye(metric.dim)[b:]), G)
    return np.vstack([hor, ver])


def fundamental_tensors(model, x, frame=None) -> FundamentalTensors:
    return fundamental_tensors_from_metric(model.total, model.b, x, frame)


def horizontal_lift(model: SubmersionModel, v, x, base_point=None) -> np.ndarray:
    """Horizontal lift of the base vector ``v`` (given at ``pi(x)``) to ``x``."""
    x = np.asarray(x, float)
    if base_point is not None and np.max(np.abs(np.asarray(base_point, float) - x[: model.b])) > 1e-12:
        raise InputError("base point of v does not equal pi(x)")
    return model.horizontal_lift_matrix(x) @ np.asarray(v, float)


def submersion_residual(total: MetricField, base: MetricField, b: int, x) -> float:
    """Max relative deviation of ``dpi|_H`` from an isometry at the sample points."""
    pts, _ = as_batch(x, total.dim)
    gj = total.jet(pts)
    L = lift_matrix_jet(gj, b).val
    gB = np.einsum("nia,nij,njb->nab", L, gj.val, L)
    ref = base(pts[:, :b])
    return float(np.max(np.abs(gB - ref)) / max(1.0, np.max(np.abs(ref))))


# ---------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class OneillResult:
    residual: np.ndarray
    sec_B: np.ndarray
    sec_M: np.ndarray
    A_sq: np.ndarray


def verify_oneill_batch(model: SubmersionModel, x, u, v) -> OneillResult:
    """``|sec_B(u,v) - sec_M(u~, v~) - 3|A_u~ v~|^2|`` for g_B-orthonormal ``u, v`` at ``pi(x)``."""
    pts, _ = as_batch(x, model.n)
    u = np.atleast_2d(np.asarray(u, float))
    v = np.atleast_2d(np.asarray(v, float))
    base_data = curvature_from_jet(model.base.metric.jet(pts[:, : model.b]))
    gB = base_data.metric
    gram = np.stack([np.einsum("ni,nij,nj->n", a, gB, c) for a, c in ((u, u), (v, v), (u, v))], 1)
    if np.max(np.abs(gram - np.array([1.0, 1.0, 0.0]))) > 1e-8:
        raise InputError("u, v must be g_B-orthonormal")
    sB = sectional_batch(base_data, u, v)
    tot = curvature_from_jet(model.total.jet(pts))
    ft = fundamental_tensors_from_metric(model.total, model.b, pts)
    uu = np.einsum("nia,na->ni", ft.L, u)
    vv = np.einsum("nia,na->ni", ft.L, v)
    sM = sectional_batch(tot, uu, vv)
    Auv = ft.A(uu, vv)
    Asq = np.einsum("ni,nij,nj->n", Auv, tot.metric, Auv)
    return OneillResult(np.abs(sB - sM - 3 * Asq), sB, sM, Asq)


def verify_oneill(model: SubmersionModel, x, u, v) -> float:
    return float(verify_oneill_batch(model, np.asarray(x, float)[None], u, v).residual[0])


def random_base_orthonormal(model: SubmersionModel, x, count: int, rng, k: int = 1) -> np.ndarray:
    """Random g_B-orthonormal ``(k+1)``-frames at ``pi(x)``: shape ``(count, k+1, b)``."""
    from .tensor_core import orthonormal_frame
    y = np.asarray(x, float)[: model.b]
    E = orthonormal_frame(model.base.metric(y))
    Z = rng.standard_normal((count, model.b, k + 1))
    Q, _ = np.linalg.qr(Z)
    return np.einsum("ij,cjk->cki", E, Q)


@dataclass(frozen=True)
class TheoremAResult:
    holds: bool
    min_gap: float
    gap_vs_A: float
    trials: int


def verify_theorem_a_part1(model: SubmersionModel, x, k: int, trials: int = 50, seed: int = 0) -> TheoremAResult:
    """Sampled check that ``sum sec_B >= sum sec_M`` over lifted orthonormal ``(k+1)``-frames."""
    if not 1 <= k <= model.b - 1:
        raise InputError(f"need 1 <= k <= b-1 = {model.b - 1}")
    x = np.asarray(x, float)
    rng = np.random.default_rng(seed)
    frames = random_base_orthonormal(model, x, trials, rng, k)
    X = np.repeat(x[None], trials, axis=0)
    gaps = np.zeros(trials)
    asum = np.zeros(trials)
    for i in range(1, k + 1):
        res = verify_oneill_batch(model, X, frames[:, 0], frames[:, i])
        gaps += res.sec_B - res.sec_M
        asum += 3 * res.A_sq
    return TheoremAResult(bool(np.all(gaps >= -1e-8)), float(gaps.min()), float(np.max(np.abs(gaps - asum))), trials)
