"""Warped deformations of submersion metrics and their curvature.

Given basic functions ``omega_h``, ``omega_v`` on the base, the total metric
is rescaled blockwise,

    g~_M = e^{2 omega_h o pi} g|_H + e^{2 omega_v o pi} g|_V,

and the base metric becomes ``g~_B = e^{2 omega_h} g_B``.  The intermediate
metric ``g^_M = pi* g~_B + g|_V`` has the same splitting, and
``g~_M = g^|_H + e^{2 phi} g^|_V`` with ``phi = omega_v o pi``.

Curvature of the deformed metrics is available twice: directly from the
metric coefficients, and from closed-form predictions (conformal change on
the base; blockwise formulas for the vertical warp on the total space).
"""

from __future__ import annotations

from dataclasses import dataclass, fields as dc_fields
from typing import Optional

import numpy as np

from . import jet as J
from .errors import AdmissibilityError, InputError
from .fields import MetricField, ScalarField, as_batch, conformal_metric, constant_scalar, sample_id
from .jet import Jet
from .metric_calculus import CurvaturePointData, covariant_hessian, curvature_from_jet
from .profile_builder import Certificate, OmegaFunction, _enforce, ball_samples, build_omega, lift_scalar
from .ricci_checker import BlockReport, block_structure
from .submersion_models import (SubmersionModel, adapted_frame, fundamental_tensors_from_metric,
                                submersion_residual)
from .tensor_core import CurvatureOperator, c1_norm, curvature_form, kn_tensor, wedge_gram

# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class DeformationParams:
    p: tuple
    K: float
    C_h: float
    C_v: float
    eps_h: float
    eps_v: float
    eta_h: float
    eta_v: float
    tau_h: float
    tau_v: float
    epsilon: float = 0.1
    k: int = 2

    def lambdas(self) -> tuple[float, float]:
        """``(lambda_hh, lambda_hv)`` used by the block criterion."""
        return -6.0 * self.C_h - 1.0, -self.C_v - 1.0

    def violations(self, model: SubmersionModel) -> list[dict]:
        out = []

        def need(ok, name, detail):
            if not ok:
                out.append({"name": name, "detail": detail})

        half_inj = 0.5 * min(1.0, model.base.inj_radius)
        need(self.C_h > 1, "C_h > 1", f"C_h={self.C_h!r}")
        need(self.C_v < -1, "C_v < -1", f"C_v={self.C_v!r}")
        for nm in ("eps_h", "eps_v", "eta_h", "eta_v"):
            v = getattr(self, nm)
            need(0 < v < half_inj, f"{nm} in (0, min(1, inj)/2)", f"{nm}={v!r}, bound {half_inj!r}")
        if self.C_h > 0:
            bh = self.eps_h * self.eta_h / (2 * self.C_h)
            need(0 < self.tau_h < bh, "tau_h < eps_h eta_h / (2 C_h)", f"tau_h={self.tau_h!r}, bound {bh!r}")
        if self.C_v < 0:
            bv = self.eps_v * self.eta_v / (2 * abs(self.C_v))
            need(0 < self.tau_v < bv, "tau_v < eps_v eta_v / (2|C_v|)", f"tau_v={self.tau_v!r}, bound {bv!r}")
        need(3 * self.eta_h < self.tau_v, "supp omega h: 3 eta_h < tau_v",
             f"3 eta_h={3 * self.eta_h!r}, tau_v={self.tau_v!r}")
        kt = 0.5 * self.K + model.base.max_abs_sec + 1.0
        need(self.C_h > kt, "choice of C_h: C_h > K/2 + max|sec_B| + 1", f"C_h={self.C_h!r}, bound {kt!r}")
        lhh, lhv = self.lambdas()
        s = (model.b - 1) * lhh + lhv
        need(s > 0, "nearby lambdas: (b-1) lambda_hh + lambda_hv > 0",
             f"lambda_hh={lhh!r}, lambda_hv={lhv!r}, sum {s!r}")
        need(0 < self.epsilon, "epsilon > 0", f"epsilon={self.epsilon!r}")
        need(model.b <= self.k <= model.n - 1, "b <= k <= n-1", f"k={self.k}, b={model.b}, n={model.n}")
        if len(self.p) != model.b:
            out.append({"name": "p in base chart", "detail": f"p has {len(self.p)} coordinates, base dim {model.b}"})
        return out

    def check(self, model: SubmersionModel) -> None:
        v = self.violations(model)
        if v:
            raise AdmissibilityError(v)

    def as_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in dc_fields(self)}
        d["p"] = [float(c) for c in self.p]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DeformationParams":
        names = {f.name for f in dc_fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise InputError(f"unknown deformation parameters: {sorted(unknown)}")
        kw = {k: (tuple(float(c) for c in v) if k == "p" else (int(v) if k == "k" else float(v)))
              for k, v in d.items()}
        return cls(**kw)


# shipped parameters for the Hopf fibration S^3 -> S^2(1/2); see README for how they were found
HOPF_DEFAULTS = DeformationParams(
    p=(0.0, 0.0), K=1.0, C_h=6.0, C_v=-56.0, eps_h=0.1, eps_v=0.1,
    eta_h=1e-9, eta_v=0.1, tau_h=3.5e-40, tau_v=3.8e-9, epsilon=0.1, k=2,
)


# ---------------------------------------------------------------------------
# metrics


def _pad(a: Jet, n: int) -> Jet:
    N, b = a.shape[0], a.shape[-1]
    z1 = Jet.constant(np.zeros((N, b, n - b)), a.nvars)
    z2 = Jet.constant(np.zeros((N, n - b, n)), a.nvars)
    return J.concatenate([J.concatenate([a, z1], axis=2), z2], axis=1)


def horizontal_block(gj: Jet, b: int) -> Jet:
    """``g|_H`` in adapted coordinates: the Schur complement ``G_bb - G_bf G_ff^{-1} G_fb``, padded."""
    n = gj.shape[-1]
    S = gj[:, :b, :b] - J.matmul(gj[:, :b, b:], J.matmul(J.inv(gj[:, b:, b:]), gj[:, b:, :b]))
    return _pad(S, n)


def warp_metric(total: MetricField, b: int, omega_h_M: ScalarField, omega_v_M: ScalarField,
                chart_id: Optional[str] = None) -> MetricField:
    """``e^{2 omega_h} g|_H + e^{2 omega_v} g|_V`` with basic functions given on the total space."""

    def coeffs(X: Jet) -> Jet:
        gj = total.coefficients(X)
        H = horizontal_block(gj, b)
        eh = J.exp(2.0 * omega_h_M.fn(X))[:, None, None]
        ev = J.exp(2.0 * omega_v_M.fn(X))[:, None, None]
        return eh * H + ev * (gj - H)

    return MetricField(total.dim, coeffs, chart_id or total.chart_id + "~", total.domain)


@dataclass(frozen=True)
class DeformedMetrics:
    model: SubmersionModel
    g_tilde_B: MetricField
    g_tilde_M: MetricField
    g_hat_M: MetricField
    omega_h_B: ScalarField
    omega_v_B: ScalarField
    omega_h_M: ScalarField
    omega_v_M: ScalarField
    omega_h: Optional[OmegaFunction] = None
    omega_v: Optional[OmegaFunction] = None
    params: Optional[DeformationParams] = None
    certificates: tuple = ()

    @property
    def b(self) -> int:
        return self.model.b

    @property
    def passed(self) -> bool:
        own = all(c.passed for c in self.certificates)
        om = all(o.passed for o in (self.omega_h, self.omega_v) if o is not None)
        return own and om


def deform_with_fields(model: SubmersionModel, omega_h: Optional[ScalarField] = None,
                       omega_v: Optional[ScalarField] = None) -> DeformedMetrics:
    """Deformation from arbitrary base functions (zero when omitted); no certificates."""
    b = model.b
    omega_h = omega_h or constant_scalar(b, 0.0, model.base.metric.chart_id)
    omega_v = omega_v or constant_scalar(b, 0.0, model.base.metric.chart_id)
    oh, ov = lift_scalar(model, omega_h), lift_scalar(model, omega_v)
    zero = constant_scalar(model.n, 0.0, model.total.chart_id)
    gB = conformal_metric(model.base.metric, omega_h)
    gM = warp_metric(model.total, b, oh, ov)
    gH = warp_metric(model.total, b, oh, zero, model.total.chart_id + "^")
    return DeformedMetrics(model, gB, gM, gH, omega_h, omega_v, oh, ov)


def deformation_samples(model: SubmersionModel, params: DeformationParams, count: int = 120,
                        seed: int = 0) -> np.ndarray:
    """Total-space samples: shells around the fiber over ``p`` at the scales of both omegas, plus far points."""
    p = np.asarray(params.p, float)
    rng = np.random.default_rng(seed)
    n3 = max(count // 3, 2)
    base_pts = [ball_samples(model.base, p, params.eta_h, params.tau_h, n3, seed),
                ball_samples(model.base, p, params.eta_v, params.tau_v, n3, seed + 1)]
    far = rng.standard_normal((count - 2 * n3, model.b)) * 1.5
    base_pts.append(far)
    return model.lift_points(np.vstack(base_pts), rng)


def deformation_certificates(d: DeformedMetrics, params: DeformationParams, samples: int = 120,
                             seed: int = 0) -> tuple:
    """C^1 distances of both deformed metrics to the originals and the submersion residual."""
    model = d.model
    pts = deformation_samples(model, params, samples, seed)
    gid = sample_id(pts, seed)
    nM = c1_norm(d.g_tilde_M - model.total, model.total, pts, seed)
    nB = c1_norm(d.g_tilde_B - model.base.metric, model.base.metric, pts[:, : model.b], seed)
    res = submersion_residual(d.g_tilde_M, d.g_tilde_B, model.b, pts)
    return (
        Certificate("C1 distance g~_M to g_M", "<", params.epsilon, float(nM), gid, nM.argmax),
        Certificate("C1 distance g~_B to g_B", "<", params.epsilon, float(nB), gid, nB.argmax),
        Certificate("submersion residual", "<", 1e-8, res, gid, None),
    )


def build_deformation(model: SubmersionModel, params: DeformationParams, *, samples: int = 120,
                      seed: int = 0, check: bool = True, omega_samples: int = 200) -> DeformedMetrics:
    """Admissibility gate, both omegas with their certificates, the warped metrics and C^1 certificates."""
    params.check(model)
    base, p = model.base, np.asarray(params.p, float)
    om_h = build_omega(base, p, params.C_h, params.eps_h, params.eta_h, params.tau_h,
                       samples=omega_samples, seed=seed, check=check)
    om_v = build_omega(base, p, params.C_v, params.eps_v, params.eta_v, params.tau_v,
                       samples=omega_samples, seed=seed + 1, check=check)
    d = deform_with_fields(model, om_h.field, om_v.field)
    certs = deformation_certificates(d, params, samples, seed)
    out = DeformedMetrics(model, d.g_tilde_B, d.g_tilde_M, d.g_hat_M, d.omega_h_B, d.omega_v_B,
                          d.omega_h_M, d.omega_v_M, om_h, om_v, params, certs)
    if check:
        _enforce(list(certs), "deformation")
    return out


def _round_down(x: float, digits: int = 2) -> float:
    e = np.floor(np.log10(x)) - (digits - 1)
    return float(np.floor(x / 10**e) * 10**e)


def default_constants(model: SubmersionModel, K: float) -> tuple[float, float]:
    """``C_h`` just above ``K/2 + max|sec_B| + 1`` (rounded up to an integer), ``C_v = -(6 (b-1) C_h + 20)``."""
    C_h = float(np.floor(0.5 * K + model.base.max_abs_sec + 1.0) + 1.0)
    return C_h, -(6.0 * (model.b - 1) * C_h + 20.0)


def search_parameters(model: SubmersionModel, K: float = 1.0, *, p=None, epsilon: float = 0.1,
                      k: Optional[int] = None, C_h: Optional[float] = None, C_v: Optional[float] = None,
                      eps_ladder=(0.1, 0.05, 0.02), eta_v_ladder=(0.1, 0.05, 0.02, 0.01),
                      accept=None) -> tuple[Optional[DeformationParams], list[dict]]:
    """Logarithmic sweep over ``(eps_h, eps_v, eta_v)``; ``tau_v``, ``eta_h``, ``tau_h`` follow in that order.

    For each candidate, ``tau_v`` is the largest certifying value for the
    internal ``omega_v`` profile, ``eta_h`` sits just below ``tau_v / 3`` and
    ``tau_h`` is the largest certifying value for ``omega_h``.  The first
    candidate accepted by ``accept`` (default: ``build_deformation`` succeeds)
    is returned together with the log of all attempts.
    """
    from .errors import RicciLabError
    from .profile_builder import max_feasible_tau

    dC_h, dC_v = default_constants(model, K)
    C_h = dC_h if C_h is None else float(C_h)
    C_v = dC_v if C_v is None else float(C_v)
    p = tuple(float(c) for c in (p if p is not None else np.zeros(model.b)))
    k = model.n - 1 if k is None else int(k)
    log = []
    for eps in eps_ladder:
        for eta_v in eta_v_ladder:
            rec = {"eps_h": eps, "eps_v": eps, "eta_v": eta_v}
            try:
                tau_v = _round_down(max_feasible_tau(2 * C_v, eps * eta_v**3, eta_v))
                eta_h = _round_down(0.9 * tau_v / 3.0, 1)
                tau_h = _round_down(max_feasible_tau(2 * C_h, eps * eta_h**3, eta_h))
                params = DeformationParams(p, K, C_h, C_v, eps, eps, eta_h, eta_v, tau_h, tau_v, epsilon, k)
                rec.update(tau_v=tau_v, eta_h=eta_h, tau_h=tau_h)
                ok = accept(params) if accept is not None else bool(build_deformation(model, params).passed)
            except RicciLabError as exc:
                rec.update(accepted=False, error=f"{type(exc).__name__}: {exc}")
                log.append(rec)
                continue
            rec["accepted"] = bool(ok)
            log.append(rec)
            if ok:
                return params, log
    return None, log


# ---------------------------------------------------------------------------
# conformal change on the base


def conformal_curvature_predict(g_B: MetricField, omega_h: ScalarField, x) -> CurvaturePointData:
    """Curvature of ``e^{2 omega} g_B`` from that of ``g_B`` and the Hessian and gradient of ``omega``.

    ``R~ = e^{2 omega} (R - (2 Hess omega - 2 d omega (x) d omega + |d omega|^2 g) o g)``
    with the Kulkarni-Nomizu product normalized so that ``g o g`` is the unit sphere.
    """
    pts, single = as_batch(x, g_B.dim)
    gj = g_B.jet(pts)
    base = curvature_from_jet(gj, pts)
    wj = omega_h.jet(pts)
    G = base.metric
    Ginv = np.linalg.inv(G)
    dw = wj.grad
    H = covariant_hessian(wj, base.christoffel)
    grad_sq = np.einsum("ni,nij,nj->n", dw, Ginv, dw)
    h = 2 * H - 2 * np.einsum("ni,nj->nij", dw, dw) + grad_sq[:, None, None] * G
    e2 = np.exp(2 * wj.val)
    R = e2[:, None, None, None, None] * (base.riemann - kn_tensor(h, G))
    Gt = e2[:, None, None] * G
    Gtinv = Ginv / e2[:, None, None]
    up = np.einsum("nij,nj->ni", Ginv, dw)
    n = G.shape[-1]
    eye = np.eye(n)
    gam = (base.christoffel + np.einsum("mi,nj->nmij", eye, dw) + np.einsum("mj,ni->nmij", eye, dw)
           - np.einsum("nij,nm->nmij", G, up))
    Rup = np.einsum("nml,nijkl->nmijk", Gtinv, R)
    ric = np.einsum("nmmjk->njk", Rup)
    ric = 0.5 * (ric + np.swapaxes(ric, -1, -2))
    data = CurvaturePointData(pts, Gt, gam, R, Rup, ric)
    return data.at(0) if single else data


def conformal_sec_predict(g_B: MetricField, omega_h: ScalarField, x, X, Y) -> np.ndarray:
    """``e^{-2 omega}(sec - Hess(X,X) - Hess(Y,Y) + (D_X omega)^2 + (D_Y omega)^2 - |d omega|^2)``
    for g_B-orthonormal ``X, Y`` (batched alongside ``x``)."""
    pts, single = as_batch(x, g_B.dim)
    X, Y = np.atleast_2d(X), np.atleast_2d(Y)
    base = curvature_from_jet(g_B.jet(pts), pts)
    wj = omega_h.jet(pts)
    H = covariant_hessian(wj, base.christoffel)
    dw = wj.grad
    sec = np.einsum("nijkl,ni,nj,nk,nl->n", base.riemann, X, Y, Y, X)
    dX, dY = np.einsum("ni,ni->n", dw, X), np.einsum("ni,ni->n", dw, Y)
    grad_sq = np.einsum("ni,nij,nj->n", dw, np.linalg.inv(base.metric), dw)
    out = np.exp(-2 * wj.val) * (sec - np.einsum("ni,nij,nj->n", X, H, X) - np.einsum("ni,nij,nj->n", Y, H, Y)
                                 + dX**2 + dY**2 - grad_sq)
    return out[0] if single else out


# ---------------------------------------------------------------------------
# curvature of the vertical warp


GW_FAMILIES = ("HHHv", "HHHh", "HVHv", "HVHh", "VVHh", "VVVh", "VVVv")
_KINDS = {"HHHv": "HHH", "HHHh": "HHH", "HVHv": "HVH", "HVHh": "HVH", "VVHh": "VVH",
          "VVVh": "VVV", "VVVv": "VVV"}


class GWPoint:
    """Everything needed to evaluate the vertical-warp curvature formulas at a batch of points.

    ``g_hat`` must be a submersion metric over ``gB_hat`` in the adapted chart;
    ``phi`` is a basic function on the total space.  The warped metric is
    ``g^|_H + e^{2 phi} g^|_V``.
    """

    def __init__(self, g_hat: MetricField, gB_hat: MetricField, phi: ScalarField, b: int, x):
        pts, self.single = as_batch(x, g_hat.dim)
        self.pts, self.b, self.n = pts, b, g_hat.dim
        gj = g_hat.jet(pts)
        self.hat = curvature_from_jet(gj, pts)
        self.ft = fundamental_tensors_from_metric(g_hat, b, pts)
        self.G = gj.val
        self.Pv = self.ft.Pv
        self.Ph = np.eye(self.n) - self.Pv
        fj = phi.jet(pts)
        self.e2 = np.exp(2 * fj.val)
        self.grad = np.linalg.solve(self.G, fj.grad[..., None])[..., 0]
        self.hess = covariant_hessian(fj, self.hat.christoffel)
        self.base = curvature_from_jet(gB_hat.jet(pts[:, :b]), pts[:, :b])

    # helpers
    def ip(self, u, v):
        return np.einsum("ni,nij,nj->n", u, self.G, v)

    def R(self, X, Y, Z):
        return self.hat.curvature_vector(X, Y, Z)

    def v(self, w):
        return np.einsum("nij,nj->ni", self.Pv, w)

    def h(self, w):
        return np.einsum("nij,nj->ni", self.Ph, w)

    def check_adapted(self, kinds: str, vecs, tol: float = 1e-9) -> None:
        for kind, w in zip(kinds, vecs):
            scale = np.maximum(np.linalg.norm(w, axis=-1), 1.0)
            if kind == "H":
                bad = np.linalg.norm(self.v(w), axis=-1) > tol * scale
            else:
                bad = np.linalg.norm(w[:, : self.b], axis=-1) > tol * scale
            if np.any(bad):
                raise InputError(f"non-adapted input: expected {'horizontal' if kind == 'H' else 'vertical'} vectors")

    def predict(self, family: str, u, w, z) -> np.ndarray:
        if family not in _KINDS:
            raise InputError(f"unknown family {family!r}; expected one of {GW_FAMILIES}")
        u, w, z = (np.atleast_2d(np.asarray(a, float)) for a in (u, w, z))
        kinds = _KINDS[family]
        self.check_adapted(kinds, (u, w, z))
        ft, e2, gr = self.ft, self.e2[:, None], self.grad
        R = self.R(u, w, z)
        if family == "HHHv":
            X, Y, Z = u, w, z
            return (self.v(R) + self.ip(gr, X)[:, None] * ft.A(Y, Z) - self.ip(gr, Y)[:, None] * ft.A(X, Z)
                    - 2 * self.ip(gr, Z)[:, None] * ft.A(X, Y))
        if family == "HHHh":
            b = self.b
            RB = self.base.curvature_vector(u[:, :b], w[:, :b], z[:, :b])
            lifted = np.einsum("nia,na->ni", ft.L, RB)
            return e2 * self.h(R) + (1 - e2) * lifted
        if family == "HVHv":
            X, T, Y = u, w, z
            hs = np.einsum("ni,nij,nj->n", X, self.hess, Y) + self.ip(gr, X) * self.ip(gr, Y)
            return (self.v(R) + (1 - e2) * ft.A(X, ft.A_star(Y, T)) + hs[:, None] * T
                    - (self.ip(gr, X)[:, None] * ft.S(Y, T) + self.ip(gr, Y)[:, None] * ft.S(X, T)))
        if family == "HVHh":
            X, T, Y = u, w, z
            inner = (self.h(R) - self.ip(gr, Y)[:, None] * ft.A_star(X, T)
                     - 2 * self.ip(gr, X)[:, None] * ft.A_star(Y, T) + self.ip(ft.A(X, Y), T)[:, None] * gr)
            return e2 * inner
        if family == "VVHh":
            T1, T2, X = u, w, z
            inner = self.h(R) + (1 - e2) * (ft.A_star(ft.A_star(X, T1), T2) - ft.A_star(ft.A_star(X, T2), T1))
            return e2 * inner
        if family == "VVVh":
            T1, T2, T3 = u, w, z
            grad_terms = (self.ip(w, z)[:, None] * ft.A_star(gr, u) - self.ip(u, z)[:, None] * ft.A_star(gr, w))
            sig_terms = ft.A_star(ft.sigma(T2, T3), T1) - ft.A_star(ft.sigma(T1, T3), T2)
            return e2 * self.h(R) + e2 * e2 * grad_terms - e2 * (e2 - 1) * sig_terms
        T1, T2, T3 = u, w, z
        s23, s13 = ft.sigma(T2, T3), ft.sigma(T1, T3)
        mix = self.ip(T2, T3)[:, None] * T1 - self.ip(T1, T3)[:, None] * T2
        gsq = self.ip(gr, gr)[:, None]
        brace = (ft.S(gr, mix) - gsq * mix + self.ip(gr, s23)[:, None] * T1 - self.ip(gr, s13)[:, None] * T2)
        return self.v(R) + (1 - e2) * (ft.S(s23, T1) - ft.S(s13, T2)) + e2 * brace


def gw_curvature_predict(deformed: DeformedMetrics, x, family: str, u, w, z) -> np.ndarray:
    """Predicted component of ``R~_M(u, w) z`` (projected as named by ``family``) at ``x``."""
    ctx = GWPoint(deformed.g_hat_M, deformed.g_tilde_B, deformed.omega_v_M, deformed.b, x)
    return ctx.predict(family, u, w, z)


def gw_direct(g_tilde: MetricField, b: int, x, family: str, u, w, z) -> np.ndarray:
    """The same component computed from the coefficients of ``g~_M``."""
    pts, _ = as_batch(x, g_tilde.dim)
    data = curvature_from_jet(g_tilde.jet(pts), pts)
    ft = fundamental_tensors_from_metric(g_tilde, b, pts)
    vec = data.curvature_vector(np.atleast_2d(u), np.atleast_2d(w), np.atleast_2d(z))
    Pv = ft.Pv
    if family.endswith("v"):
        return np.einsum("nij,nj->ni", Pv, vec)
    return vec - np.einsum("nij,nj->ni", Pv, vec)


def random_adapted_vectors(g_hat: MetricField, b: int, pts, kinds: str, rng) -> list[np.ndarray]:
    """Random horizontal (``H``) or vertical (``V``) vectors at each point, ``g^``-unit length."""
    pts = np.atleast_2d(pts)
    gj = g_hat.jet(pts)
    from .submersion_models import lift_matrix_jet
    L = lift_matrix_jet(gj, b).val
    out = []
    n = g_hat.dim
    for kind in kinds:
        if kind == "H":
            v = np.einsum("nia,na->ni", L, rng.standard_normal((len(pts), b)))
        else:
            v = np.zeros((len(pts), n))
            v[:, b:] = rng.standard_normal((len(pts), n - b))
        nrm = np.sqrt(np.einsum("ni,nij,nj->n", v, gj.val, v))
        out.append(v / nrm[:, None])
    return out


def gw_vacuous(model: SubmersionModel, family: str) -> bool:
    """Families with two vertical slots carry no information when fibers are one-dimensional."""
    return _KINDS[family].count("V") >= 2 and model.n - model.b < 2


def gw_compare(deformed: DeformedMetrics, x, seed: int = 0, families=GW_FAMILIES) -> dict:
    """Per-family max relative error ``|pred - direct| / max(|direct|, 1)`` (norms in ``g^``)."""
    pts, _ = as_batch(x, deformed.model.n)
    rng = np.random.default_rng(seed)
    ctx = GWPoint(deformed.g_hat_M, deformed.g_tilde_B, deformed.omega_v_M, deformed.b, pts)
    data = curvature_from_jet(deformed.g_tilde_M.jet(pts), pts)
    out = {}
    for fam in families:
        kinds = _KINDS[fam]
        u, w, z = random_adapted_vectors(deformed.g_hat_M, deformed.b, pts, kinds, rng)
        pred = ctx.predict(fam, u, w, z)
        vec = data.curvature_vector(u, w, z)
        direct = ctx.v(vec) if fam.endswith("v") else ctx.h(vec)
        diff = pred - direct
        nd = np.sqrt(np.abs(ctx.ip(diff, diff)))
        nr = np.sqrt(np.abs(ctx.ip(direct, direct)))
        out[fam] = float(np.max(nd / np.maximum(nr, 1.0)))
    return out


# ---------------------------------------------------------------------------
# difference operator


@dataclass(frozen=True)
class DeltaR:
    """``F* R~ - R`` on the wedge space of ``g_M`` at a point.

    ``F = e^{-omega_h} P_h + e^{-omega_v} P_v`` maps g-orthonormal frames to
    g~-orthonormal ones, so ``g(DR(X ^ Y), X ^ Y) = sec~(FX, FY) - sec(X, Y)``
    for g-orthonormal ``X, Y``.
    """

    operator: CurvatureOperator
    frame: np.ndarray
    b: int
    blocks: BlockReport
    pulled_back: CurvatureOperator
    original: CurvatureOperator


def _operator(R, G, x) -> CurvatureOperator:
    form = curvature_form(R)
    return CurvatureOperator(tuple(float(c) for c in x), 0.5 * (form + form.T), wedge_gram(G), G)


def delta_R(deformed: DeformedMetrics, x) -> DeltaR:
    model, b = deformed.model, deformed.b
    x = np.asarray(x, float)
    if x.shape != (model.n,):
        raise InputError("delta_R expects a single total-space point")
    orig = curvature_from_jet(model.total.jet(x[None]), x[None]).at(0)
    new = curvature_from_jet(deformed.g_tilde_M.jet(x[None]), x[None]).at(0)
    Pv = model.vertical_projector(x)
    wh = float(deformed.omega_h_M(x))
    wv = float(deformed.omega_v_M(x))
    F = np.exp(-wh) * (np.eye(model.n) - Pv) + np.exp(-wv) * Pv
    Rp = np.einsum("abcd,ai,bj,ck,dl->ijkl", new.riemann, F, F, F, F, optimize=True)
    pulled = _operator(Rp, orig.metric, x)
    original = _operator(orig.riemann, orig.metric, x)
    op = pulled - original
    frame = adapted_frame(model, x)
    return DeltaR(op, frame, b, block_structure(op, frame, b), pulled, original)
