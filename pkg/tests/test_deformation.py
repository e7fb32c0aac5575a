from __future__ import annotations

import numpy as np
import pytest

from ricci_lab import jet as J
from ricci_lab.errors import AdmissibilityError, InputError
from ricci_lab.deformation import (GW_FAMILIES, HOPF_DEFAULTS, DeformationParams, GWPoint, build_deformation,
                                   conformal_curvature_predict, conformal_sec_predict, deform_with_fields,
                                   delta_R, gw_compare, gw_curvature_predict, gw_direct, random_adapted_vectors,
                                   search_parameters)
from ricci_lab.fields import ScalarField, conformal_metric, constant_scalar
from ricci_lab.metric_calculus import curvature_from_jet, hessian, sectional
from ricci_lab.submersion_models import (fundamental_tensors_from_metric, get_base, get_model,
                                         submersion_residual)
from ricci_lab.tensor_core import orthonormal_frame


def _smooth(b, scale=1.0):
    def wh(Y):
        return scale * (0.3 * J.sin(Y[:, 0]) * J.cos(0.5 * Y[:, 1]) + 0.1 * Y[:, 0] * Y[:, b - 1])

    def wv(Y):
        return scale * (0.4 * J.cos(Y[:, 0] + 0.3 * Y[:, b - 1]) - 0.2 * Y[:, b - 1] * Y[:, b - 1])

    return ScalarField(b, wh), ScalarField(b, wv)


def _pts(model, count, seed, spread=0.7):
    rng = np.random.default_rng(seed)
    return model.lift_points(spread * rng.standard_normal((count, model.b)), rng)


@pytest.fixture(scope="module")
def hopf_default():
    return build_deformation(get_model("hopf"), HOPF_DEFAULTS, samples=40)


def test_identity_deformation_is_exact():
    model = get_model("twisted")
    d = deform_with_fields(model)
    x = _pts(model, 5, 0)
    assert np.array_equal(d.g_tilde_M(x), model.total(x))
    assert np.array_equal(d.g_tilde_B(x[:, :2]), model.base.metric(x[:, :2]))


def test_homothety_on_product():
    model = get_model("product:s2xs2")
    c = 0.4
    d = deform_with_fields(model, constant_scalar(2, c))
    y = np.array([0.3, -0.5])
    assert np.allclose(d.g_tilde_B(y), np.exp(2 * c) * model.base.metric(y))
    data = curvature_from_jet(d.g_tilde_B.jet(y[None]), y[None]).at(0)
    assert sectional(data, [1, 0], [0, 1]) == pytest.approx(np.exp(-2 * c), rel=1e-12)


def test_warp_blocks_and_submersion():
    model = get_model("twisted")
    d = deform_with_fields(model, *_smooth(2))
    x = _pts(model, 6, 1)
    G, Gt = model.total(x), d.g_tilde_M(x)
    Pv = model.vertical_projector(x)
    Ph = np.eye(4) - Pv
    eh = np.exp(2 * d.omega_h_M(x))[:, None, None]
    ev = np.exp(2 * d.omega_v_M(x))[:, None, None]
    PhT, PvT = np.swapaxes(Ph, 1, 2), np.swapaxes(Pv, 1, 2)
    assert np.allclose(PhT @ Gt @ Ph, eh * (PhT @ G @ Ph), atol=1e-12)
    assert np.allclose(PvT @ Gt @ Pv, ev * (PvT @ G @ Pv), atol=1e-12)
    assert np.allclose(PhT @ Gt @ Pv, 0, atol=1e-12)
    assert submersion_residual(d.g_tilde_M, d.g_tilde_B, 2, x) < 1e-8


def test_hat_metric_fundamental_tensors():
    model = get_model("twisted")
    oh, _ = _smooth(2)
    d = deform_with_fields(model, oh)
    x = _pts(model, 5, 2)
    ft = fundamental_tensors_from_metric(model.total, 2, x)
    fh = fundamental_tensors_from_metric(d.g_hat_M, 2, x)
    e2 = np.exp(2 * d.omega_h_M(x))[:, None]
    rng = np.random.default_rng(3)
    X, Y = (np.einsum("nia,na->ni", ft.L, rng.standard_normal((5, 2))) for _ in range(2))
    U = np.zeros((5, 4)); U[:, 2:] = rng.standard_normal((5, 2))
    V = np.zeros((5, 4)); V[:, 2:] = rng.standard_normal((5, 2))
    assert np.allclose(fh.A(X, Y), ft.A(X, Y), atol=1e-10)
    assert np.allclose(fh.S(X, U), ft.S(X, U), atol=1e-10)
    assert np.allclose(ft.A_star(X, U), e2 * fh.A_star(X, U), atol=1e-10)
    assert np.allclose(ft.sigma(U, V), e2 * fh.sigma(U, V), atol=1e-10)


def test_hopf_defaults_certificates(hopf_default):
    names = {c.name: c for c in hopf_default.certificates}
    assert names["C1 distance g~_M to g_M"].passed and names["C1 distance g~_B to g_B"].passed
    assert names["submersion residual"].passed
    assert hopf_default.passed


def test_conformal_prediction():
    base = get_base("s2half")
    oh, _ = _smooth(2)
    y = np.random.default_rng(4).uniform(-1, 1, (20, 2))
    pred = conformal_curvature_predict(base.metric, oh, y)
    direct = curvature_from_jet(conformal_metric(base.metric, oh).jet(y), y)
    assert np.max(np.abs(pred.riemann - direct.riemann)) < 1e-10 * np.max(np.abs(direct.riemann))
    same = conformal_curvature_predict(base.metric, constant_scalar(2, 0.0), y)
    assert np.allclose(same.riemann, curvature_from_jet(base.metric.jet(y), y).riemann)
    E = orthonormal_frame(base.metric(y))
    X, Y = E[:, :, 0], E[:, :, 1]
    s = conformal_sec_predict(base.metric, oh, y, X, Y)
    for i in range(3):
        assert s[i] == pytest.approx(sectional(direct.at(i), X[i], Y[i]), rel=1e-10)


def test_conformal_at_center(hopf_default):
    base = get_base("s2half")
    om = hopf_default.omega_h
    p = np.zeros(2)
    H = hessian(om.field, base.metric, p)
    G = base.metric(p)
    X = np.array([1.0, 0.0]) / np.sqrt(G[0, 0])
    Y = np.array([0.0, 1.0]) / np.sqrt(G[1, 1])
    d = curvature_from_jet(hopf_default.g_tilde_B.jet(p[None]), p[None]).at(0)
    lhs = np.exp(2 * om.field(p)) * sectional(d, X, Y)
    assert lhs == pytest.approx(4.0 - X @ H @ X - Y @ H @ Y, rel=1e-10)
    assert sectional(d, X, Y) < -HOPF_DEFAULTS.K


@pytest.mark.parametrize("name", ["twisted", "hopf", "berger:0.5", "torus"])
def test_gw_families_match_direct(name):
    model = get_model(name)
    d = deform_with_fields(model, *_smooth(model.b))
    errs = gw_compare(d, _pts(model, 20, 5), seed=5)
    assert set(errs) == set(GW_FAMILIES)
    assert max(errs.values()) < 1e-8


def test_gw_on_shipped_hopf(hopf_default):
    x = _pts(get_model("hopf"), 10, 6, spread=0.05)
    assert max(gw_compare(hopf_default, x, seed=6).values()) < 1e-8


def test_gw_reduces_to_hat_curvature_without_vertical_warp():
    model = get_model("twisted")
    oh, _ = _smooth(2)
    d = deform_with_fields(model, oh)
    x = _pts(model, 8, 7)
    hat = curvature_from_jet(d.g_hat_M.jet(x), x)
    rng = np.random.default_rng(7)
    ctx = GWPoint(d.g_hat_M, d.g_tilde_B, d.omega_v_M, 2, x)
    for fam in GW_FAMILIES:
        u, w, z = random_adapted_vectors(d.g_hat_M, 2, x, fam[:3], rng)
        vec = hat.curvature_vector(u, w, z)
        ref = ctx.v(vec) if fam.endswith("v") else ctx.h(vec)
        assert np.allclose(ctx.predict(fam, u, w, z), ref, atol=1e-10)


def test_vvvh_needs_warp_terms_on_generic_bundle():
    # with a genuine vertical warp the horizontal part of R(T1, T2)T3 is not the hat one
    model = get_model("twisted")
    d = deform_with_fields(model, *_smooth(2))
    x = _pts(model, 10, 8)
    rng = np.random.default_rng(8)
    T1, T2, T3 = random_adapted_vectors(d.g_hat_M, 2, x, "VVV", rng)
    direct = gw_direct(d.g_tilde_M, 2, x, "VVVh", T1, T2, T3)
    hat = curvature_from_jet(d.g_hat_M.jet(x), x)
    ctx = GWPoint(d.g_hat_M, d.g_tilde_B, d.omega_v_M, 2, x)
    plain = ctx.h(hat.curvature_vector(T1, T2, T3))
    pred = gw_curvature_predict(d, x, "VVVh", T1, T2, T3)
    assert np.max(np.abs(pred - direct)) < 1e-10 * max(1.0, np.max(np.abs(direct)))
    assert np.max(np.abs(plain - direct)) > 1e-2


def test_hvhv_hessian_term_dominates_for_small_warp():
    model = get_model("hopf")
    scale = 1e-3
    _, wv = _smooth(2, scale)
    d = deform_with_fields(model, None, wv)
    x = _pts(model, 10, 9)
    rng = np.random.default_rng(9)
    X, T, Y = random_adapted_vectors(d.g_hat_M, 2, x, "HVH", rng)
    direct = gw_direct(d.g_tilde_M, 2, x, "HVHv", X, T, Y)
    ctx = GWPoint(d.g_hat_M, d.g_tilde_B, d.omega_v_M, 2, x)
    hat_v = ctx.v(curvature_from_jet(d.g_hat_M.jet(x), x).curvature_vector(X, T, Y))
    hess = np.einsum("ni,nij,nj->n", X, ctx.hess, Y)[:, None] * T
    assert np.max(np.abs(direct - hat_v - hess)) < 10 * scale


def test_gw_rejects_non_adapted_vectors():
    model = get_model("hopf")
    d = deform_with_fields(model, *_smooth(2))
    x = _pts(model, 2, 10)
    mixed = np.tile([0.3, 0.1, 1.0], (2, 1))
    with pytest.raises(InputError, match="non-adapted"):
        gw_curvature_predict(d, x, "HHHv", mixed, mixed, mixed)
    with pytest.raises(InputError):
        gw_curvature_predict(d, x, "XYZw", mixed, mixed, mixed)


def test_delta_r_identity_and_blocks(hopf_default):
    model = get_model("hopf")
    d0 = deform_with_fields(model)
    D0 = delta_R(d0, np.array([0.2, 0.1, 0.5]))
    assert np.allclose(D0.operator.form, 0)
    D = delta_R(hopf_default, np.array([0.0, 0.0, 0.3]))
    # measured blocks dominate the admissibility lambdas
    lhh, lhv = HOPF_DEFAULTS.lambdas()
    assert D.blocks.min_hh >= lhh and D.blocks.min_hv >= lhv
    assert D.blocks.vv_norm < HOPF_DEFAULTS.epsilon
    assert D.blocks.off_hh < HOPF_DEFAULTS.epsilon and D.blocks.off_hv < HOPF_DEFAULTS.epsilon
    far = delta_R(hopf_default, np.array([1.0, 0.5, 0.3]))
    assert np.allclose(far.operator.form, 0)
    with pytest.raises(InputError):
        delta_R(hopf_default, np.zeros(2))


def test_delta_r_frame_sums_are_ric_differences(hopf_default):
    model = get_model("hopf")
    x = np.array([0.003, -0.002, 1.1])
    D = delta_R(hopf_default, x)
    G = model.total(x)
    Q = np.linalg.qr(np.random.default_rng(11).standard_normal((3, 3)))[0]
    E = orthonormal_frame(G) @ Q
    u, v = E[:, 0], E[:, 1]
    Pv = model.vertical_projector(x)
    F = np.exp(-hopf_default.omega_h_M(x)) * (np.eye(3) - Pv) + np.exp(-hopf_default.omega_v_M(x)) * Pv
    new = curvature_from_jet(hopf_default.g_tilde_M.jet(x[None]), x[None]).at(0)
    old = curvature_from_jet(model.total.jet(x[None]), x[None]).at(0)
    expect = sectional(new, F @ u, F @ v) - sectional(old, u, v)
    assert D.operator.quadratic(u, v) == pytest.approx(expect, rel=1e-9, abs=1e-9)


def test_admissibility_gate():
    model = get_model("hopf")
    assert HOPF_DEFAULTS.violations(model) == []
    bad = DeformationParams.from_dict({**HOPF_DEFAULTS.as_dict(), "eta_h": 2e-9})
    names = [v["name"] for v in bad.violations(model)]
    assert names == ["supp omega h: 3 eta_h < tau_v"]
    with pytest.raises(AdmissibilityError, match="supp omega h"):
        build_deformation(model, bad)
    worse = DeformationParams.from_dict({**HOPF_DEFAULTS.as_dict(), "C_h": 3.0, "C_v": -0.5, "k": 1})
    names = {v["name"] for v in worse.violations(model)}
    assert {"C_v < -1", "choice of C_h: C_h > K/2 + max|sec_B| + 1", "b <= k <= n-1"} <= names


def test_params_roundtrip():
    d = HOPF_DEFAULTS.as_dict()
    assert DeformationParams.from_dict(d) == HOPF_DEFAULTS
    with pytest.raises(InputError):
        DeformationParams.from_dict({**d, "bogus": 1})
    assert HOPF_DEFAULTS.lambdas() == (-37.0, 55.0)


def test_search_reproduces_shipped_parameters():
    params, log = search_parameters(get_model("hopf"))
    assert params == HOPF_DEFAULTS
    assert log[-1]["accepted"]
    rejected, log = search_parameters(get_model("hopf"), accept=lambda p: False,
                                      eps_ladder=(0.1,), eta_v_ladder=(0.1, 0.05))
    assert rejected is None and len(log) == 2
