from __future__ import annotations

import numpy as np
import pytest

from ricci_lab import jet as J
from ricci_lab.errors import DegeneracyError, InputError
from ricci_lab.fields import MetricField, ScalarField, constant_scalar, euclidean_metric
from ricci_lab.frames import FrameSearchConfig
from ricci_lab.jet import Jet
from ricci_lab.metric_calculus import (christoffel, curvature_from_jet, gradient, hessian, ric_k_min, riemann,
                                       sectional, sectional_batch)
from ricci_lab.profile_builder import build_omega, max_feasible_tau
from ricci_lab.submersion_models import get_base, get_model, round_sphere, sphere_polar_metric
from ricci_lab.tensor_core import curvature_symmetry_residual, kn_tensor


def _diag_metric():
    def coeffs(X: Jet) -> Jet:
        x, y, z = X[:, 0], X[:, 1], X[:, 2]
        d = J.stack([1.0 + 0.3 * J.sin(y) ** 2, J.exp(0.2 * x * z), 2.0 + J.cos(x + y)], axis=1)
        zero = 0.0 * x
        rows = [J.stack([d[:, 0], zero, zero], axis=1), J.stack([zero, d[:, 1], zero], axis=1),
                J.stack([zero, zero, d[:, 2]], axis=1)]
        return J.stack(rows, axis=1)

    return MetricField(3, coeffs, "diag")


def _koszul_fd(g: MetricField, x, h=1e-5):
    n = len(x)
    dG = np.zeros((n, n, n))
    for c in range(n):
        e = np.zeros(n); e[c] = h
        dG[:, :, c] = (g(x + e) - g(x - e)) / (2 * h)
    low = 0.5 * (np.einsum("jki->kij", dG) + np.einsum("ikj->kij", dG) - np.einsum("ijk->kij", dG))
    return np.einsum("mk,kij->mij", np.linalg.inv(g(x)), low)


def test_christoffel_examples():
    assert np.allclose(christoffel(euclidean_metric(3), np.zeros(3)), 0)
    th = 0.7
    gam = christoffel(sphere_polar_metric(), np.array([th, 0.3]))
    assert gam[0, 1, 1] == pytest.approx(-np.sin(th) * np.cos(th), rel=1e-14)
    g = _diag_metric()
    for x in np.random.default_rng(0).uniform(-1, 1, (5, 3)):
        gam = christoffel(g, x)
        assert np.allclose(gam, np.swapaxes(gam, 1, 2))
        assert np.allclose(gam, _koszul_fd(g, x), rtol=1e-6, atol=1e-8)


def test_metric_compatibility():
    g = _diag_metric()
    x = np.random.default_rng(1).uniform(-1, 1, (4, 3))
    gj = g.jet(x)
    gam = christoffel(g, x)
    # nabla_k g_ij = d_k g_ij - Gamma^m_ki g_mj - Gamma^m_kj g_im
    ng = gj.grad - np.einsum("nmki,nmj->nijk", gam, gj.val) - np.einsum("nmkj,nim->nijk", gam, gj.val)
    assert np.max(np.abs(ng)) < 1e-12


def test_riemann_examples():
    flat = riemann(euclidean_metric(3), np.ones(3))
    assert np.allclose(flat.riemann, 0)
    rng = np.random.default_rng(2)
    for n, r in ((3, 1.0), (2, 0.5)):
        x = rng.standard_normal((10, n))
        data = riemann(round_sphere(n, r).metric, x)
        oracle = kn_tensor(data.metric, data.metric) / r**2
        assert np.max(np.abs(data.riemann - oracle)) < 1e-10 * np.max(np.abs(oracle))


def test_bianchi_on_models():
    rng = np.random.default_rng(3)
    for name in ("hopf", "berger:0.5", "product:s2xs2", "torus", "twisted"):
        model = get_model(name)
        x = model.lift_points(0.8 * rng.standard_normal((5, model.b)), rng)
        data = curvature_from_jet(model.total.jet(x), x)
        assert curvature_symmetry_residual(data.riemann) < 1e-8


def test_sectional_examples_and_invariance():
    data = riemann(round_sphere(3).metric, np.array([0.2, -0.4, 0.1]))
    u, v = np.array([1.0, 0.3, 0.0]), np.array([0.0, 1.0, 2.0])
    assert sectional(data, u, v) == pytest.approx(1.0, abs=1e-12)
    assert sectional(riemann(euclidean_metric(3), np.zeros(3)), u, v) == 0.0
    G = get_base("s2half").metric
    d2 = riemann(_diag_metric(), np.array([0.3, 0.1, -0.2]))
    s0 = sectional(d2, u, v)
    assert sectional(d2, -2.5 * u, 0.7 * v + 3.0 * u) == pytest.approx(s0, rel=1e-9)
    with pytest.raises(DegeneracyError):
        sectional(data, u, 2 * u)
    with pytest.raises(InputError):
        sectional(riemann(G, np.zeros((2, 2))), [1, 0], [0, 1])


def test_product_mixed_plane_flat():
    model = get_model("product:s2xs2")
    x = np.array([0.3, 0.2, -0.1, 0.5])
    data = riemann(model.total, x)
    assert sectional(data, [1, 0, 0, 0], [0, 0, 1, 0]) == pytest.approx(0.0, abs=1e-12)


def test_gradient_and_hessian():
    g = euclidean_metric(3)
    x = np.array([0.3, -1.0, 2.0])
    c = constant_scalar(3, 4.0)
    assert np.allclose(gradient(c, g, x), 0) and np.allclose(hessian(c, g, x), 0)
    half_sq = ScalarField(3, lambda X: 0.5 * (X * X).sum(axis=1))
    assert np.allclose(gradient(half_sq, g, x), x) and np.allclose(hessian(half_sq, g, x), np.eye(3))
    # df(y) = g(grad f, y)
    gm = _diag_metric()
    f = ScalarField(3, lambda X: J.sin(X[:, 0]) * X[:, 1] + X[:, 2] ** 2)
    gr = gradient(f, gm, x)
    dfx = f.jet(x[None]).grad[0]
    assert np.allclose(gm(x) @ gr, dfx, atol=1e-12)
    H = hessian(f, gm, x)
    assert np.allclose(H, H.T)


def test_omega_gradient_vanishes_at_center():
    base = get_base("s2half")
    tau = 0.9 * max_feasible_tau(12.0, 0.1 * 0.1**3, 0.1)
    om = build_omega(base, np.zeros(2), 6.0, 0.1, 0.1, tau, samples=30)
    assert np.allclose(gradient(om.field, base.metric, np.zeros(2)), 0, atol=1e-14)


def test_ric_k_examples():
    data = riemann(euclidean_metric(3), np.zeros(3))
    for k in (1, 2):
        assert ric_k_min(data, k).value == pytest.approx(0.0, abs=1e-12)
    s3 = riemann(round_sphere(3).metric, np.array([0.1, 0.2, 0.3]))
    res = ric_k_min(s3, 2)
    assert res.value == pytest.approx(2.0, abs=1e-10)
    fr = res.frame
    assert np.allclose(fr @ s3.metric @ fr.T, np.eye(3), atol=1e-10)
    prod = riemann(get_model("product:s2xs2").total, np.array([0.3, -0.2, 0.4, 0.1]))
    r2 = ric_k_min(prod, 2, FrameSearchConfig(seed=3))
    r3 = ric_k_min(prod, 3)
    assert r2.value == pytest.approx(0.0, abs=1e-6)
    assert r3.value == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(InputError):
        ric_k_min(s3, 3)


def test_ric_k_frame_achieves_value():
    model = get_model("berger:0.5")
    x = np.array([0.2, 0.3, 1.0])
    data = riemann(model.total, x)
    res = ric_k_min(data, 1, FrameSearchConfig(seed=1))
    fr = res.frame
    assert np.allclose(fr @ data.metric @ fr.T, np.eye(2), atol=1e-10)
    assert sectional_batch(data, fr[0], fr[1]) == pytest.approx(res.value, abs=1e-9)
