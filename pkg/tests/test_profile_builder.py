from __future__ import annotations

import numpy as np
import pytest

from ricci_lab.errors import ConstructionError, InfeasibleParameters, InputError
from ricci_lab.metric_calculus import hessian
from ricci_lab.profile_builder import (build_cutoff, build_omega, build_plateau, build_profile, cutoff_c2_norm,
                                       glue, gluing_delta, max_feasible_tau, pullback_omega)
from ricci_lab.submersion_models import fundamental_tensors, get_base, get_model


def test_cutoff_examples():
    cut = build_cutoff(0.1, 1.01 * cutoff_c2_norm(0.1))
    lam, d1, _ = cut.evaluate(np.array([0.05, 0.25, 0.15]))
    assert lam[0] == 1.0 and lam[1] == 0.0
    assert 0 < lam[2] < 1 and cut.evaluate_signed(0.15)[1] < 0
    t = np.linspace(0, 0.3, 30001)
    assert np.all((cut.evaluate(t)[0] >= 0) & (cut.evaluate(t)[0] <= 1))


def test_cutoff_scaling_law():
    consts = []
    for eta in (0.1, 0.03, 0.5):
        cut = build_cutoff(eta, 1e6)
        t = np.linspace(eta, 2 * eta, 20001)
        consts.append(np.max(np.abs(cut.evaluate(t)[2])) * eta**2)
    # the quintic ramp's second-derivative extremum is 10 / sqrt(3)
    assert np.allclose(consts, 10 / np.sqrt(3), rtol=1e-6)


def test_cutoff_errors():
    with pytest.raises(InputError):
        build_cutoff(0.1, 1.0)
    with pytest.raises(InfeasibleParameters) as exc:
        build_cutoff(0.1, 100.0)
    assert exc.value.minimal == pytest.approx(cutoff_c2_norm(0.1))
    assert exc.value.minimal > 100.0


def test_plateau_examples():
    h = build_plateau(2.0, 0.1, 0.05)
    assert h(0.0) == 2.0 and h(0.2) == 0.0
    t = np.linspace(-0.2, 0.2, 4001)
    assert np.all(h(t) >= 0)
    assert 2 * 2.0 * 0.05 <= h.integral() <= 2 * 2.0 * 0.1
    # closed-form antiderivative against the trapezoid rule
    s = np.linspace(0, 0.1, 200001)
    assert h.evaluate(0.1)[1] == pytest.approx(np.trapezoid(h(s), s), rel=1e-8)
    with pytest.raises(InputError):
        build_plateau(2.0, 0.05, 0.05)


def test_profile_core_and_support():
    prof = build_profile(2.0, 0.1, 0.2, 0.004, check=False)
    assert prof.evaluate(0.002)[0] == pytest.approx(4e-6, rel=1e-12)
    assert prof.evaluate(0.5) == (0.0, 0.0, 0.0)
    t = np.linspace(-0.5, 0.5, 100001)
    phi, d1, _ = prof.evaluate(t)
    assert np.max(np.maximum(np.abs(phi), np.abs(d1))) < 0.1


def test_listed_profile_example_fails_its_curvature_certificates():
    # phi = lambda f with f of slope >= C tau at eta cannot keep phi'' > -eps on [eta, 2eta]
    # unless eps >= 4 C tau / eta = 0.16; the build must say so rather than pass
    with pytest.raises(ConstructionError) as exc:
        build_profile(2.0, 0.1, 0.2, 0.004)
    assert "phi'' > -eps" in str(exc.value) or "C2 norm off" in str(exc.value)
    prof = build_profile(2.0, 0.1, 0.2, 0.004, check=False)
    failed = {c.name for c in prof.certificates if not c.passed}
    assert failed == {"C2 norm off [-eta, eta]", "phi'' > -eps"}
    assert 4 * 2.0 * 0.004 / 0.2 > 0.1


def test_profile_passes_with_feasible_tau():
    for C in (2.0, -3.0):
        tau = max_feasible_tau(C, 0.1, 0.2)
        prof = build_profile(C, 0.1, 0.2, tau)
        assert prof.passed
        names = {c.name for c in prof.certificates}
        if C > 0:
            assert {"phi'' <= C", "phi'' > -eps", "phi' >= 0 on [0, eta]"} <= names
        else:
            assert {"phi'' >= C", "phi'' < eps", "phi' <= 0 on [0, eta]"} <= names


def test_profile_preconditions():
    with pytest.raises(InfeasibleParameters, match="tau bound violated"):
        build_profile(2.0, 0.1, 0.2, 0.05)
    with pytest.raises(InfeasibleParameters, match=r"\|C\| > 1 required"):
        build_profile(1.0, 0.1, 0.2, 0.001)
    with pytest.raises(InfeasibleParameters):
        build_profile(2.0, 1.5, 0.2, 0.001)


def test_profile_second_derivative_matches_finite_differences():
    prof = build_profile(3.0, 0.1, 0.2, max_feasible_tau(3.0, 0.1, 0.2))
    bp = np.array(prof.breakpoints() + [np.inf])
    t = np.linspace(0.0, 0.45, 1999)
    # step proportional to the width of the polynomial piece holding t
    piece = np.clip(np.searchsorted(bp, t, side="right") - 1, 0, len(bp) - 3)
    h = 0.01 * np.diff(bp)[piece]

    def second(hh):
        return (prof(t + hh) - 2 * prof(t) + prof(t - hh)) / hh**2

    fd = (4 * second(h / 2) - second(h)) / 3  # Richardson step removes the h^2 term
    scale = max(1.0, np.max(np.abs(prof.evaluate(t)[2])))
    # stencils straddling a breakpoint see the jump in the third derivative
    away = np.min(np.abs(t[:, None] - bp[None, :]), axis=1) > 2 * h
    assert np.max(np.abs(fd - prof.evaluate(t)[2])[away]) / scale < 1e-8


def test_gluing_inequality():
    eps, K = 0.1, 30.0
    eta = 0.5
    cut = build_cutoff(eta, K)
    delta = gluing_delta(eps, K)
    t = np.linspace(-3 * eta, 3 * eta, 20001)
    f = (0.4 * delta * np.sin(t), 0.4 * delta * np.cos(t), -0.4 * delta * np.sin(t))
    g = (np.zeros_like(t),) * 3
    phi = glue(f, g, cut, t)
    lam, _, _ = cut.evaluate_signed(t)
    assert np.max(np.maximum(np.abs(f[0] - phi[0]), np.abs(f[1] - phi[1]))) < eps
    assert np.max(np.abs(phi[2] - (lam * f[2] + (1 - lam) * g[2]))) < eps


def _omega(C, eta=0.1, eps=0.1, base="s2half"):
    b = get_base(base)
    tau = 0.9 * max_feasible_tau(2 * C, eps * eta**3, eta)
    return build_omega(b, np.zeros(2), C, eps, eta, tau, samples=80)


def test_omega_center_and_hessian_window():
    om = _omega(2.0)
    base = get_base("s2half")
    assert om.field(np.zeros(2)) == 0.0
    H = hessian(om.field, base.metric, np.zeros(2))
    G = base.metric(np.zeros(2))
    assert np.allclose(H, 2 * 2.0 * G, rtol=1e-9)
    assert om.passed
    cert = {c.name: c for c in om.certificates}
    assert cert["Hess >= -eps"].value >= -0.1 and cert["Hess <= 3C"].value <= 6.0
    assert cert["Hess >= C on B(p, tau)"].value >= 2.0


def test_omega_negative_mirror():
    om = _omega(-4.0, eta=0.08)
    cert = {c.name: c for c in om.certificates}
    assert cert["Hess <= eps"].passed and cert["Hess >= 3C"].passed and cert["Hess <= C on B(p, tau)"].passed


def test_omega_scaling_coherence():
    a = _omega(3.0, eta=0.05)
    b = _omega(3.0, eta=0.1)
    assert a.passed and b.passed


def test_omega_eta_too_large():
    with pytest.raises(InputError):
        build_omega(get_base("s2half"), np.zeros(2), 2.0, 0.1, 0.9, 1e-6)


def test_pullback_examples():
    model = get_model("hopf")
    om = _omega(3.0, eta=0.1)
    pb = pullback_omega(model, om, samples=60)
    assert pb.passed
    x = np.array([0.03, -0.02, 0.4])
    y = x.copy(); y[2] = 2.1
    assert pb(x) == pytest.approx(pb(y), abs=1e-12)
    # grad is horizontal: its vertical projection vanishes
    gj = model.total.jet(x[None])
    grad = np.linalg.solve(gj.val[0], pb.field.jet(x[None]).grad[0])
    Pv = model.vertical_projector(x)
    assert np.linalg.norm(Pv @ grad) < 1e-10


def test_pullback_vertical_hessian_matches_sigma():
    model = get_model("twisted")
    om = _omega(3.0, eta=0.1, base="s2")
    pb = pullback_omega(model, om, samples=40, check=False)
    rng = np.random.default_rng(0)
    x = model.lift_points(rng.uniform(-0.1, 0.1, (6, 2)), rng)
    H = hessian(pb.field, model.total, x)
    G = model.total.jet(x).val
    grad = np.linalg.solve(G, pb.field.jet(x).grad[..., None])[..., 0]
    ft = fundamental_tensors(model, x)
    U = np.zeros((len(x), 4)); U[:, 2] = 1.0; U[:, 3] = 0.5
    lhs = np.einsum("ni,nij,nj->n", U, H, U)
    rhs = -np.einsum("ni,nij,nj->n", ft.sigma(U, U), G, grad)
    assert np.allclose(lhs, rhs, atol=1e-10 * max(1.0, np.max(np.abs(lhs))))
