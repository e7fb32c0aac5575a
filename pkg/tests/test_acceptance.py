"""Acceptance criteria, each run at its stated tolerance with one PASS/FAIL line."""

from __future__ import annotations

import json
import time

import numpy as np

from ricci_lab import cli
from ricci_lab.deformation import (GW_FAMILIES, HOPF_DEFAULTS, build_deformation, deformation_samples,
                                   gw_compare)
from ricci_lab.fields import conformal_metric
from ricci_lab.frames import FrameSearchConfig
from ricci_lab.metric_calculus import curvature_from_jet, sectional_batch
from ricci_lab.profile_builder import ball_samples
from ricci_lab.ricci_checker import BlockSpectrum, brute_force_sum_min, reiser_wraith_bound, rw_minimum
from ricci_lab.submersion_models import get_base, get_model, random_base_orthonormal, round_sphere, \
    verify_oneill_batch


def _random_planes(G, rng):
    from ricci_lab.tensor_core import orthonormal_frame

    E = orthonormal_frame(G)
    n = G.shape[-1]
    Z = rng.standard_normal((len(G), n, 2))
    Q, _ = np.linalg.qr(Z)
    fr = np.einsum("nij,njk->nki", E, Q)
    return fr[:, 0], fr[:, 1]


def test_criterion_1_constant_curvature(acceptance_log):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    for n, radius, expected in ((3, 1.0, 1.0), (2, 0.5, 4.0)):
        g = round_sphere(n, radius).metric
        x = rng.standard_normal((100, n))
        data = curvature_from_jet(g.jet(x), x)
        u, v = _random_planes(data.metric, rng)
        sec = sectional_batch(data, u, v)
        worst = max(worst, float(np.max(np.abs(sec - expected)) / expected))
    dt = time.perf_counter() - t0
    ok = worst < 1e-6 and dt < 10
    acceptance_log("1 curvature engine", ok, f"max rel err {worst:.2e}, {dt:.2f}s")
    assert ok


def test_criterion_2_oneill_identity(acceptance_log):
    rng = np.random.default_rng(2)
    worst = {}
    for name in ("hopf", "berger:0.5", "berger:2"):
        model = get_model(name)
        x = model.lift_points(rng.standard_normal((50, model.b)), rng)
        fr = np.array([random_base_orthonormal(model, xi, 1, rng)[0] for xi in x])
        res = verify_oneill_batch(model, x, fr[:, 0], fr[:, 1])
        worst[name] = float(res.residual.max())
    ok = all(v < 1e-6 for v in worst.values())
    acceptance_log("2 O'Neill identity", ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert ok


def test_criterion_3_conformal_formula(acceptance_log):
    base = get_base("s2half")
    from ricci_lab.deformation import conformal_curvature_predict
    from ricci_lab.profile_builder import build_omega

    errs = []
    for om in cli._conformal_builds(base):
        pts = ball_samples(base, np.asarray(om.p), om.eta, om.tau, 20, 3)
        pred = conformal_curvature_predict(base.metric, om.field, pts)
        direct = curvature_from_jet(conformal_metric(base.metric, om.field).jet(pts), pts)
        scale = np.maximum(np.max(np.abs(direct.riemann), axis=(1, 2, 3, 4)), 1.0)
        errs.append(float(np.max(np.max(np.abs(pred.riemann - direct.riemann), axis=(1, 2, 3, 4)) / scale)))
    P = HOPF_DEFAULTS
    om = build_omega(base, np.asarray(P.p), P.C_h, P.eps_h, P.eta_h, P.tau_h, samples=60)
    p = np.asarray(P.p)[None]
    d = curvature_from_jet(conformal_metric(base.metric, om.field).jet(p), p).at(0)
    sec_p = float(d.riemann[0, 1, 1, 0] / np.linalg.det(d.metric))
    ok = max(errs) < 1e-6 and len(errs) == 3 and sec_p < -P.K
    acceptance_log("3 conformal formula", ok, f"max rel err {max(errs):.1e} over 3 builds, sec~_B(p) = {sec_p:.3f}")
    assert ok


def test_criterion_4_vertical_warp_formulas(acceptance_log):
    t0 = time.perf_counter()
    model = get_model("hopf")
    deformed = build_deformation(model, HOPF_DEFAULTS, samples=30)
    x = deformation_samples(model, HOPF_DEFAULTS, 20, 4)
    errs = gw_compare(deformed, x, seed=4)
    dt = time.perf_counter() - t0
    ok = all(errs[f] < 1e-5 for f in GW_FAMILIES) and dt < 120
    acceptance_log("4 vertical-warp component formulas", ok,
                   f"max rel err {max(errs.values()):.1e} over {len(GW_FAMILIES)} families, {dt:.1f}s")
    assert ok


def test_criterion_5_block_criterion_soundness(acceptance_log):
    rng = np.random.default_rng(5)
    bad, certified = [], 0
    for t in range(100):
        dims = (2, 2, 0) if t % 2 == 0 else (2, 3, 0)
        lam = {(1, 1): rng.uniform(-3, 3), (1, 2): rng.uniform(-3, 3), (2, 2): rng.uniform(-3, 3)}
        spec = BlockSpectrum(dims, lam)
        k = int(rng.integers(1, spec.n))
        c = rw_minimum(spec, k)[0] - 1e-9
        if not reiser_wraith_bound(spec, k, c).holds:
            continue
        certified += 1
        res = brute_force_sum_min(spec.form(), k, FrameSearchConfig(seed=t))
        if not (res.grid_value > c - 1e-3 and res.value > c - 1e-3):
            bad.append((t, res.grid_value, c))
    ok = not bad and certified == 100
    acceptance_log("5 block criterion soundness", ok, f"{certified} certified spectra, {len(bad)} violations")
    assert ok


def test_criterion_6_profile_certificates(acceptance_log):
    model = get_model("hopf")
    deformed = build_deformation(model, HOPF_DEFAULTS, samples=30)
    lines, ok = [], True
    for om in (deformed.omega_h, deformed.omega_v):
        hess = [c for c in om.certificates if c.name.startswith("Hess")]
        if om.C > 0:
            names = {"Hess >= -eps", "Hess <= 3C", "Hess >= C on B(p, tau)"}
        else:
            names = {"Hess <= eps", "Hess >= 3C", "Hess <= C on B(p, tau)"}
        ok &= {c.name for c in hess} == names and all(c.margin > 0 for c in hess)
        lines.append(f"C={om.C:g} min margin {min(c.margin for c in hess):.2e}")
    acceptance_log("6 omega Hessian certificates", ok, "; ".join(lines))
    assert ok


def _deform_report(seed=0):
    args = cli.build_parser().parse_args(["deform", "--seed", str(seed), "--no-run-info"])
    return cli.run_deform(cli.load_config(args))


def test_criterion_7_flagship_reproduction(acceptance_log):
    t0 = time.perf_counter()
    report, code = _deform_report()
    dt = time.perf_counter() - t0
    c = report["conclusions"]
    ok = (code == 0 and c["i_sec_B_at_p_below_minus_K"] and c["ii_ric_k_positive_and_within_epsilon"]
          and c["iii_base_ricci_both_signs"] and c["iv_C1_distances_below_epsilon"] and dt < 600)
    rk = report["ric_k"]
    acceptance_log("7 flagship deformation", ok,
                   f"sec~_B(p) = {report['sec_B_at_p']['max']:.2f}, min ric_2 {rk['min_deformed']:.5f} "
                   f"(undeformed {rk['min_original']:.5f}), {dt:.1f}s")
    assert ok


def _report_file(tmp_path, name, argv):
    out = tmp_path / name
    code = cli.main(argv + ["--output", str(out)])
    report = json.loads(out.read_text())
    report.pop("run", None)
    return code, report


def test_criterion_8_determinism(acceptance_log, tmp_path):
    rw = ["verify", "--suite", "rw", "--seed", "7"]
    deform = ["deform", "--seed", "0"]
    _, rw1 = _report_file(tmp_path, "rw1.json", rw)
    _, rw2 = _report_file(tmp_path, "rw2.json", rw)
    _, d1 = _report_file(tmp_path, "d1.json", deform)
    _, d2 = _report_file(tmp_path, "d2.json", deform)
    same_rw = cli.dumps(rw1) == cli.dumps(rw2)
    same_deform = cli.dumps(d1) == cli.dumps(d2)
    ok = same_rw and same_deform
    acceptance_log("8 determinism", ok, f"rw reports identical: {same_rw}, deform reports identical: {same_deform}")
    assert ok
