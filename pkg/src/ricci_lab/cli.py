"""Command-line experiment runner: ``profile``, ``curvature``, ``deform`` and ``verify``.

Reports are JSON with sorted keys.  Everything except the ``run`` field
(wall-clock time, timestamp, thread cap) is a deterministic function of
the configuration and seed.

Exit codes: 0 when every certificate and verdict passed, 1 when a
certificate or verdict failed (the report is still written), 2 for usage
errors, infeasible or inadmissible parameters.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import AdmissibilityError, InfeasibleParameters, InputError, RicciLabError
from .fields import ScalarField, sample_id

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_TOLERANCES = {"oneill": 1e-6, "conformal": 1e-6, "gw": 1e-5, "rw": 1e-3}
PARAM_KEYS = ("p", "K", "C_h", "C_v", "eps_h", "eps_v", "eta_h", "eta_v", "tau_h", "tau_v", "epsilon", "k")


# ---------------------------------------------------------------------------
# config and serialization


@dataclass
class ExperimentConfig:
    subcommand: str
    model: str = "hopf"
    params: dict = field(default_factory=dict)
    samples: int = 120
    seed: int = 0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        from .submersion_models import get_base, get_model

        if self.subcommand not in ("profile", "curvature", "deform", "verify"):
            raise InputError(f"unknown subcommand {self.subcommand!r}")
        if self.subcommand in ("curvature", "deform") or self.extra.get("suite") in ("oneill", "gw"):
            get_model(self.model)
        elif self.extra.get("suite") == "conformal":
            get_base(self.model)
        bad = {k: v for k, v in self.tolerances.items() if not float(v) > 0}
        if bad:
            raise InputError(f"tolerances must be positive: {bad}")

    def as_dict(self) -> dict:
        return {"subcommand": self.subcommand, "model": self.model, "params": dict(self.params),
                "samples": self.samples, "seed": self.seed, "tolerances": dict(self.tolerances),
                "extra": dict(self.extra)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if np.isnan(x):
            return "nan"
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_report(report: dict, path: Optional[str]) -> None:
    text = dumps(report)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run_info(t0: float) -> dict:
    return {"wall_clock_s": time.perf_counter() - t0,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "threads": os.environ.get("RICCI_LAB_THREADS")}


# ---------------------------------------------------------------------------
# profile


def run_profile(config: ExperimentConfig) -> tuple[dict, int]:
    from .profile_builder import build_profile

    ex = config.extra
    C, eps, eta, tau = (float(ex[k]) for k in ("C", "epsilon", "eta", "tau"))
    report = {"kind": "profile", "config": config.as_dict()}
    try:
        prof = build_profile(C, eps, eta, tau, check=False, per_piece=int(ex.get("per_piece", 2001)))
    except InfeasibleParameters as exc:
        report.update(passed=False, error={"inequality": exc.inequality, "detail": exc.detail,
                                           "minimal": exc.minimal})
        return report, EXIT_USAGE
    report["profile"] = prof.as_dict()
    report["passed"] = prof.passed
    if ex.get("csv"):
        t = np.linspace(-2.5 * eta, 2.5 * eta, int(ex.get("csv_points", 2001)))
        f0, f1, f2 = prof.evaluate(t)
        with open(ex["csv"], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "phi", "dphi", "ddphi"])
            for row in zip(t, f0, f1, f2):
                w.writerow([repr(float(v)) for v in row])
    return report, EXIT_OK if prof.passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# curvature


def _sec_range(R: np.ndarray, G: np.ndarray) -> tuple[float, float]:
    from .frames import FrameSearchConfig, minimize_frame_sum

    cfg = FrameSearchConfig(restarts=4)
    n = G.shape[0]
    if n == 2:
        s = float(R[0, 1, 1, 0] / np.linalg.det(G))
        return s, s
    lo = minimize_frame_sum(R, G, 1, cfg).value
    hi = -minimize_frame_sum(-R, G, 1, cfg).value
    return float(lo), float(hi)


def _ric_k_batch(data, k: int):
    """Per-point ``ric_k`` (exact for ``k = n-1``) with minimizing frames."""
    from scipy.linalg import eigh
    from .frames import FrameSearchConfig, minimize_frame_sum

    n = data.n
    vals, frames = [], []
    for i in range(len(data)):
        if k == n - 1:
            ev, vec = eigh(data.ricci[i], data.metric[i])
            vals.append(float(ev[0]))
            frames.append(vec[:, 0])
        else:
            r = minimize_frame_sum(data.riemann[i], data.metric[i], k, FrameSearchConfig(restarts=4))
            vals.append(float(r.value))
            frames.append(r.frame)
    return np.array(vals), frames


def run_curvature(config: ExperimentConfig) -> tuple[dict, int]:
    from .metric_calculus import curvature_from_jet
    from .submersion_models import get_model

    model = get_model(config.model)
    ex = config.extra
    x = np.asarray(ex.get("point") or np.zeros(model.n), float)
    if x.shape != (model.n,):
        raise InputError(f"point must have {model.n} coordinates")
    k = int(ex.get("k") or model.n - 1)
    tot = curvature_from_jet(model.total.jet(x[None]), x[None])
    base = curvature_from_jet(model.base.metric.jet(x[None, : model.b]), x[None, : model.b])
    ric_vals, _ = _ric_k_batch(tot, k)
    lo, hi = _sec_range(tot.riemann[0], tot.metric[0])
    blo, bhi = _sec_range(base.riemann[0], base.metric[0])
    from scipy.linalg import eigh
    report = {
        "kind": "curvature", "config": config.as_dict(), "point": x,
        "total": {"metric": tot.metric[0], "sec_min": lo, "sec_max": hi,
                  "ricci_eigenvalues": eigh(tot.ricci[0], tot.metric[0], eigvals_only=True),
                  "ric_k": float(ric_vals[0]), "k": k},
        "base": {"metric": base.metric[0], "sec_min": blo, "sec_max": bhi,
                 "ricci_eigenvalues": eigh(base.ricci[0], base.metric[0], eigvals_only=True)},
        "passed": True,
    }
    return report, EXIT_OK


# ---------------------------------------------------------------------------
# deform


def _params_from_config(config: ExperimentConfig, model):
    from .deformation import HOPF_DEFAULTS, DeformationParams

    given = {k: v for k, v in config.params.items() if v is not None}
    if model.name == "hopf":
        base = HOPF_DEFAULTS.as_dict()
    else:
        missing = [k for k in PARAM_KEYS if k not in given and k not in ("epsilon", "k")]
        if missing:
            raise InputError(f"model {model.name!r} has no shipped parameters; missing {missing} (or use --search)")
        base = {"epsilon": 0.1, "k": model.n - 1}
    base.update(given)
    return DeformationParams.from_dict(base)


def _checkpoints(model, params, seed: int) -> list[np.ndarray]:
    """Points along one base direction at the characteristic radii of both omegas."""
    rng = np.random.default_rng(seed + 101)
    p = np.asarray(params.p, float)
    u = rng.standard_normal(model.b)
    radii = [0.0, 0.5 * params.tau_h, params.eta_h, 3 * params.eta_h, 0.5 * params.tau_v,
             params.eta_v, 1.5 * params.eta_v, 3 * params.eta_v]
    ys = [model.base.point_at_distance(p, u, r) for r in radii]
    return list(model.lift_points(np.array(ys), rng)), radii


def deformation_report(model, deformed, params, samples: int, seed: int) -> dict:
    """Evaluate the conclusions of the construction on a deformed metric."""
    from scipy.linalg import eigh
    from .deformation import deformation_samples, delta_R
    from .metric_calculus import curvature_from_jet
    from .ricci_checker import verify_delta_ric

    p = np.asarray(params.p, float)
    k = params.k
    pts = deformation_samples(model, params, samples, seed)
    gid = sample_id(pts, seed)
    # base at p
    bp = curvature_from_jet(deformed.g_tilde_B.jet(p[None]), p[None])
    sp_lo, sp_hi = _sec_range(bp.riemann[0], bp.metric[0])
    # base across samples
    bpts = pts[:, : model.b]
    bd = curvature_from_jet(deformed.g_tilde_B.jet(bpts), bpts)
    ric_B = np.array([eigh(bd.ricci[i], bd.metric[i], eigvals_only=True) for i in range(len(bpts))])
    dist = model.base.dist(bpts, p)
    outside_h = dist >= 2 * params.eta_h
    ric_p = eigh(bp.ricci[0], bp.metric[0], eigvals_only=True)
    pos_away = bool(np.any(ric_B[outside_h] > 0)) if np.any(outside_h) else False
    neg_at_p = bool(np.any(ric_p < 0))
    # total space
    new = curvature_from_jet(deformed.g_tilde_M.jet(pts), pts)
    old = curvature_from_jet(model.total.jet(pts), pts)
    rk_new, fr_new = _ric_k_batch(new, k)
    rk_old, _ = _ric_k_batch(old, k)
    i_new = int(np.argmin(rk_new))
    min_new, min_old = float(rk_new[i_new]), float(rk_old.min())
    # difference operator at checkpoints
    cps, radii = _checkpoints(model, params, seed)
    table = []
    for x, r in zip(cps, radii):
        D = delta_R(deformed, x)
        v = verify_delta_ric(D.operator, D.frame, model.b, k, params.epsilon)
        table.append({"base_distance": r, "point": x, "blocks": D.blocks.as_dict(), "verdict": v.as_dict()})
    certs = [c.as_dict() for c in deformed.certificates]
    c1 = {c["name"]: c for c in certs if c["name"].startswith("C1 distance")}
    conclusions = {
        "i_sec_B_at_p_below_minus_K": bool(sp_hi < -params.K),
        "ii_ric_k_positive_and_within_epsilon": bool(min_new > 0 and min_new >= min_old - params.epsilon),
        "iii_base_ricci_both_signs": bool(pos_away and neg_at_p),
        "iv_C1_distances_below_epsilon": bool(c1 and all(c["passed"] for c in c1.values())),
        "delta_ric_verdicts_sound": bool(all(row["verdict"]["sound"] for row in table)),
    }
    omegas = {nm: (o.as_dict() if o is not None else None)
              for nm, o in (("omega_h", deformed.omega_h), ("omega_v", deformed.omega_v))}
    return {
        "certificates": certs,
        "omegas": omegas,
        "sec_B_at_p": {"min": sp_lo, "max": sp_hi, "ricci_eigenvalues": ric_p},
        "sec_B_samples": {"ricci_min": float(ric_B.min()), "ricci_max": float(ric_B.max()),
                          "ricci_max_outside_supp_omega_h": float(ric_B[outside_h].max()) if np.any(outside_h) else None,
                          "sample_set": sample_id(bpts, seed)},
        "ric_k": {"k": k, "min_deformed": min_new, "argmin_point": pts[i_new], "argmin_frame": fr_new[i_new],
                  "min_original": min_old, "sample_set": gid, "samples": len(pts)},
        "delta_R_blocks": table,
        "conclusions": conclusions,
    }


def run_deform(config: ExperimentConfig) -> tuple[dict, int]:
    from .deformation import build_deformation, deform_with_fields, search_parameters
    from .submersion_models import get_model

    model = get_model(config.model)
    report: dict = {"kind": "deform", "config": config.as_dict()}
    ex = config.extra
    try:
        if ex.get("search"):
            fixed = {k: config.params[k] for k in ("K", "C_h", "C_v", "epsilon", "k", "p")
                     if config.params.get(k) is not None}
            params, log = search_parameters(model, float(fixed.pop("K", 1.0)), **fixed)
            report["search_log"] = log
            if params is None:
                report["passed"] = False
                report["error"] = {"kind": "search", "detail": "no certified parameter set found"}
                return report, EXIT_FAIL
        else:
            params = _params_from_config(config, model)
        report["params"] = params.as_dict()
        violations = params.violations(model)
        report["admissibility"] = {"passed": not violations, "violations": violations}
        if ex.get("identity"):
            from dataclasses import replace
            from .deformation import deformation_certificates
            deformed = deform_with_fields(model)
            deformed = replace(deformed, params=params,
                               certificates=deformation_certificates(deformed, params, config.samples, config.seed))
        else:
            if violations:
                raise AdmissibilityError(violations)
            deformed = build_deformation(model, params, samples=config.samples, seed=config.seed, check=False)
    except AdmissibilityError as exc:
        report["passed"] = False
        report["error"] = {"kind": "admissibility", "violations": exc.violations}
        return report, EXIT_USAGE
    except InfeasibleParameters as exc:
        report["passed"] = False
        report["error"] = {"kind": "infeasible", "inequality": exc.inequality, "detail": exc.detail}
        return report, EXIT_USAGE
    report.update(deformation_report(model, deformed, params, config.samples, config.seed))
    cert_ok = deformed.passed
    report["passed"] = bool(cert_ok and all(report["conclusions"].values()))
    return report, EXIT_OK if report["passed"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# verify suites


def _check(name: str, value: float, limit: float, sample_set: str = "", relation: str = "<") -> dict:
    ok = value < limit if relation == "<" else value >= limit
    return {"name": name, "value": float(value), "limit": float(limit), "relation": relation,
            "passed": bool(ok), "sample_set": sample_set}


def suite_oneill(model_name: str, trials: int, seed: int, tol: float) -> list[dict]:
    from .submersion_models import get_model, random_base_orthonormal, verify_oneill_batch

    model = get_model(model_name)
    rng = np.random.default_rng(seed)
    ys = rng.standard_normal((trials, model.b))
    x = model.lift_points(ys, rng)
    fr = np.array([random_base_orthonormal(model, xi, 1, rng)[0] for xi in x])
    res = verify_oneill_batch(model, x, fr[:, 0], fr[:, 1])
    return [_check(f"O'Neill residual on {model.name}", float(res.residual.max()), tol, sample_id(x, seed))]


def _conformal_builds(base):
    from .profile_builder import build_omega, max_feasible_tau

    p = np.zeros(base.dim)
    out = []
    for C, eta in ((6.0, 0.1), (3.0, 0.05), (-4.0, 0.08)):
        tau = 0.9 * max_feasible_tau(2 * C, 0.1 * eta**3, eta)
        out.append(build_omega(base, p, C, 0.1, eta, tau, samples=60))
    return out


def suite_conformal(base_name: str, trials: int, seed: int, tol: float) -> list[dict]:
    from .deformation import HOPF_DEFAULTS, conformal_curvature_predict
    from .fields import conformal_metric
    from .metric_calculus import curvature_from_jet
    from .profile_builder import ball_samples, build_omega
    from .submersion_models import get_base

    base = get_base(base_name)
    checks = []
    for om in _conformal_builds(base):
        pts = ball_samples(base, np.asarray(om.p), om.eta, om.tau, trials, seed)
        pred = conformal_curvature_predict(base.metric, om.field, pts)
        direct = curvature_from_jet(conformal_metric(base.metric, om.field).jet(pts), pts)
        scale = np.maximum(np.max(np.abs(direct.riemann), axis=(1, 2, 3, 4)), 1.0)
        err = np.max(np.abs(pred.riemann - direct.riemann), axis=(1, 2, 3, 4)) / scale
        checks.append(_check(f"conformal prediction C={om.C:g} eta={om.eta:g}", float(err.max()), tol,
                             sample_id(pts, seed)))
    if base_name in ("s2half", "hopf"):
        P = HOPF_DEFAULTS
        om = build_omega(base, np.asarray(P.p), P.C_h, P.eps_h, P.eta_h, P.tau_h, samples=60)
        p = np.asarray(P.p, float)[None]
        d = curvature_from_jet(conformal_metric(base.metric, om.field).jet(p), p).at(0)
        lo, hi = _sec_range(d.riemann, d.metric)
        checks.append(_check("shipped omega_h: sec~_B at p + K", hi + P.K, 0.0, sample_id(p)))
    return checks


def _test_omegas(b: int):
    from . import jet as J

    def wh(Y):
        return 0.3 * J.sin(Y[:, 0]) * J.cos(0.5 * Y[:, 1 % b]) + 0.1 * Y[:, 0] * Y[:, b - 1]

    def wv(Y):
        return 0.4 * J.cos(Y[:, 0] + 0.3 * Y[:, b - 1]) - 0.2 * Y[:, b - 1] * Y[:, b - 1]

    return ScalarField(b, wh), ScalarField(b, wv)


def suite_gw(model_name: str, trials: int, seed: int, tol: float) -> list[dict]:
    from .deformation import (GW_FAMILIES, HOPF_DEFAULTS, build_deformation, deform_with_fields,
                              deformation_samples, gw_compare, gw_vacuous)
    from .submersion_models import get_model

    model = get_model(model_name)
    if model.name == "hopf":
        deformed = build_deformation(model, HOPF_DEFAULTS, samples=30, seed=seed)
        x = deformation_samples(model, HOPF_DEFAULTS, trials, seed)
    else:
        deformed = deform_with_fields(model, *_test_omegas(model.b))
        rng = np.random.default_rng(seed)
        x = model.lift_points(0.7 * rng.standard_normal((trials, model.b)), rng)
    errs = gw_compare(deformed, x, seed)
    gid = sample_id(x, seed)
    out = []
    for fam in GW_FAMILIES:
        c = _check(f"GW {fam} on {model.name}", errs[fam], tol, gid)
        c["vacuous"] = gw_vacuous(model, fam)
        out.append(c)
    return out


def rw_trial(rng, dims) -> dict:
    """One soundness trial: random block spectrum, certified bound, frame-search minimum."""
    from .frames import FrameSearchConfig
    from .ricci_checker import BlockSpectrum, brute_force_sum_min, reiser_wraith_bound, rw_minimum

    lam = {(1, 1): rng.uniform(-3, 3), (1, 2): rng.uniform(-3, 3), (2, 2): rng.uniform(-3, 3)}
    spec = BlockSpectrum(dims, lam)
    n = spec.n
    k = int(rng.integers(1, n))
    m, arg = rw_minimum(spec, k)
    c = m - 1e-9
    res = reiser_wraith_bound(spec, k, c)
    oracle = brute_force_sum_min(spec.form(), k, FrameSearchConfig(seed=int(rng.integers(2**31))))
    return {"dims": list(dims), "k": k, "lambdas": {f"{a}{b}": v for (a, b), v in lam.items()},
            "certified": bool(res.holds), "bound": c, "oracle_min": float(oracle.value),
            "grid_min": oracle.grid_value, "grid_tolerance": oracle.grid_tolerance}


def suite_rw(trials: int, seed: int, tol: float) -> tuple[list[dict], list[dict]]:
    rng = np.random.default_rng(seed)
    records = []
    for t in range(trials):
        dims = (2, 2, 0) if t % 2 == 0 else (2, 3, 0)
        records.append(rw_trial(rng, dims))
    agree = sum(1 for r in records if r["certified"] and r["oracle_min"] > r["bound"] - tol)
    gid = sample_id(np.array([[r["oracle_min"], r["bound"]] for r in records]), seed)
    return [_check("RW agreements", agree, trials, gid, relation=">=")], records


def run_verify(config: ExperimentConfig) -> tuple[dict, int]:
    ex = config.extra
    suite = ex.get("suite")
    trials = int(ex.get("trials") or {"oneill": 50, "conformal": 20, "gw": 20, "rw": 100}.get(suite, 20))
    tol = float(config.tolerances.get(suite, DEFAULT_TOLERANCES.get(suite, 1e-6)))
    report: dict = {"kind": "verify", "suite": suite, "config": config.as_dict(), "trials": trials}
    if suite == "oneill":
        checks = suite_oneill(config.model, trials, config.seed, tol)
    elif suite == "conformal":
        checks = suite_conformal(config.model, trials, config.seed, tol)
    elif suite == "gw":
        checks = suite_gw(config.model, trials, config.seed, tol)
    elif suite == "rw":
        checks, records = suite_rw(trials, config.seed, tol)
        report["records"] = records
    else:
        raise InputError(f"unknown suite {suite!r}; expected oneill, conformal, gw or rw")
    report["checks"] = checks
    report["passed"] = all(c["passed"] for c in checks)
    return report, EXIT_OK if report["passed"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ricci-lab", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file; flags override its keys")
        sp.add_argument("--output", help="write the JSON report here (default: stdout)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--no-run-info", action="store_true", help="omit the non-deterministic run field")

    sp = sub.add_parser("profile", help="build a one-dimensional bump profile and certify it")
    common(sp)
    for nm in ("C", "epsilon", "eta", "tau"):
        sp.add_argument(f"--{nm}", type=float)
    sp.add_argument("--per_piece", type=int)
    sp.add_argument("--csv", help="write a (t, phi, phi', phi'') table")

    sp = sub.add_parser("curvature", help="curvature summary of a model at a point")
    common(sp)
    sp.add_argument("--model")
    sp.add_argument("--point", type=_floats)
    sp.add_argument("--k", type=int)

    sp = sub.add_parser("deform", help="build and evaluate a warped deformation")
    common(sp)
    sp.add_argument("--model")
    sp.add_argument("--samples", type=int)
    sp.add_argument("--search", action="store_true", help="search the feasible parameter region")
    sp.add_argument("--identity", action="store_true", help="zero deformation (baseline report)")
    sp.add_argument("--p", type=_floats)
    for nm in PARAM_KEYS[1:]:
        sp.add_argument(f"--{nm}", type=int if nm == "k" else float)

    sp = sub.add_parser("verify", help="run a verification suite")
    common(sp)
    sp.add_argument("--suite", choices=("oneill", "conformal", "gw", "rw"))
    sp.add_argument("--model")
    sp.add_argument("--trials", type=int)
    return ap


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    raw: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise InputError("config file must hold a JSON object")
    flags = {k: v for k, v in vars(args).items()
             if v is not None and v is not False and k not in ("config", "subcommand", "no_run_info")}
    merged = {**raw, **flags}
    sc = args.subcommand
    defaults = {"verify": {"suite": None}, "curvature": {}, "deform": {}, "profile": {}}[sc]
    model = merged.pop("model", None)
    if model is None:
        model = "s2half" if merged.get("suite") == "conformal" else "hopf"
    params = {k: merged.pop(k) for k in PARAM_KEYS if k in merged}
    tolerances = {**DEFAULT_TOLERANCES, **merged.pop("tolerances", {})}
    samples = int(merged.pop("samples", 120))
    seed = int(merged.pop("seed", 0))
    output = merged.pop("output", None)
    extra = {**defaults, **merged}
    if sc == "profile":
        extra.update(params)
        params = {}
        missing = [k for k in ("C", "epsilon", "eta", "tau") if k not in extra]
        if missing:
            raise InputError(f"profile needs {missing}")
    if sc == "verify" and not extra.get("suite"):
        raise InputError("verify needs --suite")
    return ExperimentConfig(sc, model, params, samples, seed, tolerances, output, extra)


RUNNERS = {"profile": run_profile, "curvature": run_curvature, "deform": run_deform, "verify": run_verify}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    t0 = time.perf_counter()
    try:
        config = load_config(args)
        report, code = RUNNERS[config.subcommand](config)
    except (InputError, InfeasibleParameters, AdmissibilityError) as exc:
        print(f"ricci-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RicciLabError as exc:
        print(f"ricci-lab: failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (OSError, json.JSONDecodeError) as exc:
        print(f"ricci-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not args.no_run_info:
        report["run"] = _run_info(t0)
    write_report(report, config.output)
    if code == EXIT_USAGE and "error" in report:
        err = report["error"]
        what = err.get("inequality") or "; ".join(v["name"] for v in err.get("violations", [])) or err.get("detail")
        print(f"ricci-lab: error: {what}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
