"""One-dimensional bump profiles and the manifold functions built from them.

Everything here is an explicit C^2 piecewise polynomial in local variables,
so values and the first two derivatives are exact.  Each constructed object
carries a list of :class:`Certificate` records that are checked on dense
sample grids; construction raises :class:`ConstructionError` if any fails.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import jet as J
from .errors import ConstructionError, InfeasibleParameters, InputError
from .fields import ScalarField, sample_id
from .jet import Jet

# ---------------------------------------------------------------------------
# ramps


def _s3(u):
    return u * u * (3.0 - 2.0 * u)


def _s5(u):
    return u**3 * (10.0 + u * (-15.0 + 6.0 * u))


def _s5d(u):
    return 30.0 * u * u * (1.0 - u) ** 2


def _s5dd(u):
    return 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u)


# sup |S5'| and sup |S5''| on [0, 1]
RAMP_D1 = 1.875
RAMP_D2 = 10.0 / np.sqrt(3.0)


def _ramp_extrema() -> tuple[float, float]:
    """Extrema of the quintic ramp derivatives from the roots of their derivatives."""
    d1 = np.polynomial.Polynomial([0, 0, 30, -60, 30])
    d2 = d1.deriv()
    out = []
    for p in (d1, d2):
        crit = [r.real for r in p.deriv().roots() if abs(r.imag) < 1e-12 and 0 <= r.real <= 1]
        out.append(max(abs(p(c)) for c in crit + [0.0, 1.0]))
    return out[0], out[1]


@dataclass(frozen=True)
class Certificate:
    """A checked bound: ``value relation limit`` on the named sample grid."""

    name: str
    relation: str  # one of "<", "<=", ">", ">="
    limit: float
    value: float
    grid: str
    worst_at: Optional[tuple] = None

    @property
    def margin(self) -> float:
        if self.relation in ("<", "<="):
            return float(self.limit - self.value)
        return float(self.value - self.limit)

    @property
    def passed(self) -> bool:
        m = self.margin
        return bool(m > 0) if self.relation in ("<", ">") else bool(m >= 0)

    def as_dict(self) -> dict:
        return {"name": self.name, "relation": self.relation, "limit": float(self.limit),
                "value": float(self.value), "margin": self.margin, "passed": self.passed,
                "grid": self.grid,
                "worst_at": None if self.worst_at is None else [float(c) for c in self.worst_at]}


def _enforce(certs: list[Certificate], what: str) -> None:
    for c in certs:
        if not c.passed:
            raise ConstructionError(
                f"{what}: certificate {c.name!r} failed ({c.value!r} {c.relation} {c.limit!r} violated)",
                point=c.worst_at, certificate=c)


# ---------------------------------------------------------------------------
# cutoff


@dataclass(frozen=True)
class CutoffFunction:
    """``lambda = 1`` on ``[-eta, eta]``, quintic ramp down to 0 on ``[eta, 2 eta]``."""

    eta: float
    c2_bound: float
    achieved: float

    def evaluate(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        eta = self.eta
        u = np.clip((t - eta) / eta, 0.0, 1.0)
        lam = 1.0 - _s5(u)
        band = (t > eta) & (t < 2 * eta)
        d1 = np.where(band, -_s5d(u) / eta, 0.0)
        d2 = np.where(band, -_s5dd(u) / eta**2, 0.0)
        return lam, d1, d2

    def evaluate_signed(self, t):
        t = np.asarray(t, dtype=float)
        lam, d1, d2 = self.evaluate(t)
        return lam, np.sign(t) * d1, d2


def cutoff_c2_norm(eta: float) -> float:
    d1, d2 = _ramp_extrema()
    return max(1.0, d1 / eta, d2 / eta**2)


def build_cutoff(eta: float, K: float) -> CutoffFunction:
    if not eta > 0:
        raise InputError("eta must be positive")
    if not K > 1:
        raise InputError("K must exceed 1")
    achieved = cutoff_c2_norm(eta)
    if not achieved < K:
        raise InfeasibleParameters("C2 bound of the cutoff below K",
                                   f"the ramp at eta={eta!r} needs K > {achieved!r}", minimal=achieved)
    return CutoffFunction(float(eta), float(K), float(achieved))


def gluing_delta(epsilon: float, K: float) -> float:
    """A closeness threshold strictly inside ``(0, epsilon / (3K))``."""
    return epsilon / (6.0 * K)


def glue(f, g, cutoff: CutoffFunction, t):
    """``phi = lambda f + (1 - lambda) g`` with derivatives; ``f`` and ``g`` are ``(v, d1, d2)`` triples."""
    lam, l1, l2 = cutoff.evaluate_signed(t)
    f0, f1, f2 = (np.asarray(a, float) for a in f)
    g0, g1, g2 = (np.asarray(a, float) for a in g)
    d = f0 - g0
    d1 = f1 - g1
    phi = g0 + lam * d
    phi1 = g1 + l1 * d + lam * d1
    phi2 = g2 + l2 * d + 2.0 * l1 * d1 + lam * (f2 - g2)
    return phi, phi1, phi2


# ---------------------------------------------------------------------------
# plateau


def _i1(u):
    return u - u**3 + 0.5 * u**4


def _i2(u):
    return 0.5 * u**2 - 0.25 * u**4 + 0.1 * u**5


_I1_END = 0.5
_I2_END = 0.35


@dataclass(frozen=True)
class PlateauFunction:
    """``h = C`` on ``[-tau, tau]``, cubic smoothstep down to 0 on ``tau <= |t| <= nu``."""

    C: float
    nu: float
    tau: float

    def __call__(self, t):
        return self.evaluate(t)[0]

    def evaluate(self, t):
        """Returns ``(h, F1, F2)`` with ``F1 = int_0^t h`` and ``F2 = int_0^t F1`` (``t >= 0``)."""
        t = np.abs(np.asarray(t, dtype=float))
        C, tau, nu = self.C, self.tau, self.nu
        w = nu - tau
        u = np.clip((t - tau) / w, 0.0, 1.0)
        core = t <= tau
        band = (t > tau) & (t < nu)
        h = np.where(core, C, np.where(band, C * (1.0 - _s3(u)), 0.0))
        slope = C * tau + C * w * _I1_END
        f_nu = 0.5 * C * tau**2 + C * tau * w + C * w * w * _I2_END
        F1 = np.where(core, C * t, np.where(band, C * tau + C * w * _i1(u), slope))
        F2 = np.where(core, 0.5 * C * t * t,
                      np.where(band, 0.5 * C * tau**2 + C * tau * (t - tau) + C * w * w * _i2(u),
                               f_nu + slope * (t - nu)))
        return h, F1, F2

    def integral(self) -> float:
        """Integral over the real line."""
        return 2.0 * (self.C * self.tau + self.C * (self.nu - self.tau) * _I1_END)


def build_plateau(C: float, nu: float, tau: float) -> PlateauFunction:
    if not (0 < tau < nu):
        raise InputError(f"need 0 < tau < nu, got tau={tau!r}, nu={nu!r}")
    return PlateauFunction(float(C), float(nu), float(tau))


# ---------------------------------------------------------------------------
# profile


@dataclass(frozen=True)
class BumpProfile:
    C: float
    epsilon: float
    eta: float
    tau: float
    nu: float
    cutoff: CutoffFunction
    certificates: tuple = field(default_factory=tuple)

    @property
    def plateau(self) -> PlateauFunction:
        return PlateauFunction(abs(self.C), self.nu, self.tau)

    def evaluate(self, t):
        """Exact ``(phi, phi', phi'')`` at ``t`` (any real)."""
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        h, F1, F2 = self.plateau.evaluate(a)
        lam, l1, l2 = self.cutoff.evaluate(a)
        sgn = np.sign(self.C)
        phi = lam * F2
        d1 = l1 * F2 + lam * F1
        d2 = l2 * F2 + 2.0 * l1 * F1 + lam * h
        return sgn * phi, sgn * np.sign(t) * d1, sgn * d2

    def __call__(self, t):
        return self.evaluate(t)[0]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.certificates)

    def breakpoints(self) -> list[float]:
        return [0.0, self.tau, self.nu, self.eta, 2 * self.eta]

    def sample_grid(self, per_piece: int = 2001) -> np.ndarray:
        bp = self.breakpoints() + [3 * self.eta]
        parts = [np.linspace(a, b, per_piece) for a, b in zip(bp[:-1], bp[1:])]
        return np.unique(np.concatenate(parts))

    def as_dict(self) -> dict:
        return {"C": self.C, "epsilon": self.epsilon, "eta": self.eta, "tau": self.tau, "nu": self.nu,
                "cutoff_K": self.cutoff.c2_bound, "cutoff_c2": self.cutoff.achieved,
                "certificates": [c.as_dict() for c in self.certificates], "passed": self.passed}


def profile_certificates(prof: BumpProfile, per_piece: int = 2001) -> list[Certificate]:
    C, eps, eta, tau = prof.C, prof.epsilon, prof.eta, prof.tau
    t = prof.sample_grid(per_piece)
    gid = sample_id(t[:, None])
    phi, d1, d2 = prof.evaluate(t)
    certs = []

    def worst(values, mask, pick=np.argmax):
        vals = np.where(mask, values, np.nan)
        i = int(pick(np.nan_to_num(vals, nan=-np.inf if pick is np.argmax else np.inf)))
        return float(values[i]), (float(t[i]),)

    core = t <= tau
    dev = np.abs(phi - 0.5 * C * t * t)
    v, at = worst(dev, core)
    certs.append(Certificate("quadratic core", "<=", 1e-12 * abs(C) * tau * tau, v, gid, at))
    outside = t >= 2 * eta
    v, at = worst(np.maximum.reduce([np.abs(phi), np.abs(d1), np.abs(d2)]), outside)
    certs.append(Certificate("support in [-2eta, 2eta]", "<=", 0.0, v, gid, at))
    allm = np.ones_like(t, dtype=bool)
    v, at = worst(np.maximum(np.abs(phi), np.abs(d1)), allm)
    certs.append(Certificate("C1 norm", "<", eps, v, gid, at))
    band = t >= eta
    v, at = worst(np.maximum.reduce([np.abs(phi), np.abs(d1), np.abs(d2)]), band)
    certs.append(Certificate("C2 norm off [-eta, eta]", "<", eps, v, gid, at))
    mono = t <= eta
    if C > 0:
        v, at = worst(d2, allm)
        certs.append(Certificate("phi'' <= C", "<=", C, v, gid, at))
        v, at = worst(d2, allm, np.argmin)
        certs.append(Certificate("phi'' > -eps", ">", -eps, v, gid, at))
        v, at = worst(d1, mono, np.argmin)
        certs.append(Certificate("phi' >= 0 on [0, eta]", ">=", 0.0, v, gid, at))
    else:
        v, at = worst(d2, allm, np.argmin)
        certs.append(Certificate("phi'' >= C", ">=", C, v, gid, at))
        v, at = worst(d2, allm)
        certs.append(Certificate("phi'' < eps", "<", eps, v, gid, at))
        v, at = worst(d1, mono)
        certs.append(Certificate("phi' <= 0 on [0, eta]", "<=", 0.0, v, gid, at))
    return certs


def profile_feasibility(C: float, epsilon: float, eta: float, tau: float) -> None:
    if not (0 < epsilon < 1 and 0 < eta < 1):
        raise InfeasibleParameters("epsilon, eta in (0, 1) required",
                                   f"epsilon={epsilon!r}, eta={eta!r}")
    if not abs(C) > 1:
        raise InfeasibleParameters("|C| > 1 required", f"C={C!r}")
    bound = epsilon * eta / (2 * abs(C))
    if not 0 < tau < bound:
        raise InfeasibleParameters("tau bound violated", f"need 0 < tau < eps*eta/(2|C|) = {bound!r}, "
                                   f"got tau={tau!r}", minimal=bound)


def build_profile(C: float, epsilon: float, eta: float, tau: float, *, check: bool = True,
                  per_piece: int = 2001) -> BumpProfile:
    """Profile with ``phi = (C/2) t^2`` near 0, support in ``[-2 eta, 2 eta]``, C^1-size below ``epsilon``.

    With ``check=False`` the certificates are still computed and attached,
    but a failing one does not raise.
    """
    C, epsilon, eta, tau = float(C), float(epsilon), float(eta), float(tau)
    profile_feasibility(C, epsilon, eta, tau)
    nu = float(np.sqrt(tau * epsilon * eta / (2 * abs(C))))
    K = 1.01 * cutoff_c2_norm(eta)
    prof = BumpProfile(C, epsilon, eta, tau, nu, build_cutoff(eta, K))
    certs = tuple(profile_certificates(prof, per_piece))
    prof = BumpProfile(C, epsilon, eta, tau, nu, prof.cutoff, certs)
    if check:
        _enforce(list(certs), "profile")
    return prof


def max_feasible_tau(C: float, epsilon: float, eta: float, fraction: float = 0.999) -> float:
    """Largest ``tau`` (on a geometric ladder below the admissible bound) whose profile certifies."""
    bound = epsilon * eta / (2 * abs(C))
    tau = fraction * bound
    for _ in range(200):
        prof = build_profile(C, epsilon, eta, tau, check=False, per_piece=401)
        if prof.passed:
            return tau
        tau *= 0.8
    raise InfeasibleParameters("no certifying tau found", f"C={C}, eps={epsilon}, eta={eta}")


# ---------------------------------------------------------------------------
# manifold functions


def _distance_hessian_error(base, p, radii, directions) -> float:
    """Max over samples of ``|Hess_dist(Y, Y) - 1/d|`` for unit ``Y`` orthogonal to ``grad dist``."""
    from .metric_calculus import christoffel_from_jet, covariant_hessian
    from scipy.linalg import eigh

    pts = np.array([base.point_at_distance(p, u, r) for r in radii for u in directions])
    d_true = np.repeat(radii, len(directions))
    dj = J.sqrt(base.dist_sq(Jet.variables(pts), p))
    gj = base.metric.jet(pts)
    H = covariant_hessian(dj, christoffel_from_jet(gj))
    G = gj.val
    worst = 0.0
    for i in range(len(pts)):
        grad = np.linalg.solve(G[i], dj.grad[i])
        # basis of the g-orthogonal complement of grad
        Ginv_free = np.linalg.svd((G[i] @ grad)[None, :])[2][1:].T
        Hr = Ginv_free.T @ H[i] @ Ginv_free
        Gr = Ginv_free.T @ G[i] @ Ginv_free
        ev = eigh(0.5 * (Hr + Hr.T), Gr, eigvals_only=True)
        worst = max(worst, float(np.max(np.abs(ev - 1.0 / d_true[i]))))
    return worst


@dataclass(frozen=True)
class OmegaFunction:
    """``omega = phi o dist_p`` on a base manifold, with the caller's parameters and certificates."""

    base_model: str
    p: tuple
    C: float
    epsilon: float
    eta: float
    tau: float
    profile: BumpProfile
    field: ScalarField
    certificates: tuple = ()
    samples_id: str = ""

    def __call__(self, y):
        return self.field(y)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.certificates) and self.profile.passed

    def as_dict(self) -> dict:
        return {"base_model": self.base_model, "p": list(self.p), "C": self.C, "epsilon": self.epsilon,
                "eta": self.eta, "tau": self.tau, "internal_profile": self.profile.as_dict(),
                "certificates": [c.as_dict() for c in self.certificates], "sample_set": self.samples_id,
                "passed": self.passed}


def omega_jet_fn(base, p: np.ndarray, prof: BumpProfile) -> Callable[[Jet], Jet]:
    """Jet map ``Y -> phi(dist_p(Y))``, evaluated as a smooth function of ``dist^2`` near ``p``."""
    p = np.asarray(p, dtype=float)
    half_c = 0.5 * prof.C
    tau2 = prof.tau**2

    def fn(Y: Jet) -> Jet:
        d2 = base.dist_sq(Y, p)
        inner = half_c * d2
        with np.errstate(all="ignore"):
            d = J.sqrt(d2)
            outer = J.compose(d, prof.evaluate)
        return J.where(d2.val <= tau2, inner, outer)

    return fn


def ball_samples(base, p, eta: float, tau: float, count: int, seed: int,
                 r_max_factor: float = 2.5) -> np.ndarray:
    """Deterministic points in ``B(p, r_max_factor * eta)``: log-spaced radii from well inside
    ``B(p, tau)`` outwards, seeded random chart directions, plus ``p`` itself."""
    rng = np.random.default_rng(seed)
    b = base.metric.dim
    r_lo = max(tau * 1e-2, 1e-300)
    radii = np.geomspace(r_lo, r_max_factor * eta, max(count - 1, 1))
    dirs = rng.standard_normal((len(radii), b))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = [np.asarray(p, float)] + [base.point_at_distance(p, u, r) for u, r in zip(dirs, radii)]
    return np.array(pts)


def _hessian_eigs(field: ScalarField, metric, pts):
    from .metric_calculus import christoffel_from_jet, covariant_hessian
    from scipy.linalg import eigh

    fj = field.jet(pts)
    gj = metric.jet(pts)
    H = covariant_hessian(fj, christoffel_from_jet(gj))
    ev = np.array([eigh(H[i], gj.val[i], eigvals_only=True) for i in range(len(pts))])
    gradn = np.sqrt(np.einsum("ni,nij,nj->n", fj.grad, np.linalg.inv(gj.val), fj.grad))
    return fj.val, gradn, ev, H, gj.val


def omega_certificates(omega_field: ScalarField, base, p, C, epsilon, eta, tau, pts, gid
                       ) -> list[Certificate]:
    val, gradn, ev, _, _ = _hessian_eigs(omega_field, base.metric, pts)
    d = np.sqrt(np.maximum(base.dist_sq(Jet.variables(pts), np.asarray(p, float)).val, 0.0))
    certs = []

    def at(i):
        return tuple(float(c) for c in pts[i])

    i0 = int(np.argmin(d))
    certs.append(Certificate("grad at p = 0", "<=", 0.0, float(gradn[i0]), gid, at(i0)))
    out = d >= 2 * eta
    if np.any(out):
        m = np.where(out, np.maximum(np.abs(val), gradn), -np.inf)
        i = int(np.argmax(m))
        certs.append(Certificate("support in B(p, 2eta)", "<=", 0.0, float(m[i]), gid, at(i)))
    c1 = np.maximum(np.abs(val), gradn)
    i = int(np.argmax(c1))
    certs.append(Certificate("C1 norm", "<", epsilon, float(c1[i]), gid, at(i)))
    lo, hi = ev.min(axis=1), ev.max(axis=1)
    core = d < tau
    if C > 0:
        i = int(np.argmin(lo))
        certs.append(Certificate("Hess >= -eps", ">=", -epsilon, float(lo[i]), gid, at(i)))
        i = int(np.argmax(hi))
        certs.append(Certificate("Hess <= 3C", "<=", 3 * C, float(hi[i]), gid, at(i)))
        m = np.where(core, lo, np.inf)
        i = int(np.argmin(m))
        certs.append(Certificate("Hess >= C on B(p, tau)", ">=", C, float(m[i]), gid, at(i)))
    else:
        i = int(np.argmax(hi))
        certs.append(Certificate("Hess <= eps", "<=", epsilon, float(hi[i]), gid, at(i)))
        i = int(np.argmin(lo))
        certs.append(Certificate("Hess >= 3C", ">=", 3 * C, float(lo[i]), gid, at(i)))
        m = np.where(core, hi, -np.inf)
        i = int(np.argmax(m))
        certs.append(Certificate("Hess <= C on B(p, tau)", "<=", C, float(m[i]), gid, at(i)))
    return certs


def build_omega(base, p, C: float, epsilon: float, eta: float, tau: float, *, samples: int = 300,
                seed: int = 0, check: bool = True) -> OmegaFunction:
    """``omega = phi o dist_p`` with the internal parameter map ``C -> 2C``, ``eps -> eps * eta^3``."""
    p = np.asarray(p, dtype=float)
    C, epsilon, eta, tau = float(C), float(epsilon), float(eta), float(tau)
    if not 0 < eta < 0.5 * min(1.0, base.inj_radius):
        raise InputError(f"eta={eta!r} too large: need eta < min(1, inj)/2 = {0.5 * min(1.0, base.inj_radius)!r}")
    profile_feasibility(C, epsilon, eta, tau)
    eps_int = epsilon * eta**3
    try:
        prof = build_profile(2 * C, eps_int, eta, tau, check=check)
    except InfeasibleParameters as exc:
        raise InfeasibleParameters(
            "tau bound violated for the internal profile (C -> 2C, eps -> eps*eta^3)",
            exc.detail, minimal=exc.minimal) from exc
    except ConstructionError as exc:
        raise ConstructionError(f"internal profile: {exc}", exc.point, exc.certificate) from exc
    # tangential distance-Hessian error must stay below sqrt(eta) on B(p, 2 eta); it grows with the
    # radius, so the outer decade is sampled (smaller radii only add roundoff of order 1e-16 / d)
    rng = np.random.default_rng(seed + 7919)
    dirs = rng.standard_normal((4, base.metric.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = np.geomspace(0.1 * eta, 2 * eta, 12)
    err = _distance_hessian_error(base, p, radii, dirs)
    dist_cert = Certificate("tangential distance-Hessian error < sqrt(eta)", "<", np.sqrt(eta), err,
                            sample_id(radii[:, None], seed))
    if check and not dist_cert.passed:
        raise InfeasibleParameters("tangential distance-Hessian error < sqrt(eta)",
                                   f"measured {err!r} >= sqrt(eta) = {np.sqrt(eta)!r}; shrink eta")
    field_ = ScalarField(base.metric.dim, omega_jet_fn(base, p, prof), base.metric.chart_id)
    pts = ball_samples(base, p, eta, tau, samples, seed)
    gid = sample_id(pts, seed)
    certs = [dist_cert] + omega_certificates(field_, base, p, C, epsilon, eta, tau, pts, gid)
    om = OmegaFunction(base.name, tuple(float(c) for c in p), C, epsilon, eta, tau, prof, field_,
                       tuple(certs), gid)
    if check:
        _enforce(certs, "omega")
    return om


@dataclass(frozen=True)
class PulledBackOmega:
    """``omega o pi`` on the total space of a submersion."""

    omega: OmegaFunction
    field: ScalarField
    certificates: tuple = ()

    def __call__(self, x):
        return self.field(x)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.certificates)


def lift_scalar(model, f: ScalarField) -> ScalarField:
    b = model.b
    return ScalarField(model.n, lambda X: f.fn(X[:, :b]), model.total.chart_id)


def pullback_omega(model, omega: OmegaFunction, *, samples: int = 200, seed: int = 0,
                   check: bool = True) -> PulledBackOmega:
    field_ = lift_scalar(model, omega.field)
    C, eps, eta, tau = omega.C, omega.epsilon, omega.eta, omega.tau
    base_pts = ball_samples(model.base, np.asarray(omega.p), eta, tau, samples, seed)
    pts = model.lift_points(base_pts, np.random.default_rng(seed + 1))
    gid = sample_id(pts, seed)
    val, gradn, ev, H, G = _hessian_eigs(field_, model.total, pts)
    certs = []
    lo, hi = ev.min(axis=1), ev.max(axis=1)
    if C > 0:
        i = int(np.argmin(lo))
        certs.append(Certificate("Hess >= -eps (all Z)", ">=", -eps, float(lo[i]), gid, tuple(pts[i])))
        i = int(np.argmax(hi))
        certs.append(Certificate("Hess <= 3C (all Z)", "<=", 3 * C, float(hi[i]), gid, tuple(pts[i])))
    else:
        i = int(np.argmax(hi))
        certs.append(Certificate("Hess <= eps (all Z)", "<=", eps, float(hi[i]), gid, tuple(pts[i])))
        i = int(np.argmin(lo))
        certs.append(Certificate("Hess >= 3C (all Z)", ">=", 3 * C, float(lo[i]), gid, tuple(pts[i])))
    # horizontal directions near the fiber over p
    from scipy.linalg import eigh
    L = model.horizontal_lift_matrix(pts)
    Hh = np.einsum("nia,nij,njb->nab", L, H, L)
    Gh = np.einsum("nia,nij,njb->nab", L, G, L)
    evh = np.array([eigh(Hh[i], Gh[i], eigvals_only=True) for i in range(len(pts))])
    d = np.sqrt(np.maximum(model.base.dist_sq(Jet.variables(base_pts), np.asarray(omega.p)).val, 0.0))
    core = d < tau
    if C > 0:
        m = np.where(core, evh.min(axis=1), np.inf)
        i = int(np.argmin(m))
        certs.append(Certificate("horizontal Hess >= C near the fiber", ">=", C, float(m[i]), gid, tuple(pts[i])))
    else:
        m = np.where(core, evh.max(axis=1), -np.inf)
        i = int(np.argmax(m))
        certs.append(Certificate("horizontal Hess <= C near the fiber", "<=", C, float(m[i]), gid, tuple(pts[i])))
    pb = PulledBackOmega(omega, field_, tuple(certs))
    if check:
        _enforce(certs, "pullback")
    return pb
