"""Lower bounds for intermediate Ricci sums of self-adjoint operators on 2-vectors.

* :func:`reiser_wraith_bound` - combinatorial block-eigenvalue criterion;
* :func:`rw_contextual`, :func:`operator_norm_from_blocks` - its two corollaries;
* :func:`verify_delta_ric` - block-hypothesis path plus an independent frame oracle;
* :func:`brute_force_sum_min` - the oracle itself.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InputError
from .frames import FrameSearchConfig, FrameSearchResult, minimize_form, orthonormal_form, wedge_power
from .tensor_core import CurvatureOperator, block_operator, wedge_pairs


@dataclass(frozen=True)
class BlockSpectrum:
    """``dims`` of ``V_1, V_2, V_3`` and eigenvalues ``lambdas[(i, j)]`` (1-based, ``i <= j``)."""

    dims: tuple
    lambdas: dict = field(default_factory=dict)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or any(d < 0 for d in dims):
            raise InputError("dims must be three nonnegative integers")
        lam = {}
        for (i, j), v in dict(self.lambdas).items():
            a, b = sorted((int(i), int(j)))
            if (a, b) in lam and lam[(a, b)] != float(v):
                raise InputError(f"conflicting values for lambda_{a}{b}")
            lam[(a, b)] = float(v)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "lambdas", lam)

    @property
    def n(self) -> int:
        return sum(self.dims)

    def lam(self, i: int, j: int) -> float:
        return self.lambdas.get(tuple(sorted((i, j))), 0.0)

    def form(self) -> np.ndarray:
        """The block operator on an orthonormal wedge basis adapted to ``V_1 + V_2 + V_3``."""
        return block_operator(self.dims, self.lambdas)


@dataclass(frozen=True)
class RWResult:
    holds: bool
    minimum: float
    argmin: tuple
    witness: Optional[tuple] = None

    def __bool__(self) -> bool:
        return self.holds


def _rw_tuples(dims, k):
    for i in range(3):
        if dims[i] == 0:
            continue
        caps = [dims[j] if j != i else dims[i] - 1 for j in range(3)]
        for ns in itertools.product(*(range(c + 1) for c in caps)):
            if sum(ns) == k:
                yield i + 1, ns


def rw_minimum(spec: BlockSpectrum, k: int) -> tuple[float, tuple]:
    """Minimum of ``sum_j n_ij lambda_ij`` over all admissible ``(i, n_i1, n_i2, n_i3)``."""
    n = spec.n
    if not 1 <= k <= n - 1:
        raise InputError(f"k must lie in [1, {n - 1}]")
    best, arg = np.inf, None
    for i, ns in _rw_tuples(spec.dims, k):
        val = sum(ns[j] * spec.lam(i, j + 1) for j in range(3))
        if val < best:
            best, arg = val, (i, ns)
    return float(best), arg


def reiser_wraith_bound(spec: BlockSpectrum, k: int, c: float) -> RWResult:
    """True iff every admissible linear form exceeds ``c``; otherwise returns a violating witness."""
    n = spec.n
    if not 1 <= k <= n - 1:
        raise InputError(f"k must lie in [1, {n - 1}]")
    best, arg = rw_minimum(spec, k)
    witness = None
    for i, ns in _rw_tuples(spec.dims, k):
        if sum(ns[j] * spec.lam(i, j + 1) for j in range(3)) <= c:
            witness = (i, ns)
            break
    return RWResult(witness is None, best, arg, witness)


def rw_contextual(lambda11: float, lambda12: float, lambda22: float, b: int, k: int, epsilon: float,
                  n: Optional[int] = None) -> bool:
    """Hypotheses ``lambda12 > 0``, ``(b-1) lambda11 + lambda12 > 0``, ``|lambda22| < epsilon / n``.

    ``n`` is the dimension of ``V``; it defaults to ``k + 1``, the smallest
    dimension in which ``(k+1)``-frames exist.
    """
    if k < b:
        raise InputError(f"need k >= b, got k={k}, b={b}")
    n = k + 1 if n is None else int(n)
    delta = epsilon / n
    return bool(lambda12 > 0 and (b - 1) * lambda11 + lambda12 > 0 and abs(lambda22) < delta)


def operator_norm_from_blocks(lambda11: float, lambda12: float, lambda22: float, delta: float) -> bool:
    return bool(abs(lambda11) < delta and abs(lambda12) < delta and abs(lambda22) < delta)


def block_operator_norm(lambda11: float, lambda12: float, lambda22: float, dims: Sequence[int]) -> float:
    """Spectral norm of the assembled block operator (explicit eigen-computation)."""
    F = block_operator(tuple(dims) + (0,) * (3 - len(dims)), {(1, 1): lambda11, (1, 2): lambda12, (2, 2): lambda22})
    if F.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(F))))


# ---------------------------------------------------------------------------
# oracle


def _as_orthonormal_form(A) -> tuple[np.ndarray, Optional[np.ndarray]]:
    if isinstance(A, CurvatureOperator):
        return orthonormal_form(A.form, A.metric)
    F = np.asarray(A, float)
    return 0.5 * (F + F.T), None


def brute_force_sum_min(A, k: int, config: FrameSearchConfig = FrameSearchConfig()) -> FrameSearchResult:
    """Seeded minimization of ``sum_i <A(u ^ v_i), u ^ v_i>`` over orthonormal ``(k+1)``-frames.

    ``A`` is a :class:`CurvatureOperator` (frames are then g-orthonormal and
    returned in chart coordinates) or a symmetric form on an orthonormal
    wedge basis.
    """
    form_o, E = _as_orthonormal_form(A)
    m = form_o.shape[0]
    n = int(round((1 + np.sqrt(1 + 8 * m)) / 2))
    if not 1 <= k <= n - 1:
        raise InputError(f"k must lie in [1, {n - 1}]")
    return minimize_form(form_o, k, config, E)


# ---------------------------------------------------------------------------
# block structure of a difference operator


@dataclass(frozen=True)
class BlockReport:
    """Block data of a form on the orthonormal wedge basis of an adapted frame."""

    b: int
    n: int
    form_o: np.ndarray
    min_hh: Optional[float]
    min_hv: Optional[float]
    max_hh: Optional[float]
    max_hv: Optional[float]
    vv_norm: float
    off_hh: float
    off_hv: float

    def as_dict(self) -> dict:
        return {"b": self.b, "n": self.n, "min_hh": self.min_hh, "min_hv": self.min_hv,
                "max_hh": self.max_hh, "max_hv": self.max_hv, "vv_norm": self.vv_norm,
                "off_hh": self.off_hh, "off_hv": self.off_hv}


def _labels(n: int, b: int) -> np.ndarray:
    out = []
    for i, j in wedge_pairs(n):
        out.append(0 if j < b else (1 if i < b else 2))
    return np.array(out, dtype=int)


def _norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def block_structure(A, frame, b: int, tol: float = 1e-9) -> BlockReport:
    """Split ``A`` according to ``H ^ H``, ``H ^ V``, ``V ^ V`` of an adapted g-orthonormal frame.

    ``frame`` lists the frame vectors as rows: first ``b`` horizontal, then vertical.
    """
    if isinstance(A, CurvatureOperator):
        form, G = A.form, A.metric
    else:
        raise InputError("block_structure needs a CurvatureOperator")
    frame = np.asarray(frame, float)
    n = G.shape[0]
    if frame.shape != (n, n):
        raise InputError("frame must be an n x n array of row vectors")
    gram = frame @ G @ frame.T
    if np.max(np.abs(gram - np.eye(n))) > tol:
        raise InputError("splitting frame is not orthonormal for the operator's metric")
    P = wedge_power(frame.T)
    fo = P.T @ form @ P
    fo = 0.5 * (fo + fo.T)
    lab = _labels(n, b)
    hh, hv, vv = lab == 0, lab == 1, lab == 2

    def eig(mask):
        if not np.any(mask):
            return None, None
        ev = np.linalg.eigvalsh(fo[np.ix_(mask, mask)])
        return float(ev[0]), float(ev[-1])

    mn_hh, mx_hh = eig(hh)
    mn_hv, mx_hv = eig(hv)
    return BlockReport(b, n, fo, mn_hh, mn_hv, mx_hh, mx_hv,
                       _norm(fo[:, vv]), _norm(fo[np.ix_(~hh, hh)]), _norm(fo[np.ix_(~hv, hv)]))


@dataclass(frozen=True)
class Verdict:
    k: int
    epsilon: float
    delta: float
    lambda_hh: float
    lambda_hv: float
    branch: str
    hypothesis_bound: float
    hypothesis_holds: bool
    oracle_min: float
    oracle_holds: bool
    blocks: dict

    @property
    def agree(self) -> bool:
        return self.hypothesis_holds == self.oracle_holds

    @property
    def sound(self) -> bool:
        """The certified bound never exceeds what the oracle actually finds."""
        return self.hypothesis_bound <= self.oracle_min + 1e-9 * max(1.0, abs(self.oracle_min))

    @property
    def holds(self) -> bool:
        return self.hypothesis_holds and self.oracle_holds

    def as_dict(self) -> dict:
        return {"k": self.k, "epsilon": self.epsilon, "delta": self.delta, "lambda_hh": self.lambda_hh,
                "lambda_hv": self.lambda_hv, "branch": self.branch,
                "hypothesis_bound": self.hypothesis_bound, "hypothesis_holds": self.hypothesis_holds,
                "oracle_min": self.oracle_min, "oracle_holds": self.oracle_holds,
                "agree": self.agree, "sound": self.sound, "blocks": self.blocks}


def verify_delta_ric(A: CurvatureOperator, frame, b: int, k: int, epsilon: float,
                     lambda_hh: Optional[float] = None, lambda_hv: Optional[float] = None,
                     oracle: FrameSearchConfig = FrameSearchConfig()) -> Verdict:
    """Decide ``sum_i <A(u ^ v_i), u ^ v_i> > -epsilon`` for all orthonormal ``(k+1)``-frames.

    Hypothesis path: the measured block minima must dominate ``lambda_hh``,
    ``lambda_hv`` (defaults: the measured minima).  With the model operator
    (``lambda_hh`` on H^H, ``lambda_hv`` on H^V, 0 on V^V) the frame sum is
    at least its block-criterion minimum, and the remaining blocks cost at
    most ``k (vv_norm + 2 * max(off_hh, off_hv))``.  The branch label records
    which structural alternative (``rw-sum`` or ``all-small``, with
    ``delta = epsilon / (6k)``) is met.  Oracle path: direct frame search.
    """
    blocks = block_structure(A, frame, b)
    n = blocks.n
    if not b <= k <= n - 1:
        raise InputError(f"need b <= k <= n-1, got b={b}, k={k}, n={n}")
    m_hh = blocks.min_hh if blocks.min_hh is not None else 0.0
    m_hv = blocks.min_hv if blocks.min_hv is not None else 0.0
    l_hh = m_hh if lambda_hh is None else float(lambda_hh)
    l_hv = m_hv if lambda_hv is None else float(lambda_hv)
    dominated = m_hh >= l_hh - 1e-12 * max(1.0, abs(l_hh)) and m_hv >= l_hv - 1e-12 * max(1.0, abs(l_hv))
    delta = epsilon / (6.0 * k)
    if l_hv > 0 and (b - 1) * l_hh + l_hv > 0:
        branch = "rw-sum"
    elif abs(l_hh) < delta and abs(l_hv) < delta:
        branch = "all-small"
    else:
        branch = "none"
    spec = BlockSpectrum((b, n - b, 0), {(1, 1): l_hh, (1, 2): l_hv, (2, 2): 0.0})
    c_model, _ = rw_minimum(spec, k)
    leak = blocks.vv_norm + 2.0 * max(blocks.off_hh, blocks.off_hv)
    bound = c_model - k * leak
    hyp = bool(dominated and bound > -epsilon)
    res = brute_force_sum_min(blocks.form_o, k, oracle)
    return Verdict(k, float(epsilon), delta, l_hh, l_hv, branch, float(bound), hyp,
                   float(res.value), bool(res.value > -epsilon), blocks.as_dict())
