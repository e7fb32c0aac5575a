"""Chart-presented fields with exact first and second derivatives.

Every field is a callable acting on a :class:`~ricci_lab.jet.Jet` of chart
coordinates with value shape ``(N, n)``.  Evaluating it on
``Jet.variables(x)`` yields values together with exact coordinate gradients
and Hessians, which is all that curvature computations need.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InputError
from .jet import Jet


def as_batch(x, dim: Optional[int] = None) -> tuple[np.ndarray, bool]:
    """Return ``(points of shape (N, n), was_single_point)``."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    if pts.ndim != 2:
        raise InputError(f"points must have shape (n,) or (N, n), got {x.shape}")
    if dim is not None and pts.shape[1] != dim:
        raise InputError(f"expected points of dimension {dim}, got {pts.shape[1]}")
    return pts, single


def sample_id(points, seed=None) -> str:
    """Stable identifier of a sample set (hash of coordinates and seed)."""
    pts = np.ascontiguousarray(np.asarray(points, dtype=float))
    h = hashlib.sha256(pts.tobytes())
    h.update(repr(pts.shape).encode())
    h.update(repr(seed).encode())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class ScalarField:
    """Scalar function on a chart: ``fn`` maps a coordinate Jet ``(N, n)`` to a Jet ``(N,)``."""

    dim: int
    fn: Callable[[Jet], Jet]
    chart_id: str = "chart"
    domain: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def _check(self, pts: np.ndarray) -> None:
        if self.domain is not None and not np.all(self.domain(pts)):
            raise InputError(f"point outside the domain of chart {self.chart_id!r}")

    def jet(self, x) -> Jet:
        pts, _ = as_batch(x, self.dim)
        self._check(pts)
        return self.fn(Jet.variables(pts))

    def __call__(self, x):
        pts, single = as_batch(x, self.dim)
        val = self.jet(pts).val
        return val[0] if single else val

    def __add__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(self.dim, lambda X: self.fn(X) + other.fn(X), self.chart_id, self.domain)


def constant_scalar(dim: int, c: float = 0.0, chart_id: str = "chart") -> ScalarField:
    return ScalarField(dim, lambda X: Jet.constant(np.full(X.shape[:-1], float(c)), X.nvars), chart_id)


@dataclass(frozen=True)
class TensorField:
    """Symmetric (0,2)-tensor field: ``coefficients`` maps a coordinate Jet ``(N, n)`` to ``(N, n, n)``."""

    dim: int
    coefficients: Callable[[Jet], Jet]
    chart_id: str = "chart"
    domain: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def jet(self, x) -> Jet:
        pts, _ = as_batch(x, self.dim)
        if self.domain is not None and not np.all(self.domain(pts)):
            raise InputError(f"point outside the domain of chart {self.chart_id!r}")
        return self.coefficients(Jet.variables(pts))

    def __call__(self, x):
        pts, single = as_batch(x, self.dim)
        val = self.jet(pts).val
        return val[0] if single else val

    def __sub__(self, other: "TensorField") -> "TensorField":
        if other.dim != self.dim:
            raise InputError("dimension mismatch between tensor fields")
        return TensorField(self.dim, lambda X: self.coefficients(X) - other.coefficients(X),
                           self.chart_id, self.domain)

    def scaled(self, factor: ScalarField) -> "TensorField":
        """Pointwise product ``factor * h``."""
        return TensorField(self.dim, lambda X: factor.fn(X)[:, None, None] * self.coefficients(X),
                           self.chart_id, self.domain)


class MetricField(TensorField):
    """A Riemannian metric in a single chart.

    Positive definiteness is checked wherever the metric is factorized
    (Christoffel symbols, orthonormal frames).
    """


def metric_from(coefficients: Callable[[Jet], Jet], dim: int, chart_id: str = "chart",
                domain=None) -> MetricField:
    return MetricField(dim, coefficients, chart_id, domain)


def euclidean_metric(n: int, chart_id: str = "euclidean") -> MetricField:
    eye = np.eye(n)

    def coeffs(X: Jet) -> Jet:
        return Jet.constant(np.broadcast_to(eye, X.shape[:-1] + (n, n)), X.nvars)

    return MetricField(n, coeffs, chart_id)


def conformal_metric(g: TensorField, omega: ScalarField) -> MetricField:
    """``e^{2 omega} g``."""
    from .jet import exp

    def coeffs(X: Jet) -> Jet:
        w = exp(2.0 * omega.fn(X))
        return w[:, None, None] * g.coefficients(X)

    return MetricField(g.dim, coeffs, g.chart_id, g.domain)
