from __future__ import annotations

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from ricci_lab import jet as J
from ricci_lab.jet import Jet


def _fd(f, x, h=1e-5):
    """Central finite-difference gradient and Hessian of a scalar function."""
    d = len(x)
    g = np.zeros(d)
    H = np.zeros((d, d))
    E = np.eye(d) * h
    for i in range(d):
        g[i] = (f(x + E[i]) - f(x - E[i])) / (2 * h)
        for j in range(d):
            H[i, j] = (f(x + E[i] + E[j]) - f(x + E[i] - E[j]) - f(x - E[i] + E[j]) + f(x - E[i] - E[j])) / (4 * h * h)
    return g, H


def _expr(X):
    x, y, z = X[..., 0], X[..., 1], X[..., 2]
    return J.exp(0.3 * x * y) * J.sin(z) + J.sqrt(2.0 + x * x) / (1.5 + J.cos(y)) + J.log(3.0 + z * y) * x**3


def _expr_np(x):
    a, b, c = x
    return np.exp(0.3 * a * b) * np.sin(c) + np.sqrt(2 + a * a) / (1.5 + np.cos(b)) + np.log(3 + c * b) * a**3


def test_jet_matches_finite_differences():
    rng = np.random.default_rng(0)
    for x in rng.uniform(-1, 1, (10, 3)):
        j = _expr(Jet.variables(x[None]))
        g, H = _fd(_expr_np, x)
        assert np.allclose(j.val[0], _expr_np(x), atol=1e-13)
        assert np.allclose(j.grad[0], g, rtol=1e-6, atol=1e-7)
        assert np.allclose(j.hess[0], H, rtol=1e-5, atol=1e-5)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=2, max_size=2))
def test_product_and_quotient_rules(xs):
    x = np.array([xs])
    X = Jet.variables(x)
    a, b = X[:, 0] * X[:, 1] + 1.0, J.exp(X[:, 0]) + 2.0
    q = a / b
    ref = (a * b.reciprocal())
    assert np.allclose(q.val, ref.val) and np.allclose(q.grad, ref.grad) and np.allclose(q.hess, ref.hess)
    assert np.allclose(q.hess, np.swapaxes(q.hess, -1, -2))


def test_matrix_inverse_jet():
    rng = np.random.default_rng(1)
    x = rng.uniform(-0.5, 0.5, (4, 2))
    X = Jet.variables(x)
    M = J.stack([J.stack([2.0 + X[:, 0] ** 2, X[:, 0] * X[:, 1]], axis=1),
                 J.stack([X[:, 0] * X[:, 1], 3.0 + J.sin(X[:, 1])], axis=1)], axis=1)
    P = J.matmul(M, J.inv(M))
    assert np.allclose(P.val, np.eye(2))
    assert np.allclose(P.grad, 0, atol=1e-12) and np.allclose(P.hess, 0, atol=1e-11)
