from __future__ import absolute_import, division, print_function
import os.path as op
import warnings

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings, strategies as st

import icodelab as il

data_path = op.join(il.__path__[0], 'data')


def _linear_icode(A, B=()):
    """ICODE whose networks are single affine layers."""
    n = len(A)
    f = il.MLP([np.asarray(A, dtype=float)], [np.zeros(n)])
    k = [il.MLP([np.asarray(b, dtype=float)], [np.zeros(n)]) for b in B]
    return il.IcodeModel([f], k)


def _gram_schmidt(M):
    Q = np.zeros_like(M)
    for j in range(M.shape[1]):
        v = M[:, j].copy()
        for i in range(j):
            v -= (Q[:, i] @ M[:, j]) * Q[:, i]
        Q[:, j] = v / np.linalg.norm(v)
    return Q


@pytest.mark.parametrize("A, expected", [
    (-np.eye(3), -1.0),
    ([[0.0, 1.0], [-1.0, 0.0]], 0.0),
    (np.diag([-3.0, -1.0]), -1.0),
    ([[-1.0, 2.0], [0.0, -1.0]], 0.0),
    ([[5.0]], 5.0),
])
def test_symmetric_max_eig_examples(A, expected):
    npt.assert_allclose(il.symmetric_max_eig(A), expected, atol=1e-12)


def test_symmetric_max_eig_rejects_non_square():
    with pytest.raises(ValueError):
        il.symmetric_max_eig(np.ones((2, 3)))


@pytest.mark.parametrize("tiny", [1e-310, 5e-324, 1e-200])
def test_symmetric_max_eig_tiny_off_diagonal(tiny):
    A = np.array([[1.0, 1.0, tiny],
                  [1.0, 2.0, 0.0],
                  [tiny, 0.0, 3.0]])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        lam = il.symmetric_max_eig(A)
    npt.assert_allclose(lam, np.linalg.eigvalsh(A)[-1], atol=1e-12)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        npt.assert_allclose(il.symmetric_max_eig([[2.0, tiny], [0.0, 2.0]]),
                            2.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=2, max_value=7),
       st.integers(min_value=0, max_value=2 ** 31))
def test_symmetric_max_eig_properties(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    lam = il.symmetric_max_eig(A)
    npt.assert_allclose(lam, il.symmetric_max_eig(A.T), atol=1e-10)
    npt.assert_allclose(lam, np.linalg.eigvalsh(0.5 * (A + A.T))[-1],
                        atol=1e-10)
    Q = _gram_schmidt(rng.normal(size=(n, n)))
    D = rng.uniform(-5, 5, n)
    npt.assert_allclose(il.symmetric_max_eig(Q @ np.diag(D) @ Q.T), D.max(),
                        atol=1e-10)


def test_model_jacobian_linear_case():
    A1 = np.array([[-1.0, 0.5], [0.2, -2.0]])
    A2 = np.array([[0.3, 0.0], [0.0, 0.1]])
    B = np.array([[0.0, 1.0], [-1.0, 0.0]])
    f = [il.MLP([A], [np.zeros(2)]) for A in (A1, A2)]
    model = il.IcodeModel(f, [il.MLP([B], [np.zeros(2)])])
    x = np.array([0.3, -0.4])
    J = il.model_jacobian(model, x, np.array([1.5]))
    npt.assert_array_equal(J, A1 + A2 + 1.5 * B)


def test_model_jacobian_affine_in_input():
    model = il.init_model("icode", 3, 2, 8, 2, np.random.default_rng(0))
    x = np.array([0.1, -0.5, 0.7])
    u = np.array([0.4, -1.2])
    J0 = il.model_jacobian(model, x, np.zeros(2))
    J1 = il.model_jacobian(model, x, u)
    J2 = il.model_jacobian(model, x, 2 * u)
    npt.assert_allclose(J2 - J1, J1 - J0, atol=1e-12)


def test_model_jacobian_matches_finite_differences():
    model = il.init_model("icode", 3, 2, 8, 2, np.random.default_rng(1),
                          subnets=2)
    x = np.array([0.2, 0.4, -0.3])
    u = np.array([0.9, -0.1])
    J = il.model_jacobian(model, x, u)
    eps = 1e-6
    fd = np.column_stack([
        (il.icode_rhs(model, x + eps * e, u) -
         il.icode_rhs(model, x - eps * e, u)) / (2 * eps)
        for e in np.eye(3)])
    npt.assert_allclose(J, fd, rtol=1e-4, atol=1e-8)


def test_model_jacobian_errors():
    node = il.init_model("node", 2, 0, 4, 1, np.random.default_rng(0))
    with pytest.raises(ValueError):
        il.model_jacobian(node, np.zeros(2), np.zeros(0))
    model = _linear_icode(-np.eye(2))
    with pytest.raises(ValueError):
        il.model_jacobian(model, np.zeros(3), np.zeros(0))


def test_scan_on_decay_model():
    model = il.load_model(op.join(data_path, 'toy_decay_model.json'))
    report = il.contraction_scan(model, [[-2.0, 2.0]], [], 64, 1.0, seed=3)
    npt.assert_allclose(report.worst_lambda, -1.0, atol=1e-9)
    assert report.certified
    npt.assert_allclose(report.margin, 1.0, atol=1e-9)
    violated = il.contraction_scan(model, [[-2.0, 2.0]], [], 64, 1.5)
    assert violated.verdict == "violated"
    doc = report.to_dict()
    assert set(doc) >= {"samples", "c_required", "worst_lambda",
                        "witness_x", "witness_u", "verdict"}
    assert doc["samples"] == 64


def test_scan_finds_expanding_model():
    model = _linear_icode(np.eye(2))
    report = il.contraction_scan(model, [[-1, 1], [-1, 1]], [], 32, 0.1)
    assert report.verdict == "violated"
    npt.assert_allclose(report.worst_lambda, 1.0)
    assert np.all(np.abs(report.witness_x) <= 1.0)


def test_scan_on_shear_model():
    model = _linear_icode([[-1.0, 2.0], [0.0, -1.0]])
    report = il.contraction_scan(model, [[-1, 1], [-1, 1]], [], 16, 0.1)
    npt.assert_allclose(report.worst_lambda, 0.0, atol=1e-12)
    assert report.verdict == "violated"


def test_scan_with_inputs_is_reproducible():
    model = il.init_model("icode", 2, 1, 6, 2, np.random.default_rng(4))
    args = (model, [[-1, 1], [-1, 1]], [[-0.5, 0.5]], 128, 0.0)
    r1 = il.contraction_scan(*args, seed=11)
    r2 = il.contraction_scan(*args, seed=11, jobs=2)
    assert r1.worst_lambda == r2.worst_lambda
    npt.assert_array_equal(r1.witness_x, r2.witness_x)
    npt.assert_array_equal(r1.witness_u, r2.witness_u)
    assert abs(r1.witness_u[0]) <= 0.5
    # The stored witness reproduces the reported value
    J = il.model_jacobian(model, r1.witness_x, r1.witness_u)
    assert il.symmetric_max_eig(J) == r1.worst_lambda


def test_scan_errors():
    model = _linear_icode(-np.eye(2))
    with pytest.raises(ValueError):
        il.contraction_scan(model, [[-1, 1]], [], 8, 0.1)
    with pytest.raises(ValueError):
        il.contraction_scan(model, [[1, -1], [0, 1]], [], 8, 0.1)
    with pytest.raises(ValueError):
        il.contraction_scan(model, [[-1, 1], [-1, 1]], [], 0, 0.1)


def test_metric_transformed_eig():
    model = il.init_model("icode", 3, 1, 6, 2, np.random.default_rng(2))
    x, u = np.array([0.1, 0.2, 0.3]), np.array([0.5])
    # The identity metric reduces to the plain symmetric-part check
    npt.assert_allclose(
        il.metric_transformed_max_eig(model, il.ConstantMetric(np.eye(3)),
                                      x, u),
        il.symmetric_max_eig(il.model_jacobian(model, x, u)), atol=1e-14)
    decay = _linear_icode(-np.eye(3))
    L = np.random.default_rng(3).normal(size=(3, 3)) + 3 * np.eye(3)
    npt.assert_allclose(il.metric_transformed_max_eig(decay, L, x,
                                                      np.zeros(0)),
                        -1.0, atol=1e-6)


@pytest.mark.parametrize("L, expected", [
    (np.diag([2.0, 1.0]), 1.0),
    (np.diag([1.0, 2.0]), -0.5),
])
def test_metric_transformed_shear(L, expected):
    model = _linear_icode([[-1.0, 2.0], [0.0, -1.0]])
    value = il.metric_transformed_max_eig(model, L, np.zeros(2), np.zeros(0))
    npt.assert_allclose(value, expected, atol=1e-12)


def test_constant_metric():
    metric = il.ConstantMetric([[2.0, 1.0], [0.0, 1.0]])
    npt.assert_allclose(metric.M, [[4.0, 2.0], [2.0, 2.0]])
    npt.assert_allclose(metric.M, metric.M.T)
    assert np.all(np.linalg.eigvalsh(metric.M) > 0)
    with pytest.raises(ValueError):
        il.ConstantMetric([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        il.ConstantMetric(np.ones((2, 3)))


def test_certified_model_contracts():
    rng = np.random.default_rng(5)
    f0 = il.MLP([-2.0 * np.eye(2)], [np.zeros(2)])
    f1 = il.init_mlp([2, 8, 2], rng, scale=0.1)
    k0 = il.init_mlp([2, 8, 2], rng, scale=0.1)
    model = il.IcodeModel([f0, f1], [k0])
    report = il.contraction_scan(model, [[-1, 1], [-1, 1]], [[-1, 1]], 256,
                                 1.0)
    assert report.certified
    c = report.margin
    signal = il.SineSignal(amplitude=1.0, frequency=1.0)
    grid = il.TimeGrid(0.0, 2.0, 200)
    for trial in range(5):
        x0 = rng.uniform(-0.8, 0.8, 2)
        dx0 = rng.uniform(-0.1, 0.1, 2)
        check = il.check_contraction_envelope(model, x0, dx0, signal, grid,
                                              c)
        assert check.holds
        assert check.distances[-1] < check.distances[0]
