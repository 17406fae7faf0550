from __future__ import absolute_import, division, print_function
import os.path as op

import numpy as np
import numpy.testing as npt
import pytest

import icodelab as il

data_path = op.join(il.__path__[0], 'data')


def _model(kind, n=2, m=2, seed=0, **kwargs):
    return il.init_model(kind, n, m, 6, 2, np.random.default_rng(seed),
                         **kwargs)


def test_init_model_shapes():
    icode = _model("icode", n=3, m=2, subnets=2)
    assert sorted(icode.nets) == ["f0", "f1", "k0", "k1"]
    assert icode.subnets == 2 and icode.m == 2
    node = _model("node", n=3)
    assert node.net.in_dim == 4 and node.net.out_dim == 3
    anode = _model("anode", n=3, augment_dim=4)
    assert anode.state_dim == 7
    assert anode.init_net.weights[0].shape == (6, 3)
    assert anode.init_net.depth == 2
    cde = _model("cde", n=3, m=2)
    assert cde.control_net.out_dim == 6
    assert icode.param_count() == sum(il.param_count(net)
                                      for net in icode.nets.values())
    with pytest.raises(ValueError):
        _model("lstm")
    with pytest.raises(ValueError):
        il.init_model("icode", 2, 1, 0, 2, np.random.default_rng(0))


def test_icode_is_affine_in_input():
    model = _model("icode", n=3, m=2)
    x = np.array([0.3, -0.2, 0.8])
    u = np.array([0.7, -1.3])
    f = il.icode_rhs(model, x, np.zeros(2))
    f1 = il.icode_rhs(model, x, u)
    f2 = il.icode_rhs(model, x, 2 * u)
    npt.assert_allclose(f2 - f1, f1 - f, atol=1e-12)
    # Zero input leaves only the drift networks
    drift = sum(il.mlp_forward(net, x) for net in model.f_nets)
    npt.assert_allclose(f, drift, rtol=1e-14)


def test_icode_batched_matches_single():
    model = _model("icode", n=2, m=1)
    x = np.random.default_rng(3).normal(size=(5, 2))
    u = np.random.default_rng(4).normal(size=(5, 1))
    batch = model.rhs(0.0, x, u)
    for b in range(5):
        npt.assert_allclose(model.rhs(0.0, x[b], u[b]), batch[b],
                            rtol=1e-14)
    with pytest.raises(ValueError):
        model.rhs(0.0, x, np.ones((5, 3)))


def test_node_depends_on_time():
    model = _model("node", n=2)
    x = np.array([0.1, 0.2])
    assert not np.allclose(il.node_rhs(model, 0.0, x),
                           il.node_rhs(model, 1.0, x))


def test_anode_initial_state():
    model = _model("anode", n=2, augment_dim=3)
    x0 = np.array([0.5, -0.5])
    h0 = il.anode_init(model, x0)
    npt.assert_equal(h0.shape, (5,))
    npt.assert_array_equal(h0[:2], x0)
    npt.assert_allclose(h0[2:], il.mlp_forward(model.init_net, x0))
    npt.assert_equal(il.anode_rhs(model, 0.0, h0).shape, (5,))
    npt.assert_array_equal(model.observe(h0[None, :])[0], x0)
    plain = _model("anode", n=2, augment_dim=0)
    assert plain.init_net is None
    npt.assert_array_equal(il.anode_init(plain, x0), x0)


def test_cde_is_linear_in_input_derivative():
    model = _model("cde", n=2, m=2)
    x = np.array([0.4, 0.1])
    du = np.array([2.0, -1.0])
    drift = il.cde_rhs(model, x, np.zeros(2))
    npt.assert_allclose(drift, il.mlp_forward(model.drift_net, x))
    F = il.mlp_forward(model.control_net, x).reshape(2, 2)
    npt.assert_allclose(il.cde_rhs(model, x, du), drift + F @ du,
                        rtol=1e-13)


@pytest.mark.parametrize("kind", il.MODEL_KINDS)
def test_rhs_vjp_state_gradient(kind):
    model = _model(kind, n=2, m=2, augment_dim=2)
    rng = np.random.default_rng(5)
    z = rng.normal(size=(3, model.state_dim))
    u = rng.normal(size=(3, 2))
    du = rng.normal(size=(3, 2))
    cot = rng.normal(size=(3, model.state_dim))
    grads, dz = model.rhs_vjp(0.3, z, u, du, cot)
    assert set(grads) <= set(model.nets)
    eps = 1e-6
    fd = np.zeros_like(z)
    for idx in np.ndindex(*z.shape):
        dzz = np.zeros_like(z)
        dzz[idx] = eps
        fd[idx] = np.sum(cot * (model.rhs(0.3, z + dzz, u, du) -
                                model.rhs(0.3, z - dzz, u, du))) / (2 * eps)
    npt.assert_allclose(dz, fd, rtol=1e-6, atol=1e-9)


@pytest.mark.parametrize("kind", il.MODEL_KINDS)
def test_bundle_round_trip(kind, tmp_path):
    model = _model(kind, n=2, m=1, augment_dim=2)
    path = str(tmp_path / f"{kind}.json")
    il.save_model(model, path)
    back = il.load_model(path)
    assert back.kind == kind
    assert sorted(back.nets) == sorted(model.nets)
    z = np.random.default_rng(6).normal(size=(4, model.state_dim))
    u = np.ones((4, 1))
    npt.assert_array_equal(back.rhs(0.5, z, u, u), model.rhs(0.5, z, u, u))


def test_bundle_errors():
    doc = il.model_to_dict(_model("cde", m=1))
    del doc["nets"]["control"]
    with pytest.raises(ValueError):
        il.model_from_dict(doc)
    with pytest.raises(ValueError):
        il.model_from_dict({"kind": "gru", "nets": {}})


def test_toy_bundle():
    model = il.load_model(op.join(data_path, 'toy_decay_model.json'))
    assert model.kind == "icode" and model.m == 0
    x = np.array([0.25])
    npt.assert_allclose(model.rhs(0.0, x, np.zeros(0)), -x)


def test_with_nets_keeps_architecture():
    model = _model("icode", n=2, m=1)
    zero = {name: il.MLP([np.zeros_like(w) for w in net.weights],
                         [np.zeros_like(b) for b in net.biases])
            for name, net in model.nets.items()}
    cleared = model.with_nets(zero)
    assert cleared.kind == "icode" and cleared.m == 1
    npt.assert_array_equal(cleared.rhs(0.0, np.ones(2), np.ones(1)),
                           np.zeros(2))
    # The original model is unchanged
    assert np.any(model.rhs(0.0, np.ones(2), np.ones(1)) != 0)
