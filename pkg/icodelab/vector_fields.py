from __future__ import absolute_import, division, print_function
import json
from abc import ABC, abstractmethod

import numpy as np

from .integrate import atomic_write
from .nn_core import (ParamGradient, init_mlp, mlp_forward, mlp_vjp,
                      mlp_to_dict, mlp_from_dict, param_count)

__all__ = ["VectorFieldModel", "IcodeModel", "NodeModel", "AnodeModel",
           "CdeModel", "MODEL_KINDS", "init_model", "icode_rhs", "node_rhs",
           "anode_init", "anode_rhs", "cde_rhs", "model_to_dict",
           "model_from_dict", "save_model", "load_model"]

MODEL_KINDS = ("icode", "cde", "node", "anode")


def _rows(a, dim, name):
    """Promote to (batch, dim) and remember whether the input was a vector."""
    a = np.asarray(a, dtype=np.float64)
    single = a.ndim == 1
    a2 = np.atleast_2d(a)
    if a2.ndim != 2 or a2.shape[1] != dim:
        raise ValueError(f"'{name}' must have trailing dimension {dim}, "
                         f"got shape {a.shape}!")
    return a2, single


def _time_column(t, batch):
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    if t.size == 1:
        t = np.repeat(t, batch)
    return t[:, None]


class VectorFieldModel(ABC):
    """Common interface of the learnable right-hand sides.

    A model integrates an internal state ``z`` (the physical state, plus
    augmented coordinates for ANODE). The integrator calls
    ``rhs(t, z, u, du)`` with the input ``u`` and its derivative ``du``
    sampled at stage times, and reads predictions back with ``observe``.
    All arrays are batched as (batch, dim).
    """
    kind = None

    def __init__(self, n, m, nets):
        self.n = int(n)
        self.m = int(m)
        self._nets = dict(nets)

    @property
    def nets(self):
        """Ordered mapping name -> MLP (a copy; models are immutable)."""
        return dict(self._nets)

    @property
    def state_dim(self):
        return self.n

    def with_nets(self, nets):
        """Same architecture, new parameters."""
        merged = self.nets
        merged.update(nets)
        return self._rebuild(merged)

    @abstractmethod
    def _rebuild(self, nets):
        pass

    @abstractmethod
    def rhs(self, t, z, u, du):
        pass

    @abstractmethod
    def rhs_vjp(self, t, z, u, du, cotangent):
        """Returns ``({name: ParamGradient}, dz)`` for a cotangent on rhs."""

    def initial_state(self, x0):
        x0, _ = _rows(x0, self.n, 'x0')
        return x0.copy()

    def initial_state_vjp(self, x0, cotangent):
        return {}

    def observe(self, z):
        return z[..., :self.n]

    def zero_grads(self):
        return {name: ParamGradient.zeros_like(net)
                for name, net in self._nets.items()}

    def param_count(self):
        return int(sum(param_count(net) for net in self._nets.values()))


class IcodeModel(VectorFieldModel):
    """Input-affine neural ODE: x' = sum_i f_i(x) + sum_j k_j(x) u_j."""
    kind = "icode"

    def __init__(self, f_nets, k_nets):
        f_nets, k_nets = list(f_nets), list(k_nets)
        if len(f_nets) < 1:
            raise ValueError("ICODE needs at least one f network!")
        n = f_nets[0].in_dim
        for net in f_nets + k_nets:
            if net.in_dim != n or net.out_dim != n:
                raise ValueError(f"ICODE networks must map R^{n} to R^{n}!")
        nets = [(f"f{i}", net) for i, net in enumerate(f_nets)]
        nets += [(f"k{j}", net) for j, net in enumerate(k_nets)]
        super(IcodeModel, self).__init__(n, len(k_nets), nets)

    @property
    def f_nets(self):
        return [self._nets[f"f{i}"] for i in range(self.subnets)]

    @property
    def k_nets(self):
        return [self._nets[f"k{j}"] for j in range(self.m)]

    @property
    def subnets(self):
        return sum(1 for name in self._nets if name.startswith('f'))

    def _rebuild(self, nets):
        return IcodeModel([nets[f"f{i}"] for i in range(self.subnets)],
                          [nets[f"k{j}"] for j in range(self.m)])

    def rhs(self, t, z, u, du=None):
        x, single = _rows(z, self.n, 'x')
        u, _ = _rows(u, self.m, 'u') if self.m else (None, single)
        out = mlp_forward(self.f_nets[0], x)
        for net in self.f_nets[1:]:
            out = out + mlp_forward(net, x)
        for j, net in enumerate(self.k_nets):
            out = out + mlp_forward(net, x) * u[:, j:j + 1]
        return out[0] if single else out

    def rhs_vjp(self, t, z, u, du, cotangent):
        x, _ = _rows(z, self.n, 'x')
        cot, _ = _rows(cotangent, self.n, 'cotangent')
        grads, dx = {}, np.zeros_like(x)
        for i, net in enumerate(self.f_nets):
            grads[f"f{i}"], gx = mlp_vjp(net, x, cot)
            dx = dx + gx
        if self.m:
            u, _ = _rows(u, self.m, 'u')
        for j, net in enumerate(self.k_nets):
            grads[f"k{j}"], gx = mlp_vjp(net, x, cot * u[:, j:j + 1])
            dx = dx + gx
        return grads, dx


class NodeModel(VectorFieldModel):
    """Neural ODE x' = f(t, x); time is the first network input."""
    kind = "node"

    def __init__(self, net):
        if net.in_dim != net.out_dim + 1:
            raise ValueError("NODE network must map R^(n+1) to R^n!")
        super(NodeModel, self).__init__(net.out_dim, 0, [("net", net)])

    @property
    def net(self):
        return self._nets["net"]

    def _rebuild(self, nets):
        return NodeModel(nets["net"])

    def rhs(self, t, z, u=None, du=None):
        x, single = _rows(z, self.state_dim, 'x')
        out = mlp_forward(self.net, np.hstack([_time_column(t, len(x)), x]))
        return out[0] if single else out

    def rhs_vjp(self, t, z, u, du, cotangent):
        x, _ = _rows(z, self.state_dim, 'x')
        cot, _ = _rows(cotangent, self.state_dim, 'cotangent')
        inp = np.hstack([_time_column(t, len(x)), x])
        g, gx = mlp_vjp(self.net, inp, cot)
        return {"net": g}, gx[:, 1:]


class AnodeModel(NodeModel):
    """NODE on the state padded with ``d_a`` learned coordinates.

    The padding is produced from x(0) by ``init_net`` (one hidden layer).
    """
    kind = "anode"

    def __init__(self, net, init_net, n):
        n = int(n)
        d_a = net.out_dim - n
        if d_a < 0 or net.in_dim != net.out_dim + 1:
            raise ValueError("ANODE network must map R^(n+d_a+1) to "
                             "R^(n+d_a)!")
        if d_a > 0:
            if init_net is None or init_net.in_dim != n or \
                    init_net.out_dim != d_a:
                raise ValueError(f"ANODE init network must map R^{n} to "
                                 f"R^{d_a}!")
        nets = [("net", net)]
        if d_a > 0:
            nets.append(("init", init_net))
        VectorFieldModel.__init__(self, n, 0, nets)
        self.d_a = d_a

    @property
    def init_net(self):
        return self._nets.get("init")

    @property
    def state_dim(self):
        return self.n + self.d_a

    def _rebuild(self, nets):
        return AnodeModel(nets["net"], nets.get("init"), self.n)

    def initial_state(self, x0):
        x0, _ = _rows(x0, self.n, 'x0')
        if self.d_a == 0:
            return x0.copy()
        return np.hstack([x0, mlp_forward(self.init_net, x0)])

    def initial_state_vjp(self, x0, cotangent):
        if self.d_a == 0:
            return {}
        x0, _ = _rows(x0, self.n, 'x0')
        cot, _ = _rows(cotangent, self.state_dim, 'cotangent')
        g, _ = mlp_vjp(self.init_net, x0, cot[:, self.n:])
        return {"init": g}


class CdeModel(VectorFieldModel):
    """Controlled model x' = f1(x) + F(x) du/dt with F(x) an n x m matrix.

    ``drift_net`` plays the role of the time control channel (its derivative
    is 1), ``control_net`` emits F(x) flattened row-major.
    """
    kind = "cde"

    def __init__(self, drift_net, control_net, m):
        n = drift_net.in_dim
        m = int(m)
        if drift_net.out_dim != n:
            raise ValueError("CDE drift network must map R^n to R^n!")
        if control_net.in_dim != n or control_net.out_dim != n * m:
            raise ValueError(f"CDE control network must map R^{n} to "
                             f"R^{n * m}!")
        super(CdeModel, self).__init__(
            n, m, [("drift", drift_net), ("control", control_net)])

    @property
    def drift_net(self):
        return self._nets["drift"]

    @property
    def control_net(self):
        return self._nets["control"]

    def _rebuild(self, nets):
        return CdeModel(nets["drift"], nets["control"], self.m)

    def rhs(self, t, z, u, du):
        x, single = _rows(z, self.n, 'x')
        du, _ = _rows(du, self.m, 'du_dt')
        ctrl = mlp_forward(self.control_net, x).reshape(-1, self.n, self.m)
        out = mlp_forward(self.drift_net, x) + \
            (ctrl * du[:, None, :]).sum(axis=-1)
        return out[0] if single else out

    def rhs_vjp(self, t, z, u, du, cotangent):
        x, _ = _rows(z, self.n, 'x')
        du, _ = _rows(du, self.m, 'du_dt')
        cot, _ = _rows(cotangent, self.n, 'cotangent')
        g_drift, dx = mlp_vjp(self.drift_net, x, cot)
        cot_ctrl = (cot[:, :, None] * du[:, None, :]).reshape(len(x), -1)
        g_ctrl, gx = mlp_vjp(self.control_net, x, cot_ctrl)
        return {"drift": g_drift, "control": g_ctrl}, dx + gx


def _sizes(n_in, width, depth, n_out):
    return [n_in] + [width] * depth + [n_out]


def init_model(kind, n, m, width, depth, rng, augment_dim=0, subnets=1,
               bias=True):
    """Randomly initialized model of the requested family.

    Parameters
    ----------
    kind : {'icode', 'cde', 'node', 'anode'}
    n, m : int
        State and input dimensions.
    width, depth : int
        Hidden-layer width and number of hidden layers of every network.
    rng : numpy.random.Generator
    augment_dim : int
        ANODE augmentation dimension d_a.
        Default: 0
    subnets : int
        Number M of ICODE f networks.
        Default: 1
    bias : boolean
        Default: True
    """
    if width < 1 or depth < 1:
        raise ValueError("'width' and 'depth' must be at least 1!")
    if kind == "icode":
        f_nets = [init_mlp(_sizes(n, width, depth, n), rng, bias)
                  for _ in range(subnets)]
        k_nets = [init_mlp(_sizes(n, width, depth, n), rng, bias)
                  for _ in range(m)]
        return IcodeModel(f_nets, k_nets)
    if kind == "node":
        return NodeModel(init_mlp(_sizes(n + 1, width, depth, n), rng, bias))
    if kind == "anode":
        d = n + augment_dim
        net = init_mlp(_sizes(d + 1, width, depth, d), rng, bias)
        init_net = init_mlp([n, width, augment_dim], rng, bias) \
            if augment_dim > 0 else None
        return AnodeModel(net, init_net, n)
    if kind == "cde":
        drift = init_mlp(_sizes(n, width, depth, n), rng, bias)
        control = init_mlp(_sizes(n, width, depth, n * m), rng, bias)
        return CdeModel(drift, control, m)
    raise ValueError(f"Unknown model kind '{kind}'; "
                     f"choose one of {MODEL_KINDS}")


def icode_rhs(model, x, u):
    """sum_i f_i(x) + sum_j k_j(x) u_j."""
    return model.rhs(None, x, u)


def node_rhs(model, t, x):
    """f(t, x) of a NODE."""
    return model.rhs(t, x)


def anode_init(model, x0):
    """Augmented initial state concat(x0, init_net(x0))."""
    h0 = model.initial_state(x0)
    return h0[0] if np.ndim(x0) == 1 else h0


def anode_rhs(model, t, h):
    """Right-hand side of an ANODE on the augmented state."""
    return model.rhs(t, h)


def cde_rhs(model, x, du_dt):
    """drift(x) + reshape(control(x), n x m) du_dt."""
    return model.rhs(None, x, None, du_dt)


def model_to_dict(model):
    """Model bundle ``{"kind", "n", "m", "d_a", "nets"}``."""
    return {"kind": model.kind, "n": model.n, "m": model.m,
            "d_a": getattr(model, 'd_a', 0),
            "nets": {name: mlp_to_dict(net)
                     for name, net in model.nets.items()}}


def model_from_dict(doc):
    """Rebuild a model from :func:`model_to_dict` output."""
    kind = doc.get("kind")
    nets = {name: mlp_from_dict(d) for name, d in doc.get("nets", {}).items()}
    try:
        if kind == "icode":
            f_names = sorted((k for k in nets if k.startswith('f')),
                             key=lambda s: int(s[1:]))
            f_nets = [nets[k] for k in f_names]
            k_nets = [nets[f"k{j}"] for j in range(int(doc["m"]))]
            return IcodeModel(f_nets, k_nets)
        if kind == "node":
            return NodeModel(nets["net"])
        if kind == "anode":
            return AnodeModel(nets["net"], nets.get("init"), int(doc["n"]))
        if kind == "cde":
            return CdeModel(nets["drift"], nets["control"], int(doc["m"]))
    except KeyError as err:
        raise ValueError(f"Model bundle is missing {err}") from err
    raise ValueError(f"Unknown model kind '{kind}' in bundle!")


def save_model(model, path):
    atomic_write(path, json.dumps(model_to_dict(model)))


def load_model(path):
    with open(path) as f:
        return model_from_dict(json.load(f))
