from __future__ import absolute_import, division, print_function
import json
from dataclasses import dataclass

import numpy as np

__all__ = ["softplus", "sigmoid", "MLP", "ParamGradient", "AdamState",
           "init_mlp", "mlp_forward", "mlp_vjp", "mlp_input_jacobian",
           "adam_init", "adam_step", "param_count",
           "mlp_to_dict", "mlp_from_dict", "mlp_to_json", "mlp_from_json"]

# Above this argument softplus is evaluated as x + log1p(exp(-x))
SOFTPLUS_THRESHOLD = 20.0


def softplus(x):
    """Overflow-safe Softplus, log(1 + exp(x)).

    Parameters
    ----------
    x : float or ndarray
        Finite input.

    Returns
    -------
    y : float or ndarray
        Same shape as `x`, strictly positive.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.where(x > SOFTPLUS_THRESHOLD,
                 x + np.log1p(np.exp(-np.abs(x))),
                 np.log1p(np.exp(np.minimum(x, SOFTPLUS_THRESHOLD))))
    return y[()] if y.ndim == 0 else y


def sigmoid(x):
    """Logistic function, the derivative of :func:`softplus`."""
    x = np.asarray(x, dtype=np.float64)
    # exp of a non-positive argument never overflows
    e = np.exp(-np.abs(x))
    y = np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return y[()] if y.ndim == 0 else y


@dataclass(frozen=True)
class MLP(object):
    """Dense network: affine layers with Softplus between them.

    ``weights[l]`` has shape (out_l, in_l); ``biases[l]`` has shape (out_l,)
    or is None. Softplus follows every layer except the last one.
    """
    weights: tuple
    biases: tuple
    activation: str = "softplus"

    def __post_init__(self):
        weights = tuple(np.array(w, dtype=np.float64, ndmin=2)
                        for w in self.weights)
        if len(weights) == 0:
            raise ValueError("An MLP needs at least one layer!")
        biases = tuple(self.biases) if self.biases is not None \
            else (None,) * len(weights)
        if len(biases) != len(weights):
            raise ValueError("MLP needs one bias entry (or None) per layer!")
        biases = tuple(None if b is None else
                       np.array(b, dtype=np.float64).reshape(-1)
                       for b in biases)
        for l, (w, b) in enumerate(zip(weights, biases)):
            if w.ndim != 2:
                raise ValueError(f"Layer {l} weights must be 2-dimensional!")
            if l > 0 and w.shape[1] != weights[l - 1].shape[0]:
                raise ValueError(
                    f"Layer {l} expects {w.shape[1]} inputs but layer "
                    f"{l - 1} emits {weights[l - 1].shape[0]}!")
            if b is not None and b.shape[0] != w.shape[0]:
                raise ValueError(f"Layer {l} bias length does not match!")
            if not np.all(np.isfinite(w)) or \
                    (b is not None and not np.all(np.isfinite(b))):
                raise ValueError(f"Layer {l} has non-finite entries!")
        if self.activation != "softplus":
            raise ValueError("Only the 'softplus' activation is supported!")
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'biases', biases)

    @property
    def in_dim(self):
        return self.weights[0].shape[1]

    @property
    def out_dim(self):
        return self.weights[-1].shape[0]

    @property
    def depth(self):
        """Number of affine layers."""
        return len(self.weights)


@dataclass(frozen=True)
class ParamGradient(object):
    """Partials of a scalar loss, shaped like the layers of an MLP."""
    weights: tuple
    biases: tuple

    @classmethod
    def zeros_like(cls, net):
        return cls(tuple(np.zeros_like(w) for w in net.weights),
                   tuple(None if b is None else np.zeros_like(b)
                         for b in net.biases))

    def __add__(self, other):
        return ParamGradient(
            tuple(a + b for a, b in zip(self.weights, other.weights)),
            tuple(None if a is None else a + b
                  for a, b in zip(self.biases, other.biases)))

    def scale(self, factor):
        return ParamGradient(
            tuple(factor * w for w in self.weights),
            tuple(None if b is None else factor * b for b in self.biases))

    def arrays(self):
        """All gradient arrays in layer order (weights before biases)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            if b is not None:
                out.append(b)
        return out

    def is_finite(self):
        return all(np.all(np.isfinite(a)) for a in self.arrays())


def _check_congruent(net, grads):
    if len(net.weights) != len(grads.weights):
        raise ValueError("Gradient and network have different layer counts!")
    for l, (w, g) in enumerate(zip(net.weights, grads.weights)):
        if w.shape != g.shape:
            raise ValueError(f"Layer {l} gradient shape {g.shape} does not "
                             f"match weights {w.shape}!")
    for l, (b, g) in enumerate(zip(net.biases, grads.biases)):
        if (b is None) != (g is None) or \
                (b is not None and b.shape != g.shape):
            raise ValueError(f"Layer {l} bias gradient does not match!")


def init_mlp(sizes, rng, bias=True, scale=1.0):
    """Random MLP with uniform initialization.

    Parameters
    ----------
    sizes : sequence of int
        Layer widths, input first and output last, e.g. ``[n, 50, 50, n]``.
    rng : numpy.random.Generator
        Source of randomness.
    bias : boolean
        Whether layers carry a bias vector.
        Default: True
    scale : float
        Multiplies every initial parameter.
        Default: 1.0

    Returns
    -------
    net : MLP
        Entries drawn from U(-a, a) with a = sqrt(1 / fan_in).
    """
    sizes = [int(s) for s in sizes]
    if len(sizes) < 2 or min(sizes) < 1:
        raise ValueError("'sizes' needs an input and an output width >= 1!")
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        a = np.sqrt(1.0 / fan_in)
        weights.append(scale * rng.uniform(-a, a, size=(fan_out, fan_in)))
        biases.append(scale * rng.uniform(-a, a, size=fan_out)
                      if bias else None)
    return MLP(weights, biases)


def _check_input(net, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[-1] != net.in_dim:
        raise ValueError(f"Network expects inputs of dimension {net.in_dim}, "
                         f"got shape {x.shape}!")
    return x


def _forward_memory(net, x):
    # Keeps every layer input and pre-activation for the backward sweep
    inputs, preacts = [], []
    a = x
    last = net.depth - 1
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        inputs.append(a)
        z = a @ w.T
        if b is not None:
            z = z + b
        preacts.append(z)
        a = softplus(z) if l < last else z
    return a, inputs, preacts


def mlp_forward(net, x):
    """Evaluate the network.

    Parameters
    ----------
    net : MLP
    x : ndarray
        Shape (in_dim,) or batched (batch, in_dim).

    Returns
    -------
    y : ndarray
        Shape (out_dim,) or (batch, out_dim). The last layer is affine.
    """
    x = _check_input(net, x)
    y, _, _ = _forward_memory(net, x)
    return y


def mlp_vjp(net, x, cotangent):
    """Vector-Jacobian product of the network.

    Parameters
    ----------
    net : MLP
    x : ndarray
        Shape (in_dim,) or (batch, in_dim).
    cotangent : ndarray
        Same leading shape as `x`, trailing dimension out_dim.

    Returns
    -------
    grads : ParamGradient
        d<cotangent, f(x)>/d(params), summed over the batch.
    x_grad : ndarray
        d<cotangent, f(x)>/dx, shaped like `x`.
    """
    x = _check_input(net, x)
    cot = np.asarray(cotangent, dtype=np.float64)
    if cot.shape != x.shape[:-1] + (net.out_dim,):
        raise ValueError(f"Cotangent shape {cot.shape} does not match the "
                         f"output of the network for inputs {x.shape}!")
    batched = x.ndim == 2
    _, inputs, preacts = _forward_memory(net, x)
    g = cot
    dws, dbs = [None] * net.depth, [None] * net.depth
    for l in range(net.depth - 1, -1, -1):
        a_in = inputs[l]
        if batched:
            dws[l] = g.T @ a_in
            db = g.sum(axis=0)
        else:
            dws[l] = np.outer(g, a_in)
            db = g.copy()
        dbs[l] = db if net.biases[l] is not None else None
        g = g @ net.weights[l]
        if l > 0:
            g = g * sigmoid(preacts[l - 1])
    return ParamGradient(tuple(dws), tuple(dbs)), g


def mlp_input_jacobian(net, x):
    """Jacobian of the outputs with respect to a single input vector.

    Row i is the input gradient of output i, obtained with :func:`mlp_vjp`
    and the basis cotangent e_i.
    """
    x = _check_input(net, x)
    if x.ndim != 1:
        raise ValueError("mlp_input_jacobian takes a single input vector!")
    basis = np.eye(net.out_dim)
    rows = [mlp_vjp(net, x, basis[i])[1] for i in range(net.out_dim)]
    return np.vstack(rows)


def param_count(net):
    """Number of scalar parameters in the network."""
    return int(sum(w.size for w in net.weights) +
               sum(b.size for b in net.biases if b is not None))


@dataclass(frozen=True)
class AdamState(object):
    """Moment accumulators and hyperparameters of Adam for one network."""
    m: ParamGradient
    v: ParamGradient
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_init(net, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
    """Fresh Adam state for `net`."""
    zeros = ParamGradient.zeros_like(net)
    return AdamState(zeros, zeros, 0, float(lr), float(beta1),
                     float(beta2), float(eps))


def adam_step(state, params, grads):
    """One bias-corrected Adam update.

    Parameters
    ----------
    state : AdamState
    params : MLP
    grads : ParamGradient
        Gradient of the loss at `params`.

    Returns
    -------
    state : AdamState
        Updated accumulators, step counter incremented by one.
    params : MLP
        Updated network; the inputs are left untouched.
    """
    _check_congruent(params, grads)
    _check_congruent(params, state.m)
    b1, b2 = state.beta1, state.beta2
    step = state.step + 1

    def moment1(m, g):
        return b1 * m + (1 - b1) * g

    def moment2(v, g):
        return b2 * v + (1 - b2) * g ** 2

    m = _zip_grads(state.m, grads, moment1)
    v = _zip_grads(state.v, grads, moment2)
    c1 = 1 - b1 ** step
    c2 = 1 - b2 ** step

    def update(p, mv):
        m_l, v_l = mv
        return p - state.lr * (m_l / c1) / (np.sqrt(v_l / c2) + state.eps)

    ws = [update(p, (m_l, v_l))
          for p, m_l, v_l in zip(params.weights, m.weights, v.weights)]
    bs = [None if p is None else update(p, (m_l, v_l))
          for p, m_l, v_l in zip(params.biases, m.biases, v.biases)]
    new_state = AdamState(m, v, step, state.lr, b1, b2, state.eps)
    return new_state, MLP(ws, bs, params.activation)


def _zip_grads(a, b, fn):
    return ParamGradient(
        tuple(fn(x, y) for x, y in zip(a.weights, b.weights)),
        tuple(None if x is None else fn(x, y)
              for x, y in zip(a.biases, b.biases)))


def mlp_to_dict(net):
    """JSON-ready document ``{"layers": [{"w": ..., "b": ...}], ...}``."""
    layers = [{"w": w.tolist(), "b": None if b is None else b.tolist()}
              for w, b in zip(net.weights, net.biases)]
    return {"layers": layers, "activation": net.activation}


def mlp_from_dict(doc):
    """Rebuild an MLP from :func:`mlp_to_dict` output."""
    try:
        layers = doc["layers"]
        weights = [np.array(layer["w"], dtype=np.float64, ndmin=2)
                   for layer in layers]
        biases = [None if layer.get("b") is None
                  else np.array(layer["b"], dtype=np.float64)
                  for layer in layers]
    except (KeyError, TypeError) as err:
        raise ValueError(f"Malformed MLP document: {err}") from err
    return MLP(weights, biases, doc.get("activation", "softplus"))


def mlp_to_json(net):
    # json writes floats with repr, the shortest round-trip decimal form
    return json.dumps(mlp_to_dict(net))


def mlp_from_json(text):
    return mlp_from_dict(json.loads(text))
