from __future__ import absolute_import, division, print_function
import io
import logging
import os
import tempfile
from dataclasses import dataclass

import numpy as np
import pandas as pd

__all__ = ["IntegrationDivergedError", "TimeGrid", "Trajectory",
           "rk4_step", "rollout", "simulate", "rollout_loss_grad",
           "atomic_write"]

logger = logging.getLogger(__name__)


class IntegrationDivergedError(RuntimeError):
    """A Runge-Kutta step produced non-finite values."""
    def __init__(self, step, time, message=None):
        self.step = int(step)
        self.time = float(time)
        super(IntegrationDivergedError, self).__init__(
            message or f"Integration diverged at step {self.step} "
                       f"(t = {self.time:.6g})")


def _default_mode():
    """Permission bits open() would give a new file under the umask."""
    umask = os.umask(0)
    os.umask(umask)
    return 0o666 & ~umask


def atomic_write(path, text):
    """Write `text` to `path` through a temporary file and a rename."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', newline='') as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.chmod(tmp, _default_mode())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


@dataclass(frozen=True)
class TimeGrid(object):
    """Uniform grid t_k = t0 + k dt, k = 0..steps."""
    t0: float
    t1: float
    steps: int

    def __post_init__(self):
        object.__setattr__(self, 't0', float(self.t0))
        object.__setattr__(self, 't1', float(self.t1))
        if int(self.steps) != self.steps or self.steps <= 0:
            raise ValueError("'steps' must be a positive integer!")
        object.__setattr__(self, 'steps', int(self.steps))
        if not self.t1 > self.t0:
            raise ValueError("'t1' must be larger than 't0'!")

    @property
    def dt(self):
        return (self.t1 - self.t0) / self.steps

    @property
    def times(self):
        return self.t0 + np.arange(self.steps + 1) * self.dt

    def time(self, k):
        return self.t0 + k * self.dt

    def segment(self, start, stop):
        """Sub-grid between grid indices `start` and `stop`."""
        if not 0 <= start < stop <= self.steps:
            raise ValueError(f"Invalid grid segment [{start}, {stop}] for "
                             f"{self.steps} steps!")
        return TimeGrid(self.time(start), self.time(stop), stop - start)

    def to_dict(self):
        return {"t0": self.t0, "t1": self.t1, "steps": self.steps}


@dataclass(frozen=True)
class Trajectory(object):
    """States and inputs sampled on a time grid.

    ``states`` has shape (steps + 1, n), ``inputs`` shape (steps + 1, m).
    """
    grid: TimeGrid
    states: np.ndarray
    inputs: np.ndarray

    def __post_init__(self):
        states = np.array(self.states, dtype=np.float64, ndmin=2)
        inputs = np.asarray(self.inputs, dtype=np.float64)
        if inputs.ndim == 1:
            inputs = inputs.reshape(-1, 1) if inputs.size else \
                np.zeros((len(states), 0))
        npts = self.grid.steps + 1
        if len(states) != npts or len(inputs) != npts:
            raise ValueError(f"Trajectory needs {npts} samples for its grid, "
                             f"got {len(states)} states and {len(inputs)} "
                             f"inputs!")
        if not (np.all(np.isfinite(states)) and np.all(np.isfinite(inputs))):
            raise ValueError("Trajectory contains non-finite values!")
        object.__setattr__(self, 'states', states)
        object.__setattr__(self, 'inputs', inputs)

    @property
    def n(self):
        return self.states.shape[1]

    @property
    def m(self):
        return self.inputs.shape[1]

    def to_frame(self):
        """DataFrame with columns t, x1..xn, u1..um."""
        frame = pd.DataFrame({'t': self.grid.times})
        for i in range(self.n):
            frame[f'x{i + 1}'] = self.states[:, i]
        for j in range(self.m):
            frame[f'u{j + 1}'] = self.inputs[:, j]
        return frame

    def to_csv(self, path):
        buffer = io.StringIO()
        self.to_frame().to_csv(buffer, index=False)
        atomic_write(path, buffer.getvalue())

    @classmethod
    def from_csv(cls, path, grid=None):
        frame = pd.read_csv(path, float_precision='round_trip')
        xcols = [c for c in frame.columns if c.startswith('x')]
        ucols = [c for c in frame.columns if c.startswith('u')]
        if grid is None:
            t = frame['t'].values
            grid = TimeGrid(t[0], t[-1], len(t) - 1)
        return cls(grid, frame[xcols].values,
                   frame[ucols].values if ucols
                   else np.zeros((len(frame), 0)))


def _no_input(t):
    return np.zeros(0)


def _rk4_stages(rhs, t, x, dt, u_of_t):
    # Classical RK4; returns the new state and every stage (time, point,
    # input) so the reverse sweep can revisit them.
    half = 0.5 * dt
    u1, u2, u4 = u_of_t(t), u_of_t(t + half), u_of_t(t + dt)
    k1 = rhs(t, x, u1)
    x2 = x + half * k1
    k2 = rhs(t + half, x2, u2)
    x3 = x + half * k2
    k3 = rhs(t + half, x3, u2)
    x4 = x + dt * k3
    k4 = rhs(t + dt, x4, u4)
    x_new = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    stages = ((t, x, u1), (t + half, x2, u2), (t + half, x3, u2),
              (t + dt, x4, u4))
    return x_new, stages


def rk4_step(rhs, t, x, dt, u_of_t):
    """One classical Runge-Kutta-4 step.

    Parameters
    ----------
    rhs : callable
        ``rhs(t, x, u)`` returning dx/dt.
    t : float
        Start of the step.
    x : ndarray
        State at `t`.
    dt : float
        Step length (> 0).
    u_of_t : callable or None
        Input sampler, queried at t, t + dt/2 and t + dt.

    Returns
    -------
    x : ndarray
        State at t + dt.
    """
    if not dt > 0:
        raise ValueError("'dt' must be positive!")
    u_of_t = u_of_t if u_of_t is not None else _no_input
    with np.errstate(over='ignore', invalid='ignore'):
        x_new, _ = _rk4_stages(rhs, t, np.asarray(x, dtype=np.float64),
                               dt, u_of_t)
    if not np.all(np.isfinite(x_new)):
        raise IntegrationDivergedError(0, t)
    return x_new


def rollout(rhs, x0, signal, grid):
    """Iterate :func:`rk4_step` over a grid.

    Parameters
    ----------
    rhs : callable
        ``rhs(t, x, u)``.
    x0 : ndarray
        Initial state.
    signal : callable or None
        Input sampler u(t).
    grid : TimeGrid

    Returns
    -------
    traj : Trajectory
        States at every grid point and the inputs sampled there.
    """
    signal = signal if signal is not None else _no_input
    x = np.array(x0, dtype=np.float64)
    states = [x]
    dt = grid.dt
    with np.errstate(over='ignore', invalid='ignore'):
        for k in range(grid.steps):
            t = grid.time(k)
            x, _ = _rk4_stages(rhs, t, x, dt, signal)
            if not np.all(np.isfinite(x)):
                raise IntegrationDivergedError(k, t)
            states.append(x)
    inputs = np.array([np.atleast_1d(signal(t)) for t in grid.times])
    return Trajectory(grid, np.array(states), inputs)


def _model_forward(model, x0, signal, grid, derivative, keep_stages):
    signal = signal if signal is not None else _no_input
    dt = grid.dt
    z = model.initial_state(x0)
    zs = [z]
    history = []
    with np.errstate(over='ignore', invalid='ignore'):
        for k in range(grid.steps):
            t = grid.time(k)
            # The input derivative is constant on a grid interval
            du = derivative(t + 0.5 * dt) if derivative is not None else None

            def rhs(s, zz, u):
                return model.rhs(s, zz, u, du)

            z, stages = _rk4_stages(rhs, t, z, dt, signal)
            if not np.all(np.isfinite(z)):
                raise IntegrationDivergedError(k, t)
            zs.append(z)
            if keep_stages:
                history.append((stages, du))
    return np.stack(zs), history


def simulate(model, x0, signal, grid, derivative=None):
    """Roll a learnable model out over `grid`.

    Parameters
    ----------
    model : VectorFieldModel
    x0 : ndarray
        Initial physical state(s), shape (n,) or (batch, n).
    signal : callable or None
        Input sampler; may return (m,) or (batch, m).
    grid : TimeGrid
    derivative : callable or None
        Input-derivative sampler (CDE models).

    Returns
    -------
    states : ndarray
        Observed states, shape (steps + 1, n) or (steps + 1, batch, n).
    """
    zs, _ = _model_forward(model, x0, signal, grid, derivative, False)
    obs = model.observe(zs)
    return obs[:, 0, :] if np.ndim(x0) == 1 else obs


def _accumulate(total, grads):
    for name, g in grads.items():
        total[name] = total[name] + g
    return total


def rollout_loss_grad(model, x0, signal, grid, target, weights=None,
                      derivative=None):
    """Rollout MSE and its exact gradient through the RK4 recursion.

    Parameters
    ----------
    model : VectorFieldModel
    x0 : ndarray
        Initial state(s), (n,) or (batch, n).
    signal : callable or None
        Input sampler for the stage times.
    grid : TimeGrid
    target : Trajectory or ndarray
        Target states on the same grid, (steps + 1, n) or
        (steps + 1, batch, n).
    weights : ndarray or None
        Per-grid-point weights of length steps + 1. By default every point
        but the fixed initial one has weight 1.
    derivative : callable or None
        Input-derivative sampler (CDE models).

    Returns
    -------
    loss : float
        sum_k w_k ||x_k - target_k||^2 / (sum_k w_k * batch * n).
    grads : dict
        Network name -> ParamGradient of the loss.
    """
    states = target.states if isinstance(target, Trajectory) else target
    states = np.asarray(states, dtype=np.float64)
    if states.ndim == 2:
        states = states[:, None, :]
    if states.shape[0] != grid.steps + 1:
        raise ValueError(f"Target has {states.shape[0]} samples but the grid "
                         f"has {grid.steps + 1} points!")
    if isinstance(target, Trajectory) and target.grid.steps != grid.steps:
        raise ValueError("Target trajectory lives on a different grid!")
    if weights is None:
        weights = np.ones(grid.steps + 1)
        weights[0] = 0.0
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (grid.steps + 1,):
        raise ValueError("'weights' needs one entry per grid point!")

    zs, history = _model_forward(model, x0, signal, grid, derivative, True)
    obs = model.observe(zs)
    if obs.shape != states.shape:
        raise ValueError(f"Target shape {states.shape} does not match the "
                         f"rollout {obs.shape}!")
    batch, n = states.shape[1], states.shape[2]
    norm = weights.sum() * batch * n
    resid = obs - states
    loss = float(np.sum(weights[:, None, None] * resid ** 2) / norm)

    # Reverse sweep over the discrete recursion
    obs_cot = 2.0 * weights[:, None, None] * resid / norm
    dt = grid.dt
    half = 0.5 * dt
    grads = model.zero_grads()
    adj = np.zeros_like(zs[-1])
    adj[:, :n] += obs_cot[-1]
    for k in range(grid.steps - 1, -1, -1):
        stages, du = history[k]
        (t1, z1, u1), (t2, z2, u2), (t3, z3, u3), (t4, z4, u4) = stages
        g, bar4 = model.rhs_vjp(t4, z4, u4, du, adj * (dt / 6.0))
        grads = _accumulate(grads, g)
        g, bar3 = model.rhs_vjp(t3, z3, u3, du,
                                adj * (dt / 3.0) + dt * bar4)
        grads = _accumulate(grads, g)
        g, bar2 = model.rhs_vjp(t2, z2, u2, du,
                                adj * (dt / 3.0) + half * bar3)
        grads = _accumulate(grads, g)
        g, bar1 = model.rhs_vjp(t1, z1, u1, du,
                                adj * (dt / 6.0) + half * bar2)
        grads = _accumulate(grads, g)
        adj = adj + bar1 + bar2 + bar3 + bar4
        adj[:, :n] += obs_cot[k]
    grads = _accumulate(grads, model.initial_state_vjp(x0, adj))
    return loss, grads
