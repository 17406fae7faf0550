from __future__ import absolute_import, division, print_function
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, asdict

import numpy as np

from .integrate import Trajectory

__all__ = ["StateDomainError", "InputSignal", "PiecewiseSignal",
           "SineSignal", "BoundarySignal", "SampledSignal", "build_signal",
           "sample_signal", "signal_derivative",
           "RobotParams", "ConverterParams", "RigidBodyParams", "RFParams",
           "GlycoParams", "SwingParams", "Heat1dParams", "Heat2dParams",
           "single_link_rhs", "dcdc_rhs", "rigid_body_rhs", "rf_rhs",
           "glyco_rhs", "swing_rhs", "heat1d_rhs", "heat2d_rhs",
           "swing_topology", "SystemSpec", "SYSTEMS", "get_system",
           "add_state_noise", "add_input_noise"]

logger = logging.getLogger(__name__)


class StateDomainError(ValueError):
    """State outside the domain where a system is defined."""


# --------------------------------------------------------------------------
# Input signals
# --------------------------------------------------------------------------

class InputSignal(ABC):
    """Vector-valued input u(t) of dimension ``dim``."""
    kind = None

    def __init__(self, dim):
        self.dim = int(dim)

    def __call__(self, t):
        return self.sample(t)

    @abstractmethod
    def sample(self, t):
        pass

    @abstractmethod
    def derivative(self, t):
        """Analytic du/dt (one-sided where u has kinks)."""

    @abstractmethod
    def to_dict(self):
        pass


class PiecewiseSignal(InputSignal):
    """Piecewise-constant input with optional linear transitions.

    ``values[0]`` holds before the first switch; at ``switch_times[i]`` the
    signal moves to ``values[i + 1]``. With ``ramp == 0`` the jump is
    right-continuous; with ``ramp > 0`` it is a straight line reaching the
    new value ``ramp`` seconds after the switch. A ramp that would run past
    the next switch is shortened to end there.
    """
    kind = "piecewise"

    def __init__(self, switch_times, values, ramp=0.0):
        switch_times = np.asarray(switch_times, dtype=np.float64).reshape(-1)
        values = np.array(values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or len(values) != len(switch_times) + 1:
            raise ValueError("'values' needs one entry more than "
                             "'switch_times'!")
        if np.any(np.diff(switch_times) <= 0):
            raise ValueError("'switch_times' must be strictly increasing!")
        if not np.all(np.isfinite(values)):
            raise ValueError("Signal values must be finite!")
        ramp = float(ramp)
        if ramp < 0:
            raise ValueError("'ramp' must be non-negative!")
        super(PiecewiseSignal, self).__init__(values.shape[1])
        self.switch_times = switch_times
        self.values = values
        self.ramp = ramp
        # Length of the transition after each switch
        gaps = np.append(np.diff(switch_times), np.inf)
        self.ramps = np.minimum(ramp, gaps)

    def _locate(self, t):
        idx = int(np.searchsorted(self.switch_times, t, side='right'))
        if idx == 0:
            return 0, 1.0, 0.0
        ramp = self.ramps[idx - 1]
        if ramp == 0:
            return idx, 1.0, 0.0
        frac = (t - self.switch_times[idx - 1]) / ramp
        if frac >= 1.0:
            return idx, 1.0, 0.0
        return idx, frac, 1.0 / ramp

    def sample(self, t):
        idx, frac, _ = self._locate(t)
        if idx == 0:
            return self.values[0].copy()
        prev, new = self.values[idx - 1], self.values[idx]
        return prev + frac * (new - prev)

    def derivative(self, t):
        idx, _, slope = self._locate(t)
        if idx == 0 or slope == 0.0:
            return np.zeros(self.dim)
        return slope * (self.values[idx] - self.values[idx - 1])

    def to_dict(self):
        return {"kind": self.kind, "switch_times": self.switch_times.tolist(),
                "values": self.values.tolist(), "ramp": self.ramp}


class SineSignal(InputSignal):
    """u(t) = offset + amplitude * sin(2 pi frequency t + phase)."""
    kind = "sine"

    def __init__(self, offset=0.0, amplitude=1.0, frequency=1.0, phase=0.0,
                 dim=1):
        super(SineSignal, self).__init__(dim)
        self.offset = np.broadcast_to(np.asarray(offset, float), (dim,))
        self.amplitude = np.broadcast_to(np.asarray(amplitude, float), (dim,))
        self.frequency = np.broadcast_to(np.asarray(frequency, float), (dim,))
        self.phase = np.broadcast_to(np.asarray(phase, float), (dim,))

    def sample(self, t):
        arg = 2 * np.pi * self.frequency * t + self.phase
        return self.offset + self.amplitude * np.sin(arg)

    def derivative(self, t):
        w = 2 * np.pi * self.frequency
        return self.amplitude * w * np.cos(w * t + self.phase)

    def to_dict(self):
        return {"kind": self.kind, "offset": self.offset.tolist(),
                "amplitude": self.amplitude.tolist(),
                "frequency": self.frequency.tolist(),
                "phase": self.phase.tolist()}


class BoundarySignal(InputSignal):
    """Heat boundary temperature a sin(2 pi f t) exp(-t / decay) + offset.

    The same value is applied on every channel (one per boundary).
    """
    kind = "boundary"

    def __init__(self, amplitude=2.0, frequency=1.0, decay=5.0, offset=0.1,
                 dim=2):
        super(BoundarySignal, self).__init__(dim)
        self.amplitude = float(amplitude)
        self.frequency = float(frequency)
        self.decay = float(decay)
        self.offset = float(offset)

    def sample(self, t):
        w = 2 * np.pi * self.frequency
        value = self.amplitude * np.sin(w * t) * np.exp(-t / self.decay)
        return np.full(self.dim, value + self.offset)

    def derivative(self, t):
        w = 2 * np.pi * self.frequency
        env = np.exp(-t / self.decay)
        value = self.amplitude * env * (w * np.cos(w * t) -
                                        np.sin(w * t) / self.decay)
        return np.full(self.dim, value)

    def to_dict(self):
        return {"kind": self.kind, "amplitude": self.amplitude,
                "frequency": self.frequency, "decay": self.decay,
                "offset": self.offset}


class SampledSignal(InputSignal):
    """Linear interpolation of samples, e.g. a noisy measured input."""
    kind = "sampled"

    def __init__(self, times, values):
        times = np.asarray(times, dtype=np.float64).reshape(-1)
        values = np.array(values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if len(times) != len(values) or len(times) < 2:
            raise ValueError("Need at least two samples and one value row "
                             "per sample time!")
        if np.any(np.diff(times) <= 0):
            raise ValueError("Sample times must be strictly increasing!")
        super(SampledSignal, self).__init__(values.shape[1])
        self.times = times
        self.values = values

    def sample(self, t):
        return np.array([np.interp(t, self.times, self.values[:, j])
                         for j in range(self.dim)])

    def derivative(self, t):
        k = int(np.clip(np.searchsorted(self.times, t, side='right') - 1,
                        0, len(self.times) - 2))
        dt = self.times[k + 1] - self.times[k]
        return (self.values[k + 1] - self.values[k]) / dt

    def to_dict(self):
        return {"kind": self.kind, "times": self.times.tolist(),
                "values": self.values.tolist()}


def _per_channel(values, m):
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[1] == 1 and m > 1:
        values = np.repeat(values, m, axis=1)
    if values.shape[1] != m:
        raise ValueError(f"Signal values have {values.shape[1]} channels, "
                         f"the system expects {m}!")
    return values


def _jittered(switch_times, jitter, rng, t0):
    """Shift every switch time by an independent U(-jitter, jitter)."""
    switch_times = np.asarray(switch_times, dtype=np.float64).reshape(-1)
    jitter = float(jitter)
    if jitter == 0.0 or len(switch_times) == 0:
        return switch_times
    if jitter < 0:
        raise ValueError("'jitter' must be non-negative!")
    if rng is None:
        raise ValueError("Randomized 'piecewise' signals need an rng!")
    gaps = np.diff(np.concatenate([[t0], switch_times]))
    if 2 * jitter >= np.min(gaps):
        raise ValueError("'jitter' may reorder the switch times!")
    return switch_times + rng.uniform(-jitter, jitter, len(switch_times))


def build_signal(spec, m, rng=None, t0=0.0, t1=1.0):
    """Construct an input signal from its JSON description.

    Parameters
    ----------
    spec : dict
        ``{"kind": ..., ...}``; see the configuration documentation for the
        fields of each kind.
    m : int
        Input dimension of the system.
    rng : numpy.random.Generator or None
        Needed by the 'random_piecewise' kind and by 'piecewise' signals
        with a 'spread' or 'jitter'.
    t0, t1 : float
        Experiment interval, used by 'heat_source' windows.

    Returns
    -------
    signal : InputSignal
    """
    kind = spec.get("kind")
    ramp = spec.get("ramp", 0.0)
    if kind == "piecewise":
        values = _per_channel(spec["values"], m)
        spread = float(spec.get("spread", 0.0))
        if not 0.0 <= spread <= 1.0:
            raise ValueError("'spread' must lie in [0, 1]!")
        if spread > 0:
            if rng is None:
                raise ValueError("Randomized 'piecewise' signals need an "
                                 "rng!")
            values = values * rng.uniform(1.0 - spread, 1.0,
                                          size=(len(values), 1))
        switches = _jittered(spec["switch_times"], spec.get("jitter", 0.0),
                             rng, t0)
        return PiecewiseSignal(switches, values, ramp)
    if kind == "random_piecewise":
        if rng is None:
            raise ValueError("'random_piecewise' signals need an rng!")
        span = float(spec.get("span", 1.0))
        switches = _jittered(spec["switch_times"], spec.get("jitter", 0.0),
                             rng, t0)
        channels = 1 if spec.get("tied", False) else m
        levels = rng.uniform(-span, span, size=(len(switches) + 1, channels))
        return PiecewiseSignal(switches, _per_channel(levels, m), ramp)
    if kind == "sine":
        return SineSignal(spec.get("offset", 0.0), spec.get("amplitude", 1.0),
                          spec.get("frequency", 1.0), spec.get("phase", 0.0),
                          dim=m)
    if kind == "boundary":
        return BoundarySignal(spec.get("amplitude", 2.0),
                              spec.get("frequency", 1.0),
                              spec.get("decay", 5.0),
                              spec.get("offset", 0.1), dim=m)
    if kind == "heat_source":
        level = float(spec.get("level", 10.0))
        windows = spec.get("windows", [[0.1, 0.4], [0.6, 0.9]])
        switches, values = [], [0.0]
        for start, stop in windows:
            switches += [t0 + start * (t1 - t0), t0 + stop * (t1 - t0)]
            values += [level, 0.0]
        return PiecewiseSignal(switches, _per_channel(values, m), ramp)
    if kind == "sampled":
        return SampledSignal(spec["times"], _per_channel(spec["values"], m))
    raise ValueError(f"Unknown signal kind '{kind}'!")


def sample_signal(sig, t):
    """u(t); piecewise signals are right-continuous at switch times."""
    return sig.sample(t)


def signal_derivative(sig, t, grid):
    """Slope of the linear interpolant of `sig` sampled on `grid`.

    The interval [t_k, t_(k+1)] containing `t` is used (the last interval
    for t at or beyond the end), so jumps become finite slopes one grid
    step wide.
    """
    dt = grid.dt
    k = int(np.clip(np.floor((t - grid.t0) / dt), 0, grid.steps - 1))
    return (np.asarray(sig(grid.time(k + 1)), dtype=np.float64) -
            np.asarray(sig(grid.time(k)), dtype=np.float64)) / dt


# --------------------------------------------------------------------------
# Ground-truth systems
# --------------------------------------------------------------------------

@dataclass
class RobotParams(object):
    M: float = 1.0
    m: float = 2.0
    L: float = 0.5
    g: float = 9.8


@dataclass
class ConverterParams(object):
    C1: float = 0.1
    C2: float = 0.2
    L_e: float = 0.5


@dataclass
class RigidBodyParams(object):
    I: tuple = (1.0, 2.0, 3.0)  # noqa: E741


@dataclass
class RFParams(object):
    alpha: float = 1.1


@dataclass
class GlycoParams(object):
    alpha1: float = 0.077884314
    theta14: float = 0.66
    theta16: float = 1.0
    beta1: float = 1.06270825
    mu11: float = 1.53
    mu12: float = -0.59
    mu17: float = 1.0
    alpha2: float = 0.585012402
    theta21: float = 0.95
    theta22: float = -0.41
    theta25: float = 0.32
    theta27: float = 0.62
    theta210: float = 0.38
    beta2: float = 0.0007934561
    mu22: float = 3.97
    mu23: float = -3.06
    mu28: float = 1.0
    alpha3: float = 0.0007934561
    theta32: float = 3.97
    theta33: float = -3.06
    theta38: float = 1.0
    beta3: float = 1.05880847
    mu33: float = 0.3
    mu39: float = 1.0
    enzymes: tuple = (1.0, 1.0, 1.0, 1.0)


@dataclass
class SwingParams(object):
    M: np.ndarray
    D: np.ndarray
    K: np.ndarray

    def to_dict(self):
        return {"M": np.asarray(self.M).tolist(),
                "D": np.asarray(self.D).tolist(),
                "K": np.asarray(self.K).tolist()}


@dataclass
class Heat1dParams(object):
    k: float = 1.0
    nodes: int = 50
    length: float = 10.0


@dataclass
class Heat2dParams(object):
    k: float = 1.0
    nx: int = 16
    ny: int = 16
    length: float = 10.0


def single_link_rhs(x, u, p):
    """Single-link robot, x = (angle, angular velocity), u = torque."""
    u = float(np.asarray(u).reshape(-1)[0])
    return np.array([x[1],
                     u / p.M - p.m * p.g * p.L * np.sin(x[0]) / (2 * p.M)])


def dcdc_rhs(x, u, p):
    """Idealized DC-DC converter, x = (v1, v2, i3), u = duty."""
    u = float(np.asarray(u).reshape(-1)[0])
    v1, v2, i3 = x
    return np.array([(1 - u) * i3 / p.C1,
                     u * i3 / p.C2,
                     (-(1 - u) * v1 - u * v2) / p.L_e])


def rigid_body_rhs(x, u, p):
    """Fully actuated rigid body, x = angular momentum, u = torque."""
    x = np.asarray(x, dtype=np.float64)
    omega = x / np.asarray(p.I, dtype=np.float64)
    return np.cross(x, omega) + np.asarray(u, dtype=np.float64)


def rf_rhs(x, gamma, p):
    """Rabinovich-Fabrikant equations with the drift gamma as input."""
    gamma = float(np.asarray(gamma).reshape(-1)[0])
    a, b, c = x
    return np.array([b * (c - 1 + a ** 2) + gamma * a,
                     a * (3 * c + 1 - a ** 2) + gamma * b,
                     -2 * c * (p.alpha + a * b)])


def glyco_rhs(x, u, p):
    """S-system of the glycolytic-glycogenolytic pathway.

    x holds the ten metabolite and enzyme levels, u drives x4, x5, x6.
    Enzymes x7..x10 stay constant.
    """
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0):
        raise StateDomainError("S-system states must be positive, got "
                               f"{x}")
    x1, x2, x3, x4, x5, x6, x7, x8, x9, x10 = x
    d = np.zeros(10)
    d[0] = (p.alpha1 * x4 ** p.theta14 * x6 ** p.theta16 -
            p.beta1 * x1 ** p.mu11 * x2 ** p.mu12 * x7 ** p.mu17)
    d[1] = (p.alpha2 * x1 ** p.theta21 * x2 ** p.theta22 *
            x5 ** p.theta25 * x7 ** p.theta27 * x10 ** p.theta210 -
            p.beta2 * x2 ** p.mu22 * x3 ** p.mu23 * x8 ** p.mu28)
    d[2] = (p.alpha3 * x2 ** p.theta32 * x3 ** p.theta33 * x8 ** p.theta38 -
            p.beta3 * x3 ** p.mu33 * x9 ** p.mu39)
    d[3:6] = np.asarray(u, dtype=np.float64).reshape(3)
    return d


def swing_rhs(state, P, p):
    """Swing equations of a generator network.

    state = (theta_1..theta_N, omega_1..omega_N), P = power inputs.
    """
    state = np.asarray(state, dtype=np.float64)
    N = len(p.M)
    theta, omega = state[:N], state[N:]
    coupling = np.sum(p.K * np.sin(theta[:, None] - theta[None, :]), axis=1)
    domega = (np.asarray(P, dtype=np.float64) - coupling -
              p.D * omega) / p.M
    return np.concatenate([omega, domega])


def heat1d_rhs(T, u, p, u_dot=None):
    """Method-of-lines heat equation on a 1-D rod.

    Interior nodes follow k (T_(i-1) - 2 T_i + T_(i+1)) / h^2 with the end
    values taken from the boundary input u. End nodes move with u_dot so a
    rollout started at u(0) tracks the boundary input.
    """
    T = np.asarray(T, dtype=np.float64)
    if len(T) < 3:
        raise ValueError("The 1-D heat grid needs at least 3 nodes!")
    u = np.asarray(u, dtype=np.float64).reshape(2)
    h = p.length / (len(T) - 1)
    full = T.copy()
    full[0], full[-1] = u
    d = np.zeros_like(T)
    d[1:-1] = p.k * (full[:-2] - 2 * full[1:-1] + full[2:]) / h ** 2
    if u_dot is not None:
        d[0], d[-1] = np.asarray(u_dot, dtype=np.float64).reshape(2)
    return d


def heat2d_rhs(T, Q, p):
    """5-point heat equation on a plate with a uniform source Q.

    The boundary ring is held at its initial temperature. Accepts the grid
    as (ny, nx) or flattened.
    """
    T = np.asarray(T, dtype=np.float64)
    flat = T.ndim == 1
    grid = T.reshape(p.ny, p.nx) if flat else T
    if grid.shape[0] < 3 or grid.shape[1] < 3:
        raise ValueError("The 2-D heat grid needs at least 3 x 3 nodes!")
    Q = float(np.asarray(Q).reshape(-1)[0])
    hx = p.length / (grid.shape[1] - 1)
    hy = p.length / (grid.shape[0] - 1)
    d = np.zeros_like(grid)
    c = grid[1:-1, 1:-1]
    d[1:-1, 1:-1] = p.k * (
        (grid[1:-1, 2:] - 2 * c + grid[1:-1, :-2]) / hx ** 2 +
        (grid[2:, 1:-1] - 2 * c + grid[:-2, 1:-1]) / hy ** 2) + Q
    return d.reshape(-1) if flat else d


def swing_topology(nodes=10, chords=((0, 5), (2, 7)), coupling=1.0,
                   edges=None):
    """Symmetric coupling matrix: a ring plus chords, or explicit edges."""
    if edges is None:
        edges = [(i, (i + 1) % nodes) for i in range(nodes)] + list(chords)
    K = np.zeros((nodes, nodes))
    for i, j in edges:
        if i == j:
            continue
        K[i, j] = K[j, i] = coupling
    return K


# --------------------------------------------------------------------------
# System registry
# --------------------------------------------------------------------------

def _constant_rhs(fn, params):
    def rhs(t, x, u):
        return fn(x, u, params)
    return rhs


def _robot_params(overrides, rng):
    return RobotParams(**overrides)


def _converter_params(overrides, rng):
    return ConverterParams(**overrides)


def _rigid_params(overrides, rng):
    return RigidBodyParams(**overrides)


def _rf_params(overrides, rng):
    return RFParams(**overrides)


def _glyco_params(overrides, rng):
    return GlycoParams(**overrides)


def _swing_params(overrides, rng):
    nodes = int(overrides.get("nodes", 10))
    K = swing_topology(nodes, coupling=float(overrides.get("coupling", 1.0)),
                       edges=overrides.get("edges"))
    M = np.asarray(overrides["M"], float) if "M" in overrides \
        else rng.uniform(0.3, 0.9, nodes)
    D = np.asarray(overrides["D"], float) if "D" in overrides \
        else rng.uniform(0.7, 1.3, nodes)
    return SwingParams(M, D, K)


def _heat1d_params(overrides, rng):
    return Heat1dParams(**overrides)


def _heat2d_params(overrides, rng):
    return Heat2dParams(**overrides)


def _uniform_init(low, high):
    def init(rng, params, signal, n, t0=0.0):
        return rng.uniform(low, high, n)
    return init


def _rigid_init(rng, params, signal, n, t0=0.0):
    phi = rng.uniform(0.5, 1.5)
    return np.array([np.cos(phi), 0.0, np.sin(phi)])


def _glyco_init(rng, params, signal, n, t0=0.0):
    return np.concatenate([rng.uniform(0.5, 1.5, 6),
                           np.asarray(params.enzymes, dtype=np.float64)])


def _swing_init(rng, params, signal, n, t0=0.0):
    N = len(params.M)
    return np.concatenate([rng.uniform(-0.5, 0.5, N), np.zeros(N)])


def _heat1d_init(rng, params, signal, n, t0=0.0):
    T = rng.uniform(-1.0, 1.0, n)
    T[0], T[-1] = signal(t0)
    return T


def _heat2d_init(rng, params, signal, n, t0=0.0):
    T = np.zeros((params.ny, params.nx))
    T[1:-1, 1:-1] = rng.uniform(-1.0, 1.0, (params.ny - 2, params.nx - 2))
    return T.reshape(-1)


def _heat1d_field(params, signal):
    def rhs(t, x, u):
        return heat1d_rhs(x, u, params, u_dot=signal.derivative(t))
    return rhs


@dataclass
class SystemSpec(object):
    """A benchmark system: dimensions, dynamics and data protocol."""
    name: str
    description: str
    rhs: object
    make_params: object
    initial_state: object
    default_signal: dict
    n: object
    m: object
    field_factory: object = None
    notes: list = field(default_factory=list)

    def dims(self, params):
        """(n, m) for a parameter record."""
        n = self.n(params) if callable(self.n) else self.n
        m = self.m(params) if callable(self.m) else self.m
        return int(n), int(m)

    def vector_field(self, params, signal=None):
        """``rhs(t, x, u)`` of the ground truth."""
        if self.field_factory is not None:
            return self.field_factory(params, signal)
        return _constant_rhs(self.rhs, params)

    def sample_initial(self, rng, params, signal, t0=0.0):
        """Initial state at ``t0``; boundary nodes take ``signal(t0)``."""
        n, _ = self.dims(params)
        return self.initial_state(rng, params, signal, n, t0)

    def params_to_dict(self, params):
        if hasattr(params, 'to_dict'):
            return params.to_dict()
        doc = asdict(params)
        return {k: list(v) if isinstance(v, tuple) else v
                for k, v in doc.items()}


SYSTEMS = {
    "robot": SystemSpec(
        "robot", "Single-link robot arm driven by a torque",
        single_link_rhs, _robot_params, _uniform_init(-1.0, 1.0),
        {"kind": "piecewise", "switch_times": [0.1, 0.4, 0.8],
         "values": [[0.0], [0.5], [0.0], [0.5]], "ramp": 0.05,
         "spread": 0.5, "jitter": 0.04},
        2, 1,
        notes=["The listed parameter q = 3.5e-4 is not used.",
               "Switch times and torque levels vary per trajectory."]),
    "dcdc": SystemSpec(
        "dcdc", "Idealized DC-to-DC converter driven by its duty cycle",
        dcdc_rhs, _converter_params, _uniform_init(-1.0, 1.0),
        {"kind": "piecewise", "switch_times": [0.1, 0.5, 0.8],
         "values": [[0.0], [1.0], [0.0], [1.0]], "ramp": 0.0},
        3, 1),
    "rigid_body": SystemSpec(
        "rigid_body", "Fully actuated rigid body (angular momentum)",
        rigid_body_rhs, _rigid_params, _rigid_init,
        {"kind": "random_piecewise", "switch_times": [0.1, 0.4, 0.8],
         "span": 1.0, "tied": True, "ramp": 0.0},
        3, 3),
    "rf": SystemSpec(
        "rf", "Rabinovich-Fabrikant equations with drifting gamma",
        rf_rhs, _rf_params, _uniform_init(-1.0, 1.0),
        {"kind": "piecewise", "switch_times": [0.2],
         "values": [[0.1], [1.0]], "ramp": 0.8},
        3, 1),
    "glyco": SystemSpec(
        "glyco", "Glycolytic-glycogenolytic pathway S-system",
        glyco_rhs, _glyco_params, _glyco_init,
        {"kind": "random_piecewise", "switch_times": [0.4, 1.0, 1.6],
         "span": 0.2, "tied": False, "ramp": 0.0},
        10, 3,
        notes=["Inputs drive x4, x5 and x6 as in the state equations."]),
    "swing": SystemSpec(
        "swing", "Swing equations of a 10-generator network",
        swing_rhs, _swing_params, _swing_init,
        {"kind": "piecewise", "switch_times": [0.5, 2.5, 4.5],
         "values": [[0.0], [1.0], [0.0], [1.0]], "ramp": 0.0},
        lambda p: 2 * len(p.M), lambda p: len(p.M)),
    "heat1d": SystemSpec(
        "heat1d", "1-D heat conduction with a boundary input",
        heat1d_rhs, _heat1d_params, _heat1d_init,
        {"kind": "boundary", "amplitude": 2.0, "frequency": 1.0,
         "decay": 5.0, "offset": 0.1},
        lambda p: p.nodes, 2, field_factory=_heat1d_field),
    "heat2d": SystemSpec(
        "heat2d", "2-D heat conduction with a windowed heat source",
        heat2d_rhs, _heat2d_params, _heat2d_init,
        {"kind": "heat_source", "level": 10.0,
         "windows": [[0.1, 0.4], [0.6, 0.9]]},
        lambda p: p.nx * p.ny, 1),
}


def get_system(name):
    """Look up a benchmark system by id."""
    try:
        return SYSTEMS[name]
    except KeyError:
        raise ValueError(f"Unknown system '{name}'; choose one of "
                         f"{sorted(SYSTEMS)}") from None


# --------------------------------------------------------------------------
# Noise
# --------------------------------------------------------------------------

def _gaussian_like(values, level, seed):
    if level < 0:
        raise ValueError("Noise level must be non-negative!")
    values = np.asarray(values, dtype=np.float64)
    if level == 0:
        return values.copy()
    rng = np.random.default_rng(seed)
    rms = np.sqrt(np.mean(values ** 2, axis=0))
    return values + rng.standard_normal(values.shape) * (level * rms)


def add_state_noise(traj, p, seed):
    """Gaussian state noise with std p times the per-coordinate RMS.

    Parameters
    ----------
    traj : Trajectory
    p : float
        Noise level (>= 0).
    seed : int or sequence of int

    Returns
    -------
    noisy : Trajectory
        Same grid and inputs; deterministic for a given seed.
    """
    return Trajectory(traj.grid, _gaussian_like(traj.states, p, seed),
                      traj.inputs)


def add_input_noise(samples, proportion, seed):
    """Gaussian measurement noise on input samples (rows = time)."""
    return _gaussian_like(samples, proportion, seed)
