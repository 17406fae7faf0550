from __future__ import absolute_import, division, print_function
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .integrate import simulate
from .nn_core import mlp_input_jacobian
from .vector_fields import IcodeModel

__all__ = ["ContractionReport", "ConstantMetric", "EnvelopeCheck",
           "model_jacobian", "symmetric_max_eig", "contraction_scan",
           "metric_transformed_max_eig", "check_contraction_envelope"]

logger = logging.getLogger(__name__)

CERTIFIED = "certified-on-samples"
VIOLATED = "violated"

SAMPLING_NOTE = ("Sample-based check over the given boxes: it can falsify "
                 "contraction but does not prove it for all (x, u).")


def model_jacobian(model, x, u):
    """State Jacobian of an ICODE right-hand side.

    Parameters
    ----------
    model : IcodeModel
    x : ndarray
        State vector (n,).
    u : ndarray
        Input vector (m,).

    Returns
    -------
    J : ndarray
        (n, n) matrix sum_i df_i/dx + sum_j u_j dk_j/dx.
    """
    if not isinstance(model, IcodeModel):
        raise ValueError("Contraction checks need an ICODE model!")
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    if x.shape != (model.n,) or u.shape != (model.m,):
        raise ValueError(f"Expected x of length {model.n} and u of length "
                         f"{model.m}, got {x.shape} and {u.shape}!")
    J = np.zeros((model.n, model.n))
    for net in model.f_nets:
        J = J + mlp_input_jacobian(net, x)
    for j, net in enumerate(model.k_nets):
        J = J + u[j] * mlp_input_jacobian(net, x)
    return J


def symmetric_max_eig(A, tol=1e-12, max_sweeps=100):
    """Largest eigenvalue of (A + A^T) / 2 by cyclic Jacobi rotations.

    Parameters
    ----------
    A : ndarray
        Square matrix.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm falls below
        ``tol * max(1, ||S||_F)``.
        Default: 1e-12
    max_sweeps : int
        Default: 100

    Returns
    -------
    lam : float
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("symmetric_max_eig needs a square matrix!")
    S = 0.5 * (A + A.T)
    n = S.shape[0]
    threshold = tol * max(1.0, np.linalg.norm(S))
    # Rotations smaller than this leave the result within tolerance
    negligible = threshold / n
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.triu(S, 1) ** 2))
        if off < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(S[p, q]) < negligible:
                    continue
                tau = (S[q, q] - S[p, p]) / (2.0 * S[p, q])
                t = np.copysign(1.0, tau) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                Sp, Sq = S[:, p].copy(), S[:, q].copy()
                S[:, p] = c * Sp - s * Sq
                S[:, q] = s * Sp + c * Sq
                Sp, Sq = S[p, :].copy(), S[q, :].copy()
                S[p, :] = c * Sp - s * Sq
                S[q, :] = s * Sp + c * Sq
    else:
        logger.warning("Jacobi iteration hit %d sweeps before converging",
                       max_sweeps)
    return float(np.max(np.diag(S)))


@dataclass(frozen=True)
class ConstantMetric(object):
    """Constant coordinate change L with metric M = L^T L."""
    L: np.ndarray

    def __post_init__(self):
        L = np.array(self.L, dtype=np.float64)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ValueError("The metric factor L must be square!")
        if not np.all(np.isfinite(L)):
            raise ValueError("The metric factor L must be finite!")
        cond = np.linalg.cond(L)
        if not np.isfinite(cond) or cond > 1.0 / np.finfo(float).eps:
            raise ValueError("The metric factor L must be invertible!")
        object.__setattr__(self, 'L', L)

    @property
    def M(self):
        return self.L.T @ self.L

    def transform(self, J):
        """R = L J L^-1."""
        LJ = self.L @ J
        return np.linalg.solve(self.L.T, LJ.T).T


def metric_transformed_max_eig(model, L, x, u):
    """lambda_max of the symmetric part of L J(x, u) L^-1."""
    if not isinstance(L, ConstantMetric):
        L = ConstantMetric(L)
    J = model_jacobian(model, x, u)
    if J.shape != L.L.shape:
        raise ValueError("Metric and model dimensions differ!")
    return symmetric_max_eig(L.transform(J))


@dataclass(frozen=True)
class ContractionReport(object):
    samples: int
    c_required: float
    worst_lambda: float
    witness_x: np.ndarray
    witness_u: np.ndarray
    verdict: str
    note: str = SAMPLING_NOTE

    @property
    def margin(self):
        return -self.worst_lambda

    @property
    def certified(self):
        return self.verdict == CERTIFIED

    def to_dict(self):
        return {"samples": self.samples, "c_required": self.c_required,
                "worst_lambda": self.worst_lambda,
                "witness_x": np.asarray(self.witness_x).tolist(),
                "witness_u": np.asarray(self.witness_u).tolist(),
                "verdict": self.verdict, "margin": self.margin,
                "note": self.note}


def _box(box, dim, name):
    box = np.asarray(box, dtype=np.float64).reshape(-1, 2) if dim else \
        np.zeros((0, 2))
    if box.shape != (dim, 2):
        raise ValueError(f"'{name}' needs one (low, high) pair per "
                         f"coordinate ({dim})!")
    if np.any(box[:, 1] < box[:, 0]):
        raise ValueError(f"'{name}' has an empty interval!")
    return box


def contraction_scan(model, state_box, input_box, samples, c_required,
                     seed=0, jobs=1):
    """Worst symmetric-part eigenvalue of J over Sobol samples of a box.

    Parameters
    ----------
    model : IcodeModel
    state_box, input_box : array-like
        (low, high) per state / input coordinate.
    samples : int
        Number of (x, u) points.
    c_required : float
        Contraction rate to certify.
    seed : int
        Scrambling seed of the Sobol sequence.
        Default: 0
    jobs : int
        Worker threads for the Jacobian evaluations.
        Default: 1

    Returns
    -------
    report : ContractionReport
        Violated iff the worst eigenvalue exceeds -c_required; the witness
        is the first sample attaining the worst value.
    """
    if samples <= 0:
        raise ValueError("'samples' must be positive!")
    xbox = _box(state_box, model.n, 'state_box')
    ubox = _box(input_box, model.m, 'input_box')
    bounds = np.vstack([xbox, ubox])
    if samples & (samples - 1):
        logger.warning("Sobol balance needs a power-of-two sample count, "
                       "got %d", samples)
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        q = qmc.Sobol(len(bounds), scramble=True, seed=seed).random(samples)
    points = bounds[:, 0] + q * (bounds[:, 1] - bounds[:, 0])
    xs, us = points[:, :model.n], points[:, model.n:]

    def worst(idx):
        return symmetric_max_eig(model_jacobian(model, xs[idx], us[idx]))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            lams = np.array(list(pool.map(worst, range(samples))))
    else:
        lams = np.array([worst(i) for i in range(samples)])
    i = int(np.argmax(lams))
    worst_lambda = float(lams[i])
    verdict = VIOLATED if worst_lambda > -c_required else CERTIFIED
    logger.info("Contraction scan over %d samples: worst lambda_max %.6g "
                "(%s for c = %g)", samples, worst_lambda, verdict, c_required)
    return ContractionReport(samples, float(c_required), worst_lambda,
                             xs[i].copy(), us[i].copy(), verdict)


@dataclass(frozen=True)
class EnvelopeCheck(object):
    times: np.ndarray
    distances: np.ndarray
    bounds: np.ndarray

    @property
    def holds(self):
        return bool(np.all(self.distances <= self.bounds * (1 + 1e-9)))


def check_contraction_envelope(model, x0, dx0, signal, grid, c, slack=0.1):
    """Compare two rollouts against ||dx(0)|| exp(-(c - slack c) t).

    Parameters
    ----------
    model : VectorFieldModel
    x0, dx0 : ndarray
        Reference initial state and perturbation.
    signal : callable or None
        Shared input.
    grid : TimeGrid
    c : float
        Certified contraction rate.
    slack : float
        Fraction of `c` given up to the envelope.
        Default: 0.1

    Returns
    -------
    check : EnvelopeCheck
    """
    x0 = np.asarray(x0, dtype=np.float64)
    pair = np.stack([x0, x0 + np.asarray(dx0, dtype=np.float64)])
    states = simulate(model, pair, signal, grid)
    distances = np.linalg.norm(states[:, 1] - states[:, 0], axis=-1)
    rate = c - slack * c
    bounds = distances[0] * np.exp(-rate * (grid.times - grid.t0))
    return EnvelopeCheck(grid.times, distances, bounds)
