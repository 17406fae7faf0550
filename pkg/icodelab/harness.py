from __future__ import absolute_import, division, print_function
import copy
import hashlib
import io
import itertools
import json
import logging
import os
import os.path as op
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict, fields, replace

import numpy as np
import pandas as pd

from .integrate import (IntegrationDivergedError, TimeGrid, Trajectory,
                        atomic_write, rollout, rollout_loss_grad, simulate)
from .nn_core import adam_init, adam_step
from .truth_systems import (SampledSignal, add_input_noise, add_state_noise,
                            build_signal, get_system, signal_derivative)
from .vector_fields import MODEL_KINDS, init_model

__all__ = ["TASK_DEFAULTS", "TABLE_COLUMNS", "SWEEP_AXES",
           "TrainingDivergedError", "ExperimentConfig", "Metrics",
           "compute_metrics", "Dataset", "generate_dataset", "write_dataset",
           "TrainResult", "train", "evaluate", "RunResult", "run_experiment",
           "Comparison", "run_comparison", "sweep", "summarize_sweep",
           "save_json", "save_table"]

logger = logging.getLogger(__name__)

# Hyperparameters of the benchmark tasks
TASK_DEFAULTS = {
    "robot": dict(learning_rate=5e-3, epochs=100, width=50, depth=3,
                  trajectories=10, t0=0.0, t1=1.0, steps=100, split=71,
                  augment_dim=2),
    "dcdc": dict(learning_rate=5e-4, epochs=600, width=60, depth=3,
                 trajectories=10, t0=0.0, t1=1.0, steps=74, split=50,
                 augment_dim=2),
    "rigid_body": dict(learning_rate=1e-3, epochs=200, width=60, depth=2,
                       trajectories=10, t0=0.0, t1=1.0, steps=100, split=71,
                       augment_dim=2),
    "rf": dict(learning_rate=5e-4, epochs=800, width=60, depth=3,
               trajectories=40, t0=0.0, t1=1.0, steps=50, split=36,
               augment_dim=2),
    "glyco": dict(learning_rate=5e-4, epochs=500, width=60, depth=3,
                  trajectories=10, t0=0.0, t1=2.0, steps=100, split=71,
                  augment_dim=10),
    "swing": dict(learning_rate=5e-4, epochs=200, width=60, depth=3,
                  trajectories=128, t0=0.0, t1=5.0, steps=250, split=176,
                  batch_size=16, augment_dim=50),
    "heat1d": dict(learning_rate=2e-3, epochs=400, width=200, depth=3,
                   trajectories=5, t0=0.0, t1=0.018, steps=18, split=13,
                   augment_dim=200),
    "heat2d": dict(learning_rate=2e-3, epochs=400, width=200, depth=3,
                   trajectories=5, t0=0.0, t1=0.018, steps=18, split=13,
                   augment_dim=200),
}

TABLE_COLUMNS = ["model", "scenario", "mse", "mae", "rmse", "r2"]
SWEEP_AXES = ("width", "depth", "noise", "input_noise", "k_u", "du", "ramp",
              "seed")

# Counter-based random streams: default_rng([seed, index, purpose])
_PARAMS, _SIGNAL, _INIT, _STATE_NOISE, _INPUT_NOISE, _MODEL, _SHUFFLE = \
    range(7)

R2_CONVENTION = "pooled over trajectories, per-coordinate mean"


class TrainingDivergedError(RuntimeError):
    """Training produced non-finite states, losses or gradients."""
    def __init__(self, epoch, message=None):
        self.epoch = int(epoch)
        super(TrainingDivergedError, self).__init__(
            message or f"Training diverged in epoch {self.epoch}")


def _stream(*counters):
    return np.random.default_rng([int(c) for c in counters])


@dataclass
class ExperimentConfig(object):
    """One experiment: system, model, optimizer and data protocol.

    Build it with :meth:`from_dict` or :meth:`from_json`, which start from
    the per-task defaults in ``TASK_DEFAULTS``.
    """
    system: str
    model: str = "icode"
    models: list = None
    learning_rate: float = 1e-3
    epochs: int = 100
    width: int = 50
    depth: int = 3
    trajectories: int = 10
    t0: float = 0.0
    t1: float = 1.0
    steps: int = 100
    split: int = 71
    seed: int = 0
    batch_size: int = None
    augment_dim: int = 2
    icode_subnets: int = 1
    bias: bool = True
    eval_every: int = 10
    noise: dict = field(default_factory=lambda: {"state": 0.0,
                                                 "input": 0.0})
    signal: dict = None
    system_params: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    scenario: str = ""

    def __post_init__(self):
        self.validate()

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ValueError(f"Unknown config keys: {unknown}")
        if "system" not in doc:
            raise ValueError("Config needs a 'system'!")
        get_system(doc["system"])
        settings = dict(TASK_DEFAULTS.get(doc["system"], {}))
        noise = {"state": 0.0, "input": 0.0}
        noise.update(doc.pop("noise", None) or {})
        settings.update(doc)
        settings["noise"] = noise
        return cls(**settings)

    @classmethod
    def from_json(cls, path):
        with open(path) as f:
            try:
                doc = json.load(f)
            except json.JSONDecodeError as err:
                raise ValueError(f"{path} is not valid JSON: {err}") from err
        return cls.from_dict(doc)

    def validate(self):
        get_system(self.system)
        if self.model not in MODEL_KINDS:
            raise ValueError(f"Unknown model kind '{self.model}'!")
        if self.models is not None:
            bad = [k for k in self.models if k not in MODEL_KINDS]
            if bad or not self.models:
                raise ValueError(f"Invalid 'models' entry: {self.models}")
        if self.epochs <= 0:
            raise ValueError("'epochs' must be positive!")
        if self.width < 1 or self.depth < 1:
            raise ValueError("'width' and 'depth' must be at least 1!")
        if self.trajectories < 1:
            raise ValueError("'trajectories' must be at least 1!")
        if self.learning_rate <= 0:
            raise ValueError("'learning_rate' must be positive!")
        TimeGrid(self.t0, self.t1, self.steps)
        if not 2 <= self.split < self.steps + 1:
            raise ValueError(f"'split' must lie in [2, {self.steps}] for "
                             f"{self.steps + 1} grid points!")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("'batch_size' must be positive!")
        if self.eval_every < 1:
            raise ValueError("'eval_every' must be positive!")
        if self.augment_dim < 0 or self.icode_subnets < 1:
            raise ValueError("'augment_dim' must be >= 0 and "
                             "'icode_subnets' >= 1!")
        unknown = set(self.noise) - {"state", "input"}
        if unknown or min(self.noise.values(), default=0.0) < 0:
            raise ValueError(f"Invalid noise spec {self.noise}")
        bad_axes = sorted(set(self.sweep) - set(SWEEP_AXES))
        if bad_axes:
            raise ValueError(f"Unknown sweep axes {bad_axes}; choose from "
                             f"{SWEEP_AXES}")

    @property
    def grid(self):
        return TimeGrid(self.t0, self.t1, self.steps)

    def replace(self, **changes):
        return replace(self, **changes)

    def signal_spec(self):
        return copy.deepcopy(self.signal if self.signal is not None
                             else get_system(self.system).default_signal)

    def to_dict(self):
        return copy.deepcopy(asdict(self))


@dataclass(frozen=True)
class Metrics(object):
    mse: float
    mae: float
    rmse: float
    r2: float
    per_trajectory: tuple = ()

    def to_dict(self):
        return {"mse": self.mse, "mae": self.mae, "rmse": self.rmse,
                "r2": self.r2, "per_trajectory": list(self.per_trajectory)}


def _columns(a):
    a = np.asarray(a, dtype=np.float64)
    return a.reshape(-1, 1) if a.ndim == 1 else a.reshape(-1, a.shape[-1])


def compute_metrics(truth, prediction):
    """MSE, MAE, RMSE and R^2 of a prediction.

    Parameters
    ----------
    truth, prediction : ndarray
        Same shape; the last axis indexes state coordinates (a 1-D array is
        a single coordinate). Everything else is pooled.

    Returns
    -------
    metrics : Metrics
        R^2 = 1 - SS_res / SS_tot with SS_tot about the per-coordinate mean
        of the pooled truth.
    """
    truth, prediction = np.asarray(truth), np.asarray(prediction)
    if truth.shape != prediction.shape:
        raise ValueError(f"Truth {truth.shape} and prediction "
                         f"{prediction.shape} differ in shape!")
    if truth.size == 0:
        raise ValueError("Cannot score an empty prediction!")
    y, yhat = _columns(truth), _columns(prediction)
    resid = yhat - y
    mse = float(np.mean(resid ** 2))
    mae = float(np.mean(np.abs(resid)))
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - y.mean(axis=0)) ** 2))
    if ss_tot > 0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res == 0 else float('nan')
    return Metrics(mse, mae, float(np.sqrt(mse)), r2)


@dataclass
class Dataset(object):
    """Generated trajectories of one system.

    ``truth`` holds the clean rollouts, ``observed`` what the models are
    trained on (state noise and measured, possibly noisy, inputs).
    ``model_signals`` are the input samplers the models integrate with.
    """
    system: str
    params: object
    grid: TimeGrid
    split: int
    truth: list
    observed: list
    signals: list
    model_signals: list
    seed: int
    noise: dict

    @property
    def n(self):
        return self.truth[0].n

    @property
    def m(self):
        return self.truth[0].m

    def __len__(self):
        return len(self.truth)

    @property
    def fingerprint(self):
        digest = hashlib.sha256()
        for traj in self.truth + self.observed:
            digest.update(np.ascontiguousarray(traj.states).tobytes())
            digest.update(np.ascontiguousarray(traj.inputs).tobytes())
        return digest.hexdigest()

    def manifest(self):
        system = get_system(self.system)
        return {"system": self.system,
                "params": system.params_to_dict(self.params),
                "seed": self.seed,
                "trajectory_seeds": [[self.seed, i] for i in range(len(self))],
                "grid": self.grid.to_dict(), "split": self.split,
                "noise": dict(self.noise),
                "signals": [s.to_dict() for s in self.signals],
                "fingerprint": self.fingerprint}


def generate_dataset(cfg):
    """Roll the ground-truth system out from sampled initial conditions.

    Parameters
    ----------
    cfg : ExperimentConfig

    Returns
    -------
    dataset : Dataset
        Deterministic for a given config and seed.
    """
    system = get_system(cfg.system)
    params = system.make_params(dict(cfg.system_params),
                                _stream(cfg.seed, 0, _PARAMS))
    n, m = system.dims(params)
    grid = cfg.grid
    spec = cfg.signal_spec()
    p_state = float(cfg.noise.get("state", 0.0))
    p_input = float(cfg.noise.get("input", 0.0))
    truth, observed, signals, model_signals = [], [], [], []
    for i in range(cfg.trajectories):
        signal = build_signal(spec, m, _stream(cfg.seed, i, _SIGNAL),
                              cfg.t0, cfg.t1)
        x0 = system.sample_initial(_stream(cfg.seed, i, _INIT), params,
                                   signal, cfg.t0)
        clean = rollout(system.vector_field(params, signal), x0, signal, grid)
        noisy = add_state_noise(clean, p_state, [cfg.seed, i, _STATE_NOISE])
        if p_input > 0:
            measured = add_input_noise(clean.inputs, p_input,
                                       [cfg.seed, i, _INPUT_NOISE])
            model_signal = SampledSignal(grid.times, measured)
        else:
            measured, model_signal = clean.inputs, signal
        truth.append(clean)
        observed.append(Trajectory(grid, noisy.states, measured))
        signals.append(signal)
        model_signals.append(model_signal)
    logger.info("Dataset generated: %d trajectories of '%s' (n=%d, m=%d) on "
                "%d grid points", cfg.trajectories, cfg.system, n, m,
                grid.steps + 1)
    return Dataset(cfg.system, params, grid, cfg.split, truth, observed,
                   signals, model_signals, cfg.seed, dict(cfg.noise))


def write_dataset(dataset, out):
    """One CSV per trajectory plus ``manifest.json`` in `out`."""
    os.makedirs(out, exist_ok=True)
    files = []
    noisy = any(v > 0 for v in dataset.noise.values())
    for i, traj in enumerate(dataset.observed):
        fname = f"traj_{i:03d}.csv"
        traj.to_csv(op.join(out, fname))
        if noisy:
            dataset.truth[i].to_csv(op.join(out, 'clean', fname))
        files.append(fname)
    manifest = dataset.manifest()
    manifest["files"] = files
    save_json(op.join(out, 'manifest.json'), manifest)
    logger.info("Dataset saved in %s", out)
    return manifest


class _StackedSignal(object):
    """Samples several signals at once as a (batch, m) array."""

    def __init__(self, signals):
        self.signals = list(signals)

    def __call__(self, t):
        return np.stack([np.atleast_1d(s(t)) for s in self.signals])


class _StackedDerivative(object):
    def __init__(self, signals, grid):
        self.signals = list(signals)
        self.grid = grid

    def __call__(self, t):
        return np.stack([signal_derivative(s, t, self.grid)
                         for s in self.signals])


def _batch_inputs(dataset, idx, kind):
    sigs = [dataset.model_signals[i] for i in idx]
    derivative = _StackedDerivative(sigs, dataset.grid) \
        if kind == "cde" else None
    return _StackedSignal(sigs), derivative


def evaluate(model, dataset, split=None):
    """Score the free prediction rollout against the clean truth.

    The rollout starts from the observed state at grid index ``split - 1``
    and uses the known future inputs.

    Parameters
    ----------
    model : VectorFieldModel
    dataset : Dataset
    split : int or None
        Number of training grid points.
        Default: ``dataset.split``

    Returns
    -------
    metrics : Metrics
    """
    split = dataset.split if split is None else int(split)
    steps = dataset.grid.steps
    if not 2 <= split <= steps:
        raise ValueError(f"'split' must lie in [2, {steps}]!")
    if model.n != dataset.n:
        raise ValueError(f"Model state dimension {model.n} does not match "
                         f"the dataset ({dataset.n})!")
    idx = list(range(len(dataset)))
    signal, derivative = _batch_inputs(dataset, idx, model.kind)
    x0 = np.stack([dataset.observed[i].states[split - 1] for i in idx])
    segment = dataset.grid.segment(split - 1, steps)
    pred = simulate(model, x0, signal, segment, derivative)[1:]
    truth = np.stack([dataset.truth[i].states[split:] for i in idx], axis=1)
    metrics = compute_metrics(truth, pred)
    per_traj = tuple(compute_metrics(truth[:, b], pred[:, b]).mse
                     for b in range(len(idx)))
    return replace(metrics, per_trajectory=per_traj)


@dataclass
class TrainResult(object):
    model: object
    loss_curve: list
    checkpoints: list
    best_epoch: int


def _batches(cfg, count, epoch):
    size = cfg.batch_size or count
    if size >= count:
        return [list(range(count))]
    order = _stream(cfg.seed, epoch, _SHUFFLE).permutation(count)
    return [sorted(order[i:i + size].tolist())
            for i in range(0, count, size)]


def train(cfg, dataset, model=None):
    """Fit a model to the training segment of every trajectory.

    Adam runs on the exact rollout-MSE gradient. Every ``cfg.eval_every``
    epochs (and after the last one) the prediction MSE is evaluated and the
    best snapshot kept.

    Parameters
    ----------
    cfg : ExperimentConfig
    dataset : Dataset
    model : VectorFieldModel or None
        Starting point; a fresh ``cfg.model`` network by default.

    Returns
    -------
    result : TrainResult
        Best model, per-epoch training losses and the checkpoint records.
    """
    if cfg.epochs <= 0:
        raise ValueError("'epochs' must be positive!")
    if model is None:
        model = init_model(cfg.model, dataset.n, dataset.m, cfg.width,
                           cfg.depth, _stream(cfg.seed, 0, _MODEL),
                           augment_dim=cfg.augment_dim,
                           subnets=cfg.icode_subnets, bias=cfg.bias)
    if model.n != dataset.n:
        raise ValueError("Model and dataset state dimensions differ!")
    opt = {name: adam_init(net, cfg.learning_rate)
           for name, net in model.nets.items()}
    train_grid = dataset.grid.segment(0, dataset.split - 1)
    count = len(dataset)
    loss_curve, checkpoints = [], []
    best, best_mse, best_epoch = None, np.inf, 0
    for epoch in range(1, cfg.epochs + 1):
        epoch_loss = 0.0
        for idx in _batches(cfg, count, epoch):
            signal, derivative = _batch_inputs(dataset, idx, model.kind)
            target = np.stack([dataset.observed[i].states[:dataset.split]
                               for i in idx], axis=1)
            try:
                loss, grads = rollout_loss_grad(model, target[0], signal,
                                                train_grid, target,
                                                derivative=derivative)
            except IntegrationDivergedError as err:
                raise TrainingDivergedError(epoch) from err
            if not (np.isfinite(loss) and
                    all(g.is_finite() for g in grads.values())):
                raise TrainingDivergedError(epoch)
            nets = model.nets
            for name, g in grads.items():
                opt[name], nets[name] = adam_step(opt[name], nets[name], g)
            model = model.with_nets(nets)
            epoch_loss += loss * len(idx) / count
        loss_curve.append(epoch_loss)
        logger.debug("Epoch %d/%d: training MSE %.6g", epoch, cfg.epochs,
                     epoch_loss)
        if epoch % cfg.eval_every == 0 or epoch == cfg.epochs:
            try:
                pred_mse = evaluate(model, dataset).mse
            except IntegrationDivergedError:
                pred_mse = float('inf')
            checkpoints.append({"epoch": epoch, "train_mse": epoch_loss,
                                "prediction_mse": pred_mse})
            logger.info("Epoch %d/%d: training MSE %.6g, prediction MSE "
                        "%.6g", epoch, cfg.epochs, epoch_loss, pred_mse)
            if pred_mse < best_mse:
                best, best_mse, best_epoch = model, pred_mse, epoch
    if best is None:
        best, best_epoch = model, cfg.epochs
    return TrainResult(best, loss_curve, checkpoints, best_epoch)


@dataclass
class RunResult(object):
    config: ExperimentConfig
    model: object
    metrics: Metrics
    training: TrainResult
    fingerprint: str

    def to_dict(self):
        return {"config": self.config.to_dict(),
                "metrics": self.metrics.to_dict(),
                "r2_convention": R2_CONVENTION,
                "loss_curve": list(self.training.loss_curve),
                "checkpoints": list(self.training.checkpoints),
                "best_epoch": self.training.best_epoch,
                "dataset_fingerprint": self.fingerprint}


def run_experiment(cfg, dataset=None):
    """Generate (if needed), train and evaluate one model."""
    dataset = generate_dataset(cfg) if dataset is None else dataset
    result = train(cfg, dataset)
    metrics = evaluate(result.model, dataset)
    logger.info("%s on '%s': prediction MSE %.6g, R2 %.4f", cfg.model,
                cfg.system, metrics.mse, metrics.r2)
    return RunResult(cfg, result.model, metrics, result, dataset.fingerprint)


def _run_task(task):
    cfg, dataset = task
    return run_experiment(cfg, dataset)


def _parallel_map(fn, items, jobs):
    items = list(items)
    if jobs is None or jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))


def _row(model, scenario, metrics):
    return {"model": model, "scenario": scenario, "mse": metrics.mse,
            "mae": metrics.mae, "rmse": metrics.rmse, "r2": metrics.r2}


@dataclass
class Comparison(object):
    table: pd.DataFrame
    runs: list
    fingerprint: str


def run_comparison(cfg, dataset=None, jobs=1):
    """Train every model kind on one shared dataset.

    Parameters
    ----------
    cfg : ExperimentConfig
        ``cfg.models`` selects the kinds (all four by default).
    dataset : Dataset or None
    jobs : int
        Worker processes.
        Default: 1

    Returns
    -------
    comparison : Comparison
        ``table`` has one row per model with columns ``TABLE_COLUMNS``.
    """
    dataset = generate_dataset(cfg) if dataset is None else dataset
    kinds = list(cfg.models or MODEL_KINDS)
    tasks = [(cfg.replace(model=kind), dataset) for kind in kinds]
    runs = _parallel_map(_run_task, tasks, jobs)
    scenario = cfg.scenario or cfg.system
    table = pd.DataFrame([_row(r.config.model, scenario, r.metrics)
                          for r in runs], columns=TABLE_COLUMNS)
    return Comparison(table, runs, dataset.fingerprint)


def _with_amplitude(spec, du):
    """Rescale a piecewise signal so its largest level has size ``du``."""
    if du < 0:
        raise ValueError("'du' must be non-negative!")
    if spec.get("kind") == "random_piecewise":
        return dict(spec, span=du)
    if spec.get("kind") != "piecewise":
        raise ValueError("The 'du' axis needs a 'piecewise' or "
                         "'random_piecewise' signal!")
    values = np.asarray(spec["values"], dtype=np.float64)
    peak = np.max(np.abs(values))
    if peak == 0:
        raise ValueError("Cannot rescale an all-zero signal!")
    return dict(spec, values=(values * (du / peak)).tolist())


def _apply_axis(cfg, axis, value):
    if axis in ("width", "depth"):
        return cfg.replace(**{axis: int(value)})
    if axis == "seed":
        return cfg.replace(seed=int(value))
    if axis == "noise":
        return cfg.replace(noise=dict(cfg.noise, state=float(value)))
    if axis == "input_noise":
        return cfg.replace(noise=dict(cfg.noise, input=float(value)))
    spec = cfg.signal_spec()
    if axis == "ramp":
        spec["ramp"] = float(value)
        return cfg.replace(signal=spec)
    if axis == "k_u":
        spec = {"kind": "random_piecewise",
                "switch_times": spec.get("switch_times", [0.1, 0.4, 0.8]),
                "span": float(value), "tied": spec.get("tied", False),
                "ramp": spec.get("ramp", 0.0),
                "jitter": spec.get("jitter", 0.0)}
        return cfg.replace(signal=spec)
    if axis == "du":
        return cfg.replace(signal=_with_amplitude(spec, float(value)))
    raise ValueError(f"Unknown sweep axis '{axis}'!")


def _sweep_cell(task):
    cfg, kind, cell = task
    row = dict(cell)
    try:
        for axis, value in cell.items():
            cfg = _apply_axis(cfg, axis, value)
        cfg = cfg.replace(model=kind)
        metrics = run_experiment(cfg).metrics
        row.update(_row(kind, "", metrics), error="")
    except Exception as err:  # noqa: BLE001
        logger.warning("Sweep cell %s (%s) failed: %s", cell, kind, err)
        row.update(model=kind, mse=np.nan, mae=np.nan, rmse=np.nan,
                   r2=np.nan, error=f"{type(err).__name__}: {err}")
    return row


def sweep(cfg, jobs=1):
    """Full train and evaluate runs over the Cartesian product of axes.

    Parameters
    ----------
    cfg : ExperimentConfig
        ``cfg.sweep`` maps axis names (``SWEEP_AXES``) to value lists;
        every kind in ``cfg.models`` (or just ``cfg.model``) runs per cell.
    jobs : int
        Worker processes.
        Default: 1

    Returns
    -------
    grid : pandas.DataFrame
        ``TABLE_COLUMNS``, then one column per axis and an ``error`` column.
        Failed cells carry NaN metrics and the error message.
    """
    if not cfg.sweep:
        raise ValueError("The config declares no sweep axes!")
    axes = list(cfg.sweep)
    kinds = list(cfg.models or [cfg.model])
    cells = [dict(zip(axes, values))
             for values in itertools.product(*(cfg.sweep[a] for a in axes))]
    tasks = [(cfg, kind, cell) for cell in cells for kind in kinds]
    logger.info("Sweep over %s: %d cells x %d models", axes, len(cells),
                len(kinds))
    rows = _parallel_map(_sweep_cell, tasks, jobs)
    for row in rows:
        label = ",".join(f"{a}={row[a]}" for a in axes if a != "seed")
        row["scenario"] = label or cfg.scenario or cfg.system
    frame = pd.DataFrame(rows)
    return frame[TABLE_COLUMNS + axes + ["error"]]


def summarize_sweep(grid):
    """Median, mean and std of the metrics per model and scenario."""
    ok = grid[grid["error"] == ""]
    stats = ok.groupby(["model", "scenario"], sort=False)[
        ["mse", "rmse", "r2"]].agg(["median", "mean", "std"])
    stats.columns = [f"{metric}_{stat}" for metric, stat in stats.columns]
    stats["runs"] = ok.groupby(["model", "scenario"], sort=False).size()
    return stats.reset_index()


def save_json(path, doc):
    atomic_write(path, json.dumps(doc, indent=2, default=_json_default))
    logger.info("Results saved as %s", path)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def save_table(frame, path):
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False)
    atomic_write(path, buffer.getvalue())
    logger.info("Table saved as %s", path)
