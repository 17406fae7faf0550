"""Command-line entry point: ``icodelab <command> --config PATH``."""
from __future__ import absolute_import, division, print_function
import argparse
import json
import logging
import os
import os.path as op
import sys
from dataclasses import dataclass

from .contraction import contraction_scan
from .harness import (ExperimentConfig, evaluate, generate_dataset,
                      run_comparison, run_experiment, save_json, save_table,
                      summarize_sweep, sweep, write_dataset)
from .vector_fields import load_model, save_model

__all__ = ["COMMANDS", "Command", "parse_args", "execute", "main"]

logger = logging.getLogger(__name__)

COMMANDS = ("generate", "train", "eval", "compare", "sweep",
            "contraction-check")

JOBS_ENV = "ICODE_LAB_JOBS"

DATA_DIR = op.join(op.dirname(op.abspath(__file__)), 'data')


@dataclass(frozen=True)
class Command(object):
    action: str
    config: str
    out: str = "runs"
    seed: int = None
    jobs: int = 1
    verbosity: str = "normal"
    model: str = None


def _resolve_config(path):
    """A config path, or the bare name of a config in icodelab/data."""
    if op.isfile(path):
        return op.abspath(path)
    if op.dirname(path):
        return None
    shipped = op.join(DATA_DIR, path)
    if op.isfile(shipped):
        return shipped
    return None


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', required=True, metavar='PATH',
                        help="experiment config JSON (or the name of a "
                             "shipped config)")
    common.add_argument('--out', default='runs', metavar='DIR',
                        help="output directory (default: runs)")
    common.add_argument('--seed', type=int, default=None,
                        help="override the config seed")
    common.add_argument('--jobs', type=int, default=None,
                        help=f"worker processes (default: ${JOBS_ENV} or "
                             f"the CPU count)")
    volume = common.add_mutually_exclusive_group()
    volume.add_argument('--quiet', action='store_true',
                        help="only log warnings and errors")
    volume.add_argument('--verbose', action='store_true',
                        help="log per-epoch details")

    parser = argparse.ArgumentParser(
        prog='icodelab',
        description="Train and compare input-affine neural ODEs on "
                    "benchmark dynamical systems.")
    sub = parser.add_subparsers(dest='action', metavar='COMMAND')
    sub.required = True
    helps = {"generate": "generate a dataset",
             "train": "train the configured model",
             "eval": "evaluate a saved model bundle",
             "compare": "train and compare ICODE, CDE, NODE and ANODE",
             "sweep": "run the configured sweep grid",
             "contraction-check": "sample-based contraction check of an "
                                  "ICODE bundle"}
    for name in COMMANDS:
        cmd = sub.add_parser(name, parents=[common], help=helps[name])
        if name in ("eval", "contraction-check"):
            cmd.add_argument('--model', metavar='PATH', default=None,
                             help="model bundle JSON")
    return parser


def parse_args(argv=None):
    """Parse command-line arguments into a :class:`Command`.

    Usage errors exit with status 2 and ``--help`` with status 0, both
    through ``SystemExit``.
    """
    parser = _build_parser()
    args = parser.parse_args(argv)
    config = _resolve_config(args.config)
    if config is None:
        parser.error(f"config file '{args.config}' does not exist")
    jobs = args.jobs
    if jobs is None:
        env = os.environ.get(JOBS_ENV)
        try:
            jobs = int(env) if env else (os.cpu_count() or 1)
        except ValueError:
            parser.error(f"${JOBS_ENV} must be an integer, got '{env}'")
    if jobs < 1:
        parser.error("--jobs must be at least 1")
    verbosity = "quiet" if args.quiet else \
        "verbose" if args.verbose else "normal"
    return Command(args.action, config, args.out, args.seed, jobs,
                   verbosity, getattr(args, 'model', None))


def _configure_logging(verbosity):
    level = {"quiet": logging.WARNING, "normal": logging.INFO,
             "verbose": logging.DEBUG}[verbosity]
    logging.basicConfig(level=level, force=True,
                        format="%(asctime)s %(name)s %(levelname)s: "
                               "%(message)s")


def _load_settings(cmd):
    if cmd.action == "contraction-check":
        with open(cmd.config) as f:
            doc = json.load(f)
        if "state_box" not in doc:
            raise ValueError("contraction-check config needs a "
                             "'state_box'")
        return doc
    cfg = ExperimentConfig.from_json(cmd.config)
    if cmd.seed is not None:
        cfg = cfg.replace(seed=cmd.seed)
    return cfg


def _generate(cmd, cfg):
    dataset = generate_dataset(cfg)
    write_dataset(dataset, cmd.out)
    return (f"generate: {len(dataset)} trajectories of '{cfg.system}' "
            f"-> {cmd.out}")


def _train(cmd, cfg):
    result = run_experiment(cfg)
    save_model(result.model, op.join(cmd.out, 'model.json'))
    save_json(op.join(cmd.out, 'run.json'), result.to_dict())
    return (f"train: {cfg.model} on '{cfg.system}' prediction MSE "
            f"{result.metrics.mse:.6g}, R2 {result.metrics.r2:.4f}")


def _eval(cmd, cfg):
    if cmd.model is None:
        raise ValueError("eval needs --model")
    model = load_model(cmd.model)
    dataset = generate_dataset(cfg)
    metrics = evaluate(model, dataset)
    save_json(op.join(cmd.out, 'metrics.json'),
              {"config": cfg.to_dict(), "model": cmd.model,
               "metrics": metrics.to_dict(),
               "dataset_fingerprint": dataset.fingerprint})
    return f"eval: prediction MSE {metrics.mse:.6g}, R2 {metrics.r2:.4f}"


def _compare(cmd, cfg):
    comparison = run_comparison(cfg, jobs=cmd.jobs)
    save_table(comparison.table, op.join(cmd.out, 'comparison.csv'))
    for run in comparison.runs:
        save_json(op.join(cmd.out, f'run_{run.config.model}.json'),
                  run.to_dict())
    best = comparison.table.loc[comparison.table['mse'].idxmin(), 'model']
    return (f"compare: {len(comparison.table)} models on '{cfg.system}', "
            f"lowest prediction MSE: {best}")


def _sweep(cmd, cfg):
    grid = sweep(cfg, jobs=cmd.jobs)
    save_table(grid, op.join(cmd.out, 'sweep.csv'))
    save_table(summarize_sweep(grid), op.join(cmd.out, 'sweep_summary.csv'))
    failed = int((grid['error'] != "").sum())
    return f"sweep: {len(grid)} runs, {failed} failed"


def _contraction_check(cmd, doc):
    bundle = cmd.model or doc.get("model")
    if bundle is None:
        raise ValueError("contraction-check needs a model bundle")
    if not op.isabs(bundle) and not op.isfile(bundle):
        bundle = op.join(op.dirname(cmd.config), bundle)
    model = load_model(bundle)
    seed = doc.get("seed", 0) if cmd.seed is None else cmd.seed
    report = contraction_scan(model, doc["state_box"],
                              doc.get("input_box", []),
                              int(doc.get("samples", 1024)),
                              float(doc.get("c_required", 0.0)),
                              seed=seed, jobs=cmd.jobs)
    save_json(op.join(cmd.out, 'contraction.json'), report.to_dict())
    return (f"contraction-check: {report.verdict}, worst lambda_max "
            f"{report.worst_lambda:.6g} over {report.samples} samples")


_HANDLERS = {"generate": _generate, "train": _train, "eval": _eval,
             "compare": _compare, "sweep": _sweep,
             "contraction-check": _contraction_check}


def execute(cmd):
    """Run a command; returns the process exit status."""
    _configure_logging(cmd.verbosity)
    try:
        settings = _load_settings(cmd)
    except (OSError, ValueError) as err:
        logger.error("Invalid config %s: %s", cmd.config, err)
        return 2
    try:
        os.makedirs(cmd.out, exist_ok=True)
        summary = _HANDLERS[cmd.action](cmd, settings)
    except Exception as err:  # noqa: BLE001
        logger.error("%s failed: %s", cmd.action, err)
        return 1
    print(summary)
    return 0


def main(argv=None):
    return execute(parse_args(argv))


if __name__ == '__main__':
    sys.exit(main())
