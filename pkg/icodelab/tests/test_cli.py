from __future__ import absolute_import, division, print_function
import json
import os.path as op

import numpy as np
import numpy.testing as npt
import pandas as pd
import pytest

import icodelab as il
from icodelab import cli

data_path = op.join(il.__path__[0], 'data')


def _write_config(tmp_path, **changes):
    doc = dict(system="dcdc", trajectories=2, steps=20, split=14, epochs=2,
               width=6, depth=2, eval_every=1)
    doc.update(changes)
    path = tmp_path / 'config.json'
    path.write_text(json.dumps(doc))
    return str(path)


def test_parse_compare_with_shipped_config():
    cmd = cli.parse_args(['compare', '--config', 'robot.json', '--jobs',
                          '4', '--out', 'results'])
    assert cmd.action == 'compare'
    assert op.samefile(cmd.config, op.join(data_path, 'robot.json'))
    assert (cmd.jobs, cmd.out, cmd.seed) == (4, 'results', None)
    assert cmd.verbosity == 'normal'


@pytest.mark.parametrize("argv, status", [
    (['--help'], 0),
    (['train', '--help'], 0),
    ([], 2),
    (['train'], 2),
    (['fit', '--config', 'robot.json'], 2),
    (['train', '--config', 'no_such_config.json'], 2),
    (['train', '--config', '/no/such/dir/robot.json'], 2),
    (['train', '--config', 'no_such_dir/robot.json'], 2),
    (['train', '--config', 'robot.json', '--quiet', '--verbose'], 2),
    (['train', '--config', 'robot.json', '--jobs', '0'], 2),
    (['train', '--config', 'robot.json', '--seed', 'abc'], 2),
])
def test_usage_exit_status(argv, status):
    with pytest.raises(SystemExit) as err:
        cli.parse_args(argv)
    assert err.value.code == status


def test_jobs_from_environment(monkeypatch):
    monkeypatch.setenv(cli.JOBS_ENV, '3')
    assert cli.parse_args(['sweep', '--config', 'robot.json']).jobs == 3
    assert cli.parse_args(['sweep', '--config', 'robot.json', '--jobs',
                           '5']).jobs == 5
    monkeypatch.setenv(cli.JOBS_ENV, 'many')
    with pytest.raises(SystemExit) as err:
        cli.parse_args(['sweep', '--config', 'robot.json'])
    assert err.value.code == 2


def test_generate(tmp_path, capsys):
    out = str(tmp_path / 'data')
    status = cli.main(['generate', '--config', _write_config(tmp_path),
                       '--out', out, '--quiet'])
    assert status == 0
    with open(op.join(out, 'manifest.json')) as f:
        manifest = json.load(f)
    assert manifest["system"] == "dcdc"
    assert len(manifest["files"]) == 2
    frame = pd.read_csv(op.join(out, manifest["files"][0]))
    assert list(frame.columns) == ['t', 'x1', 'x2', 'x3', 'u1']
    assert 'generate' in capsys.readouterr().out


def test_train_then_eval(tmp_path):
    config = _write_config(tmp_path)
    out = str(tmp_path / 'run')
    assert cli.main(['train', '--config', config, '--out', out,
                     '--quiet']) == 0
    with open(op.join(out, 'run.json')) as f:
        run = json.load(f)
    assert run["config"]["model"] == "icode"
    assert len(run["loss_curve"]) == 2
    bundle = op.join(out, 'model.json')
    assert il.load_model(bundle).kind == "icode"
    assert cli.main(['eval', '--config', config, '--model', bundle, '--out',
                     out, '--quiet']) == 0
    with open(op.join(out, 'metrics.json')) as f:
        doc = json.load(f)
    npt.assert_allclose(doc["metrics"]["mse"], run["metrics"]["mse"],
                        rtol=1e-12)
    assert doc["dataset_fingerprint"] == run["dataset_fingerprint"]


def test_compare_writes_table(tmp_path):
    out = str(tmp_path / 'cmp')
    status = cli.main(['compare', '--config',
                       _write_config(tmp_path, scenario="ii"), '--out', out,
                       '--jobs', '1', '--quiet'])
    assert status == 0
    table = pd.read_csv(op.join(out, 'comparison.csv'))
    assert list(table.columns) == il.TABLE_COLUMNS
    assert len(table) == 4
    assert set(table["scenario"]) == {"ii"}
    for kind in il.MODEL_KINDS:
        assert op.exists(op.join(out, f'run_{kind}.json'))


def test_sweep_writes_grid_and_summary(tmp_path):
    out = str(tmp_path / 'sweep')
    config = _write_config(tmp_path, epochs=1, sweep={"seed": [0, 1]})
    assert cli.main(['sweep', '--config', config, '--out', out, '--jobs',
                     '1', '--quiet']) == 0
    grid = pd.read_csv(op.join(out, 'sweep.csv'), keep_default_na=False)
    assert list(grid["seed"]) == [0, 1]
    summary = pd.read_csv(op.join(out, 'sweep_summary.csv'))
    assert list(summary["runs"]) == [2]


def test_contraction_check_on_toy_model(tmp_path, capsys):
    out = str(tmp_path / 'cc')
    status = cli.main(['contraction-check', '--config',
                       'toy_contraction.json', '--out', out, '--jobs', '1'])
    assert status == 0
    with open(op.join(out, 'contraction.json')) as f:
        report = json.load(f)
    assert report["verdict"] == "certified-on-samples"
    npt.assert_allclose(report["worst_lambda"], -1.0, atol=1e-9)
    assert report["samples"] == 256
    assert 'certified' in capsys.readouterr().out


def test_contraction_check_model_override(tmp_path):
    expanding = il.IcodeModel([il.MLP([np.eye(2)], [np.zeros(2)])], [])
    bundle = str(tmp_path / 'expanding.json')
    il.save_model(expanding, bundle)
    config = tmp_path / 'check.json'
    config.write_text(json.dumps({"state_box": [[-1, 1], [-1, 1]],
                                  "samples": 16, "c_required": 0.1}))
    out = str(tmp_path / 'cc')
    assert cli.main(['contraction-check', '--config', str(config),
                     '--model', bundle, '--out', out, '--quiet']) == 0
    with open(op.join(out, 'contraction.json')) as f:
        assert json.load(f)["verdict"] == "violated"


def test_config_errors_exit_two(tmp_path):
    bad = tmp_path / 'bad.json'
    bad.write_text(json.dumps({"system": "robot", "epochs": -1}))
    assert cli.main(['train', '--config', str(bad), '--out',
                     str(tmp_path), '--quiet']) == 2
    bad.write_text('{"system": ')
    assert cli.main(['train', '--config', str(bad), '--out',
                     str(tmp_path), '--quiet']) == 2
    bad.write_text(json.dumps({"model": "toy_decay_model.json"}))
    assert cli.main(['contraction-check', '--config', str(bad), '--out',
                     str(tmp_path), '--quiet']) == 2


def test_run_errors_exit_one(tmp_path):
    # eval without a model bundle fails at run time
    assert cli.main(['eval', '--config', _write_config(tmp_path), '--out',
                     str(tmp_path / 'ev'), '--quiet']) == 1
