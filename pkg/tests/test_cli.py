# tests/test_cli.py
import csv
import json

import pytest
from click.testing import CliRunner

from percolab.app import cli
from percolab.config.config import TestingConfig
from percolab.config.experiment import load_config
from percolab.models.experiment import ExperimentConfig
from percolab.models.results import NormalityReport
from percolab.services import runner
from percolab.services.runner import ExperimentService, run_experiment
from percolab.utils.errors import ReplicaInvariantError


def write_config(tmp_path, body, name='experiment.conf', output='out'):
    path = tmp_path / name
    path.write_text(body + f"output_dir = {tmp_path / output}\n")
    return path


L1_CONFIG = ("experiment = l1-poisson\ndim = 2\nparam = 1.0\nsides = 3, 4, 5, 6\n"
             "replicas = 12\nmaster_seed = 42\n")


@pytest.fixture
def cli_runner():
    return CliRunner()


def test_validate_accepts_good_config(cli_runner, tmp_path):
    result = cli_runner.invoke(cli, ['validate', str(write_config(tmp_path, L1_CONFIG))])
    assert result.exit_code == 0
    assert result.output.startswith('ok: l1-poisson')


def test_validate_rejects_bad_config(cli_runner, tmp_path):
    path = write_config(tmp_path, L1_CONFIG.replace('replicas = 12', 'replicas = 0'))
    result = cli_runner.invoke(cli, ['validate', str(path)])
    assert result.exit_code == 1
    assert 'replicas' in result.output


def test_run_writes_every_output(cli_runner, tmp_path):
    result = cli_runner.invoke(cli, ['run', str(write_config(tmp_path, L1_CONFIG))])
    assert result.exit_code == 0, result.output
    out = tmp_path / 'out'
    for name in ('samples.csv', 'summary.json', 'fit.json', 'manifest.json'):
        assert (out / name).is_file()

    raw = (out / 'samples.csv').read_bytes()
    assert raw.startswith(b'experiment,dim,param,side,replica,value\n')
    assert b'\r' not in raw
    with open(out / 'samples.csv', newline='') as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 48
    assert rows[0]['param'] == '1.0' and rows[0]['side'] == '3.0'

    summary = json.loads((out / 'summary.json').read_text())
    assert [row['side'] for row in summary['sides']] == [3.0, 4.0, 5.0, 6.0]
    manifest = json.loads((out / 'manifest.json').read_text())
    assert manifest['config']['master_seed'] == 42
    assert len(manifest['samples_digest']) == 64


def test_run_experiment_returns_manifest(tmp_path):
    config = load_config(write_config(tmp_path, L1_CONFIG))
    manifest = run_experiment(config)
    out = tmp_path / 'out'
    assert manifest.outputs['samples'] == 'samples.csv'
    assert manifest.samples_digest == runner.file_digest(out / 'samples.csv')
    assert manifest.config['sides'] == [3.0, 4.0, 5.0, 6.0]
    assert json.loads((out / 'manifest.json').read_text())['outputs'] == manifest.outputs


@pytest.mark.parametrize('distance, passes', [(0.045, True), (0.012, True), (0.061, False)])
def test_clt_acceptance_follows_ks_distance(monkeypatch, distance, passes):
    # p-value well under 0.05 either way
    def report(samples, side, exponent):
        return NormalityReport(count=2000, side=side, ks_distance=distance, ks_pvalue=0.0005,
                               skewness=0.1, excess_kurtosis=0.0, sigma_hat=1.0)

    monkeypatch.setattr(runner, 'clt_check', report)
    config = ExperimentConfig(experiment='clt', dim=2, param=2.0, sides=(40.0,), replicas=2000)
    entries = ExperimentService(TestingConfig())._clt_reports(config, {40.0: [0.0] * 2000})
    assert entries[0]['ks_distance'] == distance
    assert entries[0]['passes'] is passes


@pytest.mark.parametrize('workers', [2, 8])
def test_runs_with_same_seed_are_byte_identical(cli_runner, tmp_path, workers):
    first = write_config(tmp_path, L1_CONFIG + "workers = 1\n", name='a.conf', output='a')
    second = write_config(tmp_path, L1_CONFIG + f"workers = {workers}\n", name='b.conf',
                          output='b')
    assert cli_runner.invoke(cli, ['run', str(first)]).exit_code == 0
    assert cli_runner.invoke(cli, ['run', str(second)]).exit_code == 0
    assert (tmp_path / 'a' / 'samples.csv').read_bytes() == \
        (tmp_path / 'b' / 'samples.csv').read_bytes()


def test_different_seed_changes_samples(cli_runner, tmp_path):
    first = write_config(tmp_path, L1_CONFIG, name='a.conf', output='a')
    second = write_config(tmp_path, L1_CONFIG.replace('master_seed = 42', 'master_seed = 43'),
                          name='b.conf', output='b')
    cli_runner.invoke(cli, ['run', str(first)])
    cli_runner.invoke(cli, ['run', str(second)])
    assert (tmp_path / 'a' / 'samples.csv').read_bytes() != \
        (tmp_path / 'b' / 'samples.csv').read_bytes()


def test_lattice_run_writes_integer_sides(cli_runner, tmp_path):
    body = "experiment = lattice-count\ndim = 2\nparam = 0.5\nsides = 2, 3\nreplicas = 5\n"
    result = cli_runner.invoke(cli, ['run', str(write_config(tmp_path, body))])
    assert result.exit_code == 0, result.output
    with open(tmp_path / 'out' / 'samples.csv', newline='') as handle:
        rows = list(csv.DictReader(handle))
    assert {row['side'] for row in rows} == {'2', '3'}
    assert all(float(row['value']).is_integer() for row in rows)


def test_symmetry_run_writes_report(cli_runner, tmp_path):
    body = ("experiment = xi-symmetry\ndim = 2\nparam = 2.0\nsides = 6\nreplicas = 3\n"
            "master_seed = 5\n")
    result = cli_runner.invoke(cli, ['run', str(write_config(tmp_path, body))])
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / 'out' / 'report.json').read_text())
    assert report[0]['side'] == 6.0
    assert report[0]['additivity_failures'] == 0


def test_tail_run_writes_survival_curve(cli_runner, tmp_path):
    body = ("experiment = tail\ndim = 2\nparam = 2.0\nsides = 6\nreplicas = 4\n"
            "thresholds = 0.5, 1, 2, 3\n")
    result = cli_runner.invoke(cli, ['run', str(write_config(tmp_path, body))])
    assert result.exit_code == 0, result.output
    tail = json.loads((tmp_path / 'out' / 'tail.json').read_text())
    assert [pair[0] for pair in tail[0]['survival']] == [0.5, 1.0, 2.0, 3.0]


def test_run_exits_with_config_error(cli_runner, tmp_path):
    path = write_config(tmp_path, L1_CONFIG.replace('dim = 2', 'dim = 1'))
    result = cli_runner.invoke(cli, ['run', str(path)])
    assert result.exit_code == 1
    assert '[dim]' in result.output


def test_run_exits_with_invariant_error(cli_runner, tmp_path, monkeypatch):
    def broken_draw(*args, **kwargs):
        raise ReplicaInvariantError("component lost its out-connect point")

    monkeypatch.setattr(runner, 'replica_draw', broken_draw)
    result = cli_runner.invoke(cli, ['run', str(write_config(tmp_path, L1_CONFIG))])
    assert result.exit_code == 2
    assert 'out-connect' in result.output


def test_fit_command_reads_summary(cli_runner, tmp_path):
    summary = {'sides': [{'side': s, 'mean': 0.5 * s * s - 2 * s + 3, 'stderr': 0.1}
                         for s in (2.0, 4.0, 6.0, 8.0, 10.0)]}
    path = tmp_path / 'summary.json'
    path.write_text(json.dumps(summary))
    result = cli_runner.invoke(cli, ['fit', str(path), '--degree', '2'])
    assert result.exit_code == 0, result.output
    fit = json.loads((tmp_path / 'fit.json').read_text())
    assert fit['leading'] == pytest.approx(0.5)
    assert fit['tau'] == pytest.approx([2.0, -3.0])

    predicted = cli_runner.invoke(cli, ['predict', str(tmp_path / 'fit.json'), '--side', '12'])
    assert predicted.exit_code == 0
    assert float(predicted.output.split()[0]) == pytest.approx(0.5 * 144 - 24 + 3)


def test_fit_command_rejects_missing_summary(cli_runner, tmp_path):
    result = cli_runner.invoke(cli, ['fit', str(tmp_path / 'none.json'), '--degree', '2'])
    assert result.exit_code == 1


def test_fit_experiment_from_summary_path(cli_runner, tmp_path):
    summary = {'sides': [{'side': s, 'mean': 2.0 * s * s + 1, 'stderr': 0.5}
                         for s in (1.0, 2.0, 3.0, 4.0)]}
    (tmp_path / 'summary.json').write_text(json.dumps(summary))
    body = f"experiment = fit\ndim = 2\nsummary_path = {tmp_path / 'summary.json'}\n"
    result = cli_runner.invoke(cli, ['run', str(write_config(tmp_path, body))])
    assert result.exit_code == 0, result.output
    fit = json.loads((tmp_path / 'out' / 'fit.json').read_text())
    assert fit['leading'] == pytest.approx(2.0)


def test_clt_command_reports_normality(cli_runner, tmp_path):
    body = ("experiment = clt\ndim = 2\nparam = 1.0\nsides = 3\nreplicas = 500\n"
            "master_seed = 9\n")
    result = cli_runner.invoke(cli, ['run', str(write_config(tmp_path, body))])
    assert result.exit_code == 0, result.output
    assert (tmp_path / 'out' / 'clt.json').is_file()

    checked = cli_runner.invoke(cli, ['clt', str(tmp_path / 'out' / 'samples.csv'),
                                      '--side', '3', '--exponent', '1'])
    assert checked.exit_code == 0, checked.output
    report = json.loads(checked.output)
    assert report['count'] == 500
    assert 0.0 <= report['ks_pvalue'] <= 1.0


def test_clt_command_needs_enough_samples(cli_runner, tmp_path):
    cli_runner.invoke(cli, ['run', str(write_config(tmp_path, L1_CONFIG))])
    result = cli_runner.invoke(cli, ['clt', str(tmp_path / 'out' / 'samples.csv'),
                                     '--side', '3', '--exponent', '1'])
    assert result.exit_code == 1


def test_tail_run_over_component_of_added_point(cli_runner, tmp_path):
    body = ("experiment = tail\ndim = 2\nparam = 1.0\nsides = 6\nreplicas = 4\n"
            "tail_target = vx\n")
    result = cli_runner.invoke(cli, ['run', str(write_config(tmp_path, body))])
    assert result.exit_code == 0, result.output
    with open(tmp_path / 'out' / 'samples.csv', newline='') as handle:
        values = [float(row['value']) for row in csv.DictReader(handle)]
    assert all(0.0 <= v <= 6.0 for v in values)
