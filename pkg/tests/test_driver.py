from ness_py.driver import (RunConfig, parse_params, seed_descriptor, load_model,
                            make_ansatz, make_constraints, measure, cmd_solve, cmd_sweep,
                            cmd_oracle, cmd_symmetry, cmd_ansatz_generate,
                            cmd_ansatz_inspect, cmd_model_validate, cmd_model_emit)
from ness_py.cli import main
from ness_py.protocol import Protocol
from ness_py.errors import ConfigError, DegenerateSteadySpace
from ness_py.oracle import DENSE_LIMIT
from ness_py.statevector import AnsatzSet
import csv
import json
import os
import numpy as np
import pytest


def tfim(g=1.0, n=2):
    return {'builder': 'tfim', 'params': {'n': n, 'g': g, 'gamma': 1.0}}


def config(tmp_path, **kwargs):
    kwargs.setdefault('model', tfim())
    kwargs.setdefault('ansatz', {'seed': {'kind': 'bits', 'bits': '11'}, 'K': 2})
    return RunConfig(output=str(tmp_path / 'out'), **kwargs)


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig(model={'file': str(tmp_path / 'missing.json')})
    with pytest.raises(ConfigError):
        RunConfig(model={'builder': 'heisenberg', 'params': {}})
    with pytest.raises(ConfigError):
        RunConfig(model=tfim(), ansatz={'K': 2, 'q': 4})
    with pytest.raises(ConfigError):
        RunConfig(model=tfim(), ansatz={'K': -1})
    with pytest.raises(ConfigError):
        RunConfig(model=tfim(), sweep={'param': 'g', 'values': []})
    with pytest.raises(ConfigError):
        RunConfig(model=tfim(), solver={'feas_tol': -1})
    with pytest.raises(ConfigError):
        RunConfig.from_json('{"model": {"builder": "tfim"}, "colour": 1}')
    with pytest.raises(ConfigError):
        RunConfig.load(str(tmp_path / 'none.json'))


def test_config_defaults():
    c = RunConfig(model=tfim())
    assert c.dense_limit == DENSE_LIMIT
    assert c.oracle is True
    assert RunConfig(model=tfim(), oracle=False, dense_limit=4).dense_limit == 4


def test_config_roundtrip(tmp_path):
    c = config(tmp_path, sweep={'param': 'g', 'values': [0.0, 1.0]})
    assert RunConfig.from_json(c.to_json()) == c


def test_params_and_seeds():
    assert parse_params(['gamma=1', 'mu=0.5']) == {'gamma': 1, 'mu': 0.5}
    with pytest.raises(ConfigError):
        parse_params(['gamma'])
    assert seed_descriptor('ness') == {'kind': 'ness'}
    with pytest.raises(ConfigError):
        seed_descriptor('abc')


def test_model_and_ansatz(tmp_path):
    c = config(tmp_path)
    model = load_model(c, {'g': 0.0})
    assert model.builder['params']['g'] == 0.0
    ansatz = make_ansatz(c, model)
    assert len(ansatz) == 1
    with pytest.raises(ConfigError):
        load_model(RunConfig(model={'builder': 'tfim', 'params': {'n': 2}}))


def test_constraints_and_measure(tmp_path):
    c = config(tmp_path, model={'builder': 'xxz-dephasing',
                                'params': {'n': 2, 'delta': 1.0, 'gamma': 1.0}},
               ansatz={'seed': {'kind': 'bits', 'bits': '10'}, 'K': 1},
               constraints=[{'kind': 'sector', 'm': 0},
                            {'kind': 'observable', 'target': -1,
                             'operator': [{'coeff': [1, 0], 'pauli': 'ZZ'}]}])
    model = load_model(c)
    ansatz = make_ansatz(c, model)
    assert len(make_constraints(c, model, ansatz)) == 3
    values = measure(np.eye(len(ansatz)) / len(ansatz), ansatz)
    assert set(values) == {'X_avg', 'Z_avg', 'ZZ_avg'}
    bad = config(tmp_path, constraints=[{'kind': 'entropy'}])
    with pytest.raises(ConfigError):
        make_constraints(bad, model, ansatz)


def test_solve(tmp_path):
    c = config(tmp_path)
    record = cmd_solve(c)
    assert record['feasible'] and record['ansatz_size'] == 4
    assert record['fidelity'] >= 0.999
    assert record['true_residual'] <= 1e-6
    with open(tmp_path / 'out' / 'solution.json') as f:
        solution = json.load(f)
    assert solution['conventions']['vectorization'] == 'column-stacking'
    assert len(solution['beta']['beta']) == 4


def test_solve_with_shots(tmp_path):
    record = cmd_solve(config(tmp_path, shots=10 ** 6, noise_seed=3))
    assert record['mode'] == 'least-squares' and record['noisy']


def read_csv(path):
    with open(path, newline='') as f:
        return list(csv.reader(f))


def test_sweep_is_deterministic(tmp_path):
    sweep = {'param': 'g', 'values': [0.0, 0.5, 1.0], 'sizes': [0, 2]}
    a = config(tmp_path / 'a', sweep=sweep, workers=3)
    b = config(tmp_path / 'b', sweep=sweep, workers=1)
    rows = cmd_sweep(a)
    cmd_sweep(b)
    assert len(rows) == 6
    table = read_csv(tmp_path / 'a' / 'out' / 'sweep.csv')
    assert table[0] == Protocol.sweep_header('g')
    assert [r[0] for r in table[1:]] == ['0.0', '0.0', '0.5', '0.5', '1.0', '1.0']
    with open(tmp_path / 'a' / 'out' / 'sweep.csv') as fa, \
            open(tmp_path / 'b' / 'out' / 'sweep.csv') as fb:
        assert fa.read() == fb.read()


def test_sweep_records_failures(tmp_path):
    c = config(tmp_path, ansatz={'seed': {'kind': 'bits', 'bits': '00'}, 'K': 0},
               sweep={'param': 'g', 'values': [0.0]})
    rows = cmd_sweep(c)
    assert rows[0]['status'] == 'infeasible'
    assert rows[0]['error'].startswith('InfeasibleError')


def test_oracle(tmp_path):
    record = cmd_oracle(config(tmp_path, sweep={'param': 'g', 'values': [0.0, 1.0]}))
    assert record['dimension'] == 1 and record['physical'] == 1
    assert record['seed_overlaps'][0] == pytest.approx(1)
    assert os.path.exists(tmp_path / 'out' / 'oracle_basis.npz')
    assert len(read_csv(tmp_path / 'out' / 'oracle.csv')) == 3


def test_symmetry_command(tmp_path):
    model = {'builder': 'xxz-dephasing', 'params': {'n': 2, 'delta': 1.0, 'gamma': 1.0}}
    ansatz = {'seed': {'kind': 'product', 'labels': '+0'}, 'K': 2}
    for mode in ('twirl', 'constraints'):
        out = cmd_symmetry(config(tmp_path / mode, model=model, ansatz=ansatz,
                                  symmetry_mode=mode))
        found = [s for s in out['sectors'] if not s.missing]
        assert len(found) == 3
        assert np.allclose(out['overlaps'], np.diag(np.diag(out['overlaps'])), atol=1e-8)
        with np.load(tmp_path / mode / 'out' / 'sectors.npz') as data:
            assert data['states'].shape == (3, 4, 4)


def test_ansatz_files(tmp_path):
    path = str(tmp_path / 'ansatz.json')
    ansatz = cmd_ansatz_generate(config(tmp_path), path)
    record = cmd_ansatz_inspect(path)
    assert record['size'] == len(ansatz) == 4
    assert record['fingerprint'] == ansatz.fingerprint()
    assert record['gram_min'] == pytest.approx(1)
    c = config(tmp_path, ansatz={'file': path})
    with open(path) as f:
        stored = AnsatzSet.from_json(f.read())
    assert make_ansatz(c, load_model(c)).fingerprint() == stored.fingerprint()


def test_model_files(tmp_path):
    path = str(tmp_path / 'model.json')
    model = cmd_model_emit(config(tmp_path), path)
    c = RunConfig(model={'file': path}, output=str(tmp_path / 'out'))
    assert cmd_model_validate(c) == []
    assert load_model(c).hamiltonian == model.hamiltonian


def test_exit_codes(tmp_path):
    out = str(tmp_path / 'cli')
    base = ['--model', 'tfim', '--param', 'n=2', '--param', 'g=0', '--param', 'gamma=1',
            '--output', out]
    assert main(['solve', '--seed', '11', '--K', '0'] + base) == Protocol.ok
    assert main(['solve', '--seed', '00', '--K', '0'] + base) == Protocol.infeasible
    assert os.path.exists(os.path.join(out, 'solution.json'))
    assert main(['solve', '--model-file', str(tmp_path / 'nope.json')]) == Protocol.config
    assert main(['solve', '--seed', 'xyz'] + base) == Protocol.config
    assert main(['oracle', '--model', 'xxz-dephasing', '--param', 'n=2',
                 '--param', 'delta=1', '--param', 'gamma=1', '--output', out]) == Protocol.ok
    assert Protocol.exit_code(DegenerateSteadySpace('two')) == Protocol.oracle


def test_single_point_sweep_matches_solve(tmp_path):
    record = cmd_solve(config(tmp_path / 'solve'))
    rows = cmd_sweep(config(tmp_path / 'sweep', sweep={'param': 'g', 'values': [1.0]}))
    assert len(rows) == 1
    for key in ('ansatz_size', 'status', 'subspace_residual', 'fidelity', 'Z_avg'):
        assert rows[0][key] == record[key]
