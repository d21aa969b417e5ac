"""Batch driver: model building, ansatz generation, assembly, solving,
sweeps, oracle comparison and report emission.

Every ``cmd_*`` function takes a RunConfig, writes its files below
``config.output`` and returns the records it wrote.
"""
import concurrent.futures
import dataclasses
import json
import logging
import math
import os
import numpy as np

from . import oracle
from .oracle import DENSE_LIMIT
from .errors import ConfigError, DegenerateSteadySpace, NessError, SolverError
from .model import BUILDERS, OpenSystemModel, build, magnetization, validate
from .overlaps import add_shot_noise, assemble, expectation, observable_matrix
from .pauli import PauliSum, single_site
from .protocol import Protocol
from .report import CsvSink, Reporter
from .sdp import FeasibilityProblem, SolverOptions, solve
from .statevector import AnsatzSet, make_seed, moment_states, moment_states_random
from .symmetry import (SectorState, SymmetrySpec, extract_sectors, sector_constraint,
                       sector_constraints)


@dataclasses.dataclass
class RunConfig:
    """one batch run

    ``model`` is ``{'builder': name, 'params': {...}}`` or ``{'file': path}``.
    ``ansatz`` is ``{'seed': descriptor, 'K': int, 'q': int, 'rng_seed': int}``
    or ``{'file': path}``. ``sweep`` is ``{'param': name, 'values': [...],
    'sizes': [K, ...]}``. ``constraints`` entries are
    ``{'kind': 'sector', 'generator': name, 'm': value, 'variance': bool}`` or
    ``{'kind': 'observable', 'operator': pauli list, 'target': value}``.

    >>> c = RunConfig.from_json('{"model": {"builder": "tfim", "params": {"n": 2, "g": 1, "gamma": 1}}}')
    >>> c.ansatz['K'], c.oracle
    (2, True)
    """
    model: dict
    ansatz: dict = dataclasses.field(
        default_factory=lambda: {'seed': {'kind': 'uniform'}, 'K': 2})
    solver: dict = dataclasses.field(default_factory=dict)
    constraints: list = dataclasses.field(default_factory=list)
    sweep: dict = None
    output: str = 'result'
    shots: int = None
    noise_seed: int = 0
    dense_limit: int = DENSE_LIMIT
    oracle: bool = True
    workers: int = None
    symmetry: str = None
    symmetry_mode: str = 'twirl'

    def __post_init__(self):
        self.validate()

    def validate(self):
        model = self.model or {}
        if 'file' in model:
            if not os.path.exists(model['file']):
                raise ConfigError(f'model file {model["file"]} not found')
        elif model.get('builder') not in BUILDERS:
            raise ConfigError(f'unknown model builder {model.get("builder")!r}, '
                              f'choose from {sorted(BUILDERS)}')
        if 'file' in self.ansatz:
            if not os.path.exists(self.ansatz['file']):
                raise ConfigError(f'ansatz file {self.ansatz["file"]} not found')
        else:
            self.ansatz.setdefault('seed', {'kind': 'uniform'})
            self.ansatz.setdefault('K', 2)
            if self.ansatz['K'] < 0:
                raise ConfigError(f'K must be non-negative, got {self.ansatz["K"]}')
            if (self.ansatz.get('q') is None) != (self.ansatz.get('rng_seed') is None):
                raise ConfigError('the random ansatz needs both q and rng_seed')
        if self.sweep is not None:
            if 'param' not in self.sweep or not self.sweep.get('values'):
                raise ConfigError('sweep needs a param and a non-empty list of values')
            if not all(math.isfinite(v) for v in self.sweep['values']):
                raise ConfigError(f'sweep values must be finite: {self.sweep["values"]}')
            if 'file' in model:
                raise ConfigError('cannot sweep a parameter of a model file')
        if self.shots is not None and self.shots < 1:
            raise ConfigError(f'shots must be positive, got {self.shots}')
        if self.symmetry_mode not in ('twirl', 'constraints'):
            raise ConfigError(f'unknown symmetry mode {self.symmetry_mode!r}')
        try:
            self.solver_options()
        except (TypeError, ValueError) as e:
            raise ConfigError(f'invalid solver options: {e}') from e

    def solver_options(self) -> SolverOptions:
        return SolverOptions.from_dict(self.solver)

    def to_json(self):
        return json.dumps(dataclasses.asdict(self), indent=1)

    @staticmethod
    def from_json(msg):
        try:
            data = json.loads(msg)
        except json.JSONDecodeError as e:
            raise ConfigError(f'config is not valid JSON: {e}') from e
        known = {f.name for f in dataclasses.fields(RunConfig)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f'unknown config keys {sorted(unknown)}')
        if 'model' not in data:
            raise ConfigError('config needs a model section')
        return RunConfig(**data)

    @staticmethod
    def load(path):
        if not os.path.exists(path):
            raise ConfigError(f'config file {path} not found')
        with open(path, encoding='utf-8') as f:
            return RunConfig.from_json(f.read())

    @staticmethod
    def from_args(args):
        """config file (if any) overridden by command-line flags"""
        data = {}
        if getattr(args, 'config', None):
            with open(_existing(args.config), encoding='utf-8') as f:
                try:
                    data = json.loads(f.read())
                except json.JSONDecodeError as e:
                    raise ConfigError(f'{args.config} is not valid JSON: {e}') from e
        if getattr(args, 'model_file', None):
            data['model'] = {'file': args.model_file}
        elif getattr(args, 'model', None):
            data['model'] = {'builder': args.model, 'params': {}}
        if getattr(args, 'param', None):
            if 'params' not in data.get('model', {}):
                raise ConfigError('--param needs a model builder')
            data['model']['params'].update(parse_params(args.param))
        ansatz = data.setdefault('ansatz', {'seed': {'kind': 'uniform'}, 'K': 2})
        if getattr(args, 'ansatz_file', None):
            data['ansatz'] = {'file': args.ansatz_file}
        else:
            if getattr(args, 'seed', None):
                ansatz['seed'] = seed_descriptor(args.seed)
            for key in ('K', 'q', 'rng_seed'):
                if getattr(args, key, None) is not None:
                    ansatz[key] = getattr(args, key)
        solver = data.setdefault('solver', {})
        for key in ('feas_tol', 'psd_tol', 'max_iter', 'mode', 'init', 'init_seed'):
            if getattr(args, key, None) is not None:
                solver[key] = getattr(args, key)
        for m in getattr(args, 'sector', None) or []:
            data.setdefault('constraints', []).append(
                {'kind': 'sector', 'generator': 'magnetization', 'm': m, 'variance': True})
        if getattr(args, 'sweep_param', None):
            data['sweep'] = {'param': args.sweep_param, 'values': args.sweep_values or []}
            if getattr(args, 'sizes', None):
                data['sweep']['sizes'] = args.sizes
        for key in ('output', 'shots', 'noise_seed', 'dense_limit', 'workers',
                    'symmetry', 'symmetry_mode'):
            if getattr(args, key, None) is not None:
                data[key] = getattr(args, key)
        if getattr(args, 'no_oracle', False):
            data['oracle'] = False
        if 'model' not in data:
            raise ConfigError('no model given: use --config, --model or --model-file')
        return RunConfig(**data)


def _existing(path):
    if not os.path.exists(path):
        raise ConfigError(f'{path} not found')
    return path


def parse_params(items):
    """``key=value`` strings to a dict, values decoded as JSON when possible

    >>> parse_params(['n=4', 'g=0.5', 'label=x'])
    {'n': 4, 'g': 0.5, 'label': 'x'}
    """
    params = {}
    for item in items:
        if '=' not in item:
            raise ConfigError(f'parameter {item!r} is not key=value')
        key, value = item.split('=', 1)
        try:
            params[key] = json.loads(value)
        except json.JSONDecodeError:
            params[key] = value
    return params


def seed_descriptor(text: str) -> dict:
    """seed descriptor from a short command-line form

    >>> seed_descriptor('011')
    {'kind': 'bits', 'bits': '011'}
    >>> seed_descriptor('+0-')
    {'kind': 'product', 'labels': '+0-'}
    """
    if text in ('uniform', 'ness'):
        return {'kind': text}
    if set(text) <= set('01'):
        return {'kind': 'bits', 'bits': text}
    if set(text) <= set('01+-'):
        return {'kind': 'product', 'labels': text}
    raise ConfigError(f'cannot read seed {text!r}')


def load_model(config: RunConfig, overrides: dict = None) -> OpenSystemModel:
    if 'file' in config.model:
        with open(config.model['file'], encoding='utf-8') as f:
            try:
                return OpenSystemModel.from_json(f.read())
            except (KeyError, ValueError) as e:
                raise ConfigError(f'cannot read model file {config.model["file"]}: {e}') from e
    params = dict(config.model.get('params', {}), **(overrides or {}))
    try:
        return build(config.model['builder'], params)
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e


def make_ansatz(config: RunConfig, model: OpenSystemModel, K: int = None) -> AnsatzSet:
    spec = config.ansatz
    if 'file' in spec:
        with open(spec['file'], encoding='utf-8') as f:
            ansatz = AnsatzSet.from_json(f.read())
        if ansatz.n_qubits != model.n_qubits:
            raise ConfigError(f'ansatz has {ansatz.n_qubits} qubits, model {model.n_qubits}')
        return ansatz
    K = spec['K'] if K is None else K
    descriptor = spec['seed']
    try:
        seed = make_seed(model.n_qubits, descriptor, model)
    except KeyError as e:
        raise ConfigError(f'seed {descriptor} is missing {e}') from e
    if spec.get('q') is not None:
        return moment_states_random(model.hamiltonian, seed, K, spec['q'],
                                    spec['rng_seed'], descriptor)
    return moment_states(model.hamiltonian, seed, K, descriptor)


def _generator(model: OpenSystemModel, name: str) -> PauliSum:
    if name == 'magnetization':
        return magnetization(model.n_qubits)
    sym = model.symmetries.get(name)
    if sym is None or 'generator' not in sym:
        raise ConfigError(f'model has no generator named {name!r}')
    return sym['generator']


def make_constraints(config: RunConfig, model: OpenSystemModel, ansatz: AnsatzSet):
    """(N~, target) pairs for the extra linear constraints"""
    out = []
    for c in config.constraints:
        kind = c.get('kind')
        if kind == 'sector':
            generator = _generator(model, c.get('generator', 'magnetization'))
            if c.get('variance', True):
                out.extend(sector_constraints(generator, c['m'], ansatz))
            else:
                out.append(sector_constraint(generator, c['m'], ansatz))
        elif kind == 'observable':
            op = PauliSum.from_list(c['operator'], model.n_qubits)
            out.append((observable_matrix(op, ansatz), c['target']))
        else:
            raise ConfigError(f'unknown constraint kind {kind!r}')
    return out


def observables(n: int):
    """site-averaged <X_j>, <Z_j> and nearest-neighbour <Z_j Z_j+1>"""
    ops = {
        'X_avg': sum((single_site(n, j, 'X', 1 / n) for j in range(1, n + 1)),
                     PauliSum([], n)),
        'Z_avg': sum((single_site(n, j, 'Z', 1 / n) for j in range(1, n + 1)),
                     PauliSum([], n)),
    }
    if n > 1:
        ops['ZZ_avg'] = sum((single_site(n, j, 'Z', 1 / (n - 1)) @ single_site(n, j + 1, 'Z')
                             for j in range(1, n)), PauliSum([], n))
    return ops


def measure(beta, ansatz: AnsatzSet):
    """observables from beta and ansatz matrices only"""
    return {name: expectation(beta, observable_matrix(op, ansatz, name))
            for name, op in observables(ansatz.n_qubits).items()}


def run_point(config: RunConfig, model: OpenSystemModel, ansatz: AnsatzSet, extra=()):
    """assemble, optionally add shot noise, and solve; returns BetaMatrix"""
    options = config.solver_options()
    overlaps = assemble(model, ansatz, config.workers)
    if config.shots:
        overlaps = add_shot_noise(overlaps, config.shots, config.noise_seed)
    constraints = make_constraints(config, model, ansatz) + list(extra)
    problem = FeasibilityProblem(overlaps, extra_constraints=constraints, options=options)
    return solve(problem, options)


def reference_state(config: RunConfig, model: OpenSystemModel):
    """exact steady state, dense up to the dense limit and sparse beyond"""
    if model.n_qubits <= config.dense_limit:
        return oracle.exact_ness(model, limit=config.dense_limit)
    return oracle.sparse_steady_state(model)


def compare(config: RunConfig, model: OpenSystemModel, ansatz: AnsatzSet, beta) -> dict:
    """fidelity to the exact steady state and the true residual"""
    rho = beta.density_matrix(ansatz)
    record = {'true_residual': oracle.true_residual(rho, model)}
    if config.oracle:
        try:
            record['fidelity'] = oracle.fidelity(rho, reference_state(config, model))
        except DegenerateSteadySpace as e:
            logging.warning(f'no fidelity reported: {e}')
    return record


def point_record(config: RunConfig, model: OpenSystemModel, ansatz: AnsatzSet, beta) -> dict:
    record = {
        'ansatz_size': len(ansatz),
        'K': ansatz.K,
        'q': ansatz.q,
        'rng_seed': ansatz.rng_seed,
        'seed': json.dumps(ansatz.seed_descriptor, sort_keys=True),
        'status': beta.status,
        'feasible': beta.feasible,
        'subspace_residual': beta.subspace_residual,
        'iterations': beta.iterations,
        'mode': beta.mode,
        'shots': config.shots,
        'feas_tol': config.solver_options().feas_tol,
        'psd_tol': config.solver_options().psd_tol,
    }
    record.update(measure(beta.beta, ansatz))
    record.update(compare(config, model, ansatz, beta))
    return record


def _output(config: RunConfig, name: str) -> str:
    os.makedirs(config.output, exist_ok=True)
    return os.path.join(config.output, name)


def cmd_solve(config: RunConfig) -> dict:
    """one solve; writes solution.json and re-raises solver failures after
    recording the best iterate"""
    model = load_model(config)
    ansatz = make_ansatz(config, model)
    logging.info(f'{model.label}: ansatz of {len(ansatz)} states, '
                 f'levels {ansatz.level_sizes()}')
    failure = None
    try:
        beta = run_point(config, model, ansatz)
    except SolverError as e:
        if e.best is None:
            raise
        beta, failure = e.best, e
    record = point_record(config, model, ansatz, beta)
    record['noisy'] = bool(config.shots)
    solution = {
        'config': dataclasses.asdict(config),
        'model': model.label,
        'ansatz_fingerprint': ansatz.fingerprint(),
        'record': record,
        'beta': json.loads(beta.to_json()),
        'conventions': {'observables': Protocol.observables,
                        'fidelity': Protocol.fidelity,
                        'vectorization': Protocol.vectorization},
    }
    with open(_output(config, 'solution.json'), 'w', encoding='utf-8') as f:
        json.dump(solution, f, indent=1)
    print(Reporter.solution_table({k: record.get(k) for k in (
        'ansatz_size', 'status', 'subspace_residual', 'true_residual', 'fidelity',
        'X_avg', 'Z_avg', 'ZZ_avg')}))
    if failure is not None:
        raise failure
    return record


def sweep_point(config: RunConfig, value, K: int) -> dict:
    """one sweep row; failures are recorded in the row"""
    param = config.sweep['param']
    row = {param: value, 'K': K}
    try:
        model = load_model(config, {param: value})
        ansatz = make_ansatz(config, model, K)
        row['ansatz_size'] = len(ansatz)
        try:
            beta = run_point(config, model, ansatz)
        except SolverError as e:
            if e.best is None:
                raise
            beta = e.best
            row['error'] = f'{type(e).__name__}: {e}'
        row.update(point_record(config, model, ansatz, beta))
    except (NessError, ValueError, np.linalg.LinAlgError) as e:
        logging.error(f'{param}={value} K={K}: {e}')
        row.setdefault('status', 'error')
        row['error'] = f'{type(e).__name__}: {e}'
    return row


def cmd_sweep(config: RunConfig):
    """one CSV row per (sweep value, ansatz size) in deterministic order"""
    if config.sweep is None:
        raise ConfigError('sweep command needs a sweep section')
    param = config.sweep['param']
    sizes = config.sweep.get('sizes') or [config.ansatz.get('K', 0)]
    points = [(value, K) for value in config.sweep['values'] for K in sizes]
    header = Protocol.sweep_header(param)
    rows = []
    with CsvSink(_output(config, 'sweep.csv'), header) as sink, \
            concurrent.futures.ThreadPoolExecutor(max_workers=config.workers) as pool:
        for row in pool.map(lambda p: sweep_point(config, *p), points):
            sink.write(row)
            rows.append(row)
    print(Reporter.sweep_table(header, rows))
    return rows


def cmd_oracle(config: RunConfig) -> dict:
    """exact steady-state basis and degeneracy; with a sweep section the
    seed overlap of every sweep value"""
    model = load_model(config)
    record = {'model': model.label, 'n_qubits': model.n_qubits}
    if model.n_qubits <= config.dense_limit:
        basis = oracle.steady_states(model, limit=config.dense_limit)
        states = oracle.physical_steady_states(model, limit=config.dense_limit)
        basis.save(_output(config, 'oracle_basis.npz'))
        np.savez(_output(config, 'oracle_states.npz'), states=np.array(states))
        record.update(dimension=basis.dimension, physical=len(states))
    else:
        logging.info(f'{model.n_qubits} qubits above the dense limit; '
                     'null-space basis skipped')
    rows = []
    if config.sweep is not None:
        param = config.sweep['param']
        with CsvSink(_output(config, 'oracle.csv'), [param, 'n_qubits', 'seed_overlap']) as sink:
            for value in config.sweep['values']:
                m = load_model(config, {param: value})
                row = {param: value, 'n_qubits': m.n_qubits,
                       'seed_overlap': oracle.seed_overlap(m)}
                sink.write(row)
                rows.append(row)
        record['seed_overlaps'] = [r['seed_overlap'] for r in rows]
    print(Reporter.solution_table({k: v for k, v in record.items() if k != 'seed_overlaps'}))
    if rows:
        print(Reporter.sweep_table([config.sweep['param'], 'seed_overlap'], rows))
    return record


def _constraint_sectors(config, model, spec, ansatz):
    """one sector-constrained solve per generator eigenvalue"""
    if spec.generator is None:
        raise ConfigError(f'symmetry {spec.name!r} has no generator for constraint mode')
    sectors = []
    for alpha, m in enumerate(spec.labels):
        try:
            beta = run_point(config, model, ansatz,
                             sector_constraints(spec.generator, m, ansatz))
        except SolverError as e:
            logging.warning(f'sector {m}: {e}')
            sectors.append(SectorState(alpha, spec.eigenvalues[alpha], m, 0.0,
                                       None, True, None, None))
            continue
        state = beta.density_matrix(ansatz)
        sectors.append(SectorState(alpha, spec.eigenvalues[alpha], m, 1.0, state, False,
                                   oracle.true_residual(state, model),
                                   beta.psd_violation))
    return sectors


def cmd_symmetry(config: RunConfig) -> dict:
    """per-sector steady states, their pairwise trace overlaps and residuals"""
    model = load_model(config)
    ansatz = make_ansatz(config, model)
    try:
        spec = SymmetrySpec.from_model(model, config.symmetry)
    except NessError as e:
        raise ConfigError(str(e)) from e
    if config.symmetry_mode == 'constraints':
        sectors = _constraint_sectors(config, model, spec, ansatz)
    else:
        _, sectors = extract_sectors(model, spec, ansatz, config.solver_options(),
                                     make_constraints(config, model, ansatz))
    found = [s for s in sectors if not s.missing]
    overlaps = np.array([[float(np.trace(a.state.conj().T @ b.state).real) for b in found]
                         for a in found])
    np.savez(_output(config, 'sectors.npz'),
             states=np.array([s.state for s in found]),
             labels=np.array([complex(s.label) for s in found]),
             overlaps=overlaps)
    print(Reporter.sector_table(sectors))
    return {'symmetry': spec.name, 'mode': config.symmetry_mode,
            'sectors': sectors, 'overlaps': overlaps}


def cmd_ansatz_generate(config: RunConfig, path: str) -> AnsatzSet:
    model = load_model(config)
    ansatz = make_ansatz(config, model)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(ansatz.to_json())
    logging.info(f'wrote {len(ansatz)} ansatz states to {path}')
    return ansatz


def cmd_ansatz_inspect(path: str) -> dict:
    with open(_existing(path), encoding='utf-8') as f:
        ansatz = AnsatzSet.from_json(f.read())
    X = ansatz.matrix()
    w = np.linalg.eigvalsh(X.conj().T @ X)
    record = {'n_qubits': ansatz.n_qubits, 'size': len(ansatz), 'K': ansatz.K,
              'q': ansatz.q, 'rng_seed': ansatz.rng_seed,
              'levels': ansatz.level_sizes(),
              'gram_min': float(w[0]), 'gram_max': float(w[-1]),
              'fingerprint': ansatz.fingerprint()}
    print(Reporter.solution_table(record))
    return record


def cmd_model_validate(config: RunConfig):
    model = load_model(config)
    violations = validate(model)
    print(Reporter.violations_table(violations))
    return violations


def cmd_model_emit(config: RunConfig, path: str) -> OpenSystemModel:
    model = load_model(config)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(model.to_json())
    return model
