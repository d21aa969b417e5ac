import argparse
import logging
import traceback

from . import driver
from .errors import ConfigError
from .oracle import DENSE_LIMIT
from .protocol import Protocol
from .sdp import INITS, MODES


def _common(parser):
    parser.add_argument(
        "--config",
        help="run configuration (JSON); flags below override it",
    )
    parser.add_argument(
        "--model",
        help="model builder name, e.g., tfim, xxz-dephasing, xxz-boundary",
    )
    parser.add_argument(
        "--model-file",
        help="model file (JSON) instead of a builder",
    )
    parser.add_argument(
        "--param", action='append',
        help="builder parameter as key=value, repeatable, e.g., --param n=2",
    )
    parser.add_argument(
        "--output",
        help="directory for report files",
    )
    parser.add_argument(
        "--dense-limit", type=int,
        help=f"largest qubit count for the dense oracle (default {DENSE_LIMIT})",
    )
    parser.add_argument(
        "--workers", type=int,
        help="worker threads for assembly and sweeps",
    )
    parser.add_argument(
        "--verbose", action='store_true',
        help="show solver progress",
    )


def _ansatz(parser):
    parser.add_argument(
        "--seed",
        help="seed state: bits (011), product labels (+0-), uniform or ness",
    )
    parser.add_argument(
        "--ansatz-file",
        help="ansatz file written by 'ansatz generate'",
    )
    parser.add_argument("--K", type=int, help="number of moment levels")
    parser.add_argument("--q", type=int, help="states kept per level (random variant)")
    parser.add_argument("--rng-seed", type=int, help="seed of the random variant")


def _solver(parser):
    parser.add_argument("--feas-tol", type=float, help="feasibility tolerance")
    parser.add_argument("--psd-tol", type=float, help="PSD tolerance")
    parser.add_argument("--max-iter", type=int, help="iteration budget")
    parser.add_argument("--mode", choices=MODES, help="solver mode")
    parser.add_argument("--init", choices=INITS, help="initial point")
    parser.add_argument("--init-seed", type=int, help="seed of the random initial point")
    parser.add_argument(
        "--shots", type=int,
        help="emulate finite-shot overlaps with this many shots",
    )
    parser.add_argument("--noise-seed", type=int, help="seed of the shot noise")
    parser.add_argument(
        "--sector", type=float, action='append',
        help="pin the magnetization to this value, repeatable",
    )
    parser.add_argument(
        "--no-oracle", action='store_true',
        help="skip the fidelity to the exact steady state",
    )


def _sweep(parser):
    parser.add_argument("--sweep-param", help="builder parameter to sweep, e.g., g")
    parser.add_argument("--sweep-values", type=float, nargs='+', help="values of the parameter")
    parser.add_argument("--sizes", type=int, nargs='+', help="K values per sweep point")


def make_parser():
    parser = argparse.ArgumentParser(
        prog='ness',
        description="steady states of Lindblad models from Galerkin-projected feasibility",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    sub = parser.add_subparsers(dest='command', required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser('solve', help="one solve with diagnostics", formatter_class=fmt)
    _common(p)
    _ansatz(p)
    _solver(p)

    p = sub.add_parser('sweep', help="CSV over a parameter and ansatz sizes", formatter_class=fmt)
    _common(p)
    _ansatz(p)
    _solver(p)
    _sweep(p)

    p = sub.add_parser('oracle', help="exact steady-state basis", formatter_class=fmt)
    _common(p)
    _sweep(p)

    p = sub.add_parser('symmetry', help="per-sector steady states", formatter_class=fmt)
    _common(p)
    _ansatz(p)
    _solver(p)
    p.add_argument("--symmetry", help="name of the model symmetry")
    p.add_argument("--symmetry-mode", choices=('twirl', 'constraints'),
                   help="twirl + Vandermonde, or one constrained solve per sector")

    p = sub.add_parser('ansatz', help="generate or inspect an ansatz file", formatter_class=fmt)
    p.add_argument('action', choices=('generate', 'inspect'))
    p.add_argument('path', help="ansatz file to write or read")
    _common(p)
    _ansatz(p)

    p = sub.add_parser('model', help="validate or emit a model file", formatter_class=fmt)
    p.add_argument('action', choices=('validate', 'emit'))
    p.add_argument('path', nargs='?', help="model file to write (emit)")
    _common(p)
    return parser


def dispatch(args):
    if args.command == 'ansatz' and args.action == 'inspect':
        return driver.cmd_ansatz_inspect(args.path)
    config = driver.RunConfig.from_args(args)
    if args.command == 'solve':
        return driver.cmd_solve(config)
    if args.command == 'sweep':
        return driver.cmd_sweep(config)
    if args.command == 'oracle':
        return driver.cmd_oracle(config)
    if args.command == 'symmetry':
        return driver.cmd_symmetry(config)
    if args.command == 'ansatz':
        return driver.cmd_ansatz_generate(config, args.path)
    if args.action == 'emit':
        if not args.path:
            raise ConfigError('model emit needs a path')
        return driver.cmd_model_emit(config, args.path)
    violations = driver.cmd_model_validate(config)
    if violations:
        raise ConfigError(f'{len(violations)} violations')
    return violations


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    FORMAT = '%(asctime)s %(levelname)s %(message)s'
    log_level = logging.DEBUG if args.verbose else logging.INFO
    logging.basicConfig(format=FORMAT, level=log_level, force=True)
    try:
        dispatch(args)
    except Exception as e:
        code = Protocol.exit_code(e)
        logging.error(f'{type(e).__name__}: {e}')
        if code == Protocol.unexpected:
            logging.debug(traceback.format_exc())
        return code
    return Protocol.ok


if __name__ == '__main__':
    raise SystemExit(main())
