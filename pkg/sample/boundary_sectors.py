import ness_py
from ness_py.model import magnetization
from ness_py.symmetry import extract_sectors
import logging


if __name__ == '__main__':
    import argparse

    parser = argparse.ArgumentParser(
        description="two steady states of the boundary-driven XXZ chain in the m=0 sector",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    parser.add_argument(
        "--n", type=int, default=4,
        help="number of qubits (even)",
    )
    parser.add_argument(
        "--delta", type=float, default=1.0,
        help="ZZ anisotropy",
    )
    parser.add_argument(
        "--Gamma", type=float, default=1.0,
        help="boundary coupling",
    )
    parser.add_argument(
        "--mu", type=float, default=0.5,
        help="driving bias",
    )
    parser.add_argument(
        "--K", type=int, default=4,
        help="number of moment levels",
    )
    parser.add_argument(
        "--verbose", action='store_true',
        help="show solver progress",
    )
    args = parser.parse_args()
    FORMAT = '%(asctime)s %(levelname)s %(message)s'
    log_level = logging.DEBUG if args.verbose else logging.INFO
    logging.basicConfig(format=FORMAT, level=log_level, force=True)

    model = ness_py.xxz_boundary_driven(args.n, args.delta, args.Gamma, args.mu)
    # half filling keeps the seed inside m = 0
    bits = '1' * (args.n // 2) + '0' * (args.n - args.n // 2)
    ansatz = ness_py.moment_states(model.hamiltonian, ness_py.basis_state(args.n, bits), args.K)
    logging.info(f'{model.label}: {len(ansatz)} ansatz states')
    spec = ness_py.SymmetrySpec.from_model(model, 'reflection_flip')
    constraints = ness_py.sector_constraints(magnetization(args.n), 0, ansatz)
    beta, sectors = extract_sectors(model, spec, ansatz, constraints=constraints)
    print(ness_py.Reporter.solution_table(beta.diagnostics()))
    print(ness_py.Reporter.sector_table(sectors))
    for s in sectors:
        if not s.missing:
            print(f'sector {s.label}')
            print(ness_py.Reporter.matrix_view(s.state))
