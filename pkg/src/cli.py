"""
Command-line front end for iqprob.

Every subcommand reads matrices in the shared JSON format and prints one
JSON document (schema "iqprob/1") to stdout; logs go to stderr. Exit codes:
0 on success, 1 on invalid input, 2 when a checked property or reference
table fails.
"""

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from dotenv import load_dotenv

from src import __version__
from src.classical_ip import check_axioms_classical, check_derived_inequalities, measure_from_dict
from src.errors import IQProbError, ValidationError
from src.examples_spin import AXES, reproduce_tables, spin1_catalog
from src.hermitian_core import (
    DEFAULT_TOLERANCES,
    DensityMatrix,
    Projector,
    Tolerances,
    operator_norm,
    validate_density,
    validate_projector,
)
from src.imprecise_probability import (
    check_axioms,
    conditional_interval,
    dominance_spectrum,
    find_non_subadditivity_witness,
    interval_distance,
    probability_interval,
    probability_operators,
    sure_dominance,
)
from src.matrix_io import dumps, load_matrix, load_matrix_list, read_json
from src.measurement_models import (
    MeasurementOrder,
    ProjectiveResolution,
    no_go_certificate,
    search_two_time_witnesses,
    two_time_mean,
    two_time_probability,
)
from src.projector_geometry import IntersectionMethod, cs_decompose, intersection_projector
from src.property_suite import SUITES, PropertySuiteRunner, summarize

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILED = 2

TOLERANCE_ENV = 'IQPROB_TOL'


@dataclass(frozen=True)
class RunConfig:
    command: str
    paths: Tuple[str, ...] = ()
    tolerances: Tolerances = DEFAULT_TOLERANCES
    method: IntersectionMethod = IntersectionMethod.SPECTRAL
    seed: int = 0
    output: str = 'json'
    verbose: bool = False


@dataclass
class CommandResult:
    payload: dict
    passed: bool = True
    text: Optional[str] = None


def setup_logging(verbose: bool = False):
    """Configure root logging on stderr; INFO when verbose, WARNING otherwise."""
    level = logging.INFO if verbose else logging.WARNING
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
        force=True,
    )


def load_tolerances(overrides: Sequence[str] = ()) -> Tolerances:
    """Defaults, then IQPROB_TOL (after .env loading), then each --tol override."""
    load_dotenv()
    tolerances = Tolerances.from_string(os.getenv(TOLERANCE_ENV, ''))
    for override in overrides:
        tolerances = Tolerances.from_string(override, tolerances)
    return tolerances


def build_config(args: argparse.Namespace) -> RunConfig:
    if args.seed < 0:
        raise ValidationError(f"Seed must be a non-negative integer, got {args.seed}")
    return RunConfig(
        command=args.command,
        paths=tuple(str(path) for path in _paths(args)),
        tolerances=load_tolerances(args.tol or ()),
        method=IntersectionMethod.parse(args.method),
        seed=args.seed,
        output=args.output,
        verbose=args.verbose,
    )


def _paths(args: argparse.Namespace) -> List[str]:
    paths = []
    for name in ('rho', 'p', 'q', 'p1', 'q1', 'p2', 'q2', 'p_resolution', 'q_resolution', 'measure'):
        value = getattr(args, name, None)
        if value:
            paths.append(value)
    return paths


def _with_path(path: str, loader):
    try:
        return loader()
    except IQProbError as e:
        if e.path is None:
            e.with_path(path)
        raise


def load_projector(path: str, tol: Tolerances) -> Projector:
    return _with_path(path, lambda: validate_projector(load_matrix(path), tol))


def load_density(path: str, tol: Tolerances) -> DensityMatrix:
    return _with_path(path, lambda: validate_density(load_matrix(path), tol))


def load_resolution(path: str, tol: Tolerances) -> ProjectiveResolution:
    return _with_path(path, lambda: ProjectiveResolution.from_matrices(load_matrix_list(path), tol))


# Subcommands

def cmd_decompose(args, config: RunConfig) -> CommandResult:
    tol = config.tolerances
    p, q = load_projector(args.p, tol), load_projector(args.q, tol)
    decomposition = cs_decompose(p, q, tol)
    error_p, error_q = decomposition.reconstruction_errors(p, q)
    return CommandResult({
        'decomposition': decomposition,
        'reconstruction_errors': {'p': error_p, 'q': error_q},
    })


def cmd_bounds(args, config: RunConfig) -> CommandResult:
    tol = config.tolerances
    p, q = load_projector(args.p, tol), load_projector(args.q, tol)
    operators = probability_operators(p, q, tol)
    payload = {'operators': operators}

    if config.method is not IntersectionMethod.SPECTRAL:
        alternative = intersection_projector(p, q, config.method, tol)
        payload['intersection_method'] = config.method.value
        payload['method_deviation'] = operator_norm(alternative.matrix - operators.lower.matrix)
    return CommandResult(payload)


def cmd_interval(args, config: RunConfig) -> CommandResult:
    tol = config.tolerances
    rho = load_density(args.rho, tol)
    p, q = load_projector(args.p, tol), load_projector(args.q, tol)
    if args.conditional:
        return CommandResult({'conditional': True, 'interval': conditional_interval(rho, p, q, tol)})
    return CommandResult({'conditional': False, 'interval': probability_interval(rho, p, q, tol)})


def cmd_compare(args, config: RunConfig) -> CommandResult:
    tol = config.tolerances
    rho = load_density(args.rho, tol)
    pair1 = (load_projector(args.p1, tol), load_projector(args.q1, tol))
    pair2 = (load_projector(args.p2, tol), load_projector(args.q2, tol))
    first = probability_interval(rho, *pair1, tol)
    second = probability_interval(rho, *pair2, tol)
    return CommandResult({
        'first': first,
        'second': second,
        'distance': interval_distance(first, second),
        'dominance': sure_dominance(rho, pair1, pair2, tol),
        'dominance_spectrum': dominance_spectrum(pair1, pair2, tol),
    })


def cmd_axioms(args, config: RunConfig) -> CommandResult:
    tol = config.tolerances
    if bool(args.p) != bool(args.q):
        raise ValidationError("axioms needs both P and Q, or neither for the random-pair suite")

    if not args.p:
        runner = PropertySuiteRunner(tol, config.seed, n_jobs=args.jobs, progress=args.progress)
        frame = runner.axiom_suite(count=args.pairs, dims=(args.dim, args.dim), states=args.samples)
        summary = summarize({'axioms': frame})
        failures = frame[~frame['passed'].astype(bool)]
        return CommandResult(
            {
                'summary': summary.to_dict(orient='records'),
                'failures': failures.to_dict(orient='records'),
            },
            passed=failures.empty,
            text=summary.to_string(index=False),
        )

    p, q = load_projector(args.p, tol), load_projector(args.q, tol)
    states = [load_density(path, tol) for path in args.state or ()]
    report = check_axioms(p, q, states, tol, seed=config.seed, synthesized_states=args.samples)
    return CommandResult({'report': report}, passed=report.passed)


def cmd_nogo(args, config: RunConfig) -> CommandResult:
    tol = config.tolerances
    p_resolution = load_resolution(args.p_resolution, tol)
    q_resolution = load_resolution(args.q_resolution, tol)
    certificate = no_go_certificate(p_resolution, q_resolution, tol)
    return CommandResult({'certificate': certificate.to_dict(emit_witnesses=args.emit_witnesses)})


def cmd_twotime(args, config: RunConfig) -> CommandResult:
    tol = config.tolerances
    rho = load_density(args.rho, tol)
    p, q = load_projector(args.p, tol), load_projector(args.q, tol)
    if args.order == 'mean':
        return CommandResult({'order': 'mean', 'value': two_time_mean(rho, p, q)})
    order = MeasurementOrder.parse(args.order)
    return CommandResult({'order': order.value, 'value': two_time_probability(rho, p, q, order)})


def cmd_search(args, config: RunConfig) -> CommandResult:
    if args.kind == 'non-subadditivity':
        witness = find_non_subadditivity_witness(config.seed, args.max_trials, tol=config.tolerances)
        return CommandResult({'kind': args.kind, 'witness': witness or 'not found'},
                             passed=witness is not None)

    report = search_two_time_witnesses(args.dim, config.seed, args.max_trials)
    return CommandResult({'kind': args.kind, 'witnesses': report},
                         passed=report.above is not None and report.below is not None)


def cmd_classical(args, config: RunConfig) -> CommandResult:
    measure = measure_from_dict(read_json(args.measure), args.measure)
    axioms = check_axioms_classical(measure, seed=config.seed)
    derived = check_derived_inequalities(measure, seed=config.seed)
    return CommandResult(
        {'measure': measure, 'axioms': axioms, 'derived': derived},
        passed=axioms.passed and derived.passed,
    )


def cmd_spin1(args, config: RunConfig) -> CommandResult:
    if args.reproduce:
        report = reproduce_tables(config.tolerances)
        return CommandResult({'reproduction': report}, passed=report.passed, text=report.format_report())

    catalog = spin1_catalog()
    return CommandResult({
        'observables': {axis: catalog.observable(axis) for axis in AXES},
        'projectors': {
            axis: {label: projector.matrix for label, projector
                   in zip(catalog.resolution(axis).labels, catalog.resolution(axis))}
            for axis in AXES
        },
    })


def cmd_suite(args, config: RunConfig) -> CommandResult:
    runner = PropertySuiteRunner(config.tolerances, config.seed, n_jobs=args.jobs, progress=args.progress)
    names = SUITES if args.name == 'all' else (args.name,)
    counts = {name: args.count for name in names} if args.count else {}
    frames = runner.run_all(names, counts)

    summary = summarize(frames)
    failures = {
        name: frame[~frame['passed'].astype(bool)].to_dict(orient='records')
        for name, frame in frames.items()
    }
    return CommandResult(
        {'summary': summary.to_dict(orient='records'), 'failures': failures},
        passed=bool((summary['failed'] == 0).all()),
        text=summary.to_string(index=False),
    )


COMMANDS = {
    'decompose': cmd_decompose,
    'bounds': cmd_bounds,
    'interval': cmd_interval,
    'compare': cmd_compare,
    'axioms': cmd_axioms,
    'nogo': cmd_nogo,
    'twotime': cmd_twotime,
    'search': cmd_search,
    'classical': cmd_classical,
    'spin1': cmd_spin1,
    'suite': cmd_suite,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--output', choices=('json', 'pretty'), default='json',
                        help='Output mode (default: json)')
    common.add_argument('--tol', action='append', metavar='KEY=VALUE',
                        help=f'Tolerance override, repeatable; applied after ${TOLERANCE_ENV}')
    common.add_argument('--method', default=IntersectionMethod.SPECTRAL.value,
                        help='Intersection method: ' + ', '.join(m.value for m in IntersectionMethod))
    common.add_argument('--seed', type=int, default=0, help='Random seed (default: 0)')
    common.add_argument('--verbose', '-v', action='store_true', help='Enable verbose logging')

    parser = argparse.ArgumentParser(
        prog='iqprob',
        description='Lower/upper joint probabilities for non-commuting projectors',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # CS decomposition and probability operators of a projector pair
  iqprob decompose P.json Q.json
  iqprob bounds P.json Q.json --method harmonic-mean

  # Probability interval on a state
  iqprob interval RHO.json P.json Q.json --conditional

  # Axiom checks: one pair, or 100 seeded random pairs in dim 5
  iqprob axioms P.json Q.json --samples 10
  iqprob axioms --pairs 100 --dim 5

  # Reference spin-1 tables
  iqprob spin1 --reproduce --output pretty
        """,
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='command', required=True)

    sub = commands.add_parser('decompose', parents=[common], help='CS decomposition of P, Q')
    sub.add_argument('p')
    sub.add_argument('q')

    sub = commands.add_parser('bounds', parents=[common], help='Lower and upper probability operators')
    sub.add_argument('p')
    sub.add_argument('q')

    sub = commands.add_parser('interval', parents=[common], help='Probability interval on a state')
    sub.add_argument('rho')
    sub.add_argument('p')
    sub.add_argument('q')
    sub.add_argument('--conditional', action='store_true', help='Divide both bounds by tr(rho Q)')

    sub = commands.add_parser('compare', parents=[common], help='Sure dominance of two pairs on a state')
    for name in ('rho', 'p1', 'q1', 'p2', 'q2'):
        sub.add_argument(name)

    sub = commands.add_parser('axioms', parents=[common], help='Axiom report for a pair or random pairs')
    sub.add_argument('p', nargs='?')
    sub.add_argument('q', nargs='?')
    sub.add_argument('--state', action='append', metavar='RHO.json', help='Extra state, repeatable')
    sub.add_argument('--samples', type=int, default=10, help='Synthesized commuting states per pair')
    sub.add_argument('--pairs', type=int, default=100, help='Random pairs when P, Q are omitted')
    sub.add_argument('--dim', type=int, default=5, help='Dimension of the random pairs')
    sub.add_argument('--jobs', type=int, default=1, help='Parallel jobs for the random-pair suite')
    sub.add_argument('--progress', action='store_true', help='Show a progress bar')

    sub = commands.add_parser('nogo', parents=[common], help='No-go certificate for two resolutions')
    sub.add_argument('p_resolution')
    sub.add_argument('q_resolution')
    sub.add_argument('--emit-witnesses', action='store_true',
                     help='Include the defect and intersection matrices')

    sub = commands.add_parser('twotime', parents=[common], help='Two-time probability or mean')
    sub.add_argument('rho')
    sub.add_argument('p')
    sub.add_argument('q')
    sub.add_argument('--order', choices=('pq', 'qp', 'mean'), default='pq')

    sub = commands.add_parser('search', parents=[common], help='Seeded counterexample searches')
    sub.add_argument('kind', choices=('non-subadditivity', 'two-time'))
    sub.add_argument('--max-trials', type=int, default=10_000)
    sub.add_argument('--dim', type=int, default=3, help='Dimension for the two-time search')

    sub = commands.add_parser('classical', parents=[common], help='Classical imprecise-measure report')
    sub.add_argument('measure')

    sub = commands.add_parser('spin1', parents=[common], help='Spin-1 catalog and reference tables')
    sub.add_argument('--reproduce', action='store_true', help='Recompute and compare the reference tables')

    sub = commands.add_parser('suite', parents=[common], help='Seeded property suites')
    sub.add_argument('name', choices=('all',) + SUITES)
    sub.add_argument('--count', type=int, help='Instances per suite (suite default when omitted)')
    sub.add_argument('--jobs', type=int, default=1, help='Parallel jobs')
    sub.add_argument('--progress', action='store_true', help='Show progress bars')

    return parser


def render(result: CommandResult, config: RunConfig) -> str:
    if config.output == 'pretty' and result.text is not None:
        return result.text
    return dumps({'command': config.command, 'passed': result.passed, 'result': result.payload})


def error_document(error: IQProbError) -> str:
    return dumps({'error': error.to_dict()})


def run(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    """Run one CLI invocation and return its exit code."""
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INVALID

    setup_logging(args.verbose)

    try:
        config = build_config(args)
        result = COMMANDS[args.command](args, config)
    except IQProbError as e:
        logger.error(f"{e.code}: {e.message}" + (f" ({e.path})" if e.path else ''))
        print(error_document(e), file=stdout)
        return EXIT_INVALID
    except ValueError as e:
        error = ValidationError(str(e))
        logger.error(f"Invalid argument: {e}")
        print(error_document(error), file=stdout)
        return EXIT_INVALID

    print(render(result, config), file=stdout)
    if not result.passed:
        logger.warning(f"{config.command}: checked properties failed")
        return EXIT_FAILED
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()
