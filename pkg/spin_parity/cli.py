"""Command-line interface for the spin parity simulator."""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from spin_parity import __version__
from spin_parity.config import Config
from spin_parity.document import ResultDocument
from spin_parity.exceptions import ScenarioError, SpinParityError
from spin_parity.montecarlo import run_exact, run_trials
from spin_parity.protocols.bell import detector_table
from spin_parity.reporters import get_reporter
from spin_parity.scenario import ScenarioConfig, load_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def run_command(scenario: ScenarioConfig, settings: Optional[Config] = None,
                output_path: Optional[Path] = None) -> ResultDocument:
    """Run a scenario and build its result document.

    Args:
        scenario: validated scenario; ``trials == 0`` selects exact enumeration
        settings: execution settings (workers, depth, confidence); defaults if None
        output_path: when given, the rendered document is written there

    Returns:
        The result document
    """
    settings = settings or Config()
    if scenario.exact:
        exact = run_exact(scenario,
                          max_depth=settings.get('simulation.max_depth'),
                          fold_interchangeable=settings.get('simulation.fold_interchangeable'))
        document_kwargs = {"exact": exact}
    else:
        stats = run_trials(scenario, scenario.trials, scenario.seed,
                           workers=settings.get('simulation.workers'),
                           confidence=settings.get('output.confidence'))
        document_kwargs = {"stats": stats}

    table = detector_table(scenario.device_layout()) if scenario.protocol == "table1" else None
    document = ResultDocument(scenario=scenario, detector_table=table, **document_kwargs)
    if output_path is not None:
        get_reporter(scenario.format).generate(document, output_path)
    return document


def _build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument('--trials', type=int, help='Number of trials; 0 selects exact enumeration')
    common.add_argument('--seed', type=int, help='Master seed (64-bit unsigned)')
    common.add_argument('--out', type=str, help='Write the document to this file instead of stdout')
    common.add_argument('--format', choices=['text', 'csv', 'json'], help='Output format')
    common.add_argument('--force-swap', choices=['on', 'off', 'random'],
                        help='Pin every nonadiabatic separation to swap / no swap')
    common.add_argument('--workers', type=int, help='Worker processes for sampled runs')
    common.add_argument('--config', type=str, help='Path to configuration file (YAML or JSON)')
    common.add_argument('-v', '--verbose', action='count', default=0,
                        help='More log output (-v info, -vv debug)')

    parser = _ArgumentParser(
        prog='spin-parity',
        description='Spin parity protocol simulator - Bell measurement, Bell generation, GHZ growth',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Sample a scenario file
  spin-parity run scenarios/ghz3.txt --trials 100000 --seed 7

  # Exact branch enumeration of the same scenario
  spin-parity exact scenarios/ghz3.txt

  # Reproduce the detector table
  spin-parity table1 --format csv
        """
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    run = commands.add_parser('run', parents=[common], help='Sample a scenario file')
    run.add_argument('scenario', type=str, help='Scenario file (key=value tokens)')
    exact = commands.add_parser('exact', parents=[common], help='Enumerate every branch of a scenario file')
    exact.add_argument('scenario', type=str, help='Scenario file (key=value tokens)')
    commands.add_parser('table1', parents=[common], help='Measure all four Bell states and print the detector table')
    return parser


def _configure_logging(settings: Config, verbose: int):
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = settings.log_level
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s', stream=sys.stderr)


def _banner(title: str):
    print("=" * 60, file=sys.stderr)
    print(title, file=sys.stderr)
    print("=" * 60, file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = _build_parser()
    args = parser.parse_args(argv)

    try:
        settings = Config(args.config) if args.config else Config()
    except (OSError, ValueError) as e:
        print(f"Error loading configuration: {e}", file=sys.stderr)
        return EXIT_USAGE
    if args.workers is not None:
        if args.workers < 1:
            parser.error(f"--workers must be >= 1, got {args.workers}")
        settings.set('simulation.workers', args.workers)
    _configure_logging(settings, args.verbose)

    try:
        defaults = settings.scenario_defaults()
        if args.command == 'table1':
            scenario = ScenarioConfig(protocol='table1', trials=defaults['trials'], seed=defaults['seed'],
                                      format=defaults['format'])
        else:
            scenario = load_scenario(args.scenario, defaults)
        scenario = scenario.with_overrides(
            trials=0 if args.command == 'exact' else args.trials,
            seed=args.seed,
            force_swap=args.force_swap,
            format=args.format,
        )
    except (ScenarioError, FileNotFoundError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE

    mode = "exact enumeration" if scenario.exact else f"{scenario.trials} trials, seed {scenario.seed}"
    _banner(f"Running {scenario.protocol} ({mode})")

    try:
        output_path = Path(args.out) if args.out else None
        document = run_command(scenario, settings, output_path)
    except ScenarioError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"Error writing output: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except SpinParityError as e:
        print(f"Error: {e}", file=sys.stderr)
        logger.debug("protocol failure", exc_info=True)
        return EXIT_RUNTIME

    if output_path is None:
        sys.stdout.write(get_reporter(scenario.format).render(document))
    _banner("Done")
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
