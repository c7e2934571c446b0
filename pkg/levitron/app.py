import argparse
import logging
import sys

from levitron.config import LOG_LEVEL, LOGGING_FILE
from levitron.drivers import run_convergence, run_simulate, run_sweep, write_report
from levitron.errors import (
    ConfigurationError,
    ContractViolation,
    EvaluationFailure,
    IntegrationFailure,
)
from levitron.mpe import format_coefficients
from levitron.settings import load_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3


def _float_list(text):
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers: {text!r}") from exc


def _label_list(text):
    return [item.strip() for item in text.split(",") if item.strip()]


def parse_arguments(argv=None):
    """Parse CLI arguments"""
    parser = argparse.ArgumentParser(
        prog="levitron",
        description="Splitting and multiproduct-expansion integrators for the Levitron",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    sim = commands.add_parser("sim", help="Integrate one trajectory and write CSV + report")
    sim.add_argument("--config", required=True, help="Path to the YAML run configuration")
    sim.add_argument("--out", default=None, help="CSV trajectory path (default: output.trajectory)")
    sim.add_argument("--report", default=None, help="Report path (default: output.report)")

    conv = commands.add_parser("convergence", help="Error/order table against an RK4 reference")
    conv.add_argument("--config", required=True, help="Path to the YAML run configuration")
    conv.add_argument(
        "--schemes",
        type=_label_list,
        default=["vv", "rk4", "mpe4", "mpe6"],
        help="Comma separated labels: vv, pv, rk4, td, mpe4 ... mpe10",
    )
    conv.add_argument("--h", type=_float_list, required=True, help="Comma separated step sizes")
    conv.add_argument("--report", default=None, help="Report path (default: output.report)")

    sweep = commands.add_parser("sweep", help="Scan the initial spin for escape")
    sweep.add_argument("--config", required=True, help="Path to the YAML run configuration")
    sweep.add_argument("--spin-min", type=float, default=None, help="Smallest initial p6")
    sweep.add_argument("--spin-max", type=float, default=None, help="Largest initial p6")
    sweep.add_argument("--points", type=int, default=None, help="Number of spin values")
    sweep.add_argument("--report", default=None, help="Report path (default: output.report)")

    coeffs = commands.add_parser("coeffs", help="Print the MPE tableau")
    coeffs.add_argument("--n", type=int, required=True, help="Number of extrapolation terms")
    coeffs.add_argument("--rational", action="store_true", help="Print exact fractions")

    return parser.parse_args(argv)


def _sweep_spins(args):
    given = (args.spin_min, args.spin_max, args.points)
    if all(value is None for value in given):
        return None
    if any(value is None for value in given):
        raise ConfigurationError(["sweep: --spin-min, --spin-max and --points go together"])
    if args.points < 0:
        raise ConfigurationError(["sweep: --points must be >= 0"])
    if args.points == 1:
        return [args.spin_min]
    step = (args.spin_max - args.spin_min) / max(args.points - 1, 1)
    return [args.spin_min + i * step for i in range(args.points)]


def run_command(args) -> int:
    if args.command == "coeffs":
        sys.stdout.write(format_coefficients(args.n, args.rational))
        return EXIT_OK

    config = load_config(args.config)
    if args.command == "sim":
        _, report = run_simulate(config, args.out, args.report)
        logger.info("report: %s", report.model_dump())
    elif args.command == "convergence":
        report = run_convergence(config, args.schemes, args.h)
        write_report(report, args.report or config.output.report)
        for row in report.rows:
            sys.stdout.write(f"{row.scheme} {row.h:.6g} {row.mean_error:.6e} {row.max_error:.6e}\n")
        for scheme, order in report.orders.items():
            sys.stdout.write(f"{scheme} order {'n/a' if order is None else f'{order:.3f}'}\n")
    elif args.command == "sweep":
        report = run_sweep(config, _sweep_spins(args))
        write_report(report, args.report or config.output.report)
        sys.stdout.write(f"stable interval: {report.stable_interval}\n")
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(
        level=LOG_LEVEL,
        format="%(asctime)s - %(levelname)s - %(message)s",
        filename=LOGGING_FILE or None,
        filemode="a",  # Append mode
    )
    args = parse_arguments(argv)
    try:
        return run_command(args)
    except (ConfigurationError, ContractViolation) as e:
        logger.error("Configuration error: %s", e)
        sys.stderr.write(f"configuration error: {e}\n")
        return EXIT_CONFIG
    except IntegrationFailure as e:
        state = e.state
        logger.error(
            "Integration failed at step %s: %s; last state t=%s q=%s p=%s",
            e.step,
            e,
            None if state is None else state.t,
            None if state is None else state.q.tolist(),
            None if state is None else state.p.tolist(),
        )
        sys.stderr.write(f"integration failure: {e}\n")
        return EXIT_INTEGRATION
    except EvaluationFailure as e:
        # a step can end on a state it never evaluated; the report then trips on it
        logger.error("Evaluation failed on an integrated state (component %s): %s", e.component, e)
        sys.stderr.write(f"integration failure: {e} (component={e.component})\n")
        return EXIT_INTEGRATION


if __name__ == "__main__":
    sys.exit(main())
