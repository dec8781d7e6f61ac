"""The `djrsp` command line. Parses a run request, executes it and writes the report.

Exit status is 0 when the report was written, whatever the claims measured, 2 for an invalid
request and 3 when the report could not be written.
"""

# Core dependencies
import argparse
import logging
from pathlib import Path
import sys
from typing import Sequence

# Project dependencies
from djrsp import __version__
from djrsp.bases import TargetState
from djrsp.errors import InvalidRequest, InvalidTarget, IoFailure
from djrsp.gates import Pairing
from djrsp.harness import ADJACENT_PAIRING, SHIFT_PAIRING, Mode, OutputFormat, RunRequest, run
from djrsp.protocol import Engine, PhaseGatePolicy


logger = logging.getLogger("DJRSP")

EXIT_SUCCESS = 0
EXIT_INVALID_REQUEST = 2
EXIT_IO_FAILURE = 3


############################################################
#### Argument parsing ######################################
############################################################


def parse_floats(text: str) -> tuple[float, ...]:
    """Parses a comma-separated list such as `0.6,0.8`"""
    try:
        return tuple(float(item) for item in text.split(",") if item.strip())
    except ValueError as error:
        raise InvalidRequest(f"Expected a comma-separated list of numbers, got {text!r}") from error


def parse_dimensions(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(item) for item in text.split(",") if item.strip())
    except ValueError as error:
        raise InvalidRequest(f"Expected comma-separated dimensions, got {text!r}") from error


def parse_target(text: str) -> TargetState:
    """Parses `magnitudes@phases`, e.g. `0.6,0.8@0,1.0472`. Without `@` every phase is zero."""
    magnitude_text, _, phase_text = text.partition("@")
    magnitudes = parse_floats(magnitude_text)
    phases = parse_floats(phase_text) if phase_text else (0.0,) * len(magnitudes)

    try:
        return TargetState(magnitudes, phases)
    except InvalidTarget as error:
        raise InvalidRequest(f"Invalid target {text!r}: {error}") from error


def parse_pairing(text: str) -> str | Pairing:
    """`adjacent`, `shift` or an explicit list of level pairs such as `0-1,2-3`"""
    if text in (ADJACENT_PAIRING, SHIFT_PAIRING):
        return text

    pairs: list[tuple[int, int]] = []
    for item in text.split(","):
        first, separator, second = item.partition("-")
        if not separator:
            raise InvalidRequest(f"Expected pairs written as a-b, got {item!r} in {text!r}")
        try:
            pairs.append((int(first), int(second)))
        except ValueError as error:
            raise InvalidRequest(f"Pair {item!r} must name two integer levels") from error
    return tuple(pairs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="djrsp",
        description="Simulate joint remote state preparation and check its claims",
    )
    parser.add_argument("mode", choices=[mode.value for mode in Mode])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--d", default="2", help="dimension or comma-separated dimensions")
    parser.add_argument(
        "--channel",
        action="append",
        default=[],
        help="channel coefficients a_0,...,a_(d-1); may be repeated",
    )
    parser.add_argument(
        "--target",
        action="append",
        default=[],
        help="target as magnitudes@phases in radians; may be repeated",
    )
    parser.add_argument("--random-targets", type=int, default=0, metavar="N")
    parser.add_argument(
        "--equatorial", action="store_true", help="random targets with equal magnitudes"
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--shots", type=int, default=1)
    parser.add_argument("--shift", type=int, default=1)
    parser.add_argument(
        "--pairing",
        default=ADJACENT_PAIRING,
        help="Controlled-U level pairing: adjacent, shift or explicit pairs like 0-1,2-3",
    )
    parser.add_argument(
        "--engine", choices=[engine.value for engine in Engine], default=Engine.AUTO.value
    )
    parser.add_argument(
        "--phase-policy",
        choices=[policy.value for policy in PhaseGatePolicy],
        default=PhaseGatePolicy.PARITY.value,
    )
    parser.add_argument(
        "--format",
        choices=[output_format.value for output_format in OutputFormat],
        default=OutputFormat.JSON.value,
    )
    parser.add_argument("--out", type=Path, default=None, help="report path, stdout if omitted")
    parser.add_argument("--tol", type=float, default=None, help="success fidelity tolerance")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def request_from_args(args: argparse.Namespace) -> RunRequest:
    return RunRequest(
        mode=Mode(args.mode),
        dimensions=parse_dimensions(args.d),
        channels=tuple(parse_floats(text) for text in args.channel),
        targets=tuple(parse_target(text) for text in args.target),
        random_targets=args.random_targets,
        equatorial=args.equatorial,
        seed=args.seed,
        shots=args.shots,
        shift=args.shift,
        pairing=parse_pairing(args.pairing),
        engine=Engine(args.engine),
        phase_policy=PhaseGatePolicy(args.phase_policy),
        output_format=OutputFormat(args.format),
        out=args.out,
        success_tolerance=args.tol,
        workers=args.workers,
    )


############################################################
#### Entry point ###########################################
############################################################


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    level = logging.WARNING
    if args.verbose == 1:
        level = logging.INFO
    elif args.verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        request = request_from_args(args)
        run(request)
    except InvalidRequest as error:
        logger.error(f"Invalid request: {error}")
        return EXIT_INVALID_REQUEST
    except IoFailure as error:
        logger.error(str(error))
        return EXIT_IO_FAILURE

    return EXIT_SUCCESS


if __name__ == "__main__":
    sys.exit(main())
