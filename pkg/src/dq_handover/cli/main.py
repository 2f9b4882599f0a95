"""Command-line entry point `dq-handover`."""

import argparse
import logging
import sys
import typing
from typing import Optional

from dq_handover.cli.commands import (
    cmd_classify,
    cmd_eval,
    cmd_predict,
    cmd_synth,
    cmd_train,
)
from dq_handover.cli.config import resolve_config
from dq_handover.helpers.errors import DqHandoverError
from dq_handover.helpers.helpers import PoseMetric

logger = logging.getLogger(__name__)

LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)
POSE_METRICS = typing.get_args(PoseMetric)


def _common_arguments() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        add_help=False, argument_default=argparse.SUPPRESS
    )
    parser.add_argument(
        "--config", help="Flat JSON file of settings (see RunConfig)."
    )
    parser.add_argument("--seed", type=int, help="Seed of the run.")
    parser.add_argument("--out", help="Output directory of the run.")
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log INFO (-v) or DEBUG (-vv) messages to stderr.",
    )
    return parser


def _parser() -> argparse.ArgumentParser:
    common = _common_arguments()
    parser = argparse.ArgumentParser(
        prog="dq-handover",
        description=(
            "Classify handover trajectories and predict their continuation "
            "with GP models over dual-quaternion poses."
        ),
    )
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser(
        "synth",
        parents=[common],
        argument_default=argparse.SUPPRESS,
        help="Generate the synthetic handover dataset.",
    )
    synth.add_argument(
        "--conditions",
        nargs="+",
        metavar="LABEL",
        help="Condition labels to generate, e.g. b-r t-u (default: all).",
    )
    synth.add_argument("--repetitions", type=int)
    synth.add_argument("--min-steps", dest="min_steps", type=int)
    synth.add_argument("--max-steps", dest="max_steps", type=int)
    synth.add_argument("--noise-position", dest="noise_position", type=float)
    synth.add_argument("--noise-angle", dest="noise_angle", type=float)
    synth.add_argument(
        "--no-duration-jitter",
        dest="duration_jitter",
        action="store_false",
        help="Give every repetition the same length.",
    )

    train = commands.add_parser(
        "train",
        parents=[common],
        argument_default=argparse.SUPPRESS,
        help="Split the dataset and fit one GP per condition.",
    )
    train.add_argument("--dataset", help="Dataset manifest to train on.")
    train.add_argument("--train-k", dest="train_k", type=int)
    train.add_argument("--max-points", dest="max_points", type=int)
    train.add_argument("--n-starts", dest="n_starts", type=int)
    train.add_argument("--max-iterations", dest="max_iterations", type=int)
    train.add_argument(
        "--metric",
        dest="gp_metric",
        choices=POSE_METRICS,
        help="Input metric of the GPs (default: d_mag).",
    )

    classify = commands.add_parser(
        "classify",
        parents=[common],
        argument_default=argparse.SUPPRESS,
        help="Classify the test trajectories.",
    )
    classify.add_argument("--dataset", help="Dataset manifest.")
    classify.add_argument("--abs-nominate", dest="abs_nominate", type=float)
    classify.add_argument("--abs-eliminate", dest="abs_eliminate", type=float)
    classify.add_argument("--window", dest="window_m", type=int)
    classify.add_argument("--win-nominate", dest="win_nominate", type=float)
    classify.add_argument("--win-eliminate", dest="win_eliminate", type=float)
    classify.add_argument("--eigen-floor", dest="eigen_floor", type=float)

    predict = commands.add_parser(
        "predict",
        parents=[common],
        argument_default=argparse.SUPPRESS,
        help="Evaluate GP predictions from the nomination step onward.",
    )
    predict.add_argument("--dataset", help="Dataset manifest.")
    predict.add_argument(
        "--oracle-labels",
        dest="oracle_labels",
        action="store_true",
        help="Predict with the true condition's model.",
    )
    predict.add_argument(
        "--workspace-bound", dest="workspace_bound", type=float
    )

    evaluate = commands.add_parser(
        "eval",
        parents=[common],
        argument_default=argparse.SUPPRESS,
        help="Merge the reports and check acceptance thresholds.",
    )
    evaluate.add_argument("--min-accuracy", dest="min_accuracy", type=float)
    evaluate.add_argument(
        "--max-nomination-fraction",
        dest="max_nomination_fraction",
        type=float,
    )
    evaluate.add_argument("--rmse-factor", dest="rmse_factor", type=float)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    """Run a `dq-handover` subcommand.

    Returns
    -------
        Exit code: 0 on success, 1 when `eval` thresholds fail, 2 on errors.

    """
    args = vars(_parser().parse_args(argv))
    command = args.pop("command")
    verbosity = args.pop("verbose", 0)
    config_path = args.pop("config", None)

    logging.basicConfig(
        level=LOG_LEVELS[min(verbosity, len(LOG_LEVELS) - 1)],
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        cfg = resolve_config(config_path, args)
        match command:
            case "synth":
                cmd_synth(cfg)
            case "train":
                cmd_train(cfg)
            case "classify":
                cmd_classify(cfg)
            case "predict":
                cmd_predict(cfg)
            case "eval":
                return cmd_eval(cfg)
    except DqHandoverError as e:
        logger.debug("Command %s failed.", command, exc_info=True)
        print(f"dq-handover {command}: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
