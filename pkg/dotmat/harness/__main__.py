import argparse
import logging
import sys
import time
from typing import Any, Callable, Dict, List, NoReturn, Optional

import pandas as pd

from ..common.config import load_yaml_mapping
from ..common.exceptions import (
    ArgumentParsingError,
    BoundsError,
    ConfigurationError,
    DegenerateInputError,
    GridCellError,
    InitializationError,
    IntegrityError,
    ParseError,
    SchemaError,
    UnknownIdError,
)
from ..common.logger import init_logging, logger
from ..common.util import format_float
from ..data.parsers import (
    parse_csv,
    parse_movielens,
    read_dataset,
    write_dataset,
)
from ..data.sampling import SplitDataset, split_train_test
from ..metrics.accuracy import PredictionSet, mae
from ..model.config import DEFAULT_CLAMP_EPS, TrainConfig
from ..model.dataset import InteractionDataset
from ..model.persistence import load_model, save_model
from ..trainers import TRAINERS
from ..trainers.hybrid import DotMatHybridTrainer, densify, hybrid_configs
from ..trainers.predictors import FactorPredictor, GloVePredictor, Predictor
from ..trainers.trainer import Trainer
from .display import display, start_display, stop_display
from .grid import ALGORITHMS, GridSpec, run_grid
from .report import emit_csv, emit_json

EXIT_SUCCESS = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


def handle_argparse_error(err: ArgumentParsingError) -> None:
    print(f"error: {err.msg}", file=sys.stderr)
    print(err.help_str, file=sys.stderr)


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the command line exit code"""
    if isinstance(exc, GridCellError):
        return exit_code_for(exc.cause)
    if isinstance(
        exc,
        (
            ArgumentParsingError,
            InitializationError,
            ConfigurationError,
            BoundsError,
        ),
    ):
        return EXIT_USAGE
    if isinstance(
        exc,
        (
            ParseError,
            SchemaError,
            IntegrityError,
            UnknownIdError,
            DegenerateInputError,
            OSError,
            UnicodeError,
        ),
    ):
        return EXIT_DATA
    return EXIT_INTERNAL


def load_input(args: argparse.Namespace) -> InteractionDataset:
    """Load the --input dataset according to --format"""
    r_max = args.r_max
    if args.format == "movielens":
        return parse_movielens(args.input, r_max=r_max)
    if args.format == "csv":
        return parse_csv(
            args.input,
            user_col=args.user_col,
            item_col=args.item_col,
            rating_col=args.rating_col,
            timestamp_col=args.timestamp_col,
            r_max=r_max,
            sep=args.sep,
        )
    return read_dataset(args.input, r_max=r_max)


def run_ingest(args: argparse.Namespace) -> None:
    dataset = load_input(args)
    write_dataset(dataset, args.output)
    logger.info(f"Dataset cached in {args.output}")


def make_trainer(args: argparse.Namespace, config: TrainConfig) -> Trainer:
    if args.algo == DotMatHybridTrainer.NAME:
        return DotMatHybridTrainer(*hybrid_configs(config))
    return TRAINERS[args.algo](config)


def run_train(args: argparse.Namespace) -> None:
    dataset = load_input(args)
    config = TrainConfig(
        learning_rate=args.lr,
        epochs=args.epochs,
        dim=args.dim,
        clamp_eps=args.clamp_eps,
        seed=args.seed,
        pairs_per_user=args.pairs_per_user,
    )
    if args.test_fraction is not None:
        split = split_train_test(dataset, args.test_fraction, args.seed)
    else:
        split = SplitDataset(train=dataset, test=dataset.with_triples(()))
    trainer = make_trainer(args, config)
    logger.info(
        f"Training {args.algo} on {len(split.train)} ratings "
        f"({len(split.users)} users, {len(split.items)} items, "
        f"r_max={split.r_max})"
    )
    model, trace = trainer.fit(split)
    save_model(model, args.model_out)
    logger.info(f"Model written in {args.model_out}")
    if args.trace_out:
        trace.to_csv(args.trace_out)
    if split.test.triples:
        predictor = trainer.predictor(model, split.r_max)
        predicted = predictor.predict_many(
            (t.user_id, t.item_id) for t in split.test.triples
        )
        preds = PredictionSet.from_arrays(split.test, predicted)
        logger.info(f"Test MAE: {mae(preds):.6f}")


def model_r_max(args: argparse.Namespace) -> float:
    """Rating ceiling a model was trained with. Not inferred from --input,
    whose maximum may differ from the training data's"""
    if args.r_max is None:
        raise InitializationError(
            f"'{args.command}' needs --r-max, the rating ceiling the model "
            "was trained with (see the logs of 'train')"
        )
    return args.r_max


def make_predictor(args: argparse.Namespace, r_max: float) -> Predictor:
    model = load_model(args.model)
    if args.link == "glove":
        return GloVePredictor(model, r_max)
    return FactorPredictor(model, r_max, args.clamp_eps)


def run_predict(args: argparse.Namespace) -> None:
    r_max = model_r_max(args)
    dataset = load_input(args)
    predictor = make_predictor(args, r_max)
    predicted = predictor.predict_many(
        (t.user_id, t.item_id) for t in dataset.triples
    )
    df = pd.DataFrame(
        {
            "user_id": [t.user_id for t in dataset.triples],
            "item_id": [t.item_id for t in dataset.triples],
            "predicted": [format_float(p) for p in predicted],
            "actual": [format_float(t.rating) for t in dataset.triples],
        }
    )
    df.to_csv(args.output, index=False, lineterminator="\n")
    if dataset.triples:
        logger.info(
            f"MAE over {len(dataset)} ratings: "
            f"{mae(PredictionSet.from_arrays(dataset, predicted)):.6f}"
        )


def run_densify(args: argparse.Namespace) -> None:
    model_r_max(args)
    dataset = load_input(args)
    model = load_model(args.model)
    dense = densify(
        model, dataset, dataset.users, dataset.items, args.clamp_eps
    )
    write_dataset(dense, args.output)
    logger.info(
        f"Densified dataset ({len(dense)} ratings) written in {args.output}"
    )


def grid_spec_from_args(args: argparse.Namespace) -> GridSpec:
    """Config file values first, then command line flags on top"""
    values: Dict[str, Any] = (
        load_yaml_mapping(args.config) if args.config else {}
    )
    flags = {
        "algorithms": args.algos,
        "learning_rates": args.lrs,
        "sample_sizes": args.samples,
        "seed": args.seed,
        "dim": args.dim,
        "epochs": args.epochs,
        "test_fraction": args.test_fraction,
        "top_k": args.top_k,
        "pairs_per_user": args.pairs_per_user,
        "clamp_eps": args.clamp_eps,
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    if args.timing:
        values["record_timing"] = True
    if "algorithms" not in values:
        raise InitializationError(
            "No algorithm to run, use '--algos' or set 'algorithms' in the "
            "config file"
        )
    return GridSpec.from_mapping(values)


def run_grid_command(args: argparse.Namespace) -> None:
    spec = grid_spec_from_args(args)
    dataset = load_input(args)
    on_cell = display.record_row if args.display else None
    on_cell_start = display.start_cell if args.display else None
    report = run_grid(
        dataset, spec, on_cell=on_cell, on_cell_start=on_cell_start
    )
    emit_csv(report, args.out_csv)
    if args.out_json:
        emit_json(report, args.out_json)
    logger.info(f"{len(report.rows)} grid cells written in {args.out_csv}")


def run_grid_with_display(args: argparse.Namespace) -> None:
    """Run a grid with terminal display enabled"""
    exc: Optional[BaseException] = None
    start_display()
    try:
        run_grid_command(args)
        # Wait for user to manually close display
        display.notify_finished()
        while True:
            time.sleep(0.2)
    except KeyboardInterrupt:
        pass
    except Exception as e:  # Stop the display before reporting anything
        exc = e
    stop_display()  # Waits for display threads to exit gracefully
    if exc:
        raise exc


COMMANDS: Dict[str, Callable[[argparse.Namespace], None]] = {
    "ingest": run_ingest,
    "train": run_train,
    "predict": run_predict,
    "grid": run_grid_command,
    "densify": run_densify,
}


def run_dotmat(arguments: List[str]) -> int:
    """Main dotmat script

    :param arguments: list of command line arguments
    :return: exit code
    """
    try:
        args = parse_arguments(arguments)
    except ArgumentParsingError as e:
        handle_argparse_error(e)
        return EXIT_USAGE

    # Logging stream
    if args.logs == "stdout" and getattr(args, "display", False):
        handle_argparse_error(
            ArgumentParsingError(
                "Cannot write logs to stdout while terminal display is enabled",
                "",
            )
        )
        return EXIT_USAGE
    if args.debug:
        level = logging.DEBUG
    elif args.logs:
        level = logging.INFO
    else:
        level = logging.WARNING
    init_logging(args.logs or "stderr", level)

    func = COMMANDS[args.command]
    if args.command == "grid" and args.display:
        func = run_grid_with_display
    try:
        func(args)
    except Exception as e:
        code = exit_code_for(e)
        if code == EXIT_INTERNAL:
            logger.exception(f"Internal error: {e}")
        else:
            logger.error(str(e))
        return code
    return EXIT_SUCCESS


def parse_arguments(args: List[str]) -> argparse.Namespace:
    class ArgParser(argparse.ArgumentParser):
        """Custom argument parser that doesn't exit on invalid arguments but
        raises a custom exception for dotmat to handle"""

        def error(self, message: str) -> NoReturn:
            """Override default behaviour on invalid arguments"""
            raise ArgumentParsingError(msg=message, help_str=self.format_help())

    def auto_int(x: str) -> int:
        return int(x, 0)

    def pos_float(x: str) -> float:
        res = float(x)
        if not res > 0:
            raise argparse.ArgumentTypeError(f"must be strictly positive: {x}")
        return res

    def float_list(x: str) -> List[float]:
        return [pos_float(v) for v in x.split(",") if v.strip()]

    def int_list(x: str) -> List[int]:
        return [int(v) for v in x.split(",") if v.strip()]

    def str_list(x: str) -> List[str]:
        return [v.strip() for v in x.split(",") if v.strip()]

    common = ArgParser(add_help=False)
    common.add_argument(
        "--debug", action="store_true", help="Enable debug logs"
    )
    common.add_argument(
        "--logs",
        type=str,
        help="File where to write the logs. Use 'stdout' to print logs to "
        "standard output",
        default=None,
        metavar="PATH",
    )

    data = ArgParser(add_help=False)
    data.add_argument(
        "--input",
        type=str,
        help="Ratings file to read",
        metavar="PATH",
        required=True,
    )
    data.add_argument(
        "--format",
        type=str,
        choices=["cache", "movielens", "csv"],
        default="cache",
        help="Format of the input: a dataset written by 'ingest', a MovieLens "
        "'::' ratings file or a CSV file with a header row",
    )
    for flag, default, what in (
        ("--user-col", "user_id", "user"),
        ("--item-col", "item_id", "item"),
        ("--rating-col", "rating", "rating"),
    ):
        data.add_argument(
            flag,
            type=str,
            default=default,
            metavar="NAME",
            help=f"CSV {what} column",
        )
    data.add_argument(
        "--timestamp-col",
        type=str,
        default=None,
        metavar="NAME",
        help="Optional CSV timestamp column",
    )
    data.add_argument(
        "--sep", type=str, default=",", help="CSV field separator"
    )
    data.add_argument(
        "--r-max",
        type=pos_float,
        default=None,
        metavar="FLOAT",
        help="Rating ceiling. Inferred from the data if unspecified, except "
        "for predict and densify which need the training ceiling",
    )

    eps = ArgParser(add_help=False)
    eps.add_argument(
        "--clamp-eps",
        type=float,
        default=DEFAULT_CLAMP_EPS,
        metavar="FLOAT",
        help="Clamp margin of the dot product",
    )

    parser = ArgParser(
        description="Matrix factorization for cold-start and sparse "
        "recommendation",
        prog="dotmat",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(
        dest="command", metavar="COMMAND", parser_class=ArgParser
    )
    sub.required = True
    fmt = argparse.ArgumentDefaultsHelpFormatter

    # ingest
    ingest = sub.add_parser(
        "ingest",
        parents=[common, data],
        formatter_class=fmt,
        help="Parse and cache a dataset",
    )
    ingest.set_defaults(format=None)
    ingest.add_argument(
        "--output",
        type=str,
        required=True,
        metavar="PATH",
        help="Cached dataset to write",
    )

    # train
    train = sub.add_parser(
        "train",
        parents=[common, data, eps],
        formatter_class=fmt,
        help="Train one model",
    )
    train.add_argument(
        "--algo",
        type=str,
        choices=list(TRAINERS),
        required=True,
        help="Algorithm to train",
    )
    train.add_argument(
        "--lr",
        type=pos_float,
        required=True,
        metavar="FLOAT",
        help="Learning rate",
    )
    train.add_argument(
        "--epochs",
        type=int,
        default=20,
        metavar="INTEGER",
        help="Training epochs",
    )
    train.add_argument(
        "--dim",
        type=int,
        default=16,
        metavar="INTEGER",
        help="Latent dimension",
    )
    train.add_argument(
        "--seed",
        type=auto_int,
        default=42,
        metavar="INTEGER",
        help="Random seed",
    )
    train.add_argument(
        "--pairs-per-user",
        type=int,
        default=100,
        metavar="INTEGER",
        help="Items sampled per user and per epoch by data-free training",
    )
    train.add_argument(
        "--test-fraction",
        type=float,
        default=None,
        metavar="FLOAT",
        help="Hold out this fraction of every user's ratings and log the "
        "test MAE",
    )
    train.add_argument(
        "--model-out",
        type=str,
        required=True,
        metavar="PATH",
        help="Model file to write",
    )
    train.add_argument(
        "--trace-out",
        type=str,
        default=None,
        metavar="PATH",
        help="Training trace CSV to write",
    )

    # predict
    predict = sub.add_parser(
        "predict",
        parents=[common, data, eps],
        formatter_class=fmt,
        help="Predict ratings of a dataset",
    )
    predict.add_argument(
        "--model", type=str, required=True, metavar="PATH", help="Model file"
    )
    predict.add_argument(
        "--output",
        type=str,
        required=True,
        metavar="PATH",
        help="Predictions CSV to write",
    )
    predict.add_argument(
        "--link",
        type=str,
        choices=["zipf", "glove"],
        default="zipf",
        help="How dot products become ratings: r_max * clamped dot, or "
        "exp(dot) - 1 for glovemat models",
    )

    # grid
    grid = sub.add_parser(
        "grid",
        parents=[common, data],
        formatter_class=fmt,
        help="Run an experiment grid",
    )
    grid.add_argument(
        "--algos",
        type=str_list,
        default=None,
        metavar="LIST",
        help=f"Comma separated algorithms among {', '.join(ALGORITHMS)}",
    )
    grid.add_argument(
        "--lrs",
        type=float_list,
        default=None,
        metavar="LIST",
        help="Comma separated learning rates",
    )
    grid.add_argument(
        "--samples",
        type=int_list,
        default=None,
        metavar="LIST",
        help="Comma separated user sample sizes",
    )
    # Grid options default to None so that config file values apply
    for flag, cast, metavar, what in (
        ("--seed", auto_int, "INTEGER", "Master seed (42 if unset)"),
        ("--dim", int, "INTEGER", "Latent dimension (16 if unset)"),
        ("--epochs", int, "INTEGER", "Training epochs (20 if unset)"),
        ("--test-fraction", float, "FLOAT", "Test fraction (0.2 if unset)"),
        ("--top-k", int, "INTEGER", "Recommendation list length (10 if unset)"),
        (
            "--pairs-per-user",
            int,
            "INTEGER",
            "Data-free pairs per user (100 if unset)",
        ),
        ("--clamp-eps", float, "FLOAT", "Clamp margin (1e-6 if unset)"),
    ):
        grid.add_argument(
            flag, type=cast, default=None, metavar=metavar, help=what
        )
    grid.add_argument(
        "--config",
        type=str,
        help="YAML config file (command-line arguments override config "
        "options)",
        metavar="FILE",
    )
    grid.add_argument(
        "--out-csv",
        type=str,
        required=True,
        metavar="PATH",
        help="Report CSV to write",
    )
    grid.add_argument(
        "--out-json",
        type=str,
        default=None,
        metavar="PATH",
        help="Report JSON to write",
    )
    grid.add_argument(
        "--timing",
        action="store_true",
        help="Report measured training seconds. Without it train_seconds is "
        "0 and identical invocations give identical reports",
    )
    grid.add_argument(
        "--display",
        action="store_true",
        help="Enable the terminal display",
    )

    # densify
    densify_cmd = sub.add_parser(
        "densify",
        parents=[common, data, eps],
        formatter_class=fmt,
        help="Fill the unobserved cells of a dataset with a model's "
        "predictions",
    )
    densify_cmd.add_argument(
        "--model", type=str, required=True, metavar="PATH", help="Model file"
    )
    densify_cmd.add_argument(
        "--output",
        type=str,
        required=True,
        metavar="PATH",
        help="Densified dataset to write",
    )

    parsed = parser.parse_args(args)
    if parsed.command == "ingest" and parsed.format not in ("movielens", "csv"):
        raise ArgumentParsingError(
            msg="ingest needs '--format movielens' or '--format csv'",
            help_str=ingest.format_help(),
        )
    return parsed


def main() -> None:
    sys.exit(run_dotmat(sys.argv[1:]))


if __name__ == "__main__":
    main()
