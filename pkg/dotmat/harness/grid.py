import time
from dataclasses import dataclass, field, fields
from typing import (
    Any,
    Callable,
    Dict,
    Final,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Tuple,
)

from ..common.exceptions import ConfigurationError, DotMatException, GridCellError
from ..common.logger import logger
from ..common.util import derive_seed
from ..data.sampling import (
    PopularityRanks,
    SplitDataset,
    popularity_ranks,
    sample_users,
    split_digest,
    split_train_test,
)
from ..metrics.accuracy import PredictionSet, mae
from ..metrics.exposure import exposure_profile, matthew_effect, top_k
from ..model.config import DEFAULT_CLAMP_EPS, TrainConfig
from ..model.dataset import InteractionDataset
from ..trainers import BASELINES, TRAINERS
from ..trainers.baselines import MeanPredictor, RandomPredictor
from ..trainers.hybrid import DotMatHybridTrainer, hybrid_configs
from ..trainers.predictors import Predictor
from ..trainers.rankmat import RankMatTrainer

ALGORITHMS: Final[Tuple[str, ...]] = tuple(TRAINERS) + BASELINES

DEFAULT_LEARNING_RATES: Final[Tuple[float, ...]] = (
    0.0001,
    0.0005,
    0.001,
    0.005,
    0.01,
    0.05,
)
DEFAULT_SAMPLE_SIZES: Final[Tuple[int, ...]] = (100, 1000, 2000)


@dataclass(frozen=True)
class GridSpec:
    """Experiment grid: every algorithm is run at every learning rate on
    every user sample size

    Attributes:
        record_timing   Write measured training seconds in the report. When
                        False, train_seconds is 0 and reports of identical
                        runs are byte-identical
    """

    algorithms: Tuple[str, ...]
    learning_rates: Tuple[float, ...] = DEFAULT_LEARNING_RATES
    sample_sizes: Tuple[int, ...] = DEFAULT_SAMPLE_SIZES
    dim: int = 16
    epochs: int = 20
    test_fraction: float = 0.2
    top_k: int = 10
    seed: int = 42
    pairs_per_user: int = 100
    clamp_eps: float = DEFAULT_CLAMP_EPS
    record_timing: bool = False

    def __post_init__(self) -> None:
        if not self.algorithms:
            raise ConfigurationError("Grid needs at least one algorithm")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ConfigurationError(
                f"Unknown algorithm(s) {', '.join(unknown)}; "
                f"choose from {', '.join(ALGORITHMS)}"
            )
        if not self.learning_rates:
            raise ConfigurationError("Grid needs at least one learning rate")
        if any(not lr > 0 for lr in self.learning_rates):
            raise ConfigurationError(
                f"Learning rates must be strictly positive: {self.learning_rates}"
            )
        if not self.sample_sizes or any(n < 1 for n in self.sample_sizes):
            raise ConfigurationError(
                f"Sample sizes must be positive integers: {self.sample_sizes}"
            )
        if not 0 < self.test_fraction < 1:
            raise ConfigurationError(
                f"Test fraction must be in (0, 1), got {self.test_fraction}"
            )
        if self.top_k < 1:
            raise ConfigurationError(f"top_k must be at least 1, got {self.top_k}")
        # Validates the remaining training parameters
        self.train_config(1.0, self.seed)

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "GridSpec":
        """Build a spec from a plain mapping, e.g a YAML config. Lists are
        accepted wherever tuples are expected"""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigurationError(f"Unknown grid option(s): {', '.join(unknown)}")
        kwargs = dict(values)
        try:
            for name, cast in (
                ("algorithms", str),
                ("learning_rates", float),
                ("sample_sizes", int),
            ):
                if name in kwargs:
                    kwargs[name] = tuple(cast(x) for x in kwargs[name])
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"Invalid grid option: {e}") from e
        return cls(**kwargs)

    def train_config(self, learning_rate: float, seed: int) -> TrainConfig:
        return TrainConfig(
            learning_rate=learning_rate,
            epochs=self.epochs,
            dim=self.dim,
            clamp_eps=self.clamp_eps,
            seed=seed,
            pairs_per_user=self.pairs_per_user,
        )

    @property
    def n_cells(self) -> int:
        return (
            len(self.algorithms) * len(self.learning_rates) * len(self.sample_sizes)
        )


class ReportRow(NamedTuple):
    algorithm: str
    learning_rate: float
    sample_size: int
    mae: float
    matthew_degree: float
    train_seconds: float
    seed: int


@dataclass
class ExperimentReport:
    """One row per (sample size, algorithm, learning rate), in that
    order. split_digests maps every sample size to the fingerprint of the
    split all its rows were computed on"""

    rows: List[ReportRow] = field(default_factory=list)
    split_digests: Dict[int, str] = field(default_factory=dict)


def cell_seed(master_seed: int, sample_size: int, algorithm: str, lr: float) -> int:
    """Seed of one grid cell. Only depends on the cell's own coordinates,
    so adding cells to a grid leaves the others unchanged"""
    return derive_seed(master_seed, sample_size, algorithm, lr)


def fit_predictor(
    algorithm: str,
    split: SplitDataset,
    config: TrainConfig,
    ranks: Optional[PopularityRanks] = None,
) -> Predictor:
    """Train 'algorithm' on the train side of 'split' and return the
    predictor to evaluate"""
    if algorithm == "random":
        return RandomPredictor(config.seed, split.r_max)
    if algorithm == "mean":
        return MeanPredictor(split)
    if algorithm == RankMatTrainer.NAME:
        trainer = RankMatTrainer(config, ranks)
    elif algorithm == DotMatHybridTrainer.NAME:
        trainer = DotMatHybridTrainer(*hybrid_configs(config))
    elif algorithm in TRAINERS:
        trainer = TRAINERS[algorithm](config)
    else:
        raise ConfigurationError(f"Unknown algorithm {algorithm}")
    model, _ = trainer.fit(split)
    return trainer.predictor(model, split.r_max)


# Called after each cell with (row, cells done, total cells)
CellCallback = Callable[[ReportRow, int, int], None]
# Called before each cell with (sample size, algorithm, learning rate)
CellStartCallback = Callable[[int, str, float], None]


def run_grid(
    dataset: InteractionDataset,
    spec: GridSpec,
    on_cell: Optional[CellCallback] = None,
    on_cell_start: Optional[CellStartCallback] = None,
) -> ExperimentReport:
    """Run every cell of 'spec' on user samples of 'dataset'.

    For each sample size the users are sampled and split once, and every
    (algorithm, learning rate) cell is trained and evaluated on that same
    split. Test MAE is computed over all test triples, the Matthew effect
    over the top-k lists of the test users (train items excluded).
    Any failing cell aborts the run with a GridCellError naming it.
    """
    if not dataset.triples:
        raise ConfigurationError("Can't run a grid on an empty dataset")
    report = ExperimentReport()
    done = 0
    for size in spec.sample_sizes:
        n_users = size
        if size > len(dataset.users):
            logger.warning(
                f"Sample size {size} exceeds the {len(dataset.users)} users "
                f"of the dataset, using all of them"
            )
            n_users = len(dataset.users)
        sample = sample_users(dataset, n_users, derive_seed(spec.seed, "sample", size))
        split = split_train_test(
            sample, spec.test_fraction, derive_seed(spec.seed, "split", size)
        )
        digest = split_digest(split)
        report.split_digests[size] = digest
        logger.info(
            f"Sample size {size}: {len(split.train)} train and {len(split.test)} "
            f"test ratings over {len(split.items)} items (split {digest[:12]})"
        )
        ranks = popularity_ranks(split.train)
        test_users = sorted({t.user_id for t in split.test.triples})
        exclude = split.train.items_of()
        test_pairs = [(t.user_id, t.item_id) for t in split.test.triples]

        for algorithm in spec.algorithms:
            for lr in spec.learning_rates:
                if on_cell_start is not None:
                    on_cell_start(size, algorithm, lr)
                seed = cell_seed(spec.seed, size, algorithm, lr)
                try:
                    start = time.perf_counter()
                    predictor = fit_predictor(
                        algorithm, split, spec.train_config(lr, seed), ranks
                    )
                    seconds = time.perf_counter() - start
                    preds = PredictionSet.from_arrays(
                        split.test, predictor.predict_many(test_pairs)
                    )
                    lists = top_k(
                        predictor, test_users, split.items, spec.top_k, exclude
                    )
                    matthew = matthew_effect(
                        exposure_profile(lists, spec.top_k, split.items)
                    )
                    row = ReportRow(
                        algorithm=algorithm,
                        learning_rate=lr,
                        sample_size=size,
                        mae=mae(preds),
                        matthew_degree=matthew.degree,
                        train_seconds=seconds if spec.record_timing else 0.0,
                        seed=seed,
                    )
                except DotMatException as e:
                    raise GridCellError(algorithm, lr, size, e) from e
                report.rows.append(row)
                done += 1
                logger.info(
                    f"[{done}/{spec.n_cells}] {algorithm} lr={lr} n={size}: "
                    f"MAE {row.mae:.4f}, Matthew {row.matthew_degree:.4f} "
                    f"({matthew.excluded_items} items never recommended)"
                )
                if on_cell is not None:
                    on_cell(row, done, spec.n_cells)
    return report
