import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..common.exceptions import DotMatException
from ..common.logger import logger
from ..common.util import TextSource, derive_seed, open_text
from ..data.sampling import SplitDataset
from ..model.config import TrainConfig
from ..model.factors import FactorModel
from .predictors import FactorPredictor, Predictor


class PairSampler:
    """Stream of (user, item) pairs for data-free training. Every epoch,
    each user is paired with 'pairs_per_user' items drawn uniformly with
    replacement. The stream of an epoch only depends on (seed, epoch)"""

    def __init__(
        self,
        user_ids: Sequence[int],
        item_ids: Sequence[int],
        seed: int,
        pairs_per_user: int,
    ) -> None:
        self.user_ids = tuple(user_ids)
        self.item_ids = np.asarray(item_ids)
        self.seed = seed
        self.pairs_per_user = pairs_per_user

    def __len__(self) -> int:
        """Number of pairs emitted per epoch"""
        return self.pairs_per_user * len(self.user_ids)

    def epoch(self, epoch: int) -> Iterator[Tuple[int, int]]:
        rng = np.random.default_rng(derive_seed(self.seed, "pairs", epoch))
        for user in self.user_ids:
            picks = rng.integers(0, len(self.item_ids), size=self.pairs_per_user)
            for item in self.item_ids[picks].tolist():
                yield user, item


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    mean_loss: float
    seconds: float


@dataclass
class TrainTrace:
    """Per-epoch training record: epoch index (from 1), mean loss over
    the pairs visited during the epoch, wall-clock seconds"""

    records: List[EpochRecord] = field(default_factory=list)

    def append(self, record: EpochRecord) -> None:
        if self.records and record.epoch <= self.records[-1].epoch:
            raise DotMatException(
                f"Epoch {record.epoch} recorded after epoch {self.records[-1].epoch}"
            )
        self.records.append(record)

    @property
    def losses(self) -> List[float]:
        return [r.mean_loss for r in self.records]

    @property
    def total_seconds(self) -> float:
        return sum(r.seconds for r in self.records)

    def __len__(self) -> int:
        return len(self.records)

    def to_csv(self, destination: TextSource) -> None:
        """Write the trace with the header epoch,mean_loss,seconds"""
        df = pd.DataFrame(
            [(r.epoch, r.mean_loss, r.seconds) for r in self.records],
            columns=["epoch", "mean_loss", "seconds"],
        )
        with open_text(destination, "w") as f:
            df.to_csv(f, index=False)


EpochCallback = Callable[[EpochRecord], None]


class Trainer:
    """Abstract base class of the training procedures.

    Child classes implement fit(), usually by initializing a model and
    calling _run_epochs() with a function that makes one pass over the
    training stream and returns the per-pair losses.

    Attributes:
        config      Hyperparameters of the run
        on_epoch    Optional callback invoked after every epoch
    """

    # Algorithm name, as used on the command line and in reports.
    # This variable needs to be redefined by child classes
    NAME = "__trainer"

    def __init__(
        self, config: TrainConfig, on_epoch: Optional[EpochCallback] = None
    ) -> None:
        self.config = config
        self.on_epoch = on_epoch

    def fit(self, split: SplitDataset) -> Tuple[FactorModel, TrainTrace]:
        """Abstract base method that trains a model on 'split'. Only the
        train side of the split is ever read"""
        raise DotMatException("This method must be overloaded by child classes")

    def predictor(self, model: FactorModel, r_max: float) -> Predictor:
        """Predictor that turns a model trained by this trainer into
        ratings"""
        return FactorPredictor(model, r_max, self.config.clamp_eps)

    def order_rng(self) -> np.random.Generator:
        """Generator for the visiting order of training triples"""
        return np.random.default_rng(derive_seed(self.config.seed, "order"))

    def _run_epochs(self, epoch_fn: Callable[[int], List[float]]) -> TrainTrace:
        trace = TrainTrace()
        for epoch in range(1, self.config.epochs + 1):
            start = time.perf_counter()
            losses = epoch_fn(epoch)
            mean_loss = math.fsum(losses) / len(losses) if losses else 0.0
            if not math.isfinite(mean_loss):
                logger.warning(
                    f"{self.NAME}: non-finite loss at epoch {epoch}, "
                    f"learning rate {self.config.learning_rate} is probably too large"
                )
            record = EpochRecord(epoch, mean_loss, time.perf_counter() - start)
            trace.append(record)
            logger.debug(
                f"{self.NAME} epoch {epoch}/{self.config.epochs}: "
                f"mean loss {mean_loss:.6f} ({record.seconds:.2f}s)"
            )
            if self.on_epoch is not None:
                self.on_epoch(record)
        return trace
