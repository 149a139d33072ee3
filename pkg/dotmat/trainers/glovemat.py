import math
from typing import List, Optional, Tuple

import numpy as np

from ..data.sampling import SplitDataset
from ..model.config import TrainConfig
from ..model.factors import FactorModel, init_model
from .predictors import GloVePredictor, Predictor
from .trainer import EpochCallback, Trainer, TrainTrace


def glovemat_target(rating: float) -> float:
    """ln(r + 1), on the raw rating scale"""
    return math.log1p(rating)


def glovemat_pair_loss(u: np.ndarray, v: np.ndarray, rating: float) -> float:
    """(u.v - ln(r + 1))^2, the dot product is not clamped"""
    e = float(np.dot(u, v)) - glovemat_target(rating)
    return e * e


def glovemat_gradient(
    u: np.ndarray, v: np.ndarray, rating: float
) -> Tuple[np.ndarray, np.ndarray]:
    e = float(np.dot(u, v)) - glovemat_target(rating)
    return 2.0 * e * v, 2.0 * e * u


class GloVeMatTrainer(Trainer):
    """Log-rating baseline: SGD of (u.v - ln(r + 1))^2 over the train
    triples, predictions through exp(u.v) - 1"""

    NAME = "glovemat"

    def fit(self, split: SplitDataset) -> Tuple[FactorModel, TrainTrace]:
        cfg = self.config
        model = init_model(split.users, split.items, cfg.dim, cfg.seed)
        triples = split.train.triples
        targets = [glovemat_target(t.rating) for t in triples]
        rng = self.order_rng()

        def _epoch(epoch: int) -> List[float]:
            losses = []
            for row in rng.permutation(len(triples)).tolist():
                t = triples[row]
                u = model.user_vector(t.user_id)
                v = model.item_vector(t.item_id)
                e = float(np.dot(u, v)) - targets[row]
                losses.append(e * e)
                if e != 0.0:
                    u_snapshot = u.copy()
                    u -= cfg.learning_rate * 2.0 * e * v
                    v -= cfg.learning_rate * 2.0 * e * u_snapshot
            return losses

        trace = self._run_epochs(_epoch)
        return model, trace

    def predictor(self, model: FactorModel, r_max: float) -> Predictor:
        return GloVePredictor(model, r_max)


def train_glovemat(
    split: SplitDataset,
    config: TrainConfig,
    on_epoch: Optional[EpochCallback] = None,
) -> Tuple[FactorModel, TrainTrace]:
    return GloVeMatTrainer(config, on_epoch).fit(split)
