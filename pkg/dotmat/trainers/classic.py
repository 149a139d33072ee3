from typing import List, Optional, Tuple

import numpy as np

from ..data.sampling import SplitDataset
from ..model.config import TrainConfig
from ..model.factors import FactorModel, init_model
from .trainer import EpochCallback, Trainer, TrainTrace


def mf_pair_loss(u: np.ndarray, v: np.ndarray, target: float) -> float:
    """Squared error (target - u.v)^2 on the unclamped dot product"""
    e = target - float(np.dot(u, v))
    return e * e


def mf_gradient(
    u: np.ndarray, v: np.ndarray, target: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Gradient of mf_pair_loss() with respect to (u, v)"""
    e = target - float(np.dot(u, v))
    return -2.0 * e * v, -2.0 * e * u


def _mf_update(u: np.ndarray, v: np.ndarray, target: float, lr: float) -> float:
    e = target - float(np.dot(u, v))
    if e != 0.0:
        step = lr * e
        # Both updates read the vectors as they were before the step
        du = step * v
        v += step * u
        u += du
    return e * e


def mf_step(
    model: FactorModel, user_id: int, item_id: int, target: float, lr: float
) -> float:
    """Classic SGD step on a normalized rating, in place:
    U_i += lr * e * V_j, V_j += lr * e * U_i (snapshot), e = target - U_i.V_j.
    No regularization, no biases, no projection.

    :return: the squared error before the update
    """
    return _mf_update(
        model.user_vector(user_id), model.item_vector(item_id), target, lr
    )


class ClassicMFTrainer(Trainer):
    """Bare classic matrix factorization on ratings normalized by r_max"""

    NAME = "mf"

    def fit(self, split: SplitDataset) -> Tuple[FactorModel, TrainTrace]:
        cfg = self.config
        model = init_model(split.users, split.items, cfg.dim, cfg.seed)
        triples = split.train.triples
        user_rows = np.array(
            [model.user_row(t.user_id) for t in triples], dtype=np.int64
        )
        item_rows = np.array(
            [model.item_row(t.item_id) for t in triples], dtype=np.int64
        )
        targets = np.array(
            [t.rating / split.r_max for t in triples], dtype=np.float64
        )
        return model, self.train_rows(model, user_rows, item_rows, targets)

    def train_rows(
        self,
        model: FactorModel,
        user_rows: np.ndarray,
        item_rows: np.ndarray,
        targets: np.ndarray,
    ) -> TrainTrace:
        """SGD on 'model' in place over cells given by factor row indices
        and normalized targets, visited in a seeded order every epoch"""
        lr = self.config.learning_rate
        rng = self.order_rng()
        U, V = model.user_factors, model.item_factors

        def _epoch(epoch: int) -> List[float]:
            order = rng.permutation(len(targets))
            return [
                _mf_update(U[i], V[j], target, lr)
                for i, j, target in zip(
                    user_rows[order].tolist(),
                    item_rows[order].tolist(),
                    targets[order].tolist(),
                )
            ]

        return self._run_epochs(_epoch)


def train_mf_classic(
    split: SplitDataset,
    config: TrainConfig,
    on_epoch: Optional[EpochCallback] = None,
) -> Tuple[FactorModel, TrainTrace]:
    return ClassicMFTrainer(config, on_epoch).fit(split)
