"""DotMat: matrix factorization under the Zipf reading of the dot product.

With x = clamped U_i.V_j, the loss of an observed rating is
|x^x - r/r_max| and its SGD step moves both vectors along

    x^x * sign(x^x - target) * (1 + ln x)

times the other vector. The data-free variant substitutes x itself for
the target r/r_max, so no rating is ever read. Since x^x > x on (0, 1),
the sign is constant and the updates contract x towards 1/e, where
1 + ln x vanishes. That is not the minimum of |x^x - x| (which sits at
x = 1); the update is kept as stated.
"""
import math
from typing import Iterable, List, Optional, Tuple

import numpy as np

from ..common.exceptions import ConfigurationError
from ..common.util import derive_seed, sign
from ..data.sampling import SplitDataset
from ..model.config import DEFAULT_CLAMP_EPS, TrainConfig
from ..model.dataset import InteractionDataset
from ..model.factors import FactorModel, clamped_dot, init_model
from .trainer import EpochCallback, PairSampler, Trainer, TrainTrace


def dotmat_coefficient(x: float, target: float) -> float:
    """Scalar multiplying the other vector in a DotMat step, before the
    learning rate: x^x * sign(x^x - target) * (1 + ln x)"""
    power = x**x
    return power * sign(power - target) * (1.0 + math.log(x))


def dotmat_pair_loss(
    u: np.ndarray, v: np.ndarray, target: float, eps: float = DEFAULT_CLAMP_EPS
) -> float:
    """|x^x - target| for x = clamped_dot(u, v)"""
    x = clamped_dot(u, v, eps)
    return abs(x**x - target)


def dotmat_gradient(
    u: np.ndarray, v: np.ndarray, target: float, eps: float = DEFAULT_CLAMP_EPS
) -> Tuple[np.ndarray, np.ndarray]:
    """Gradient of dotmat_pair_loss() with respect to (u, v), valid away
    from the clamp bounds and from the kink x^x = target"""
    c = dotmat_coefficient(clamped_dot(u, v, eps), target)
    return c * v, c * u


def dotmat_loss(
    model: FactorModel, dataset: InteractionDataset, eps: float = DEFAULT_CLAMP_EPS
) -> float:
    """Mean over the observed triples of |x^x - r/r_max|"""
    if not dataset.triples:
        return 0.0
    losses = [
        dotmat_pair_loss(
            model.user_vector(t.user_id),
            model.item_vector(t.item_id),
            t.rating / dataset.r_max,
            eps,
        )
        for t in dataset.triples
    ]
    return math.fsum(losses) / len(losses)


def _check_learning_rate(lr: float) -> None:
    if not lr > 0:
        raise ConfigurationError(f"Learning rate must be strictly positive, got {lr}")


def _dotmat_update(
    model: FactorModel,
    user_id: int,
    item_id: int,
    target: Optional[float],
    lr: float,
    eps: float,
) -> Tuple[float, float]:
    """Apply one DotMat step in place. A None target means data-free, the
    target is then x itself. Both vectors are updated from the same
    snapshot and floored at 0 afterwards.

    :return: (loss, sign factor) before the update
    """
    u = model.user_vector(user_id)
    v = model.item_vector(item_id)
    x = clamped_dot(u, v, eps)
    t = x if target is None else target
    power = x**x
    s = sign(power - t)
    step = lr * power * s * (1.0 + math.log(x))
    if step != 0.0:
        u_snapshot = u.copy()
        u -= step * v
        v -= step * u_snapshot
        np.maximum(u, 0.0, out=u)
        np.maximum(v, 0.0, out=v)
    return abs(power - t), s


def dotmat_step_supervised(
    model: FactorModel,
    user_id: int,
    item_id: int,
    rating: float,
    r_max: float,
    lr: float,
    eps: float = DEFAULT_CLAMP_EPS,
) -> FactorModel:
    """One SGD step of |x^x - r/r_max| on an observed rating. The model
    is updated in place and returned"""
    _check_learning_rate(lr)
    if not 0 < rating <= r_max:
        raise ConfigurationError(f"Rating {rating} outside of (0, {r_max}]")
    _dotmat_update(model, user_id, item_id, rating / r_max, lr, eps)
    return model


def dotmat_step_datafree(
    model: FactorModel,
    user_id: int,
    item_id: int,
    lr: float,
    eps: float = DEFAULT_CLAMP_EPS,
) -> FactorModel:
    """One data-free DotMat step: the target is the clamped dot product
    itself, so no rating is consumed. The model is updated in place and
    returned"""
    _check_learning_rate(lr)
    _dotmat_update(model, user_id, item_id, None, lr, eps)
    return model


class DotMatTrainer(Trainer):
    """Data-free DotMat. Only the user and item universes of the split are
    read, never its ratings. The trace records the mean |x^x - x| of the
    visited pairs"""

    NAME = "dotmat"

    def fit(self, split: SplitDataset) -> Tuple[FactorModel, TrainTrace]:
        return self.fit_universes(split.users, split.items)

    def fit_universes(
        self, user_ids: Iterable[int], item_ids: Iterable[int]
    ) -> Tuple[FactorModel, TrainTrace]:
        cfg = self.config
        model = init_model(user_ids, item_ids, cfg.dim, cfg.seed)
        sampler = PairSampler(
            model.user_ids,
            model.item_ids,
            derive_seed(cfg.seed, self.NAME),
            cfg.pairs_per_user,
        )

        def _epoch(epoch: int) -> List[float]:
            return [
                _dotmat_update(model, u, i, None, cfg.learning_rate, cfg.clamp_eps)[0]
                for u, i in sampler.epoch(epoch)
            ]

        trace = self._run_epochs(_epoch)
        return model, trace


class SupervisedDotMatTrainer(Trainer):
    """DotMat on observed ratings: SGD of |x^x - r/r_max| over the train
    triples, visited in a fresh seeded order every epoch"""

    NAME = "dotmat-supervised"

    def fit(self, split: SplitDataset) -> Tuple[FactorModel, TrainTrace]:
        cfg = self.config
        model = init_model(split.users, split.items, cfg.dim, cfg.seed)
        triples = split.train.triples
        r_max = split.r_max
        rng = self.order_rng()

        def _epoch(epoch: int) -> List[float]:
            return [
                _dotmat_update(
                    model,
                    triples[row].user_id,
                    triples[row].item_id,
                    triples[row].rating / r_max,
                    cfg.learning_rate,
                    cfg.clamp_eps,
                )[0]
                for row in rng.permutation(len(triples)).tolist()
            ]

        trace = self._run_epochs(_epoch)
        return model, trace


def train_dotmat(
    user_ids: Iterable[int],
    item_ids: Iterable[int],
    config: TrainConfig,
    on_epoch: Optional[EpochCallback] = None,
) -> Tuple[FactorModel, TrainTrace]:
    """Data-free DotMat over the given universes"""
    return DotMatTrainer(config, on_epoch).fit_universes(user_ids, item_ids)


def train_dotmat_supervised(
    split: SplitDataset,
    config: TrainConfig,
    on_epoch: Optional[EpochCallback] = None,
) -> Tuple[FactorModel, TrainTrace]:
    return SupervisedDotMatTrainer(config, on_epoch).fit(split)
