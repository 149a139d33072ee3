import math
from typing import List, Optional, Tuple

import numpy as np

from ..common.exceptions import UnknownIdError
from ..data.sampling import PopularityRanks, SplitDataset, popularity_ranks
from ..model.config import DEFAULT_CLAMP_EPS, TrainConfig
from ..model.factors import FactorModel, clamped_dot, init_model
from .trainer import EpochCallback, Trainer, TrainTrace


def rank_base(ranks: PopularityRanks, user_id: int, item_id: int) -> float:
    """a = 1 / (rank_i * rank_j), in (0, 1]"""
    try:
        rank_i = ranks.user_rank[user_id]
    except KeyError:
        raise UnknownIdError("user", user_id) from None
    try:
        rank_j = ranks.item_rank[item_id]
    except KeyError:
        raise UnknownIdError("item", item_id) from None
    return 1.0 / (rank_i * rank_j)


def rankmat_pair_loss(
    u: np.ndarray,
    v: np.ndarray,
    base: float,
    target: float,
    eps: float = DEFAULT_CLAMP_EPS,
) -> float:
    """(a^x - target)^2 for x = clamped_dot(u, v)"""
    x = clamped_dot(u, v, eps)
    residual = base**x - target
    return residual * residual


def rankmat_gradient(
    u: np.ndarray,
    v: np.ndarray,
    base: float,
    target: float,
    eps: float = DEFAULT_CLAMP_EPS,
) -> Tuple[np.ndarray, np.ndarray]:
    """Gradient of rankmat_pair_loss() with respect to (u, v):
    2 (a^x - t) a^x ln(a) times the other vector"""
    x = clamped_dot(u, v, eps)
    power = base**x
    c = 2.0 * (power - target) * power * math.log(base)
    return c * v, c * u


class RankMatTrainer(Trainer):
    """Power-law baseline: SGD of ((1/(rank_i rank_j))^x - r/r_max)^2.
    Ratings are normalized by r_max since a^x can't exceed 1. Ranks are
    computed on the train side when not given"""

    NAME = "rankmat"

    def __init__(
        self,
        config: TrainConfig,
        ranks: Optional[PopularityRanks] = None,
        on_epoch: Optional[EpochCallback] = None,
    ) -> None:
        super().__init__(config, on_epoch)
        self.ranks = ranks

    def fit(self, split: SplitDataset) -> Tuple[FactorModel, TrainTrace]:
        cfg = self.config
        ranks = self.ranks if self.ranks is not None else popularity_ranks(split.train)
        model = init_model(split.users, split.items, cfg.dim, cfg.seed)
        triples = split.train.triples
        bases = [rank_base(ranks, t.user_id, t.item_id) for t in triples]
        r_max = split.r_max
        rng = self.order_rng()

        def _epoch(epoch: int) -> List[float]:
            losses = []
            for row in rng.permutation(len(triples)).tolist():
                t = triples[row]
                u = model.user_vector(t.user_id)
                v = model.item_vector(t.item_id)
                x = clamped_dot(u, v, cfg.clamp_eps)
                power = bases[row] ** x
                residual = power - t.rating / r_max
                losses.append(residual * residual)
                c = 2.0 * residual * power * math.log(bases[row])
                if c != 0.0:
                    u_snapshot = u.copy()
                    u -= cfg.learning_rate * c * v
                    v -= cfg.learning_rate * c * u_snapshot
                    np.maximum(u, 0.0, out=u)
                    np.maximum(v, 0.0, out=v)
            return losses

        trace = self._run_epochs(_epoch)
        return model, trace


def train_rankmat(
    split: SplitDataset,
    ranks: PopularityRanks,
    config: TrainConfig,
    on_epoch: Optional[EpochCallback] = None,
) -> Tuple[FactorModel, TrainTrace]:
    return RankMatTrainer(config, ranks, on_epoch).fit(split)
