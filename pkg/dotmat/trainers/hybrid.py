from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..common.exceptions import ConfigurationError
from ..common.logger import logger
from ..common.util import derive_seed
from ..data.sampling import SplitDataset
from ..model.dataset import InteractionDataset, RatingTriple
from ..model.factors import FactorModel, init_model, predict_matrix
from ..model.config import DEFAULT_CLAMP_EPS, TrainConfig
from .classic import ClassicMFTrainer
from .dotmat import DotMatTrainer
from .trainer import EpochCallback, Trainer, TrainTrace


def dense_ratings(
    model: FactorModel,
    base: InteractionDataset,
    users: Sequence[int],
    items: Sequence[int],
    eps: float = DEFAULT_CLAMP_EPS,
) -> np.ndarray:
    """(len(users), len(items)) rating matrix: the observed ratings of
    'base' in their cells, the model's predictions everywhere else"""
    ratings = predict_matrix(model, users, items, base.r_max, eps)
    user_pos = {u: p for p, u in enumerate(users)}
    item_pos = {i: p for p, i in enumerate(items)}
    for t in base.triples:
        try:
            ratings[user_pos[t.user_id], item_pos[t.item_id]] = t.rating
        except KeyError:
            raise ConfigurationError(
                f"Observed triple {t} lies outside of the densified universes"
            ) from None
    logger.debug(
        f"Densified {len(base)} observed ratings into {ratings.size} "
        f"({ratings.size - len(base)} synthetic)"
    )
    return ratings


def densify(
    model: FactorModel,
    base: InteractionDataset,
    user_ids: Sequence[int],
    item_ids: Sequence[int],
    eps: float = DEFAULT_CLAMP_EPS,
) -> InteractionDataset:
    """Fill every unobserved (user, item) cell of the given universes with
    the model's predicted rating. Observed triples of 'base' are kept as
    they are. The result holds exactly len(user_ids) * len(item_ids)
    triples, in (user, item) order of the universes"""
    users = sorted(set(user_ids))
    items = sorted(set(item_ids))
    ratings = dense_ratings(model, base, users, items, eps)
    observed: Dict[Tuple[int, int], RatingTriple] = {
        (t.user_id, t.item_id): t for t in base.triples
    }
    triples: List[RatingTriple] = []
    for p, user in enumerate(users):
        for q, item in enumerate(items):
            t = observed.get((user, item))
            if t is None:
                t = RatingTriple(user, item, float(ratings[p, q]))
            triples.append(t)
    return InteractionDataset(
        users=tuple(users),
        items=tuple(items),
        triples=tuple(triples),
        r_max=base.r_max,
    )


class DotMatHybridTrainer(Trainer):
    """DotMat Hybrid: data-free DotMat over the split's universes, then the
    train side is densified with its predictions and classic MF is trained
    on the dense matrix. The test side is never read"""

    NAME = "dotmat-hybrid"

    def __init__(
        self,
        config: TrainConfig,
        config_mf: Optional[TrainConfig] = None,
        on_epoch: Optional[EpochCallback] = None,
    ) -> None:
        super().__init__(config, on_epoch)
        self.config_mf = config_mf if config_mf is not None else config

    def fit(self, split: SplitDataset) -> Tuple[FactorModel, TrainTrace]:
        dotmat_model, _ = DotMatTrainer(self.config).fit(split)
        # Both models hold sorted ids, so matrix positions are factor rows
        ratings = dense_ratings(
            dotmat_model,
            split.train,
            dotmat_model.user_ids,
            dotmat_model.item_ids,
            self.config.clamp_eps,
        )
        # Same cells, order and targets as ClassicMFTrainer on densify(),
        # without one triple per cell
        n_users, n_items = ratings.shape
        cfg = self.config_mf
        model = init_model(split.users, split.items, cfg.dim, cfg.seed)
        trace = ClassicMFTrainer(cfg, self.on_epoch).train_rows(
            model,
            np.repeat(np.arange(n_users, dtype=np.int64), n_items),
            np.tile(np.arange(n_items, dtype=np.int64), n_users),
            (ratings / split.r_max).ravel(),
        )
        return model, trace


def hybrid_configs(config: TrainConfig) -> Tuple[TrainConfig, TrainConfig]:
    """Split one run configuration into the DotMat stage and the MF stage
    configurations. Both stages share the learning rate, the MF stage gets
    its own seed"""
    return config, config.with_changes(seed=derive_seed(config.seed, "mf-stage"))


def train_dotmat_hybrid(
    split: SplitDataset,
    config_dotmat: TrainConfig,
    config_mf: TrainConfig,
    on_epoch: Optional[EpochCallback] = None,
) -> Tuple[FactorModel, TrainTrace]:
    return DotMatHybridTrainer(config_dotmat, config_mf, on_epoch).fit(split)
