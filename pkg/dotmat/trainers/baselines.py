from typing import Dict

import pandas as pd

from ..common.exceptions import ConfigurationError
from ..common.util import derive_seed
from ..data.sampling import SplitDataset
from .predictors import Predictor


class RandomPredictor(Predictor):
    """Uniform random ratings in (0, r_max]. Each prediction is a pure
    function of (seed, user, item), whatever the order of the queries"""

    def __init__(self, seed: int, r_max: float) -> None:
        if not r_max > 0:
            raise ConfigurationError(f"r_max must be positive, got {r_max}")
        self.seed = seed
        self.r_max = r_max

    def predict(self, user_id: int, item_id: int) -> float:
        # 53 random bits give a uniform float in [0, 1)
        uniform = (derive_seed(self.seed, user_id, item_id) >> 11) * 2.0**-53
        return self.r_max * (1.0 - uniform)


class MeanPredictor(Predictor):
    """Per-item mean of the train ratings, global train mean for items
    without train ratings"""

    def __init__(self, split: SplitDataset) -> None:
        triples = split.train.triples
        if not triples:
            raise ConfigurationError("Mean baseline needs at least one train rating")
        ratings = pd.DataFrame(
            [(t.item_id, t.rating) for t in triples], columns=["item_id", "rating"]
        )
        self.item_mean: Dict[int, float] = (
            ratings.groupby("item_id")["rating"].mean().to_dict()
        )
        self.global_mean = float(ratings["rating"].mean())

    def predict(self, user_id: int, item_id: int) -> float:
        return self.item_mean.get(item_id, self.global_mean)


def baseline_random(seed: int, r_max: float) -> RandomPredictor:
    return RandomPredictor(seed, r_max)


def baseline_mean(split: SplitDataset) -> MeanPredictor:
    return MeanPredictor(split)
