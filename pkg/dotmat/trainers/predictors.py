import math
from typing import Iterable, Sequence, Tuple

import numpy as np

from ..model.config import DEFAULT_CLAMP_EPS
from ..model.factors import FactorModel, predict_batch, predict_rating


class Predictor:
    """Abstract rating predictor"""

    def predict(self, user_id: int, item_id: int) -> float:
        raise NotImplementedError

    def predict_many(self, pairs: Iterable[Tuple[int, int]]) -> np.ndarray:
        return np.array(
            [self.predict(u, i) for u, i in pairs], dtype=np.float64
        )

    def score_items(self, user_id: int, item_ids: Sequence[int]) -> np.ndarray:
        """Predicted ratings of 'user_id' for every item of 'item_ids'.
        Used for ranking only"""
        return self.predict_many((user_id, i) for i in item_ids)


class FactorPredictor(Predictor):
    """Zipf link: r_max * clamped dot product"""

    def __init__(
        self, model: FactorModel, r_max: float, eps: float = DEFAULT_CLAMP_EPS
    ) -> None:
        self.model = model
        self.r_max = r_max
        self.eps = eps

    def predict(self, user_id: int, item_id: int) -> float:
        return predict_rating(self.model, user_id, item_id, self.r_max, self.eps)

    def predict_many(self, pairs: Iterable[Tuple[int, int]]) -> np.ndarray:
        return predict_batch(self.model, pairs, self.r_max, self.eps)

    def score_items(self, user_id: int, item_ids: Sequence[int]) -> np.ndarray:
        u = self.model.user_vector(user_id)
        rows = [self.model.item_row(i) for i in item_ids]
        dots = np.einsum("ij,j->i", self.model.item_factors[rows], u)
        return self.r_max * np.clip(dots, self.eps, 1.0 - self.eps)


class GloVePredictor(Predictor):
    """Exponential link of log-rating models: exp(u.v) - 1, clamped
    into [0, r_max]"""

    def __init__(self, model: FactorModel, r_max: float) -> None:
        self.model = model
        self.r_max = r_max

    def predict(self, user_id: int, item_id: int) -> float:
        x = float(
            np.dot(self.model.user_vector(user_id), self.model.item_vector(item_id))
        )
        # Overflow guard, exp(709) is the largest finite float64
        y = math.expm1(min(x, 709.0))
        return min(max(y, 0.0), self.r_max)

    def score_items(self, user_id: int, item_ids: Sequence[int]) -> np.ndarray:
        u = self.model.user_vector(user_id)
        rows = [self.model.item_row(i) for i in item_ids]
        dots = np.einsum("ij,j->i", self.model.item_factors[rows], u)
        return np.clip(np.expm1(np.minimum(dots, 709.0)), 0.0, self.r_max)
