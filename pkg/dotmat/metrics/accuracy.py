import math
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Tuple

import numpy as np

from ..common.exceptions import ConfigurationError
from ..model.dataset import InteractionDataset


class Prediction(NamedTuple):
    user_id: int
    item_id: int
    predicted: float
    actual: float


@dataclass(frozen=True)
class PredictionSet:
    """Predictions next to the ratings they try to recover"""

    predictions: Tuple[Prediction, ...]

    def __post_init__(self) -> None:
        for p in self.predictions:
            if not (math.isfinite(p.predicted) and math.isfinite(p.actual)):
                raise ConfigurationError(f"Non-finite prediction {p}")

    @classmethod
    def from_arrays(
        cls, dataset: InteractionDataset, predicted: Iterable[float]
    ) -> "PredictionSet":
        """Pair the triples of 'dataset' with predictions given in the
        same order"""
        values: List[float] = list(predicted)
        if len(values) != len(dataset.triples):
            raise ConfigurationError(
                f"{len(values)} predictions for {len(dataset.triples)} triples"
            )
        return cls(
            tuple(
                Prediction(t.user_id, t.item_id, float(p), t.rating)
                for t, p in zip(dataset.triples, values)
            )
        )

    def __len__(self) -> int:
        return len(self.predictions)


def mae(preds: PredictionSet) -> float:
    """Mean absolute error between predicted and actual ratings"""
    if not preds.predictions:
        raise ConfigurationError("Can't compute the MAE of an empty prediction set")
    predicted = np.array([p.predicted for p in preds.predictions], dtype=np.float64)
    actual = np.array([p.actual for p in preds.predictions], dtype=np.float64)
    return float(np.mean(np.abs(predicted - actual)))
