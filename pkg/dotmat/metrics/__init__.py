from .accuracy import Prediction, PredictionSet, mae
from .exposure import (
    ExposureProfile,
    MatthewResult,
    exposure_profile,
    matthew_degree,
    matthew_effect,
    top_k,
)
