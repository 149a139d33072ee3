from .config import DEFAULT_CLAMP_EPS, TrainConfig
from .dataset import InteractionDataset, RatingTriple
from .factors import (
    FactorModel,
    clamp,
    clamped_dot,
    init_model,
    predict_batch,
    predict_matrix,
    predict_rating,
)
from .persistence import load_model, save_model
