from typing import Dict, Type

from .baselines import MeanPredictor, RandomPredictor, baseline_mean, baseline_random
from .classic import (
    ClassicMFTrainer,
    mf_gradient,
    mf_pair_loss,
    mf_step,
    train_mf_classic,
)
from .dotmat import (
    DotMatTrainer,
    SupervisedDotMatTrainer,
    dotmat_coefficient,
    dotmat_gradient,
    dotmat_loss,
    dotmat_pair_loss,
    dotmat_step_datafree,
    dotmat_step_supervised,
    train_dotmat,
    train_dotmat_supervised,
)
from .glovemat import (
    GloVeMatTrainer,
    glovemat_gradient,
    glovemat_pair_loss,
    glovemat_target,
    train_glovemat,
)
from .hybrid import (
    DotMatHybridTrainer,
    dense_ratings,
    densify,
    hybrid_configs,
    train_dotmat_hybrid,
)
from .predictors import FactorPredictor, GloVePredictor, Predictor
from .rankmat import (
    RankMatTrainer,
    rank_base,
    rankmat_gradient,
    rankmat_pair_loss,
    train_rankmat,
)
from .trainer import EpochRecord, PairSampler, Trainer, TrainTrace

# Model-producing algorithms, by command line name
TRAINERS: Dict[str, Type[Trainer]] = {
    t.NAME: t
    for t in (
        DotMatTrainer,
        SupervisedDotMatTrainer,
        ClassicMFTrainer,
        RankMatTrainer,
        GloVeMatTrainer,
        DotMatHybridTrainer,
    )
}

# Algorithms that don't produce a factor model
BASELINES = ("random", "mean")
