from dataclasses import dataclass, replace
from typing import Any, Final

from ..common.exceptions import ConfigurationError

DEFAULT_CLAMP_EPS: Final[float] = 1e-6


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one training run

    Attributes:
        learning_rate   SGD step size (gamma), strictly positive
        epochs          Number of passes over the training stream, 0 means
                        returning the initial model
        dim             Latent dimension k
        clamp_eps       Clamp margin of the dot product, in (0, 0.5)
        seed            Seed of every random choice made by the run
        pairs_per_user  Items sampled per user and per epoch by the
                        data-free pair stream
    """

    learning_rate: float
    epochs: int = 20
    dim: int = 16
    clamp_eps: float = DEFAULT_CLAMP_EPS
    seed: int = 42
    pairs_per_user: int = 100

    def __post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise ConfigurationError(
                f"Learning rate must be strictly positive, got {self.learning_rate}"
            )
        if self.epochs < 0:
            raise ConfigurationError(f"Epochs can't be negative, got {self.epochs}")
        if self.dim < 1:
            raise ConfigurationError(f"Dimension must be at least 1, got {self.dim}")
        if not 0 < self.clamp_eps < 0.5:
            raise ConfigurationError(
                f"Clamp epsilon must be in (0, 0.5), got {self.clamp_eps}"
            )
        if self.pairs_per_user < 1:
            raise ConfigurationError(
                f"pairs_per_user must be at least 1, got {self.pairs_per_user}"
            )

    def with_changes(self, **changes: Any) -> "TrainConfig":
        return replace(self, **changes)
