import math
from typing import Dict, Iterable, Sequence, Tuple

import numpy as np

from ..common.exceptions import ConfigurationError, DimensionError, UnknownIdError
from .config import DEFAULT_CLAMP_EPS


class FactorModel:
    """Latent factor model: one k-dimensional vector per user (U_i) and
    per item (V_j). Factors are stored as two (n, k) float64 matrices whose
    rows follow the ascending order of the ids.

    The model is mutated in place by trainers and must stay confined to a
    single thread while it is; read-only sharing is fine afterwards.
    """

    def __init__(
        self,
        k: int,
        user_ids: Sequence[int],
        item_ids: Sequence[int],
        user_factors: np.ndarray,
        item_factors: np.ndarray,
    ) -> None:
        if k < 1:
            raise ConfigurationError(f"Latent dimension must be at least 1, got {k}")
        self.k = k
        self.user_ids: Tuple[int, ...] = tuple(user_ids)
        self.item_ids: Tuple[int, ...] = tuple(item_ids)
        self.user_factors = np.ascontiguousarray(user_factors, dtype=np.float64)
        self.item_factors = np.ascontiguousarray(item_factors, dtype=np.float64)
        if self.user_factors.shape != (len(self.user_ids), k):
            raise DimensionError(
                f"User factors have shape {self.user_factors.shape}, "
                f"expected {(len(self.user_ids), k)}"
            )
        if self.item_factors.shape != (len(self.item_ids), k):
            raise DimensionError(
                f"Item factors have shape {self.item_factors.shape}, "
                f"expected {(len(self.item_ids), k)}"
            )
        self.user_index: Dict[int, int] = {
            u: i for i, u in enumerate(self.user_ids)
        }
        self.item_index: Dict[int, int] = {
            v: i for i, v in enumerate(self.item_ids)
        }
        if len(self.user_index) != len(self.user_ids):
            raise ConfigurationError("Duplicate user ids in factor model")
        if len(self.item_index) != len(self.item_ids):
            raise ConfigurationError("Duplicate item ids in factor model")

    def user_row(self, user_id: int) -> int:
        try:
            return self.user_index[user_id]
        except KeyError:
            raise UnknownIdError("user", user_id) from None

    def item_row(self, item_id: int) -> int:
        try:
            return self.item_index[item_id]
        except KeyError:
            raise UnknownIdError("item", item_id) from None

    def user_vector(self, user_id: int) -> np.ndarray:
        """U_i, as a view: writing to it updates the model"""
        return self.user_factors[self.user_row(user_id)]

    def item_vector(self, item_id: int) -> np.ndarray:
        """V_j, as a view: writing to it updates the model"""
        return self.item_factors[self.item_row(item_id)]

    def copy(self) -> "FactorModel":
        return FactorModel(
            self.k,
            self.user_ids,
            self.item_ids,
            self.user_factors.copy(),
            self.item_factors.copy(),
        )

    def project_nonnegative(self) -> None:
        """Floor every factor entry at 0"""
        np.maximum(self.user_factors, 0.0, out=self.user_factors)
        np.maximum(self.item_factors, 0.0, out=self.item_factors)

    def is_nonnegative(self) -> bool:
        return bool(
            (self.user_factors >= 0).all() and (self.item_factors >= 0).all()
        )

    def is_finite(self) -> bool:
        return bool(
            np.isfinite(self.user_factors).all()
            and np.isfinite(self.item_factors).all()
        )

    def covers(self, user_ids: Iterable[int], item_ids: Iterable[int]) -> None:
        """Raise UnknownIdError for the first id the model doesn't hold"""
        for u in user_ids:
            self.user_row(u)
        for i in item_ids:
            self.item_row(i)

    def __eq__(self, other: object) -> bool:
        """Bitwise equality of dimension, ids and factor entries"""
        return (
            isinstance(other, FactorModel)
            and self.k == other.k
            and self.user_ids == other.user_ids
            and self.item_ids == other.item_ids
            and self.user_factors.tobytes() == other.user_factors.tobytes()
            and self.item_factors.tobytes() == other.item_factors.tobytes()
        )

    def __repr__(self) -> str:
        return (
            f"FactorModel(k={self.k}, users={len(self.user_ids)}, "
            f"items={len(self.item_ids)})"
        )


def _check_eps(eps: float) -> None:
    if not 0 < eps < 0.5:
        raise ConfigurationError(f"Clamp epsilon must be in (0, 0.5), got {eps}")


def clamp(x: float, eps: float = DEFAULT_CLAMP_EPS) -> float:
    """Project 'x' into [eps, 1 - eps]"""
    return min(max(x, eps), 1.0 - eps)


def clamped_dot(
    u: np.ndarray, v: np.ndarray, eps: float = DEFAULT_CLAMP_EPS
) -> float:
    """Dot product of two factor vectors, clamped into [eps, 1 - eps].

    The dot product stands for a Zipf probability, so it has to live in
    (0, 1) for x^x and ln(x) to be defined.

    :param u: user factor vector
    :param v: item factor vector
    :param eps: clamp margin, in (0, 0.5)
    """
    _check_eps(eps)
    if len(u) != len(v):
        raise DimensionError(
            f"Can't multiply vectors of length {len(u)} and {len(v)}"
        )
    return clamp(float(np.dot(u, v)), eps)


def predict_rating(
    model: FactorModel,
    user_id: int,
    item_id: int,
    r_max: float,
    eps: float = DEFAULT_CLAMP_EPS,
) -> float:
    """Reconstruct a rating: r_max * clamped_dot(U_i, V_j)"""
    return r_max * clamped_dot(
        model.user_vector(user_id), model.item_vector(item_id), eps
    )


def predict_batch(
    model: FactorModel,
    pairs: Iterable[Tuple[int, int]],
    r_max: float,
    eps: float = DEFAULT_CLAMP_EPS,
) -> np.ndarray:
    """predict_rating() over many (user, item) pairs"""
    _check_eps(eps)
    res = [
        r_max
        * clamp(
            float(
                np.dot(
                    model.user_factors[model.user_row(u)],
                    model.item_factors[model.item_row(i)],
                )
            ),
            eps,
        )
        for u, i in pairs
    ]
    return np.array(res, dtype=np.float64)


def predict_matrix(
    model: FactorModel,
    user_ids: Sequence[int],
    item_ids: Sequence[int],
    r_max: float,
    eps: float = DEFAULT_CLAMP_EPS,
) -> np.ndarray:
    """predict_rating() over the cross product of 'user_ids' and 'item_ids',
    as a (len(user_ids), len(item_ids)) matrix"""
    _check_eps(eps)
    rows = [model.user_row(u) for u in user_ids]
    cols = [model.item_row(i) for i in item_ids]
    dots = model.user_factors[rows] @ model.item_factors[cols].T
    return r_max * np.clip(dots, eps, 1.0 - eps)


def init_model(
    user_ids: Iterable[int], item_ids: Iterable[int], k: int, seed: int
) -> FactorModel:
    """Create a model whose entries are drawn independently and uniformly
    from (0, 1/sqrt(k)). The expected dot product is then 1/4, well inside
    (0, 1). User factors are drawn first, then item factors, each in
    ascending id order, so the result only depends on (ids, k, seed)
    """
    if k < 1:
        raise ConfigurationError(f"Latent dimension must be at least 1, got {k}")
    users = sorted(set(user_ids))
    items = sorted(set(item_ids))
    if not users or not items:
        raise ConfigurationError("Can't initialize a model without users or items")
    rng = np.random.default_rng(seed)
    low = np.nextafter(0.0, 1.0)
    high = 1.0 / math.sqrt(k)
    user_factors = rng.uniform(low, high, size=(len(users), k))
    item_factors = rng.uniform(low, high, size=(len(items), k))
    return FactorModel(k, users, items, user_factors, item_factors)
