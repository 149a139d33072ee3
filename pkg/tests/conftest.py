import os

import numpy as np
import pytest

from dotmat.common.logger import disable_logging
from dotmat.data.parsers import parse_movielens
from dotmat.data.sampling import SplitDataset
from dotmat.model.dataset import InteractionDataset, RatingTriple
from dotmat.model.factors import FactorModel

ML1M_ENV = "DOTMAT_ML1M"


def make_model(user_vectors, item_vectors) -> FactorModel:
    """Factor model from {id: vector} mappings"""
    users = sorted(user_vectors)
    items = sorted(item_vectors)
    k = len(next(iter(user_vectors.values())))
    return FactorModel(
        k,
        users,
        items,
        np.array([user_vectors[u] for u in users], dtype=np.float64),
        np.array([item_vectors[i] for i in items], dtype=np.float64),
    )


def random_ratings(
    n_users: int, n_items: int, per_user: int, seed: int
) -> InteractionDataset:
    rng = np.random.default_rng(seed)
    triples = []
    for user in range(1, n_users + 1):
        for item in sorted(rng.choice(n_items, size=per_user, replace=False)):
            triples.append(
                RatingTriple(user, 100 + int(item), float(rng.integers(1, 6)), 1000 + user)
            )
    return InteractionDataset.from_triples(triples, r_max=5.0)


@pytest.fixture(autouse=True)
def quiet_logs():
    disable_logging()
    yield


@pytest.fixture
def rated_dataset() -> InteractionDataset:
    """30 users with 6 ratings each over 20 items"""
    return random_ratings(30, 20, 6, seed=7)


@pytest.fixture
def small_split() -> SplitDataset:
    """4 users x 5 items, a handful of train and test ratings"""
    train = [
        RatingTriple(1, 10, 5.0),
        RatingTriple(1, 11, 3.0),
        RatingTriple(2, 10, 4.0),
        RatingTriple(2, 12, 1.0),
        RatingTriple(3, 13, 2.0),
        RatingTriple(3, 11, 4.0),
        RatingTriple(4, 14, 5.0),
    ]
    test = [
        RatingTriple(1, 12, 4.0),
        RatingTriple(2, 13, 2.0),
        RatingTriple(4, 10, 3.0),
    ]
    users, items = (1, 2, 3, 4), (10, 11, 12, 13, 14)
    return SplitDataset(
        train=InteractionDataset(users, items, tuple(train), 5.0),
        test=InteractionDataset(users, items, tuple(test), 5.0),
    )


@pytest.fixture(scope="session")
def ml1m_path() -> str:
    path = os.environ.get(ML1M_ENV)
    if not path:
        pytest.skip(f"Set {ML1M_ENV} to the MovieLens 1M ratings.dat path")
    return path


@pytest.fixture(scope="session")
def ml1m(ml1m_path) -> InteractionDataset:
    """MovieLens 1M, parsed once per session"""
    return parse_movielens(ml1m_path)
