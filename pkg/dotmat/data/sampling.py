import hashlib
import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from ..common.exceptions import BoundsError, ConfigurationError
from ..common.logger import logger
from ..model.dataset import InteractionDataset, RatingTriple


@dataclass(frozen=True)
class PopularityRanks:
    """Dense popularity ranks. Rank 1 goes to the entity with the most
    ratings, ties are broken by ascending id"""

    user_rank: Dict[int, int]
    item_rank: Dict[int, int]


@dataclass(frozen=True)
class SplitDataset:
    """Train/test partition of a dataset. Both sides carry the universes
    and r_max of the source dataset"""

    train: InteractionDataset
    test: InteractionDataset

    @property
    def users(self) -> tuple:
        return self.train.users

    @property
    def items(self) -> tuple:
        return self.train.items

    @property
    def r_max(self) -> float:
        return self.train.r_max


def sample_users(
    dataset: InteractionDataset, n: int, seed: int
) -> InteractionDataset:
    """Uniform sample of 'n' users without replacement, with all their
    triples. The item universe shrinks to the items they rated"""
    if not 1 <= n <= len(dataset.users):
        raise BoundsError(
            f"Can't sample {n} users out of {len(dataset.users)}"
        )
    rng = np.random.default_rng(seed)
    chosen_rows = np.sort(rng.choice(len(dataset.users), size=n, replace=False))
    chosen = {dataset.users[r] for r in chosen_rows}
    triples = [t for t in dataset.triples if t.user_id in chosen]
    return InteractionDataset.from_triples(
        triples,
        r_max=dataset.r_max,
        users=chosen,
        items={t.item_id for t in triples},
    )


def split_train_test(
    dataset: InteractionDataset, test_fraction: float, seed: int
) -> SplitDataset:
    """Per-user stratified split. For every user with c > 1 ratings,
    ceil(test_fraction * c) triples, chosen uniformly, go to the test side,
    capped at c - 1 so that every test user keeps a training profile.
    Users with a single rating keep it in train"""
    if not 0 < test_fraction < 1:
        raise ConfigurationError(
            f"Test fraction must be in (0, 1), got {test_fraction}"
        )
    rng = np.random.default_rng(seed)
    per_user = dataset.by_user()
    train: List[RatingTriple] = []
    test: List[RatingTriple] = []
    for user in dataset.users:
        triples = per_user.get(user, [])
        count = len(triples)
        if count <= 1:
            train.extend(triples)
            continue
        # Tolerance keeps e.g. 0.1 * 30 from rounding up to 4
        n_test = min(math.ceil(test_fraction * count - 1e-9), count - 1)
        test_rows = set(rng.permutation(count)[:n_test].tolist())
        for row, t in enumerate(triples):
            (test if row in test_rows else train).append(t)
    return SplitDataset(
        train=dataset.with_triples(train), test=dataset.with_triples(test)
    )


def popularity_ranks(dataset: InteractionDataset) -> PopularityRanks:
    """Rank users and items by descending number of ratings. Members of
    the universes without ratings rank last, by ascending id"""
    if not dataset.triples:
        raise ConfigurationError("Can't rank entities of an empty dataset")
    user_counts = Counter(t.user_id for t in dataset.triples)
    item_counts = Counter(t.item_id for t in dataset.triples)

    def _rank(ids: tuple, counts: Counter) -> Dict[int, int]:
        ordered = sorted(ids, key=lambda x: (-counts.get(x, 0), x))
        return {ident: rank for rank, ident in enumerate(ordered, start=1)}

    return PopularityRanks(
        user_rank=_rank(dataset.users, user_counts),
        item_rank=_rank(dataset.items, item_counts),
    )


def split_digest(split: SplitDataset) -> str:
    """Fingerprint of a split: two splits with the same digest hold the
    same train and test pairs"""
    k = hashlib.sha3_256()
    for side in (split.train, split.test):
        for pair in sorted(side.pairs()):
            k.update(f"{pair[0]},{pair[1]};".encode())
        k.update(b"|")
    digest = k.hexdigest()
    logger.debug(f"Split digest: {digest}")
    return digest
