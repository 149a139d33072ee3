"""Popularity concentration of top-K recommendations.

The Degree of Matthew Effect is measured as the absolute slope of the
least-squares line through (ln r, ln c_r), where c_1 >= c_2 >= ... are
the non-zero exposure counts of the items across all users' top-K
lists. 0 means uniform exposure; exact Zipf exposure c_r = C / r^s gives
s. Items never recommended are left out of the fit (ln 0 is undefined)
and counted separately.
"""
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Union

import numpy as np

from ..common.exceptions import ConfigurationError, DegenerateInputError
from ..common.logger import logger
from ..model.factors import FactorModel
from ..trainers.predictors import FactorPredictor, Predictor


@dataclass(frozen=True)
class ExposureProfile:
    """Number of appearances of each item across the top-K lists of the
    users served. Counts are integers when built by exposure_profile(),
    synthetic profiles may use real values"""

    counts: Dict[int, float]
    k: int

    def __post_init__(self) -> None:
        if any(c < 0 for c in self.counts.values()):
            raise ConfigurationError("Exposure counts can't be negative")

    @property
    def total(self) -> float:
        return sum(self.counts.values())


class MatthewResult(NamedTuple):
    degree: float
    excluded_items: int


def top_k(
    model: Union[Predictor, FactorModel],
    user_ids: Iterable[int],
    item_ids: Iterable[int],
    k: int,
    exclude: Optional[Mapping[int, Iterable[int]]] = None,
    r_max: float = 1.0,
) -> Dict[int, List[int]]:
    """Top-k items per user by predicted rating, skipping the items
    excluded for that user (its train items). Ties go to the lowest item
    id. Users with fewer than k candidates get all of them.

    :param model: predictor, or factor model read through the Zipf link
    :param exclude: user id -> items never to recommend to that user
    :param r_max: rating ceiling, only used when 'model' is a FactorModel
    """
    if k < 1:
        raise ConfigurationError(f"k must be at least 1, got {k}")
    predictor = (
        FactorPredictor(model, r_max) if isinstance(model, FactorModel) else model
    )
    items = sorted(set(item_ids))
    exclude = exclude or {}
    res: Dict[int, List[int]] = {}
    for user in user_ids:
        banned = set(exclude.get(user, ()))
        candidates = [i for i in items if i not in banned]
        if not candidates:
            res[user] = []
            continue
        scores = predictor.score_items(user, candidates)
        # lexsort sorts by the last key first: score desc, then id asc
        order = np.lexsort((np.asarray(candidates), -scores))
        res[user] = [candidates[j] for j in order[:k]]
    return res


def exposure_profile(
    lists: Mapping[int, Iterable[int]],
    k: int,
    item_ids: Optional[Iterable[int]] = None,
) -> ExposureProfile:
    """Count the appearances of every item in the top-k lists. Items of
    'item_ids' that never appear get a 0 count"""
    counts: Dict[int, float] = {i: 0 for i in item_ids} if item_ids is not None else {}
    for recommended in lists.values():
        for item in recommended:
            counts[item] = counts.get(item, 0) + 1
    return ExposureProfile(counts, k)


def matthew_effect(exposure: ExposureProfile) -> MatthewResult:
    """Degree of Matthew Effect and number of zero-exposure items left
    out of the fit"""
    nonzero = sorted((c for c in exposure.counts.values() if c > 0), reverse=True)
    excluded = len(exposure.counts) - len(nonzero)
    if len(nonzero) < 2:
        raise DegenerateInputError(
            f"Need at least two items with non-zero exposure, got {len(nonzero)}"
        )
    log_rank = np.log(np.arange(1, len(nonzero) + 1, dtype=np.float64))
    log_count = np.log(np.array(nonzero, dtype=np.float64))
    design = np.vstack([log_rank, np.ones_like(log_rank)]).T
    (slope, _), *_ = np.linalg.lstsq(design, log_count, rcond=None)
    logger.debug(
        f"Matthew effect fit over {len(nonzero)} items ({excluded} unexposed): "
        f"slope {slope:.6f}"
    )
    return MatthewResult(abs(float(slope)), excluded)


def matthew_degree(exposure: ExposureProfile) -> float:
    return matthew_effect(exposure).degree
