from dataclasses import dataclass, field
from typing import (
    Dict,
    FrozenSet,
    Iterable,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

from ..common.exceptions import ConfigurationError


class RatingTriple(NamedTuple):
    """One observed (user, item, rating) event"""

    user_id: int
    item_id: int
    rating: float
    timestamp: Optional[int] = None


@dataclass(frozen=True)
class InteractionDataset:
    """Indexed collection of rating triples

    Attributes:
        users       Ordered (ascending) universe of user ids
        items       Ordered (ascending) universe of item ids
        triples     The observed triples, at most one per (user, item) pair
        r_max       Rating ceiling, at least the maximum observed rating
        duplicates_dropped  Number of duplicate (user, item) rows discarded
                            while building the dataset
    """

    users: Tuple[int, ...]
    items: Tuple[int, ...]
    triples: Tuple[RatingTriple, ...]
    r_max: float
    duplicates_dropped: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if not self.r_max > 0:
            raise ConfigurationError(f"r_max must be positive, got {self.r_max}")
        users = frozenset(self.users)
        items = frozenset(self.items)
        if len(users) != len(self.users) or len(items) != len(self.items):
            raise ConfigurationError("User and item universes must not repeat ids")
        seen = set()
        for t in self.triples:
            if t.user_id not in users:
                raise ConfigurationError(f"Triple {t} references unknown user")
            if t.item_id not in items:
                raise ConfigurationError(f"Triple {t} references unknown item")
            if not 0 < t.rating <= self.r_max:
                raise ConfigurationError(
                    f"Triple {t} has a rating outside of (0, {self.r_max}]"
                )
            pair = (t.user_id, t.item_id)
            if pair in seen:
                raise ConfigurationError(f"Duplicate (user, item) pair {pair}")
            seen.add(pair)

    @classmethod
    def from_triples(
        cls,
        triples: Iterable[RatingTriple],
        r_max: Optional[float] = None,
        users: Optional[Iterable[int]] = None,
        items: Optional[Iterable[int]] = None,
        duplicates_dropped: int = 0,
    ) -> "InteractionDataset":
        """Build a dataset from triples. Universes default to the ids
        seen in the triples and r_max to the maximum observed rating"""
        triples = tuple(triples)
        if users is None:
            users = {t.user_id for t in triples}
        if items is None:
            items = {t.item_id for t in triples}
        observed_max = max((t.rating for t in triples), default=0.0)
        if r_max is None:
            # Empty datasets still need a valid ceiling
            r_max = observed_max if triples else 1.0
        elif r_max < observed_max:
            raise ConfigurationError(
                f"r_max {r_max} is below the maximum observed rating {observed_max}"
            )
        return cls(
            users=tuple(sorted(set(users))),
            items=tuple(sorted(set(items))),
            triples=triples,
            r_max=float(r_max),
            duplicates_dropped=duplicates_dropped,
        )

    def __len__(self) -> int:
        return len(self.triples)

    def pairs(self) -> FrozenSet[Tuple[int, int]]:
        """Set of observed (user, item) pairs"""
        return frozenset((t.user_id, t.item_id) for t in self.triples)

    def by_user(self) -> Dict[int, List[RatingTriple]]:
        """Group triples per user, keeping their original order. Users
        without triples are absent from the mapping"""
        res: Dict[int, List[RatingTriple]] = {}
        for t in self.triples:
            res.setdefault(t.user_id, []).append(t)
        return res

    def items_of(self) -> Dict[int, FrozenSet[int]]:
        """Map each user with triples to the set of items they rated"""
        return {
            u: frozenset(t.item_id for t in ts)
            for u, ts in self.by_user().items()
        }

    def with_triples(self, triples: Sequence[RatingTriple]) -> "InteractionDataset":
        """Dataset with the same universes and r_max but other triples"""
        return InteractionDataset(
            users=self.users,
            items=self.items,
            triples=tuple(triples),
            r_max=self.r_max,
        )
