from .parsers import parse_csv, parse_movielens, read_dataset, write_dataset
from .sampling import (
    PopularityRanks,
    SplitDataset,
    popularity_ranks,
    sample_users,
    split_digest,
    split_train_test,
)
