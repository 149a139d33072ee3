import io
import math

import numpy as np
import pandas as pd
import pytest
from pytest import approx

from conftest import make_model, random_ratings
from dotmat.common.exceptions import ConfigurationError, DotMatException, UnknownIdError
from dotmat.data.sampling import PopularityRanks, SplitDataset, split_train_test
from dotmat.model import TrainConfig, init_model
from dotmat.model.dataset import InteractionDataset, RatingTriple
from dotmat.trainers import (
    BASELINES,
    TRAINERS,
    ClassicMFTrainer,
    EpochRecord,
    FactorPredictor,
    GloVeMatTrainer,
    GloVePredictor,
    MeanPredictor,
    PairSampler,
    RandomPredictor,
    RankMatTrainer,
    Trainer,
    TrainTrace,
    baseline_mean,
    baseline_random,
    glovemat_target,
    mf_step,
    rank_base,
    train_glovemat,
    train_mf_classic,
    train_rankmat,
)


def single_rating_split(rating: float, r_max: float) -> SplitDataset:
    ds = InteractionDataset.from_triples([RatingTriple(1, 1, rating)], r_max=r_max)
    return SplitDataset(ds, ds.with_triples(()))


def test_registry():
    assert set(TRAINERS) == {
        "dotmat",
        "dotmat-supervised",
        "mf",
        "rankmat",
        "glovemat",
        "dotmat-hybrid",
    }
    assert all(issubclass(t, Trainer) for t in TRAINERS.values())
    assert not set(BASELINES) & set(TRAINERS)


def test_base_trainer_is_abstract(small_split):
    with pytest.raises(DotMatException):
        Trainer(TrainConfig(0.1)).fit(small_split)


def test_pair_sampler():
    sampler = PairSampler([1, 2, 3], [10, 20], seed=4, pairs_per_user=5)
    assert len(sampler) == 15
    first = list(sampler.epoch(1))
    assert first == list(sampler.epoch(1))
    assert len(first) == 15
    assert [u for u, _ in first] == [1] * 5 + [2] * 5 + [3] * 5
    assert {i for _, i in first} <= {10, 20}


def test_trace(tmp_path):
    trace = TrainTrace()
    trace.append(EpochRecord(1, 0.5, 0.25))
    trace.append(EpochRecord(2, 0.25, 0.5))
    with pytest.raises(DotMatException):
        trace.append(EpochRecord(2, 0.1, 0.1))
    assert trace.losses == [0.5, 0.25]
    assert trace.total_seconds == 0.75
    path = tmp_path / "trace.csv"
    trace.to_csv(str(path))
    df = pd.read_csv(path)
    assert list(df.columns) == ["epoch", "mean_loss", "seconds"]
    assert df["epoch"].tolist() == [1, 2]


def test_mf_single_rating_converges():
    config = TrainConfig(0.1, epochs=300, dim=4, seed=0)
    model, trace = train_mf_classic(single_rating_split(4.0, 5.0), config)
    assert FactorPredictor(model, 5.0).predict(1, 1) == approx(4.0, abs=0.05)
    assert trace.losses[-1] < trace.losses[0]


def test_mf_zero_error_is_a_fixed_point():
    model = make_model({1: [0.5, 0.5]}, {1: [0.5, 0.5]})
    before = model.copy()
    assert mf_step(model, 1, 1, 0.5, lr=0.1) == 0.0
    assert model == before


def test_mf_is_unconstrained():
    model = make_model({1: [0.1]}, {1: [1.0]})
    mf_step(model, 1, 1, 0.0, lr=2.0)
    assert model.user_factors[0, 0] == approx(-0.1)
    assert model.item_factors[0, 0] == approx(0.98)


def test_mf_row_training_matches_steps(small_split):
    config = TrainConfig(0.05, epochs=3, dim=3, seed=2)
    trainer = ClassicMFTrainer(config)
    model, trace = trainer.fit(small_split)

    # Same visiting order, one mf_step per triple
    expected = init_model(small_split.users, small_split.items, 3, seed=2)
    triples = small_split.train.triples
    rng = trainer.order_rng()
    losses = []
    for _ in range(3):
        losses.append(
            math.fsum(
                mf_step(expected, t.user_id, t.item_id, t.rating / 5.0, 0.05)
                for t in (triples[p] for p in rng.permutation(len(triples)))
            )
            / len(triples)
        )
    assert model == expected
    assert trace.losses == losses


def test_mf_determinism(rated_dataset):
    split = split_train_test(rated_dataset, 0.2, seed=1)
    config = TrainConfig(0.05, epochs=3, dim=4, seed=5)
    assert train_mf_classic(split, config)[0] == train_mf_classic(split, config)[0]
    assert train_mf_classic(split, config)[0] != (
        train_mf_classic(split, config.with_changes(seed=6))[0]
    )


def test_rank_base():
    ranks = PopularityRanks({1: 2}, {5: 3})
    assert rank_base(ranks, 1, 5) == approx(1 / 6)
    with pytest.raises(UnknownIdError):
        rank_base(ranks, 2, 5)
    with pytest.raises(UnknownIdError):
        rank_base(ranks, 1, 6)


def test_rankmat_top_pair_stays_put():
    # Single user and item both rank 1: a = 1 and the gradient vanishes
    split = single_rating_split(3.0, 5.0)
    config = TrainConfig(0.1, epochs=5, dim=3, seed=2)
    model, trace = RankMatTrainer(config).fit(split)
    assert model == init_model([1], [1], 3, seed=2)
    assert trace.losses == approx([0.16] * 5)


def test_rankmat_missing_rank(small_split):
    config = TrainConfig(0.1, epochs=1, dim=2)
    with pytest.raises(UnknownIdError):
        train_rankmat(small_split, PopularityRanks({}, {}), config)


def test_rankmat_training(small_split):
    config = TrainConfig(0.1, epochs=4, dim=3, seed=2)
    a, _ = RankMatTrainer(config).fit(small_split)
    b, _ = RankMatTrainer(config).fit(small_split)
    assert a == b
    assert a.is_nonnegative()


def test_glovemat_target():
    assert glovemat_target(0.0) == 0.0
    assert glovemat_target(4.0) == approx(math.log(5.0))


def test_glovemat_training(small_split):
    config = TrainConfig(0.05, epochs=60, dim=4, seed=1)
    trainer = GloVeMatTrainer(config)
    model, trace = trainer.fit(small_split)
    assert trace.losses[-1] < trace.losses[0]
    predictor = trainer.predictor(model, small_split.r_max)
    assert isinstance(predictor, GloVePredictor)
    for t in small_split.train.triples:
        assert 0.0 <= predictor.predict(t.user_id, t.item_id) <= 5.0
    assert train_glovemat(small_split, config)[0] == model


def test_glove_predictor_clamps():
    model = make_model({1: [10.0], 2: [-1.0], 3: [1000.0]}, {1: [1.0]})
    predictor = GloVePredictor(model, 5.0)
    assert predictor.predict(1, 1) == 5.0
    assert predictor.predict(2, 1) == 0.0
    assert predictor.predict(3, 1) == 5.0
    assert predictor.score_items(2, [1]).tolist() == [0.0]


def test_factor_predictor_scores():
    model = init_model([1, 2], [3, 4, 5], 2, seed=0)
    predictor = FactorPredictor(model, 5.0)
    scores = predictor.score_items(1, [5, 3])
    assert scores == approx(np.array([predictor.predict(1, 5), predictor.predict(1, 3)]))


def test_mean_baseline():
    split = single_rating_split(3.5, 5.0)
    predictor = baseline_mean(split)
    assert predictor.predict(1, 1) == 3.5
    assert predictor.predict(9, 9) == 3.5


def test_mean_baseline_fallback(small_split):
    predictor = MeanPredictor(small_split)
    assert predictor.predict(1, 10) == approx(4.5)
    # Item 12 has the single train rating 1.0
    assert predictor.predict(4, 12) == 1.0
    assert predictor.predict(1, 99) == approx(24.0 / 7)


def test_mean_baseline_item_means(rated_dataset):
    split = split_train_test(rated_dataset, 0.2, seed=1)
    predictor = MeanPredictor(split)
    by_item = {}
    for t in split.train.triples:
        by_item.setdefault(t.item_id, []).append(t.rating)
    assert predictor.item_mean.keys() == by_item.keys()
    for item, ratings in by_item.items():
        assert predictor.predict(1, item) == approx(sum(ratings) / len(ratings), abs=1e-12)
    assert all(isinstance(v, float) for v in predictor.item_mean.values())


def test_mean_baseline_empty_train():
    ds = InteractionDataset.from_triples([], r_max=5.0)
    with pytest.raises(ConfigurationError):
        MeanPredictor(SplitDataset(ds, ds))


def test_random_baseline():
    a = baseline_random(7, 5.0)
    b = RandomPredictor(7, 5.0)
    pairs = [(u, i) for u in range(10) for i in range(10)]
    values = a.predict_many(pairs)
    assert values.tolist() == b.predict_many(reversed(pairs)).tolist()[::-1]
    assert ((values > 0) & (values <= 5.0)).all()
    assert len(set(values.tolist())) > 90
    assert values.tolist() != RandomPredictor(8, 5.0).predict_many(pairs).tolist()
    with pytest.raises(ConfigurationError):
        RandomPredictor(7, 0.0)


def test_trainers_only_read_train_side(rated_dataset):
    split = split_train_test(rated_dataset, 0.2, seed=3)
    blind = SplitDataset(split.train, split.test.with_triples(()))
    config = TrainConfig(0.05, epochs=2, dim=3, seed=1, pairs_per_user=5)
    for name, trainer_cls in TRAINERS.items():
        assert trainer_cls(config).fit(split)[0] == trainer_cls(config).fit(blind)[0], name
