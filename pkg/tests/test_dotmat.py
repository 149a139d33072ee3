import math

import numpy as np
import pytest
from pytest import approx

from conftest import make_model, random_ratings
from dotmat.common.exceptions import ConfigurationError
from dotmat.common.util import sign
from dotmat.data.sampling import SplitDataset
from dotmat.model import FactorModel, TrainConfig, init_model
from dotmat.model.dataset import InteractionDataset, RatingTriple
from dotmat.trainers import (
    DotMatTrainer,
    SupervisedDotMatTrainer,
    dotmat_coefficient,
    dotmat_loss,
    dotmat_pair_loss,
    dotmat_step_datafree,
    dotmat_step_supervised,
    train_dotmat,
)
from dotmat.trainers import dotmat as dotmat_module

EPS = 1e-6
INV_E = 1 / math.e
# -0.1 * sqrt(2)/2 * (1 - ln 2)
HALF_STEP = -0.1 * math.sqrt(2) / 2 * (1 - math.log(2))


def half_model() -> FactorModel:
    """One user, one item, clamped dot 0.5"""
    return make_model({1: [0.5, 0.5]}, {1: [0.5, 0.5]})


def test_supervised_step_coefficient():
    assert HALF_STEP == approx(-0.021700, abs=5e-6)
    assert -0.1 * dotmat_coefficient(0.5, 0.2) == approx(HALF_STEP, rel=1e-12)

    model = half_model()
    dotmat_step_supervised(model, 1, 1, rating=1.0, r_max=5.0, lr=0.1)
    expected = 0.5 + HALF_STEP * 0.5
    assert model.user_vector(1) == approx(np.array([expected, expected]), rel=1e-12)
    assert model.item_vector(1) == approx(np.array([expected, expected]), rel=1e-12)


def test_datafree_step_coefficient():
    model = half_model()
    dotmat_step_datafree(model, 1, 1, lr=0.1)
    expected = 0.5 + HALF_STEP * 0.5
    assert model.user_vector(1) == approx(np.array([expected, expected]), rel=1e-12)


def test_zero_residual_is_a_fixed_point():
    model = half_model()
    before = model.copy()
    # x = 0.5 and x^x = r/r_max: sign(0) = 0
    dotmat_step_supervised(model, 1, 1, rating=0.5**0.5, r_max=1.0, lr=0.1)
    assert model == before


@pytest.mark.parametrize("rating", [0.5, 2.0, 5.0])
def test_inverse_e_is_a_fixed_point(rating):
    model = make_model({1: [1.0]}, {1: [INV_E]})
    dotmat_step_supervised(model, 1, 1, rating=rating, r_max=5.0, lr=0.1)
    assert model.user_factors == approx(np.array([[1.0]]), abs=1e-14)
    assert model.item_factors == approx(np.array([[INV_E]]), abs=1e-14)
    dotmat_step_datafree(model, 1, 1, lr=0.1)
    assert model.item_factors == approx(np.array([[INV_E]]), abs=1e-14)


def test_step_errors():
    with pytest.raises(ConfigurationError):
        dotmat_step_supervised(half_model(), 1, 1, 3.0, 5.0, lr=0.0)
    with pytest.raises(ConfigurationError):
        dotmat_step_supervised(half_model(), 1, 1, 6.0, 5.0, lr=0.1)
    with pytest.raises(ConfigurationError):
        dotmat_step_datafree(half_model(), 1, 1, lr=-0.1)


def test_power_dominance():
    for x in np.linspace(EPS, 1 - EPS, 1000).tolist():
        assert sign(x**x - x) == 1.0


def test_one_step_oracle():
    u = np.array([0.3, 0.4, 0.5, 0.35])
    v = np.array([0.4, 0.3, 0.45, 0.5])
    model = make_model({1: u.tolist()}, {1: v.tolist()})
    x = float(np.dot(u, v))
    g = 0.01 * dotmat_coefficient(x, x)
    dotmat_step_datafree(model, 1, 1, lr=0.01)
    new_x = float(np.dot(model.user_vector(1), model.item_vector(1)))
    assert new_x == approx(x - g * (u @ u + v @ v) + g * g * x, rel=1e-12)


@pytest.mark.parametrize("start", [0.2, 0.25, 0.7, 0.9])
def test_datafree_converges_to_inverse_e(start):
    entry = math.sqrt(start / 4)
    model = make_model({1: [entry] * 4}, {1: [entry] * 4})
    distances = []
    for _ in range(10000):
        dotmat_step_datafree(model, 1, 1, lr=0.01)
        x = float(np.dot(model.user_vector(1), model.item_vector(1)))
        distances.append(abs(x - INV_E))
    assert distances[-1] < 1e-3
    tail = distances[100:]
    assert all(b <= a + 1e-12 for a, b in zip(tail, tail[1:]))


def test_snapshot_symmetry():
    a = np.array([0.3, 0.1, 0.6])
    b = np.array([0.2, 0.5, 0.4])
    forward = make_model({1: a.tolist()}, {2: b.tolist()})
    mirrored = make_model({1: b.tolist()}, {2: a.tolist()})
    dotmat_step_supervised(forward, 1, 2, 1.0, 5.0, lr=0.3)
    dotmat_step_supervised(mirrored, 1, 2, 1.0, 5.0, lr=0.3)
    assert forward.user_factors.tobytes() == mirrored.item_factors.tobytes()
    assert forward.item_factors.tobytes() == mirrored.user_factors.tobytes()


def test_nonnegativity_floor():
    # Large step pushes the user entry below 0
    model = make_model({1: [0.01, 0.9]}, {1: [0.9, 0.9]})
    dotmat_step_supervised(model, 1, 1, rating=0.05, r_max=5.0, lr=1.0)
    assert model.is_nonnegative()
    assert model.user_factors[0, 0] == 0.0


def test_pair_loss():
    u = np.array([0.5, 0.5])
    assert dotmat_pair_loss(u, u, 0.5) == approx(math.sqrt(2) / 2 - 0.5, abs=1e-12)
    assert dotmat_pair_loss(u, u, math.sqrt(2) / 2) == approx(0.0, abs=1e-15)


def test_dataset_loss_brute_force():
    ds = random_ratings(10, 10, 5, seed=3)
    model = init_model(ds.users, ds.items, 4, seed=8)
    x = np.array(
        [
            np.clip(model.user_vector(t.user_id) @ model.item_vector(t.item_id), EPS, 1 - EPS)
            for t in ds.triples
        ]
    )
    r = np.array([t.rating for t in ds.triples]) / ds.r_max
    assert len(ds) == 50
    assert dotmat_loss(model, ds) == approx(np.mean(np.abs(x**x - r)), rel=1e-12)
    assert dotmat_loss(model, ds.with_triples(())) == 0.0


def test_train_dotmat_zero_epochs():
    config = TrainConfig(0.01, epochs=0, dim=4, seed=3)
    model, trace = train_dotmat(range(5), range(7), config)
    assert model == init_model(range(5), range(7), 4, seed=3)
    assert len(trace) == 0


def test_train_dotmat_determinism():
    config = TrainConfig(0.05, epochs=3, dim=4, seed=11, pairs_per_user=10)
    a, trace_a = train_dotmat(range(8), range(9), config)
    b, trace_b = train_dotmat(range(8), range(9), config)
    assert a == b
    assert trace_a.losses == trace_b.losses
    c, _ = train_dotmat(range(8), range(9), config.with_changes(seed=12))
    assert a != c


def test_train_dotmat_is_data_free():
    ds = random_ratings(10, 12, 4, seed=0)
    other = ds.with_triples(
        [t._replace(rating=5.0 - t.rating + 1.0) for t in ds.triples]
    )
    config = TrainConfig(0.05, epochs=2, dim=4, pairs_per_user=6)
    trainer = DotMatTrainer(config)
    a, _ = trainer.fit(SplitDataset(ds, ds.with_triples(())))
    b, _ = trainer.fit(SplitDataset(other, other.with_triples(())))
    empty = ds.with_triples(())
    c, _ = trainer.fit(SplitDataset(empty, empty))
    assert a == b == c


def test_train_dotmat_moves_towards_inverse_e():
    config = TrainConfig(0.05, epochs=30, dim=4, seed=1, pairs_per_user=20)
    records = []
    model, trace = DotMatTrainer(config, on_epoch=records.append).fit_universes(
        range(20), range(20)
    )
    initial = init_model(range(20), range(20), 4, seed=1)

    def distance(m: FactorModel) -> float:
        dots = np.clip(m.user_factors @ m.item_factors.T, EPS, 1 - EPS)
        return float(np.mean(np.abs(dots - INV_E)))

    assert distance(model) < 0.5 * distance(initial)
    assert model.is_nonnegative()
    assert [r.epoch for r in records] == list(range(1, 31))
    assert trace.records == records


def test_power_dominates_on_the_unit_interval():
    for x in np.linspace(EPS, 1 - EPS, 1000).tolist():
        assert x**x > x


def test_datafree_sign_is_always_positive(monkeypatch):
    update = dotmat_module._dotmat_update
    signs = []

    def recording_update(*args):
        loss, s = update(*args)
        signs.append(s)
        return loss, s

    monkeypatch.setattr(dotmat_module, "_dotmat_update", recording_update)
    config = TrainConfig(0.05, epochs=10, dim=4, seed=5, pairs_per_user=10)
    train_dotmat(range(15), range(12), config)
    assert len(signs) == 10 * 15 * 10
    assert set(signs) == {1.0}


def test_datafree_loss_settles():
    # Initial dots sit around 1/4, below 1/e, and |x^x - x| decreases on (0, 1)
    config = TrainConfig(0.01, epochs=20, dim=16, seed=0)
    _, trace = train_dotmat(range(100), range(100), config)
    losses = trace.losses
    assert len(losses) == 20
    for before, after in zip(losses[1:], losses[2:]):
        assert after <= before + 1e-9
    assert losses[-1] < losses[1]


def test_supervised_trainer(small_split):
    config = TrainConfig(0.05, epochs=5, dim=3, seed=2)
    a, trace = SupervisedDotMatTrainer(config).fit(small_split)
    b, _ = SupervisedDotMatTrainer(config).fit(small_split)
    assert a == b
    assert a.is_nonnegative()
    assert len(trace) == 5
    assert a.user_ids == small_split.users


def test_supervised_trainer_ignores_test_side(small_split):
    config = TrainConfig(0.05, epochs=2, dim=3, seed=2)
    blind = SplitDataset(small_split.train, small_split.test.with_triples(()))
    assert SupervisedDotMatTrainer(config).fit(small_split)[0] == (
        SupervisedDotMatTrainer(config).fit(blind)[0]
    )
