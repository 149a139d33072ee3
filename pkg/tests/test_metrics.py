import numpy as np
import pytest
from pytest import approx

from conftest import make_model
from dotmat.common.exceptions import ConfigurationError, DegenerateInputError
from dotmat.metrics import (
    ExposureProfile,
    Prediction,
    PredictionSet,
    exposure_profile,
    mae,
    matthew_degree,
    matthew_effect,
    top_k,
)
from dotmat.model import init_model
from dotmat.model.dataset import InteractionDataset, RatingTriple
from dotmat.trainers import Predictor


class TablePredictor(Predictor):
    def __init__(self, scores):
        self.scores = scores

    def predict(self, user_id, item_id):
        return self.scores[(user_id, item_id)]


def prediction_set(predicted, actual):
    return PredictionSet(
        tuple(Prediction(1, i, p, a) for i, (p, a) in enumerate(zip(predicted, actual)))
    )


def test_mae_identity():
    assert mae(prediction_set([1.0, 4.5, 3.0], [1.0, 4.5, 3.0])) == 0.0


def test_mae_hand_arithmetic():
    assert mae(prediction_set([1.0, 2.0], [2.0, 4.0])) == 1.5


def test_mae_brute_force():
    rng = np.random.default_rng(0)
    predicted = rng.uniform(0, 5, 100)
    actual = rng.uniform(0.1, 5, 100)
    preds = prediction_set(predicted.tolist(), actual.tolist())
    expected = sum(abs(p - a) for p, a in zip(predicted, actual)) / 100
    assert mae(preds) == approx(expected, rel=1e-12)
    shuffled = PredictionSet(tuple(reversed(preds.predictions)))
    assert mae(shuffled) == approx(mae(preds), rel=1e-12)


def test_mae_errors():
    with pytest.raises(ConfigurationError):
        mae(PredictionSet(()))
    with pytest.raises(ConfigurationError):
        prediction_set([float("nan")], [1.0])


def test_prediction_set_from_arrays():
    ds = InteractionDataset.from_triples(
        [RatingTriple(1, 1, 2.0), RatingTriple(1, 2, 3.0)], r_max=5.0
    )
    preds = PredictionSet.from_arrays(ds, np.array([2.5, 3.0]))
    assert preds.predictions[0] == Prediction(1, 1, 2.5, 2.0)
    assert mae(preds) == 0.25
    with pytest.raises(ConfigurationError):
        PredictionSet.from_arrays(ds, [1.0])


def test_top_k_ordering():
    model = make_model({1: [1.0]}, {5: [0.1], 6: [0.9], 7: [0.5]})
    assert top_k(model, [1], [5, 6, 7], 2) == {1: [6, 7]}
    assert top_k(model, [1], [5, 6, 7], 10) == {1: [6, 7, 5]}


def test_top_k_ties():
    model = make_model({1: [0.5]}, {i: [0.5] for i in (9, 3, 7, 1)})
    assert top_k(model, [1], [9, 3, 7, 1], 3) == {1: [1, 3, 7]}


def test_top_k_exclusions():
    model = init_model(range(10), range(10), 3, seed=5)
    rng = np.random.default_rng(1)
    exclude = {u: set(rng.choice(10, size=4, replace=False).tolist()) for u in range(10)}
    lists = top_k(model, range(10), range(10), 5, exclude)
    for u in range(10):
        assert len(lists[u]) == 5
        assert not set(lists[u]) & exclude[u]
        scores = [model.user_vector(u) @ model.item_vector(i) for i in lists[u]]
        assert scores == sorted(scores, reverse=True)
    everything = top_k(model, [0], range(10), 5, {0: range(10)})
    assert everything == {0: []}


def test_top_k_scale_invariance():
    rng = np.random.default_rng(2)
    scores = {(1, i): float(rng.random()) for i in range(12)}
    scores.update({(1, 3): scores[(1, 4)]})
    base = top_k(TablePredictor(scores), [1], range(12), 6)
    scaled = TablePredictor({key: 7.5 * s for key, s in scores.items()})
    assert top_k(scaled, [1], range(12), 6) == base


def test_top_k_invalid_k():
    with pytest.raises(ConfigurationError):
        top_k(make_model({1: [1.0]}, {1: [1.0]}), [1], [1], 0)


def test_exposure_profile():
    lists = {1: [10, 11], 2: [11, 12], 3: [11, 10]}
    profile = exposure_profile(lists, 2, item_ids=[10, 11, 12, 13])
    assert profile.counts == {10: 2, 11: 3, 12: 1, 13: 0}
    assert profile.total == 2 * 3
    result = matthew_effect(profile)
    assert result.excluded_items == 1


def test_matthew_uniform():
    profile = ExposureProfile({i: 5 for i in range(10)}, 10)
    assert matthew_degree(profile) == approx(0.0, abs=1e-12)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_matthew_exact_zipf(s):
    profile = ExposureProfile({i: 1000.0 / r**s for i, r in enumerate(range(1, 21))}, 10)
    assert matthew_degree(profile) == approx(s, rel=1e-9)


def test_matthew_scale_invariance():
    counts = {1: 40, 2: 17, 3: 9, 4: 9, 5: 2}
    degree = matthew_degree(ExposureProfile(counts, 3))
    scaled = ExposureProfile({i: 3 * c for i, c in counts.items()}, 3)
    assert matthew_degree(scaled) == approx(degree, rel=1e-12)


def test_matthew_ignores_order_of_items():
    a = ExposureProfile({1: 1, 2: 4, 3: 9}, 3)
    b = ExposureProfile({7: 9, 8: 1, 9: 4}, 3)
    assert matthew_degree(a) == approx(matthew_degree(b), rel=1e-12)


@pytest.mark.parametrize("counts", [{}, {1: 5}, {1: 5, 2: 0, 3: 0}])
def test_matthew_degenerate(counts):
    with pytest.raises(DegenerateInputError):
        matthew_effect(ExposureProfile(counts, 1))


def test_negative_counts():
    with pytest.raises(ConfigurationError):
        ExposureProfile({1: -1}, 1)
