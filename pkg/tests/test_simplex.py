import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from calibkit.errors import DegenerateVector, EmptyData, InvalidClass, NumericError
from calibkit.simplex import (
    LabeledDataset,
    accuracy,
    apply_accuracy_preserving,
    argmax_class,
    as_probs,
    classwise_reduce,
    normalize,
    squared_loss,
    top_label_reduce,
)

from conftest import prob_vectors


@pytest.mark.parametrize(
    "raw, expected",
    [
        ((1, 1), (0.5, 0.5)),
        ((0.2, 0.3, 0.5), (0.2, 0.3, 0.5)),
        ((2, 6), (0.25, 0.75)),
    ],
)
def test_normalize_examples(raw, expected):
    np.testing.assert_allclose(normalize(raw), expected, rtol=0, atol=1e-15)


@pytest.mark.parametrize("raw", [(0, 0), (-1, 2), (1,), (np.nan, 1.0), (np.inf, 1.0)])
def test_normalize_rejects(raw):
    with pytest.raises(DegenerateVector):
        normalize(raw)


def test_degenerate_is_numeric_error():
    assert issubclass(DegenerateVector, NumericError)
    assert DegenerateVector("x").exit_code == 4


@given(st.integers(2, 8).flatmap(
    lambda L: st.lists(st.floats(0, 1e6), min_size=L, max_size=L)).filter(lambda v: sum(v) > 0))
def test_normalize_idempotent(raw):
    once = normalize(raw)
    assert np.array_equal(normalize(once), once)
    assert abs(once.sum() - 1) < 1e-12


def test_normalize_batch_rowwise():
    out = normalize([[1, 3], [2, 2]])
    np.testing.assert_allclose(out, [[0.25, 0.75], [0.5, 0.5]])


@pytest.mark.parametrize(
    "g, z, expected",
    [
        (lambda a: a, (0.7, 0.3), (0.7, 0.3)),
        (lambda a: a ** 2, (0.8, 0.2), (0.64 / 0.68, 0.04 / 0.68)),
        (lambda a: a + 1, (0.9, 0.1), (1.9 / 3.0, 1.1 / 3.0)),
    ],
)
def test_accuracy_preserving_examples(g, z, expected):
    out = apply_accuracy_preserving(g, z)
    np.testing.assert_allclose(out, expected, rtol=1e-12)
    assert argmax_class(out) == argmax_class(z)


def test_accuracy_preserving_zero_sum():
    with pytest.raises(DegenerateVector):
        apply_accuracy_preserving(lambda a: 0 * a, (0.5, 0.5))


MONOTONE_G = [
    lambda a: a ** 3,
    lambda a: np.sqrt(a) + 0.1,
    lambda a: np.exp(4 * a),
    lambda a: np.log1p(a) + 1e-9 * a,
]


@pytest.mark.parametrize("g", MONOTONE_G)
@given(z=prob_vectors())
def test_full_order_preserved(g, z):
    out = apply_accuracy_preserving(g, z)
    dz = z[:, None] - z[None, :]
    dout = out[:, None] - out[None, :]
    # never reversed; ulp-level gaps may round to ties in g
    assert np.all(np.sign(dz) * np.sign(dout) >= 0)
    resolvable = np.abs(dz) > 1e-9
    assert np.array_equal(np.sign(dz[resolvable]), np.sign(dout[resolvable]))


@pytest.mark.parametrize("g", MONOTONE_G[:3])
def test_injective_on_random_pairs(g):
    rng = np.random.default_rng(4)
    z = rng.dirichlet(np.ones(3), size=20000)
    z2 = rng.dirichlet(np.ones(3), size=20000)
    distinct = np.any(z != z2, axis=1)
    a = apply_accuracy_preserving(g, z)
    b = apply_accuracy_preserving(g, z2)
    assert np.all(np.any(a != b, axis=1)[distinct])


@pytest.mark.parametrize(
    "z, expected",
    [((0.2, 0.5, 0.3), 1), ((0.5, 0.5), 0), ((1 / 3, 1 / 3, 1 / 3), 0)],
)
def test_argmax_examples(z, expected):
    assert argmax_class(z) == expected


def test_argmax_batch():
    assert list(argmax_class([[0.1, 0.9], [0.5, 0.5]])) == [1, 0]


@pytest.mark.parametrize(
    "z, y, conf, outcome",
    [
        ((0.9, 0.1), 0, 0.9, 1.0),
        ((0.9, 0.1), 1, 0.9, 0.0),
        ((0.3, 0.3, 0.4), 2, 0.4, 1.0),
    ],
)
def test_top_label_examples(z, y, conf, outcome):
    red = top_label_reduce(LabeledDataset([z], [y]))
    assert red.kind == "top-label"
    assert red.confidences[0] == conf and red.outcomes[0] == outcome


@pytest.mark.parametrize(
    "z, y, l, conf, outcome",
    [
        ((0.9, 0.1), 0, 0, 0.9, 1.0),
        ((0.9, 0.1), 0, 1, 0.1, 0.0),
        ((0.25, 0.25, 0.5), 1, 1, 0.25, 1.0),
    ],
)
def test_classwise_examples(z, y, l, conf, outcome):
    red = classwise_reduce(LabeledDataset([z], [y]), l)
    assert red.class_index == l
    assert red.confidences[0] == conf and red.outcomes[0] == outcome


@pytest.mark.parametrize("l", [-1, 2, 5])
def test_classwise_rejects_class(l):
    with pytest.raises(InvalidClass):
        classwise_reduce(LabeledDataset([(0.5, 0.5)], [0]), l)


def test_top_label_outcome_mean_is_accuracy(rng):
    for L in (2, 3, 7):
        z = rng.dirichlet(np.ones(L), size=500)
        data = LabeledDataset(z, rng.integers(0, L, 500))
        assert top_label_reduce(data).outcomes.mean() == accuracy(data)
        assert np.all(top_label_reduce(data).confidences >= 1 / L)


class TestLabeledDataset:
    def test_onehot_labels_accepted(self):
        a = LabeledDataset([[0.2, 0.8], [0.6, 0.4]], [[0, 1], [1, 0]])
        b = LabeledDataset([[0.2, 0.8], [0.6, 0.4]], [1, 0])
        assert a == b
        np.testing.assert_array_equal(a.onehot(), [[0, 1], [1, 0]])

    def test_immutable(self):
        d = LabeledDataset([[0.2, 0.8]], [1])
        with pytest.raises(ValueError):
            d.probs[0, 0] = 0.5

    def test_small_drift_renormalized(self):
        d = LabeledDataset([[0.3, 0.7 + 5e-7]], [0])
        assert abs(d.probs.sum() - 1) < 1e-15

    @pytest.mark.parametrize(
        "probs, labels, exc",
        [
            ([[0.5, 0.4]], [0], DegenerateVector),
            ([[0.5, 0.5]], [2], InvalidClass),
            ([[0.5, 0.5]], [0, 1], EmptyData),
            (np.empty((0, 2)), [], EmptyData),
            ([[1.2, -0.2]], [0], DegenerateVector),
            ([[0.5, 0.5]], [[1, 1]], InvalidClass),
            ([[0.5, 0.5]], [0.5], InvalidClass),
        ],
    )
    def test_invalid(self, probs, labels, exc):
        with pytest.raises(exc):
            LabeledDataset(probs, labels)


def test_as_probs_tolerance():
    with pytest.raises(DegenerateVector):
        as_probs([0.5, 0.49])
    assert as_probs([0.5, 0.5 + 1e-7]).sum() == pytest.approx(1, abs=1e-15)


def test_squared_loss():
    assert squared_loss([0.6, 0.4], [1, 0]) == pytest.approx(0.32)
    np.testing.assert_allclose(squared_loss([[0.6, 0.4], [0.5, 0.5]], [[1, 0], [0, 1]]),
                               [0.32, 0.5])
