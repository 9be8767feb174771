import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from calibkit import calibrators as C
from calibkit import ece, synthetic
from calibkit.bench import _seq
from calibkit.errors import InvalidBandwidth, NumericError
from calibkit.simplex import BinaryReducedDataset, LabeledDataset, classwise_reduce


def reduced(conf, out):
    return BinaryReducedDataset(np.asarray(conf, float), np.asarray(out, float))


# -- histogram -----------------------------------------------------------------

@pytest.mark.parametrize("d, expected", [(1, 0.4), (2, 0.16)])
def test_histogram_two_bins(d, expected):
    est = ece.histogram_ece(reduced([0.4, 0.6], [0, 1]), d, ece.HistogramScheme.equal_width(2))
    assert est.value == pytest.approx(expected, abs=1e-15)
    assert est.kind == "histogram-equal-width" and est.detail == 2 and est.n_e == 2


def test_histogram_binwise_match_is_zero():
    # two bins, each with mean confidence equal to its outcome rate
    data = reduced([0.25, 0.25, 0.25, 0.25, 0.75, 0.75, 0.75, 0.75],
                   [1, 0, 0, 0, 1, 1, 1, 0])
    assert ece.histogram_ece(data, 1, ece.HistogramScheme.equal_width(2)).value == 0.0


def test_histogram_edge_assignment():
    scheme = ece.HistogramScheme.equal_width(4)
    # half-open bins [e_i, e_i+1); the last bin also holds 1.0
    np.testing.assert_array_equal(scheme.assign([0.0, 0.25, 0.5, 0.74, 0.75, 1.0]),
                                  [0, 1, 2, 2, 3, 3])


@given(st.lists(st.floats(0, 1), min_size=1, max_size=300), st.integers(1, 40))
def test_histogram_bin_mass_conserved(conf, b):
    scheme = ece.HistogramScheme.equal_width(b)
    counts = np.bincount(scheme.assign(conf), minlength=b)
    assert counts.sum() == len(conf) and counts.size == b


@settings(max_examples=50)
@given(st.lists(st.tuples(st.floats(0, 1), st.sampled_from([0.0, 1.0])), min_size=1, max_size=200))
def test_histogram_bounded(pairs):
    conf, out = zip(*pairs)
    data = reduced(conf, out)
    e1 = ece.histogram_ece(data, 1).value
    e2 = ece.histogram_ece(data, 2).value
    assert 0 <= e2 <= e1 <= 1 + 1e-12
    scheme = ece.HistogramScheme.equal_frequency(data.confidences)
    assert ece.histogram_ece(data, 1, scheme).kind == "histogram-data-dependent"


@pytest.mark.parametrize("n, b", [(1, 1), (2, 2), (64, 7), (100, 8), (1024, 11), (1025, 12)])
def test_sturges_bin_count(n, b):
    conf = np.linspace(0.01, 0.99, n)
    assert ece.HistogramScheme.equal_frequency(conf).b == b


def test_equal_frequency_bins_balanced(rng):
    conf = rng.random(1000)
    scheme = ece.HistogramScheme.equal_frequency(conf)
    counts = np.bincount(scheme.assign(conf), minlength=scheme.b)
    assert counts.max() - counts.min() <= 1


def test_equal_frequency_collapses_ties():
    scheme = ece.HistogramScheme.equal_frequency(np.full(100, 0.7))
    assert scheme.b == 2
    np.testing.assert_array_equal(scheme.edges, [0, 0.7, 1])


@pytest.mark.parametrize("edges", [[0, 0.5], [0.1, 0.5, 1], [0, 0.6, 0.5, 1]])
def test_scheme_rejects_bad_edges(edges):
    with pytest.raises(NumericError):
        ece.HistogramScheme("equal-width", len(edges) - 1, edges)


# -- kernel, bandwidth ------------------------------------------------------------

@pytest.mark.parametrize("u, h, expected", [(0, 1, 35 / 32), (1, 1, 0), (0.5, 1, 35 / 32 * 0.75 ** 3),
                                            (0.3, 0.3, 0), (1.5, 1, 0), (-0.5, 1, 35 / 32 * 0.75 ** 3)])
def test_triweight_values(u, h, expected):
    assert ece.triweight(u, h) == pytest.approx(expected, abs=1e-15)


def test_triweight_half_value():
    assert ece.triweight(0.5) == pytest.approx(0.461426, abs=1e-6)


def test_triweight_bad_h():
    with pytest.raises(InvalidBandwidth):
        ece.triweight(0.1, 0.0)


def test_bandwidth_examples():
    x = np.random.default_rng(0).normal(size=1000)
    x = (x - x.mean()) / x.std(ddof=1) * 0.1
    assert ece.bandwidth_rot(x) == pytest.approx(0.0266257, abs=1e-6)
    assert ece.bandwidth_rot([0.0, 1.0]) == pytest.approx(1.06 * math.sqrt(0.5) * 2 ** -0.2, rel=1e-14)
    assert ece.bandwidth_rot([0.0, 1.0]) == pytest.approx(0.6525065, abs=1e-7)


@pytest.mark.parametrize("x", [[0.3] * 10, [0.5]])
def test_bandwidth_degenerate(x):
    with pytest.raises(InvalidBandwidth):
        ece.bandwidth_rot(x)


def test_kde_config_validation():
    with pytest.raises(InvalidBandwidth):
        ece.KdeConfig(h=0)
    with pytest.raises(NumericError):
        ece.KdeConfig(grid_points=10)
    with pytest.raises(NumericError):
        ece.KdeConfig(kernel="gaussian")


# -- density and regression ----------------------------------------------------------

def test_density_single_sample():
    cfg = ece.KdeConfig(h=0.2)
    assert ece.kde_density(0.5, [0.5], cfg) == pytest.approx(5.46875, abs=1e-12)
    assert ece.kde_density(0.95, [0.5], cfg) == 0.0


def test_density_uniform_interior():
    p = ece.kde_density(np.linspace(0.05, 0.95, 50), np.linspace(0, 1, 2000))
    np.testing.assert_allclose(p, 1.0, atol=0.05)


def test_density_mirror_restores_boundary_mass():
    x = np.linspace(0, 1, 2000)
    edge = ece.kde_density([0.0, 1.0], x)
    np.testing.assert_allclose(edge, 1.0, atol=0.05)


@pytest.mark.parametrize("seed", range(5))
def test_density_integrates_to_one(seed):
    rng = np.random.default_rng(seed)
    x = rng.beta(rng.uniform(0.5, 3), rng.uniform(0.5, 3), size=500)
    q = np.linspace(0, 1, 4097)
    assert np.trapezoid(ece.kde_density(q, x), q) == pytest.approx(1.0, abs=1e-3)


def test_pi_constant_labels():
    data = reduced([0.2, 0.4, 0.5], [1, 1, 1])
    q = np.array([0.1, 0.3, 0.45])
    np.testing.assert_allclose(ece.kde_pi(q, data, ece.KdeConfig(h=0.2)), 1.0)


def test_pi_symmetric_pair():
    data = reduced([0.5, 0.5], [0, 1])
    np.testing.assert_allclose(ece.kde_pi([0.45, 0.5, 0.55], data, ece.KdeConfig(h=0.1)), 0.5)


def test_pi_no_mass_returns_query():
    data = reduced([0.5, 0.5], [0, 1])
    assert ece.kde_pi(0.9, data, ece.KdeConfig(h=0.1)) == 0.9


def test_pi_calibrated_close_to_identity():
    data = classwise_reduce(
        synthetic.sample(100_000, synthetic.SyntheticClassifier(*synthetic.CALIBRATED), seed=0), 0)
    q = np.linspace(0.1, 0.9, 81)
    np.testing.assert_allclose(ece.kde_pi(q, data), q, atol=0.05)


def test_grid_sums_match_dense():
    rng = np.random.default_rng(3)
    x = rng.random(700) ** 2
    w = (rng.random(700) < x).astype(float)
    q = np.linspace(0, 1, 2048)
    for h in (0.01, 0.08, 0.6):
        dense = ece._mirror_sums(q, x, w, h)
        fast = ece._mirror_sums_grid(2048, x, w, h)
        for a, b in zip(dense, fast):
            np.testing.assert_allclose(b, a, rtol=1e-12, atol=1e-12)


# -- KDE ECE ----------------------------------------------------------------------------

def kde_ece_oracle(conf, out, h, d, m=2048):
    """Direct evaluation: explicit kernel loop and hand-written trapezoid sum."""
    q = np.linspace(0, 1, m)
    den = np.zeros(m)
    num = np.zeros(m)
    for c, o in zip(conf, out):
        for centre in (c, -c, 2 - c):
            k = np.array([ece.triweight(v, h) for v in q - centre])
            den += k
            num += o * k
    pi = np.where(den > 0, num / np.where(den > 0, den, 1), q)
    f = np.abs(q - pi) ** d * den / len(conf)
    dx = 1 / (m - 1)
    return dx * (f.sum() - 0.5 * (f[0] + f[-1]))


@pytest.mark.parametrize("d", [1, 2])
def test_kde_ece_matches_direct_quadrature(d):
    rng = np.random.default_rng(11)
    conf = rng.beta(2, 2, size=40)
    out = (rng.random(40) < conf ** 1.5).astype(float)
    est = ece.kde_ece(reduced(conf, out), d, ece.KdeConfig(h=0.15, grid_points=513))
    assert est.value == pytest.approx(kde_ece_oracle(conf, out, 0.15, d, 513), rel=1e-10)
    assert est.detail == 0.15 and est.kind == "kde"


def test_kde_ece_point_mass():
    data = reduced(np.full(50, 0.7), np.ones(50))
    for h in (0.05, 0.2):
        assert ece.kde_ece(data, 1, ece.KdeConfig(h=h)).value == pytest.approx(0.3, abs=1e-6)


def test_kde_ece_zero_variance_auto_bandwidth():
    with pytest.raises(InvalidBandwidth):
        ece.kde_ece(reduced(np.full(50, 0.7), np.ones(50)))


@pytest.mark.parametrize("clf", [synthetic.CASE_1, synthetic.CASE_2])
def test_kde_ece_grid_doubling(clf):
    data = classwise_reduce(synthetic.sample(1024, synthetic.SyntheticClassifier(*clf), seed=5), 0)
    coarse = ece.kde_ece(data, 1, ece.KdeConfig(grid_points=2048)).value
    fine = ece.kde_ece(data, 1, ece.KdeConfig(grid_points=4096)).value
    assert fine == pytest.approx(coarse, rel=1e-4)


@pytest.mark.slow
def test_kde_ece_calibrated_mean_estimate():
    clf = synthetic.SyntheticClassifier(*synthetic.CALIBRATED)
    vals = [ece.kde_ece(classwise_reduce(synthetic.sample(1024, clf, seed=_seq(s, 1024)), 0)).value
            for s in range(200)]
    assert np.mean(vals) < 0.03


@pytest.mark.slow
def test_kde_ece_case1_close_to_ground_truth():
    clf = synthetic.SyntheticClassifier(*synthetic.CASE_1)
    gt = synthetic.ground_truth(clf, 1, 10**6, seed=20200713).value
    vals = np.array([ece.kde_ece(classwise_reduce(synthetic.sample(1024, clf, seed=_seq(s, 1024)), 0)).value
                     for s in range(200)])
    assert np.mean(np.abs(vals - gt)) < 0.02


def test_estimate_validation():
    with pytest.raises(NumericError):
        ece.EceEstimate(-0.1, 1, "kde", 10)
    with pytest.raises(NumericError):
        ece.EceEstimate(0.1, 3, "kde", 10)
    with pytest.raises(NumericError):
        ece.EceEstimate(0.1, 1, "bootstrap", 10)


# -- calibration gain -------------------------------------------------------------------

class _Fixed:
    def __init__(self, out):
        self.out = np.asarray(out, float)

    def __call__(self, z):
        return np.broadcast_to(self.out, np.shape(z))


@pytest.mark.parametrize("out, gain", [((0.8, 0.2), 0.24), ((0.4, 0.6), -0.40)])
def test_gain_single_sample(out, gain):
    data = LabeledDataset([[0.6, 0.4]], [0])
    assert ece.calibration_gain(data, _Fixed(out)) == pytest.approx(gain, abs=1e-15)


def test_gain_identity_is_exact_zero(rng):
    data = LabeledDataset(rng.dirichlet(np.ones(4), 100), rng.integers(0, 4, 100))
    gain, se = ece.calibration_gain(data, C.IdentityMap(), return_stderr=True)
    assert gain == 0.0 and se == 0.0


# -- ground truth ---------------------------------------------------------------------------

def test_ground_truth_requires_samples():
    with pytest.raises(NumericError):
        ece.ground_truth_ece_binary(lambda z: z, lambda n, r: r.random(n), n_mc=100)
