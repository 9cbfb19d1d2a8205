import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from srx.errors import DegenerateInput, ShapeMismatch, TooSmall
from srx.metrics import Direction, mae, ncc, rmse, ssim

from oracles import mae_oracle, ncc_oracle, rmse_oracle, ssim_constant_closed_form, ssim_oracle


@pytest.fixture
def pair8():
    rng = np.random.default_rng(20240101)
    return rng.random((8, 8, 3)), rng.random((8, 8, 3))


def test_directions():
    img = np.random.default_rng(0).random((12, 12, 1))
    assert rmse(img, img).direction is Direction.LOWER
    assert mae(img, img).direction is Direction.LOWER
    assert ssim(img, img).direction is Direction.HIGHER
    assert ncc(img, img).direction is Direction.HIGHER


def test_rmse_examples(pair8):
    x = pair8[0]
    assert rmse(x, x).value == 0.0
    assert rmse(np.zeros((3, 3, 1)), np.ones((3, 3, 1))).value == 1.0
    # frozen from oracles.rmse_oracle
    assert rmse(*pair8).value == pytest.approx(0.4089611809625187, abs=1e-12)


def test_mae_examples(pair8):
    x = pair8[0]
    assert mae(x, x).value == 0.0
    assert mae(np.full((4, 4, 3), 0.5), np.full((4, 4, 3), 0.25)).value == 0.25
    assert mae(*pair8).value == pytest.approx(0.3343263416262548, abs=1e-12)


def test_ncc_examples(pair8):
    x = pair8[0]
    assert ncc(x, x).value == pytest.approx(1.0, abs=1e-12)
    assert ncc(x, 1.0 - x).value == pytest.approx(-1.0, abs=1e-12)
    assert ncc(*pair8).value == pytest.approx(0.037099705725462416, abs=1e-12)


def test_ncc_degenerate_is_an_error(pair8):
    with pytest.raises(DegenerateInput):
        ncc(np.full((4, 4, 1), 0.1), np.random.default_rng(1).random((4, 4, 1)))
    with pytest.raises(DegenerateInput):
        ncc(pair8[0], np.full((8, 8, 3), 0.7))


def test_ssim_identical_is_one():
    x = np.random.default_rng(4).random((20, 17, 3))
    assert ssim(x, x).value == pytest.approx(1.0, abs=1e-9)


def test_ssim_constant_images_closed_form():
    expected = ssim_constant_closed_form(0.4, 0.6)
    assert expected == pytest.approx(0.9230917131320898, abs=1e-15)
    assert ssim(np.full((16, 16, 1), 0.4), np.full((16, 16, 1), 0.6)).value == pytest.approx(expected, abs=1e-12)


def test_ssim_16x16_frozen_oracle():
    rng = np.random.default_rng(16)
    a = rng.random((16, 16, 1))
    b = np.clip(a * 0.7 + 0.3 * rng.random((16, 16, 1)), 0, 1)
    assert ssim(a, b).value == pytest.approx(0.8651931821414052, abs=1e-12)


def test_ssim_too_small():
    x = np.zeros((10, 30, 1))
    with pytest.raises(TooSmall):
        ssim(x, x)


@pytest.mark.parametrize("metric", [rmse, mae, ssim, ncc])
def test_shape_mismatch(metric):
    with pytest.raises(ShapeMismatch):
        metric(np.zeros((12, 12, 1)), np.zeros((12, 12, 3)))


def test_ssim_matches_skimage():
    skm = pytest.importorskip("skimage.metrics")
    rng = np.random.default_rng(8)
    a = rng.random((40, 40, 3))
    b = np.clip(a + 0.1 * rng.normal(size=a.shape), 0, 1)
    # skimage crops a 5-pixel border from a same-size filtered map; identical to the valid positions.
    ref = skm.structural_similarity(a, b, gaussian_weights=True, sigma=1.5, use_sample_covariance=False,
                                    data_range=1.0, channel_axis=2)
    assert ssim(a, b).value == pytest.approx(ref, abs=1e-6)


pairs = st.tuples(st.integers(1, 16), st.integers(1, 16), st.sampled_from([1, 3])).flatmap(
    lambda s: st.tuples(arrays(np.float64, s, elements=st.floats(0.0, 1.0)),
                        arrays(np.float64, s, elements=st.floats(0.0, 1.0))))


@settings(max_examples=100, deadline=None)
@given(pairs)
def test_mae_bounded_by_rmse(pair):
    a, b = pair
    assert mae(a, b).value <= rmse(a, b).value + 1e-15


@settings(max_examples=100, deadline=None)
@given(pairs)
def test_pointwise_metrics_symmetric(pair):
    a, b = pair
    assert rmse(a, b).value == pytest.approx(rmse(b, a).value, abs=1e-12)
    assert mae(a, b).value == pytest.approx(mae(b, a).value, abs=1e-12)
    try:
        forward = ncc(a, b).value
    except DegenerateInput:
        with pytest.raises(DegenerateInput):
            ncc(b, a)
        return
    assert forward == pytest.approx(ncc(b, a).value, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ssim_symmetric_and_bounded(seed):
    rng = np.random.default_rng(seed)
    a = rng.random((14, 13, 3))
    b = rng.random((14, 13, 3)) ** 3
    s_ab = ssim(a, b).value
    assert s_ab == pytest.approx(ssim(b, a).value, abs=1e-12)
    assert -1.0 <= s_ab <= 1.0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 2.0), st.floats(-0.2, 0.2))
def test_ncc_affine_invariance(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.3, 0.7, size=(6, 5, 3))
    b = rng.random((6, 5, 3))
    scaled = alpha * (a - 0.5) + 0.5 + beta
    assume(scaled.min() >= 0 and scaled.max() <= 1)
    assert ncc(scaled, b).value == pytest.approx(ncc(a, b).value, abs=1e-9)


@pytest.mark.parametrize("shape", [(11, 11, 1), (12, 15, 3), (20, 11, 3)])
def test_all_metrics_match_oracles(shape):
    rng = np.random.default_rng(shape[0] * 100 + shape[1])
    a = rng.random(shape)
    b = np.clip(0.6 * a + 0.4 * rng.random(shape), 0, 1)
    assert rmse(a, b).value == pytest.approx(rmse_oracle(a, b), abs=1e-9)
    assert mae(a, b).value == pytest.approx(mae_oracle(a, b), abs=1e-9)
    assert ncc(a, b).value == pytest.approx(ncc_oracle(a, b), abs=1e-9)
    assert ssim(a, b).value == pytest.approx(ssim_oracle(a, b), abs=1e-9)
