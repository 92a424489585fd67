import numpy as np
import pytest
from hypothesis import given, strategies as st

from skinfusion.color import (
    FEATURE_RANGES,
    FeatureKind,
    Ycbcr,
    extract_feature,
    features_from_rgb,
    normalize_feature,
    rgb_to_ycbcr,
    ycbcr_to_rgb,
)

channel = st.integers(0, 255)


def test_grey_axis():
    assert rgb_to_ycbcr(128, 128, 128) == (128.0, 128.0, 128.0)


def test_white():
    assert rgb_to_ycbcr(255, 255, 255) == (255.0, 128.0, 128.0)


def test_pure_red_with_clamp():
    # 0.299 * 255, 128 - 0.168736 * 255, 128 + 0.5 * 255 = 255.5 -> clamped
    p = rgb_to_ycbcr(255, 0, 0)
    assert p.y == pytest.approx(76.245, abs=1e-9)
    assert p.cb == pytest.approx(84.97232, abs=1e-9)
    assert p.cr == 255.0


def test_matches_standard_matrix():
    rng = np.random.default_rng(3)
    rgb = rng.integers(0, 256, size=(500, 3)).astype(float)
    m = np.array([
        [0.299, 0.587, 0.114],
        [-0.168736, -0.331264, 0.5],
        [0.5, -0.418688, -0.081312],
    ])
    expected = np.clip(rgb @ m.T + [0, 128, 128], 0, 255)
    got = np.column_stack(rgb_to_ycbcr(rgb[:, 0], rgb[:, 1], rgb[:, 2]))
    np.testing.assert_allclose(got, expected, atol=1e-9)


@given(channel, channel, channel)
def test_components_in_range(r, g, b):
    p = rgb_to_ycbcr(r, g, b)
    assert all(0.0 <= c <= 255.0 for c in p)


@given(channel)
def test_achromatic_features(v):
    p = rgb_to_ycbcr(v, v, v)
    assert (p.cb, p.cr) == (128.0, 128.0)
    assert extract_feature(p, FeatureKind.CB_MINUS_CR) == 0.0
    assert extract_feature(p, FeatureKind.CB_OVER_CR) == 1.0


@pytest.mark.parametrize(
    "p, kind, expected",
    [
        (Ycbcr(0, 128, 128), FeatureKind.CB_MINUS_CR, 0.0),
        (Ycbcr(0, 100, 200), FeatureKind.CB_OVER_CR, 0.5),
        (Ycbcr(0, 100, 0), FeatureKind.CB_OVER_CR, 100.0),
        (Ycbcr(0, 100, 200), FeatureKind.CB_TIMES_CR, 20000.0),
        (Ycbcr(0, 100, 200), FeatureKind.CB, 100.0),
        (Ycbcr(0, 100, 200), FeatureKind.CR, 200.0),
    ],
)
def test_extract_feature(p, kind, expected):
    assert extract_feature(p, kind) == expected


@pytest.mark.parametrize(
    "raw, kind, expected",
    [
        (255, FeatureKind.CB, 1.0),
        (0, FeatureKind.CB_MINUS_CR, 0.5),
        (127.5, FeatureKind.CR, 0.5),
        (65025, FeatureKind.CB_TIMES_CR, 1.0),
        (1000.0, FeatureKind.CB_OVER_CR, 1.0),
    ],
)
def test_normalize_feature(raw, kind, expected):
    assert normalize_feature(raw, kind) == expected


@pytest.mark.parametrize("kind", list(FeatureKind))
def test_normalize_monotone_and_bounded(kind):
    lo, hi = FEATURE_RANGES[kind]
    raw = np.linspace(lo - 10, hi + 10, 2001)
    out = normalize_feature(raw, kind)
    assert np.all(np.diff(out) >= 0)
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_exactly_five_kinds():
    assert {k.value for k in FeatureKind} == {"cb", "cr", "cb_over_cr", "cb_times_cr", "cb_minus_cr"}


def test_parse_accepts_labels_and_values():
    assert FeatureKind.parse("Cb/Cr") is FeatureKind.CB_OVER_CR
    assert FeatureKind.parse("cb_minus_cr") is FeatureKind.CB_MINUS_CR
    with pytest.raises(ValueError):
        FeatureKind.parse("hue")


def test_features_deterministic():
    rng = np.random.default_rng(0)
    rgb = rng.integers(0, 256, size=(1000, 3), dtype=np.uint8)
    a = features_from_rgb(rgb, list(FeatureKind))
    b = features_from_rgb(rgb, list(FeatureKind))
    assert a.tobytes() == b.tobytes()
    assert a.shape == (1000, 5)


def test_vectorized_matches_scalar():
    rng = np.random.default_rng(1)
    rgb = rng.integers(0, 256, size=(50, 3), dtype=np.uint8)
    vec = features_from_rgb(rgb, list(FeatureKind))
    for i, (r, g, b) in enumerate(rgb):
        p = rgb_to_ycbcr(int(r), int(g), int(b))
        row = [normalize_feature(extract_feature(p, k), k) for k in FeatureKind]
        np.testing.assert_array_equal(vec[i], row)


def test_inverse_roundtrip_within_rounding():
    rng = np.random.default_rng(2)
    rgb = rng.integers(0, 256, size=(1000, 3), dtype=np.uint8)
    p = rgb_to_ycbcr(*rgb.T.astype(float))
    back = ycbcr_to_rgb(p.y, p.cb, p.cr).astype(int)
    # clamping of out-of-gamut chroma can move a channel a little further
    ok = np.abs(back - rgb.astype(int)).max(axis=1) <= 1
    assert ok.mean() > 0.95
