import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdlab import Image, ImageError, make_rng, pd_down, pd_up, refill_subimage
from pdlab.shuffle import divisible_crop


def index_grid(n):
    return Image((np.arange(n * n, dtype=np.float32) / (n * n)).reshape(1, n, n))


def reference_pd_down(img, s):
    """Independent oracle: the permutation written out pixel by pixel."""
    c, h, w = img.data.shape
    hs, ws = h // s, w // s
    out = np.empty_like(img.data)
    for ci in range(c):
        for y in range(h):
            for x in range(w):
                a, b = x % s, y % s
                out[ci, y // s + hs * b, x // s + ws * a] = img.data[ci, y, x]
    return out


def test_hand_permutation_4x4():
    img = Image(np.arange(16, dtype=np.float32).reshape(1, 4, 4))
    m = pd_down(img, 2)
    tiles = m.image.data[0]
    assert tiles[:2, :2].ravel().tolist() == [0, 2, 8, 10]  # top-left
    assert tiles[:2, 2:].ravel().tolist() == [1, 3, 9, 11]  # top-right
    assert tiles[2:, :2].ravel().tolist() == [4, 6, 12, 14]  # bottom-left
    assert tiles[2:, 2:].ravel().tolist() == [5, 7, 13, 15]  # bottom-right
    assert np.array_equal(pd_up(m, 2).data, img.data)


def test_matches_reference_permutation(rng):
    img = Image(rng.random((3, 12, 18), dtype=np.float32))
    for s in (1, 2, 3, 6):
        m = pd_down(img, s)
        assert np.array_equal(m.image.data, reference_pd_down(img, s))


def test_stride_one_identity(rng):
    img = Image(rng.random((3, 8, 8), dtype=np.float32))
    m = pd_down(img, 1)
    assert np.array_equal(m.image.data, img.data)
    assert np.array_equal(pd_up(m, 1).data, img.data)


@settings(max_examples=40, deadline=None)
@given(s=st.integers(1, 5), hs=st.integers(2, 10), ws=st.integers(2, 10), seed=st.integers(0, 99))
def test_roundtrip_and_multiset(s, hs, ws, seed):
    rng = make_rng(seed)
    img = Image(rng.random((3, s * hs, s * ws), dtype=np.float32))
    m = pd_down(img, s)
    assert np.array_equal(np.sort(m.image.data, axis=None), np.sort(img.data, axis=None))
    assert np.array_equal(pd_up(m, s).data, img.data)


def test_commutes_with_pixelwise_map(rng):
    img = Image(rng.random((3, 12, 12), dtype=np.float32))
    f = lambda d: np.sqrt(d) * 0.5
    a = pd_down(Image(f(img.data)), 3).image.data
    b = f(pd_down(img, 3).image.data)
    assert np.array_equal(a, b)


def test_awgn_residual_std_preserved(rng):
    from pdlab import add_awgn

    img = Image(np.full((3, 64, 64), 0.5, dtype=np.float32))
    noisy, _ = add_awgn(img, 25, rng)
    residual = Image(noisy.data - img.data)
    shuffled = pd_down(residual, 2)
    assert np.float64(residual.data.std()) == np.float64(shuffled.image.data.std())


def test_non_divisible_rejected(rng):
    img = Image(rng.random((1, 9, 9), dtype=np.float32))
    with pytest.raises(ImageError, match="divide"):
        pd_down(img, 2)


def test_stride_mismatch_rejected(rng):
    img = Image(rng.random((1, 8, 8), dtype=np.float32))
    m = pd_down(img, 2)
    with pytest.raises(ImageError, match="mismatch"):
        pd_up(m, 4)


def test_subimage_views(rng):
    img = Image(rng.random((1, 6, 6), dtype=np.float32))
    m = pd_down(img, 3)
    sub = m.subimage(1, 2)
    assert sub.shape == (1, 2, 2)
    # tile (a=1, b=2) holds input pixels (y*3+2, x*3+1)
    expected = img.data[:, 2::3, 1::3]
    assert np.array_equal(sub, expected)
    with pytest.raises(IndexError):
        m.subimage(3, 0)


def test_refill_replaces_one_tile(rng):
    clean = Image(rng.random((3, 12, 12), dtype=np.float32))
    noisy = Image(rng.random((3, 12, 12), dtype=np.float32))
    cm, nm = pd_down(clean, 2), pd_down(noisy, 2)
    refilled = refill_subimage(cm, nm, (1, 0))
    differs = refilled.image.data != cm.image.data
    assert differs.sum() == 3 * 12 * 12 // 4
    assert np.array_equal(refilled.image.data[:, :6, 6:], nm.image.data[:, :6, 6:])


def test_refill_identity_when_equal(rng):
    img = Image(rng.random((3, 8, 8), dtype=np.float32))
    m = pd_down(img, 2)
    refilled = refill_subimage(m, m, (0, 1))
    assert np.array_equal(refilled.image.data, m.image.data)


def test_refill_all_indices_gives_noisy(rng):
    clean = Image(rng.random((3, 12, 12), dtype=np.float32))
    noisy = Image(rng.random((3, 12, 12), dtype=np.float32))
    acc = pd_down(clean, 3)
    nm = pd_down(noisy, 3)
    for a in range(3):
        for b in range(3):
            acc = refill_subimage(acc, nm, (a, b))
    assert np.array_equal(acc.image.data, nm.image.data)


def test_refill_index_out_of_range(rng):
    img = Image(rng.random((1, 8, 8), dtype=np.float32))
    m = pd_down(img, 2)
    with pytest.raises(IndexError):
        refill_subimage(m, m, (0, 2))


def test_divisible_crop(rng):
    img = Image(rng.random((1, 10, 11), dtype=np.float32))
    cropped = divisible_crop(img, 4)
    assert cropped.data.shape == (1, 8, 8)
    assert np.array_equal(cropped.data, img.data[:, :8, :8])
