"""Integral-image tables against brute-force pixel sums."""

import numpy as np

from attentive.facegate.integral import compute_integral


def brute_rect_sum(img, x, y, w, h):
    return int(np.asarray(img, dtype=np.int64)[y : y + h, x : x + w].sum())


def test_2x2_interior_table():
    ii = compute_integral(np.array([[1, 2], [3, 4]]))
    np.testing.assert_array_equal(ii.table[1:, 1:], [[1, 3], [4, 10]])


def test_zero_image():
    ii = compute_integral(np.zeros((5, 7), dtype=np.uint8))
    assert ii.table.sum() == 0
    assert ii.sq_table.sum() == 0
    assert ii.table.shape == (6, 8)


def test_first_row_and_column_are_zero():
    rng = np.random.default_rng(0)
    ii = compute_integral(rng.integers(0, 256, (9, 9), dtype=np.uint8))
    assert not ii.table[0].any() and not ii.table[:, 0].any()
    assert not ii.sq_table[0].any() and not ii.sq_table[:, 0].any()


def test_every_rectangle_of_random_16x16():
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, (16, 16), dtype=np.uint8)
    ii = compute_integral(img)
    sq = img.astype(np.int64) ** 2
    for y in range(16):
        for x in range(16):
            for h in range(1, 17 - y):
                for w in range(1, 17 - x):
                    assert ii.rect_sum(x, y, w, h) == brute_rect_sum(img, x, y, w, h)
                    assert ii.rect_sq_sum(x, y, w, h) == brute_rect_sum(sq, x, y, w, h)


def test_random_rectangles_up_to_64x64():
    rng = np.random.default_rng(2)
    for _ in range(20):
        hh, ww = rng.integers(2, 65, size=2)
        img = rng.integers(0, 256, (hh, ww), dtype=np.uint8)
        ii = compute_integral(img)
        for _ in range(50):
            x = int(rng.integers(0, ww))
            y = int(rng.integers(0, hh))
            w = int(rng.integers(1, ww - x + 1))
            h = int(rng.integers(1, hh - y + 1))
            assert ii.rect_sum(x, y, w, h) == brute_rect_sum(img, x, y, w, h)


def test_window_std_flat_is_one():
    ii = compute_integral(np.full((30, 30), 77, dtype=np.uint8))
    assert ii.window_std(0, 0, 30, 30) == 1.0
    assert ii.window_std(3, 4, 10, 12) == 1.0


def test_window_std_matches_numpy():
    rng = np.random.default_rng(3)
    img = rng.integers(0, 256, (40, 40), dtype=np.uint8)
    ii = compute_integral(img)
    win = img[5:29, 7:27].astype(np.float64)
    np.testing.assert_allclose(ii.window_std(7, 5, 20, 24), win.std(), rtol=1e-12)
