import numpy as np
import pytest

from bit_tracker.colornames import (COLOR_NAMES, ColorNameTable, color_names, default_table,
                                    fallback_table, is_gray)
from bit_tracker.errors import FormatError


def test_fallback_rows_are_distributions():
    t = fallback_table()
    assert t.rows.shape == (32 ** 3, 11)
    assert t.rows.min() >= 0
    np.testing.assert_allclose(t.rows.sum(axis=1), 1, atol=1e-6)


def test_fallback_is_deterministic():
    assert fallback_table().rows.tobytes() == fallback_table().rows.tobytes()


def test_row_index_layout():
    t = fallback_table(bins_per_axis=32)
    assert t.row_index(np.array([0, 0, 0])) == 0
    assert t.row_index(np.array([255, 255, 255])) == 32 ** 3 - 1
    r, g, b = 200, 17, 90
    assert t.row_index(np.array([r, g, b], dtype=np.uint8)) == ((r * 32 // 256) * 32 + g * 32 // 256) * 32 + b * 32 // 256
    # float input quantises the same way
    assert t.row_index(np.array([200.0, 17.0, 90.0])) == t.row_index(np.array([200, 17, 90], dtype=np.uint8))


def test_gray_frame_gives_zero_maps():
    out = color_names(np.full((5, 6), 77, dtype=np.uint8))
    assert out.shape == (12, 5, 6) and not np.any(out)


def test_pixels_are_distributions(rng):
    out = color_names(rng.integers(0, 256, (9, 7, 3)).astype(np.uint8))
    np.testing.assert_allclose(out[:11].sum(axis=0), 1, atol=1e-6)
    assert not np.any(out[11])


def test_saturated_red_matches_table():
    t = default_table()
    out = color_names(np.array([[[255, 0, 0]]], dtype=np.uint8), t)
    row = t.rows[(31 * 32 + 0) * 32 + 0]
    assert np.argmax(out[:11, 0, 0]) == np.argmax(row)
    assert COLOR_NAMES[np.argmax(row)] == 'red'


@pytest.mark.parametrize('rgb,name', [((0, 0, 0), 'black'), ((255, 255, 255), 'white'),
                                      ((20, 40, 220), 'blue'), ((250, 240, 20), 'yellow')])
def test_fallback_names_sensible(rgb, name):
    out = color_names(np.array([[rgb]], dtype=np.uint8))
    assert COLOR_NAMES[int(np.argmax(out[:11, 0, 0]))] == name


def test_save_load_round_trip(tmp_path):
    t = fallback_table(bins_per_axis=4)
    path = tmp_path / 'cn.txt'
    t.save(path)
    assert path.read_text().splitlines()[0] == 'CNTABLE v1 4'
    loaded = ColorNameTable.load(path)
    assert loaded.bins_per_axis == 4
    np.testing.assert_array_equal(loaded.rows, t.rows)


def test_load_rejects_bad_files(tmp_path):
    bad = tmp_path / 'bad.txt'
    bad.write_text('CNTABLE v2 2\n')
    with pytest.raises(FormatError):
        ColorNameTable.load(bad)
    rows = np.full((8, 11), 1 / 11)
    rows[3, 0] += 0.1
    with pytest.raises(FormatError, match='row 3'):
        ColorNameTable(2, rows)
    with pytest.raises(FormatError):
        ColorNameTable(2, np.full((7, 11), 1 / 11))


def test_is_gray():
    assert is_gray(np.zeros((3, 3)))
    assert is_gray(np.zeros((3, 3, 3), dtype=np.uint8))
    rgb = np.zeros((3, 3, 3), dtype=np.uint8)
    rgb[0, 0, 1] = 5
    assert not is_gray(rgb)
