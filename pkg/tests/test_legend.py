import json

import pytest

from noisemap import (
    ConfigurationError,
    band_for_value,
    band_midpoint,
    builtin_palette,
    load_palette,
)
from noisemap.legend import KALAMARIA, THESSALONIKI_NEAPOLI

EXPECTED_THESSALONIKI = [
    (40, 45, (182, 254, 191)),
    (45, 50, (255, 255, 0)),
    (50, 55, (254, 196, 71)),
    (55, 60, (253, 103, 2)),
    (60, 65, (255, 51, 50)),
    (65, 70, (152, 0, 51)),
    (70, 75, (174, 155, 219)),
    (75, 80, (1, 0, 251)),
    (80, 85, (1, 1, 65)),
]

EXPECTED_KALAMARIA = [
    (35, 40, (80, 167, 50)),
    (40, 45, (14, 113, 49)),
    (45, 50, (255, 243, 59)),
    (50, 55, (172, 121, 78)),
    (55, 60, (255, 94, 55)),
    (60, 65, (192, 23, 18)),
    (65, 70, (138, 18, 19)),
    (70, 75, (144, 14, 102)),
    (75, 80, (40, 115, 183)),
    (80, 85, (10, 65, 121)),
]


@pytest.mark.parametrize(
    "name,expected",
    [(THESSALONIKI_NEAPOLI, EXPECTED_THESSALONIKI), (KALAMARIA, EXPECTED_KALAMARIA)],
)
def test_builtin_palettes_match_published_tables(name, expected):
    palette = builtin_palette(name)
    assert len(palette) == len(expected)
    for band, (low, high, rgb) in zip(palette, expected):
        assert (band.low_db, band.high_db) == (float(low), float(high))
        assert tuple(band.color) == rgb


def test_top_band_is_open_ended_closed_at_85(palette_thessaloniki):
    top = palette_thessaloniki[-1]
    assert top.open_ended
    assert (top.low_db, top.high_db) == (80.0, 85.0)
    assert tuple(top.color) == (1, 1, 65)
    assert band_midpoint(top) == 82.5


def test_midpoint_examples(palette_thessaloniki):
    by_low = {band.low_db: band for band in palette_thessaloniki}
    assert band_midpoint(by_low[50.0]) == 52.5
    assert band_midpoint(by_low[40.0]) == 42.5


def test_midpoints_inside_bounds_and_5db_apart(palette_thessaloniki, palette_kalamaria):
    for palette in (palette_thessaloniki, palette_kalamaria):
        for band in palette:
            assert band.low_db < band.midpoint_db < band.high_db
        mids = [band.midpoint_db for band in palette]
        for a, b in zip(mids, mids[1:]):
            assert b - a == 5.0


def test_unknown_palette_name_rejected():
    with pytest.raises(ConfigurationError):
        builtin_palette("athens")


def test_palette_colors_all_distinct(palette_thessaloniki, palette_kalamaria):
    for palette in (palette_thessaloniki, palette_kalamaria):
        colors = {tuple(band.color) for band in palette}
        assert len(colors) == len(palette)


def test_load_palette_roundtrip(tmp_path, palette_kalamaria):
    path = tmp_path / "palette.json"
    path.write_text(
        json.dumps(
            [
                {
                    "low_db": band.low_db,
                    "high_db": band.high_db,
                    "red": band.color.red,
                    "green": band.color.green,
                    "blue": band.color.blue,
                    "open_ended": band.open_ended,
                }
                for band in palette_kalamaria
            ]
        )
    )
    assert load_palette(path) == palette_kalamaria


@pytest.mark.parametrize(
    "bands",
    [
        [],
        [{"low_db": 45, "high_db": 40, "red": 0, "green": 0, "blue": 0}],
        [
            {"low_db": 40, "high_db": 50, "red": 0, "green": 0, "blue": 0},
            {"low_db": 45, "high_db": 55, "red": 1, "green": 1, "blue": 1},
        ],
        [
            {"low_db": 40, "high_db": 45, "red": 0, "green": 0, "blue": 0},
            {"low_db": 45, "high_db": 50, "red": 0, "green": 0, "blue": 0},
        ],
    ],
)
def test_load_palette_rejects_malformed(tmp_path, bands):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bands))
    with pytest.raises(ConfigurationError):
        load_palette(path)


def test_band_for_value_boundaries(palette_thessaloniki):
    assert band_for_value(palette_thessaloniki, 45.0).low_db == 45.0  # half-open bands
    assert band_for_value(palette_thessaloniki, 44.999).low_db == 40.0
    assert band_for_value(palette_thessaloniki, 85.0).low_db == 80.0  # closed top
    assert band_for_value(palette_thessaloniki, 30.0) is None
    assert band_for_value(palette_thessaloniki, 90.0) is None
