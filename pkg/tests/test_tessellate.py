import numpy as np
import pytest

from noisemap import (
    ConfigurationError,
    DataError,
    NoiseSample,
    Tile,
    reduction_ratio,
    tessellate,
    truncate_coord,
)
from noisemap.tessellate import read_tiles, write_tiles


def sample(lat, lon, noise):
    return NoiseSample(lat, lon, 0, 0, 0, noise)


def brute_force_tiles(samples, decimals):
    """Plain dict-of-lists grouping, means by straight summation."""
    groups = {}
    for s in samples:
        key = (truncate_coord(s.latitude, decimals), truncate_coord(s.longitude, decimals))
        groups.setdefault(key, []).append(s.noise_db)
    return {key: (sum(vals) / len(vals), len(vals)) for key, vals in groups.items()}


def test_singleton_sample():
    tiles = tessellate([sample(40.63001, 22.95002, 52.5)])
    assert tiles == [Tile(40.6300, 22.9500, 52.5, 1)]


def test_two_samples_same_cell_mean():
    tiles = tessellate(
        [sample(40.63001, 22.95002, 52.5), sample(40.63009, 22.95008, 57.5)]
    )
    assert len(tiles) == 1
    assert tiles[0].mean_noise_db == 55.0
    assert tiles[0].sample_count == 2


def test_truncation_boundary_splits_cells():
    tiles = tessellate([sample(40.63001, 22.95, 50.0), sample(40.63010, 22.95, 50.0)])
    assert [t.lat_key for t in tiles] == [40.6300, 40.6301]


def test_truncates_toward_zero_for_negative_coordinates():
    assert truncate_coord(-40.63019, 4) == -40.6301
    tiles = tessellate([sample(-40.63019, -22.95017, 50.0)])
    assert tiles == [Tile(-40.6301, -22.9501, 50.0, 1)]


def test_empty_input_is_empty_output():
    assert tessellate([]) == []


def test_matches_brute_force_oracle():
    rng = np.random.default_rng(123)
    samples = [
        sample(
            40.6 + rng.uniform(0, 0.01),
            22.9 + rng.uniform(0, 0.01),
            float(rng.choice([42.5, 47.5, 52.5, 57.5])),
        )
        for _ in range(5000)
    ]
    tiles = tessellate(samples)
    oracle = brute_force_tiles(samples, 4)
    assert len(tiles) == len(oracle)
    for t in tiles:
        mean, count = oracle[(t.lat_key, t.lon_key)]
        assert t.sample_count == count
        assert t.mean_noise_db == pytest.approx(mean, abs=1e-9)
    assert sum(t.sample_count for t in tiles) == len(samples)


def test_order_invariance():
    rng = np.random.default_rng(5)
    samples = [
        sample(40.6 + rng.uniform(0, 0.003), 22.9 + rng.uniform(0, 0.003), rng.uniform(40, 85))
        for _ in range(800)
    ]
    tiles_a = tessellate(samples)
    shuffled = list(samples)
    rng.shuffle(shuffled)
    tiles_b = tessellate(shuffled)
    assert [(t.lat_key, t.lon_key, t.sample_count) for t in tiles_a] == [
        (t.lat_key, t.lon_key, t.sample_count) for t in tiles_b
    ]
    for a, b in zip(tiles_a, tiles_b):
        assert a.mean_noise_db == pytest.approx(b.mean_noise_db, abs=1e-9)


def test_decimals_out_of_range_rejected():
    with pytest.raises(ConfigurationError):
        tessellate([sample(40.0, 22.0, 50.0)], decimals=7)


def test_reduction_ratio_published_shapes():
    # 3,312,310 rows -> 197,445 tiles: 94% reduction
    assert reduction_ratio(3_312_310, 197_445) == pytest.approx(0.94, abs=0.005)
    # 21,606,947 -> 109,245 reports as 99.4%; exact value is 0.9949440
    ratio = reduction_ratio(21_606_947, 109_245)
    assert ratio == pytest.approx(0.9949440, abs=1e-6)
    assert ratio == pytest.approx(0.994, abs=0.005)


def test_reduction_ratio_degenerate_cases():
    assert reduction_ratio(10, 10) == 0.0
    with pytest.raises(DataError):
        reduction_ratio(0, 0)
    with pytest.raises(DataError):
        reduction_ratio(5, 6)


def test_tile_file_roundtrip(tmp_path):
    tiles = tessellate(
        [sample(40.63001, 22.95002, 52.5), sample(40.64011, 22.96021, 57.5)]
    )
    path = tmp_path / "tiles.csv"
    write_tiles(tiles, path)
    assert read_tiles(path) == tiles


def test_tile_file_header_check(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ConfigurationError):
        read_tiles(bad)
