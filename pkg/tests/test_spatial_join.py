import math

import numpy as np
import pandas as pd
import pytest

from noisemap import (
    ConfigurationError,
    JoinConfig,
    NoiseCharacteristic,
    Tile,
    TileIndex,
    attach_noise,
    haversine_m,
    noise_at,
)

M_PER_DEG = 6_371_000.0 * math.pi / 180.0


def tile_at(lat, lon, noise):
    return Tile(lat, lon, noise, 1)


def tile_at_distance(lat, lon, meters, noise, bearing="north"):
    if bearing == "north":
        return tile_at(lat + meters / M_PER_DEG, lon, noise)
    return tile_at(lat, lon + meters / (M_PER_DEG * math.cos(math.radians(lat))), noise)


def test_haversine_identical_points():
    assert haversine_m((40.63, 22.95), (40.63, 22.95)) == 0.0


def test_haversine_one_degree_latitude():
    assert haversine_m((40.0, 22.0), (41.0, 22.0)) == pytest.approx(111_195, abs=10)


def test_haversine_longitude_shrinks_with_latitude():
    d = haversine_m((40.6300, 22.9500), (40.6300, 22.9501))
    assert d == pytest.approx(8.4, abs=0.2)


def test_noise_at_single_tile_in_range():
    tiles = [tile_at_distance(40.63, 22.95, 30.0, 52.5)]
    index = TileIndex(tiles, radius_m=50.0)
    assert noise_at((40.63, 22.95), index) == 52.5


def test_noise_at_averages_members():
    tiles = [
        tile_at_distance(40.63, 22.95, 20.0, 50.0),
        tile_at_distance(40.63, 22.95, 40.0, 60.0, bearing="east"),
    ]
    index = TileIndex(tiles, radius_m=50.0)
    assert noise_at((40.63, 22.95), index) == 55.0


def test_noise_at_empty_when_out_of_range():
    tiles = [tile_at_distance(40.63, 22.95, 70.0, 52.5)]
    index = TileIndex(tiles, radius_m=50.0)
    assert noise_at((40.63, 22.95), index) is None


def test_noise_at_within_member_bounds():
    rng = np.random.default_rng(2)
    tiles = [
        tile_at(40.63 + rng.uniform(-5e-4, 5e-4), 22.95 + rng.uniform(-5e-4, 5e-4), rng.uniform(40, 85))
        for _ in range(200)
    ]
    index = TileIndex(tiles, radius_m=100.0)
    hits = index.query(40.63, 22.95)
    value = noise_at((40.63, 22.95), index)
    assert hits and value is not None
    members = [tiles[i].mean_noise_db for i in hits]
    assert min(members) <= value <= max(members)


@pytest.mark.parametrize("radius", [50.0, 100.0])
def test_radius_query_matches_brute_force(radius):
    rng = np.random.default_rng(9)
    tiles = [
        tile_at(
            40.60 + rng.uniform(0, 0.02), 22.93 + rng.uniform(0, 0.02), rng.uniform(40, 85)
        )
        for _ in range(1500)
    ]
    index = TileIndex(tiles, radius_m=radius)
    for _ in range(150):
        lat = 40.60 + rng.uniform(0, 0.02)
        lon = 22.93 + rng.uniform(0, 0.02)
        brute = [
            i
            for i, t in enumerate(tiles)
            if haversine_m((lat, lon), (t.lat_key, t.lon_key)) <= radius
        ]
        assert index.query(lat, lon) == brute


def props(rows):
    return pd.DataFrame(rows, columns=["Latitude", "Longitude", "Price"])


def test_attach_noise_day_only():
    day = [tile_at_distance(40.63, 22.95, 10.0, 62.5)]
    table = props([(40.63, 22.95, 100000.0)])
    cfg = JoinConfig(50.0, NoiseCharacteristic.DAY_ONLY)
    out = attach_noise(table, day, None, cfg)
    assert list(out.columns) == ["Latitude", "Longitude", "Price", "noise_day"]
    assert out.loc[0, "noise_day"] == 62.5


def test_attach_noise_combined_is_mean_of_day_and_night():
    day = [tile_at_distance(40.63, 22.95, 10.0, 60.0)]
    night = [tile_at_distance(40.63, 22.95, 20.0, 50.0)]
    table = props([(40.63, 22.95, 100000.0)])
    out = attach_noise(table, day, night, JoinConfig(50.0, NoiseCharacteristic.COMBINED))
    assert out.loc[0, "noise_combined"] == 55.0


def test_attach_noise_removes_rows_missing_required_value():
    day = [tile_at_distance(40.63, 22.95, 10.0, 60.0)]
    night = []  # no night coverage anywhere
    table = props([(40.63, 22.95, 100000.0)])
    out = attach_noise(table, day, night, JoinConfig(50.0, NoiseCharacteristic.DAY_AND_NIGHT))
    assert out.empty


def test_attach_noise_missing_tile_set_rejected():
    table = props([(40.63, 22.95, 100000.0)])
    with pytest.raises(ConfigurationError):
        attach_noise(table, None, None, JoinConfig(50.0, NoiseCharacteristic.DAY_ONLY))


def test_characteristic_codes():
    assert NoiseCharacteristic.from_code("ii") is NoiseCharacteristic.COMBINED
    with pytest.raises(ConfigurationError):
        NoiseCharacteristic.from_code("V")


def test_combined_equals_mean_of_separate_columns():
    rng = np.random.default_rng(4)
    day = [
        tile_at(40.63 + rng.uniform(-2e-3, 2e-3), 22.95 + rng.uniform(-2e-3, 2e-3), rng.uniform(40, 85))
        for _ in range(300)
    ]
    night = [
        tile_at(40.63 + rng.uniform(-2e-3, 2e-3), 22.95 + rng.uniform(-2e-3, 2e-3), rng.uniform(35, 80))
        for _ in range(300)
    ]
    table = props(
        [
            (40.63 + rng.uniform(-2e-3, 2e-3), 22.95 + rng.uniform(-2e-3, 2e-3), 1.0)
            for _ in range(100)
        ]
    )
    both = attach_noise(table, day, night, JoinConfig(100.0, NoiseCharacteristic.DAY_AND_NIGHT))
    combined = attach_noise(table, day, night, JoinConfig(100.0, NoiseCharacteristic.COMBINED))
    assert len(both) == len(combined)
    expect = 0.5 * (both["noise_day"] + both["noise_night"])
    assert np.array_equal(combined["noise_combined"].to_numpy(), expect.to_numpy())


def test_shrinking_radius_never_adds_properties():
    rng = np.random.default_rng(6)
    day = [
        tile_at(40.63 + rng.uniform(-3e-3, 3e-3), 22.95 + rng.uniform(-3e-3, 3e-3), 50.0)
        for _ in range(120)
    ]
    table = props(
        [
            (40.63 + rng.uniform(-3e-3, 3e-3), 22.95 + rng.uniform(-3e-3, 3e-3), float(i))
            for i in range(200)
        ]
    )
    wide = attach_noise(table, day, None, JoinConfig(100.0, NoiseCharacteristic.DAY_ONLY))
    narrow = attach_noise(table, day, None, JoinConfig(50.0, NoiseCharacteristic.DAY_ONLY))
    assert set(narrow["Price"]) <= set(wide["Price"])
