"""Synthetic fixtures: heatmaps with known ground truth and priced listings.

These generators exist so the pipeline can be exercised end to end
without the original (proprietary or bulky) inputs.  Everything is
deterministic given the stated arguments and seeds.
"""

from __future__ import annotations

import datetime
import math
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from .georef import AffineTransform
from .legend import LegendBand


def smooth_decibel_field(height: int, width: int, low: float = 40.0, high: float = 85.0) -> np.ndarray:
    """A deterministic smooth field covering [low, high] exactly.

    The gradient is gentle relative to the pixel pitch, so 4-neighbors
    never jump more than one 5 dB band.
    """
    v, u = np.meshgrid(
        np.linspace(0.0, 1.0, height), np.linspace(0.0, 1.0, width), indexing="ij"
    )
    g = 0.55 * 0.5 * (u + v) + 0.45 * (0.5 + 0.5 * np.sin(2.0 * math.pi * u) * np.cos(1.7 * math.pi * v))
    g = (g - g.min()) / (g.max() - g.min())
    return low + (high - low) * g


def quantize_to_bands(field: np.ndarray, palette: Sequence[LegendBand]) -> np.ndarray:
    """Band index per pixel; values at or beyond the extremes clamp to the edge bands."""
    bands = sorted(palette, key=lambda b: b.low_db)
    lows = np.array([b.low_db for b in bands])
    idx = np.searchsorted(lows, field, side="right") - 1
    return np.clip(idx, 0, len(bands) - 1)


def band_image(band_idx: np.ndarray, palette: Sequence[LegendBand]) -> np.ndarray:
    bands = sorted(palette, key=lambda b: b.low_db)
    colors = np.array([tuple(b.color) for b in bands], dtype=np.uint8)
    return colors[band_idx]


def blend_band_borders(
    image: np.ndarray, band_idx: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Blend a one-pixel border line wherever the band changes.

    A pixel whose left (or, failing that, upper) neighbor belongs to a
    different band is replaced by the rounded 50/50 mix of the two
    original colors.  Returns (blended image, border mask).
    """
    out = image.copy()
    mask = np.zeros(band_idx.shape, dtype=bool)
    left_diff = np.zeros_like(mask)
    left_diff[:, 1:] = band_idx[:, 1:] != band_idx[:, :-1]
    up_diff = np.zeros_like(mask)
    up_diff[1:, :] = band_idx[1:, :] != band_idx[:-1, :]

    src = image.astype(np.int32)
    ys, xs = np.nonzero(left_diff)
    out[ys, xs] = ((src[ys, xs] + src[ys, xs - 1] + 1) // 2).astype(np.uint8)
    mask[ys, xs] = True
    ys, xs = np.nonzero(up_diff & ~left_diff)
    out[ys, xs] = ((src[ys, xs] + src[ys - 1, xs] + 1) // 2).astype(np.uint8)
    mask[ys, xs] = True
    return out, mask


def synthetic_heatmap(
    size: int,
    palette: Sequence[LegendBand],
    low: float = 40.0,
    high: float = 85.0,
    blend_borders: bool = True,
):
    """A size x size heatmap plus ground truth.

    Returns (image, band_idx, border_mask, transform): the rendered
    uint8 image (optionally with blended band borders), the true band
    index per pixel, the mask of blended pixels, and a north-up affine
    transform anchored near Thessaloniki at 1e-6 degrees per pixel.
    """
    field = smooth_decibel_field(size, size, low, high)
    band_idx = quantize_to_bands(field, palette)
    image = band_image(band_idx, palette)
    if blend_borders:
        image, border = blend_band_borders(image, band_idx)
    else:
        border = np.zeros(band_idx.shape, dtype=bool)
    dpp = 1e-6
    transform = AffineTransform(a=dpp, b=0.0, c=22.95, d=0.0, e=-dpp, f=40.64)
    return image, band_idx, border, transform


def grid_aligned_transform(
    north_lat: float, west_lon: float, decimals: int, px_per_cell: int
) -> AffineTransform:
    """North-up transform whose pixel grid tiles the truncation cells exactly."""
    dpp = 10.0**-decimals / px_per_cell
    return AffineTransform(a=dpp, b=0.0, c=west_lon, d=0.0, e=-dpp, f=north_lat)


REGION_PRICE_SLOPES = {"A": 300.0, "C": -300.0}


def make_priced_properties(
    n: int,
    seed: int,
    slopes: Optional[dict] = None,
    noise_low: float = 40.0,
    noise_high: float = 85.0,
    eps_scale: float = 0.10,
    noise_column: str = "noise_day",
) -> pd.DataFrame:
    """Listings with a planted, region-dependent price response to noise.

    Price is a linear function of size, rooms and floor plus
    slope[region] * noise plus Gaussian error whose standard deviation
    is ``eps_scale`` times the mean structural price.
    """
    slopes = dict(REGION_PRICE_SLOPES if slopes is None else slopes)
    rng = np.random.default_rng(seed)
    regions = np.array(sorted(slopes))[rng.integers(0, len(slopes), size=n)]
    size = rng.uniform(30.0, 120.0, size=n)
    rooms = np.clip(np.round(size / 35.0 + rng.normal(0.0, 0.6, size=n)), 1, 6)
    floor = rng.integers(0, 8, size=n).astype(float)
    noise = rng.uniform(noise_low, noise_high, size=n)
    base = 400.0 * size + 3000.0 * rooms + 1500.0 * floor + 15000.0
    slope = np.array([slopes[r] for r in regions])
    eps = rng.normal(0.0, eps_scale * base.mean(), size=n)
    price = base + slope * noise + eps
    frame = pd.DataFrame(
        {
            "Size": size,
            "NumberOfRooms": rooms.astype(int),
            "FloorLevelId": floor.astype(int),
            noise_column: noise,
            "Price": price,
        }
    )
    for region in sorted(slopes):
        frame[f"Region_{region}"] = (regions == region).astype(float)
    return frame


def make_listings(
    n: int,
    seed: int,
    center: tuple[float, float] = (40.63, 22.95),
    spread: float = 0.012,
) -> pd.DataFrame:
    """Full-schema listing table with realistic missing values and a few outliers."""
    rng = np.random.default_rng(seed)
    lat = center[0] + rng.uniform(-spread, spread, size=n)
    lon = center[1] + rng.uniform(-spread, spread, size=n)
    size = rng.uniform(35.0, 150.0, size=n)
    rooms = np.clip(np.round(size / 35.0 + rng.normal(0.0, 0.7, size=n)), 1, 6).astype(int)
    energy = rng.choice(["A", "B", "C", "D", "E"], size=n, p=[0.1, 0.2, 0.3, 0.25, 0.15])
    year = rng.integers(1960, 2021, size=n)
    month = rng.integers(1, 13, size=n)
    dates = [datetime.date(y, m, 15) for y, m in zip(year, month)]
    sub_type = rng.choice([1, 2, 4], size=n, p=[0.55, 0.25, 0.2]).astype(float)
    floor = rng.integers(0, 8, size=n).astype(float)
    heating = rng.choice([1, 2, 3], size=n).astype(float)
    frames = rng.choice([1, 2], size=n).astype(float)
    age_years = 2022 - year
    price = (
        900.0 * size
        + 5000.0 * rooms
        + 2200.0 * floor
        - 350.0 * age_years
        + rng.normal(0.0, 9000.0, size=n)
        + 45000.0
    )
    frame = pd.DataFrame(
        {
            "Size": size,
            "NumberOfRooms": rooms,
            "Latitude": lat,
            "Longitude": lon,
            "EnergyEfficiencyId": energy,
            "ConstructionDate": pd.to_datetime(dates),
            "SubTypeId": sub_type,
            "FloorLevelId": floor,
            "BasicHeatingTypeId": heating,
            "DoorFrameTypeId": frames,
            "Price": np.maximum(price, 12000.0),
        }
    )
    # Missing-value pattern: dates ~14%, subtype <1%, floor <1%, heating/door ~30%.
    def knock_out(col, fraction):
        hit = rng.random(n) < fraction
        frame.loc[hit, col] = np.nan

    knock_out("ConstructionDate", 0.14)
    knock_out("SubTypeId", 0.005)
    knock_out("FloorLevelId", 0.005)
    knock_out("BasicHeatingTypeId", 0.30)
    knock_out("DoorFrameTypeId", 0.31)
    # A few planted outliers for the filters to catch.
    if n >= 20:
        frame.loc[0, "NumberOfRooms"] = 11
        frame.loc[1, "Size"] = 420.0
        frame.loc[2, "Price"] = 9000.0
        frame.loc[3, "Price"] = 750000.0
    return frame
