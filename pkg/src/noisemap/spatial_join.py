"""Attach tile noise to property locations by radius averaging.

Tiles are treated as points at their truncated-coordinate keys.  Radius
queries run against a uniform hash grid whose cells are at least one
query radius wide, so candidates always sit in the 3x3 cell
neighborhood; exact membership is decided by haversine distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import pandas as pd

from .errors import ConfigurationError
from .tessellate import Tile

EARTH_RADIUS_M = 6_371_000.0
_M_PER_DEG = EARTH_RADIUS_M * math.pi / 180.0


def haversine_m(p1: tuple[float, float], p2: tuple[float, float]) -> float:
    """Great-circle distance in meters between (lat, lon) points in degrees."""
    lat1, lon1 = map(math.radians, p1)
    lat2, lon2 = map(math.radians, p2)
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    a = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(a)))


class NoiseCharacteristic(Enum):
    """Which noise columns a property model receives."""

    DAY_AND_NIGHT = "I"
    COMBINED = "II"
    DAY_ONLY = "III"
    NIGHT_ONLY = "IV"

    @classmethod
    def from_code(cls, code: str) -> "NoiseCharacteristic":
        try:
            return cls(code.strip().upper())
        except ValueError:
            raise ConfigurationError(
                f"unknown noise characteristic {code!r} (expected I, II, III or IV)"
            ) from None

    @property
    def needs_day(self) -> bool:
        return self in (self.DAY_AND_NIGHT, self.COMBINED, self.DAY_ONLY)

    @property
    def needs_night(self) -> bool:
        return self in (self.DAY_AND_NIGHT, self.COMBINED, self.NIGHT_ONLY)


@dataclass(frozen=True)
class JoinConfig:
    radius_m: float
    characteristic: NoiseCharacteristic

    def __post_init__(self):
        if self.radius_m <= 0:
            raise ConfigurationError(f"radius must be positive, got {self.radius_m}")


class TileIndex:
    """Uniform grid over tile key coordinates for fixed-radius queries."""

    def __init__(self, tiles: Sequence[Tile], radius_m: float):
        if radius_m <= 0:
            raise ConfigurationError(f"radius must be positive, got {radius_m}")
        self.tiles = list(tiles)
        self.radius_m = radius_m
        self._cell_lat = radius_m / _M_PER_DEG
        # Longitude degrees shrink with latitude; size cells for the worst
        # latitude in the data (plus margin) so 3x3 neighborhoods suffice.
        max_abs_lat = max((abs(t.lat_key) for t in self.tiles), default=0.0)
        cos_floor = max(math.cos(math.radians(min(89.0, max_abs_lat + 0.5))), 1e-6)
        self._cell_lon = radius_m / (_M_PER_DEG * cos_floor)
        self._grid: dict[tuple[int, int], list[int]] = {}
        for i, t in enumerate(self.tiles):
            self._grid.setdefault(self._cell(t.lat_key, t.lon_key), []).append(i)

    def _cell(self, lat: float, lon: float) -> tuple[int, int]:
        return (math.floor(lat / self._cell_lat), math.floor(lon / self._cell_lon))

    def query(self, lat: float, lon: float) -> list[int]:
        """Indices of tiles within the query radius, ascending."""
        ci, cj = self._cell(lat, lon)
        hits = []
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                for idx in self._grid.get((ci + di, cj + dj), ()):
                    t = self.tiles[idx]
                    if haversine_m((lat, lon), (t.lat_key, t.lon_key)) <= self.radius_m:
                        hits.append(idx)
        hits.sort()
        return hits


def noise_at(point: tuple[float, float], index: TileIndex) -> Optional[float]:
    """Mean tile noise within the index radius of the point; None when no tile qualifies."""
    hits = index.query(*point)
    if not hits:
        return None
    return sum(index.tiles[i].mean_noise_db for i in hits) / len(hits)


LAT_COLUMN = "Latitude"
LON_COLUMN = "Longitude"


def attach_noise(
    properties: pd.DataFrame,
    day_tiles: Optional[Sequence[Tile]],
    night_tiles: Optional[Sequence[Tile]],
    cfg: JoinConfig,
) -> pd.DataFrame:
    """Add the configured noise columns; rows lacking a required value are removed.

    Characteristic I adds noise_day and noise_night, II adds
    noise_combined (the mean of the day and night averages at the
    point), III adds noise_day, IV adds noise_night.
    """
    char = cfg.characteristic
    if char.needs_day and day_tiles is None:
        raise ConfigurationError(f"characteristic {char.value} needs a day tile set")
    if char.needs_night and night_tiles is None:
        raise ConfigurationError(f"characteristic {char.value} needs a night tile set")
    for col in (LAT_COLUMN, LON_COLUMN):
        if col not in properties.columns:
            raise ConfigurationError(f"property table lacks a {col} column")

    day_index = TileIndex(day_tiles, cfg.radius_m) if char.needs_day else None
    night_index = TileIndex(night_tiles, cfg.radius_m) if char.needs_night else None

    points = list(zip(properties[LAT_COLUMN], properties[LON_COLUMN]))
    day_vals = [noise_at(p, day_index) for p in points] if day_index else None
    night_vals = [noise_at(p, night_index) for p in points] if night_index else None

    out = properties.copy()
    if char is NoiseCharacteristic.DAY_AND_NIGHT:
        out["noise_day"] = day_vals
        out["noise_night"] = night_vals
        keep = [d is not None and n is not None for d, n in zip(day_vals, night_vals)]
    elif char is NoiseCharacteristic.COMBINED:
        out["noise_combined"] = [
            None if d is None or n is None else 0.5 * (d + n)
            for d, n in zip(day_vals, night_vals)
        ]
        keep = [d is not None and n is not None for d, n in zip(day_vals, night_vals)]
    elif char is NoiseCharacteristic.DAY_ONLY:
        out["noise_day"] = day_vals
        keep = [d is not None for d in day_vals]
    else:
        out["noise_night"] = night_vals
        keep = [n is not None for n in night_vals]
    return out.loc[keep].reset_index(drop=True)


def noise_feature_columns(char: NoiseCharacteristic) -> list[str]:
    """Column names attach_noise adds for a characteristic."""
    return {
        NoiseCharacteristic.DAY_AND_NIGHT: ["noise_day", "noise_night"],
        NoiseCharacteristic.COMBINED: ["noise_combined"],
        NoiseCharacteristic.DAY_ONLY: ["noise_day"],
        NoiseCharacteristic.NIGHT_ONLY: ["noise_night"],
    }[char]
