"""Tessellation: reduce dense samples to fixed-precision square tiles.

Coordinates are truncated toward zero to a fixed number of decimals
(4 decimals is roughly a 10 m grid); samples sharing a truncated
coordinate pair form one tile whose noise is their arithmetic mean.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import ConfigurationError, DataError
from .reconstruct import NoiseSample

TILE_HEADER = ["latitude", "longitude", "noise", "count"]


@dataclass(frozen=True)
class Tile:
    lat_key: float
    lon_key: float
    mean_noise_db: float
    sample_count: int


def truncate_coord(value: float, decimals: int) -> float:
    """Drop digits beyond ``decimals`` places, truncating toward zero."""
    scale = 10**decimals
    return math.trunc(value * scale) / scale


def _int_key(value: float, scale: int) -> int:
    return math.trunc(value * scale)


def tessellate(samples: Iterable[NoiseSample], decimals: int = 4) -> list[Tile]:
    """Group samples by truncated coordinates; one tile per distinct pair.

    Noise means use Kahan-compensated accumulation so the result is
    independent of input order to well below 1e-9.  Tiles come back
    sorted by (lat_key, lon_key).  Empty input yields an empty list.
    """
    if not 0 <= decimals <= 6:
        raise ConfigurationError(f"decimals must be in [0, 6], got {decimals}")
    scale = 10**decimals
    acc: dict[tuple[int, int], list] = {}
    for s in samples:
        key = (_int_key(s.latitude, scale), _int_key(s.longitude, scale))
        cell = acc.get(key)
        if cell is None:
            acc[key] = [s.noise_db, 0.0, 1]
            continue
        # Kahan step: cell = [sum, compensation, count]
        y = s.noise_db - cell[1]
        t = cell[0] + y
        cell[1] = (t - cell[0]) - y
        cell[0] = t
        cell[2] += 1
    tiles = []
    for (lat_i, lon_i) in sorted(acc):
        total, _, count = acc[(lat_i, lon_i)]
        tiles.append(Tile(lat_i / scale, lon_i / scale, total / count, count))
    return tiles


def reduction_ratio(samples_in: int, tiles_out: int) -> float:
    """Fraction of rows removed by tessellation: 1 - tiles/samples."""
    if samples_in == 0:
        raise DataError("reduction ratio undefined for zero input samples")
    if not samples_in >= tiles_out >= 0:
        raise DataError(
            f"need samples_in >= tiles_out >= 0, got ({samples_in}, {tiles_out})"
        )
    return 1.0 - tiles_out / samples_in


def write_tiles(tiles: Iterable[Tile], path: str | Path, decimals: int = 4) -> int:
    count = 0
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TILE_HEADER)
        for t in tiles:
            writer.writerow(
                [f"{t.lat_key:.{decimals}f}", f"{t.lon_key:.{decimals}f}", repr(t.mean_noise_db), t.sample_count]
            )
            count += 1
    return count


def read_tiles(path: str | Path) -> list[Tile]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != TILE_HEADER:
            raise ConfigurationError(
                f"tile file {path} must have header {','.join(TILE_HEADER)}, "
                f"got {reader.fieldnames}"
            )
        return [
            Tile(
                float(row["latitude"]),
                float(row["longitude"]),
                float(row["noise"]),
                int(row["count"]),
            )
            for row in reader
        ]
