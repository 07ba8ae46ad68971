"""Pixel-by-pixel reconstruction of noise data from a legend-coded heatmap.

Each pixel is matched to a legend band by CIEDE2000 distance; matched
pixels become samples carrying the geographic coordinates of the pixel
center and the band's midpoint decibel value.  Unmatched pixels (color
transitions, overlaid labels, unmeasured regions) are dropped.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
from PIL import Image

from .colorspace import DEFAULT_MATCH_THRESHOLD, classify_colors_array
from .errors import ConfigurationError, GeometryError, InsufficientDataError
from .georef import AffineTransform
from .legend import LegendBand

SAMPLE_HEADER = ["latitude", "longitude", "red", "green", "blue", "noise"]


@dataclass(frozen=True)
class NoiseSample:
    latitude: float
    longitude: float
    red: int
    green: int
    blue: int
    noise_db: float


def load_image(path: str | Path) -> np.ndarray:
    """Read a PNG into an (H, W, 3) uint8 array; any alpha channel is ignored."""
    try:
        with Image.open(path) as img:
            arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read image {path}: {exc}") from exc
    return arr


def scan_image(
    image: np.ndarray,
    transform: AffineTransform,
    palette: Sequence[LegendBand],
    threshold: float = DEFAULT_MATCH_THRESHOLD,
) -> Iterator[NoiseSample]:
    """Classify every pixel and emit matched ones as samples, row-major.

    Coordinates are evaluated at pixel centers (x + 0.5, y + 0.5).  The
    image's distinct colors are classified once, so large rasters with
    few legend colors scan quickly.
    """
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] < 3:
        raise ConfigurationError(f"expected an (H, W, 3) image, got shape {image.shape}")
    if image.size == 0:
        raise InsufficientDataError("empty image")
    if transform.determinant == 0.0:
        raise GeometryError("degenerate transform (zero determinant)")

    rgb = image[:, :, :3]
    height, width = rgb.shape[:2]
    flat = rgb.reshape(-1, 3)
    unique, inverse = np.unique(flat, axis=0, return_inverse=True)
    band_of_unique = classify_colors_array(unique, palette, threshold)
    midpoints = [band.midpoint_db for band in palette]

    band_idx = band_of_unique[inverse].reshape(height, width)
    for y in range(height):
        row_bands = band_idx[y]
        cols = np.nonzero(row_bands >= 0)[0]
        if cols.size == 0:
            continue
        lat_row = transform.d * (cols + 0.5) + transform.e * (y + 0.5) + transform.f
        lon_row = transform.a * (cols + 0.5) + transform.b * (y + 0.5) + transform.c
        for x, lat, lon in zip(cols, lat_row, lon_row):
            r, g, b = rgb[y, x]
            yield NoiseSample(
                float(lat),
                float(lon),
                int(r),
                int(g),
                int(b),
                midpoints[row_bands[x]],
            )


def write_samples(samples: Iterable[NoiseSample], path: str | Path) -> int:
    """Stream samples to delimited text; returns the number written."""
    count = 0
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SAMPLE_HEADER)
        for s in samples:
            writer.writerow([repr(s.latitude), repr(s.longitude), s.red, s.green, s.blue, repr(s.noise_db)])
            count += 1
    return count


def read_samples(path: str | Path) -> Iterator[NoiseSample]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != SAMPLE_HEADER:
            raise ConfigurationError(
                f"sample file {path} must have header {','.join(SAMPLE_HEADER)}, "
                f"got {reader.fieldnames}"
            )
        for row in reader:
            yield NoiseSample(
                float(row["latitude"]),
                float(row["longitude"]),
                int(row["red"]),
                int(row["green"]),
                int(row["blue"]),
                float(row["noise"]),
            )
