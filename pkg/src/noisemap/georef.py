"""Affine georeferencing from ground control points.

A six-coefficient affine transform maps pixel coordinates to WGS84
longitude/latitude.  The fit is an ordinary least-squares solve of the
normal equations, one system per output coordinate.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, GeometryError, InsufficientDataError

CONDITION_WARN_LIMIT = 1e8


@dataclass(frozen=True)
class GroundControlPoint:
    pixel_x: float
    pixel_y: float
    longitude: float
    latitude: float

    def __post_init__(self):
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude out of range: {self.longitude}")
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude out of range: {self.latitude}")


@dataclass(frozen=True)
class AffineTransform:
    """longitude = a*x + b*y + c;  latitude = d*x + e*y + f."""

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float

    @property
    def determinant(self) -> float:
        return self.a * self.e - self.b * self.d

    def apply(self, x: float, y: float) -> tuple[float, float]:
        return (self.a * x + self.b * y + self.c, self.d * x + self.e * y + self.f)


def fit_affine(gcps: Sequence[GroundControlPoint]) -> AffineTransform:
    """Least-squares affine fit through ground control points.

    Needs at least 3 points that are not collinear in pixel space; with
    exactly 3 such points the transform interpolates them.
    """
    if len(gcps) < 3:
        raise InsufficientDataError(f"affine fit needs >= 3 control points, got {len(gcps)}")
    design = np.array([[p.pixel_x, p.pixel_y, 1.0] for p in gcps], dtype=np.float64)
    if np.linalg.matrix_rank(design) < 3:
        raise GeometryError("control points are collinear in pixel space")

    normal = design.T @ design
    cond = np.linalg.cond(normal)
    if cond > CONDITION_WARN_LIMIT:
        warnings.warn(
            f"ill-conditioned control-point geometry (condition number {cond:.3g}); "
            "fitted coefficients may be inaccurate",
            stacklevel=2,
        )
    lon = np.array([p.longitude for p in gcps], dtype=np.float64)
    lat = np.array([p.latitude for p in gcps], dtype=np.float64)
    abc = np.linalg.solve(normal, design.T @ lon)
    de_f = np.linalg.solve(normal, design.T @ lat)
    t = AffineTransform(*(float(v) for v in (*abc, *de_f)))
    if t.determinant == 0.0:
        raise GeometryError("fitted transform is degenerate (zero determinant)")
    return t


def pixel_to_geo(t: AffineTransform, x: float, y: float) -> tuple[float, float]:
    """Apply the transform to one pixel coordinate, returning (longitude, latitude)."""
    return t.apply(x, y)


def residual_rmse(t: AffineTransform, gcps: Sequence[GroundControlPoint]) -> float:
    """Root-mean-square of Euclidean residuals, in degrees."""
    if not gcps:
        raise InsufficientDataError("residual_rmse needs at least one control point")
    sq = 0.0
    for p in gcps:
        lon, lat = t.apply(p.pixel_x, p.pixel_y)
        sq += (lon - p.longitude) ** 2 + (lat - p.latitude) ** 2
    return float(np.sqrt(sq / len(gcps)))


GCP_HEADER = ["pixel_x", "pixel_y", "longitude", "latitude"]


def read_gcps(path: str | Path) -> list[GroundControlPoint]:
    """Read control points from delimited text with the standard header."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != GCP_HEADER:
            raise ConfigurationError(
                f"GCP file {path} must have header {','.join(GCP_HEADER)}, "
                f"got {reader.fieldnames}"
            )
        points = []
        for row in reader:
            points.append(
                GroundControlPoint(
                    float(row["pixel_x"]),
                    float(row["pixel_y"]),
                    float(row["longitude"]),
                    float(row["latitude"]),
                )
            )
    return points


def write_transform(t: AffineTransform, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps({k: getattr(t, k) for k in "abcdef"}, indent=2) + "\n"
    )


def read_transform(path: str | Path) -> AffineTransform:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
        return AffineTransform(*(float(data[k]) for k in "abcdef"))
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read transform file {path}: {exc}") from exc
