"""sRGB to CIELAB conversion and the CIEDE2000 color difference.

Colors are converted through the standard chain sRGB -> linear RGB ->
XYZ -> LAB with the D65 reference white.  All routines are pure
functions; the array variants exist so whole images can be converted
without a Python-level loop.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import ConfigurationError

DEFAULT_MATCH_THRESHOLD = 20.0


class RgbColor(NamedTuple):
    red: int
    green: int
    blue: int


class LabColor(NamedTuple):
    lightness: float
    a_component: float
    b_component: float


# sRGB (IEC 61966-2-1) linear RGB -> XYZ, D65 white.
_SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_D65_WHITE = np.array([0.95047, 1.00000, 1.08883])

# CIE f(t) breakpoints: epsilon = (6/29)^3, kappa = (29/3)^3.
_LAB_EPS = 216.0 / 24389.0
_LAB_KAPPA = 24389.0 / 27.0


def rgb_to_lab_array(rgb: np.ndarray) -> np.ndarray:
    """Convert an (..., 3) array of 8-bit RGB values to (..., 3) LAB."""
    c = np.asarray(rgb, dtype=np.float64) / 255.0
    linear = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    xyz = linear @ _SRGB_TO_XYZ.T
    t = xyz / _D65_WHITE
    f = np.where(t > _LAB_EPS, np.cbrt(t), (_LAB_KAPPA * t + 16.0) / 116.0)
    fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]
    lab = np.empty_like(xyz)
    lab[..., 0] = 116.0 * fy - 16.0
    lab[..., 1] = 500.0 * (fx - fy)
    lab[..., 2] = 200.0 * (fy - fz)
    return lab


def rgb_to_lab(color: RgbColor | Sequence[int]) -> LabColor:
    """Convert one 8-bit RGB color to LAB (D65)."""
    r, g, b = color
    for v in (r, g, b):
        if not 0 <= v <= 255:
            raise ValueError(f"RGB channel out of range: {color!r}")
    lab = rgb_to_lab_array(np.array([r, g, b], dtype=np.float64))
    return LabColor(float(lab[0]), float(lab[1]), float(lab[2]))


def delta_e_2000_array(lab1: np.ndarray, lab2: np.ndarray) -> np.ndarray:
    """CIEDE2000 difference over broadcastable (..., 3) LAB arrays."""
    lab1 = np.asarray(lab1, dtype=np.float64)
    lab2 = np.asarray(lab2, dtype=np.float64)
    l1, a1, b1 = lab1[..., 0], lab1[..., 1], lab1[..., 2]
    l2, a2, b2 = lab2[..., 0], lab2[..., 1], lab2[..., 2]

    c1 = np.hypot(a1, b1)
    c2 = np.hypot(a2, b2)
    c_bar = 0.5 * (c1 + c2)
    c_bar7 = c_bar**7
    g = 0.5 * (1.0 - np.sqrt(c_bar7 / (c_bar7 + 25.0**7)))

    a1p = (1.0 + g) * a1
    a2p = (1.0 + g) * a2
    c1p = np.hypot(a1p, b1)
    c2p = np.hypot(a2p, b2)

    h1p = np.degrees(np.arctan2(b1, a1p)) % 360.0
    h2p = np.degrees(np.arctan2(b2, a2p)) % 360.0

    dlp = l2 - l1
    dcp = c2p - c1p

    # Hue difference wraps to (-180, 180]; undefined (zero) when either chroma is zero.
    dh = h2p - h1p
    dh = np.where(dh > 180.0, dh - 360.0, dh)
    dh = np.where(dh < -180.0, dh + 360.0, dh)
    chroma_prod = c1p * c2p
    dh = np.where(chroma_prod == 0.0, 0.0, dh)
    dhp_big = 2.0 * np.sqrt(chroma_prod) * np.sin(np.radians(dh) / 2.0)

    lp_bar = 0.5 * (l1 + l2)
    cp_bar = 0.5 * (c1p + c2p)

    hsum = h1p + h2p
    habs = np.abs(h1p - h2p)
    hp_bar = np.where(
        habs <= 180.0,
        0.5 * hsum,
        np.where(hsum < 360.0, 0.5 * (hsum + 360.0), 0.5 * (hsum - 360.0)),
    )
    hp_bar = np.where(chroma_prod == 0.0, hsum, hp_bar)

    t = (
        1.0
        - 0.17 * np.cos(np.radians(hp_bar - 30.0))
        + 0.24 * np.cos(np.radians(2.0 * hp_bar))
        + 0.32 * np.cos(np.radians(3.0 * hp_bar + 6.0))
        - 0.20 * np.cos(np.radians(4.0 * hp_bar - 63.0))
    )

    lterm = (lp_bar - 50.0) ** 2
    sl = 1.0 + 0.015 * lterm / np.sqrt(20.0 + lterm)
    sc = 1.0 + 0.045 * cp_bar
    sh = 1.0 + 0.015 * cp_bar * t

    dtheta = 30.0 * np.exp(-(((hp_bar - 275.0) / 25.0) ** 2))
    cp_bar7 = cp_bar**7
    rc = 2.0 * np.sqrt(cp_bar7 / (cp_bar7 + 25.0**7))
    rt = -np.sin(np.radians(2.0 * dtheta)) * rc

    fl = dlp / sl
    fc = dcp / sc
    fh = dhp_big / sh
    return np.sqrt(fl * fl + fc * fc + fh * fh + rt * fc * fh)


def delta_e_2000(c1: LabColor | Sequence[float], c2: LabColor | Sequence[float]) -> float:
    """CIEDE2000 distance between two LAB colors (0 means identical)."""
    return float(delta_e_2000_array(np.asarray(c1, dtype=np.float64), np.asarray(c2, dtype=np.float64)))


def classify_color(pixel, palette, threshold: float = DEFAULT_MATCH_THRESHOLD):
    """Match a pixel against legend bands by minimal CIEDE2000 distance.

    Returns the band whose color is nearest to ``pixel`` when that
    distance is below ``threshold``, otherwise None.  Equidistant bands
    resolve to the one with the lower decibel range.
    """
    if not palette:
        raise ConfigurationError("classify_color needs a non-empty palette")
    if threshold <= 0:
        raise ConfigurationError(f"threshold must be positive, got {threshold}")
    pixel_lab = np.asarray(rgb_to_lab(pixel), dtype=np.float64)
    best = None
    best_d = math.inf
    for band in sorted(palette, key=lambda b: b.low_db):
        d = delta_e_2000(pixel_lab, rgb_to_lab(band.color))
        if d < best_d:
            best, best_d = band, d
    return best if best_d < threshold else None


def classify_colors_array(
    colors: np.ndarray, palette, threshold: float = DEFAULT_MATCH_THRESHOLD
) -> np.ndarray:
    """Vectorized variant of :func:`classify_color` over an (n, 3) RGB array.

    Returns an int array of indices into ``palette``; -1 marks pixels
    whose nearest band is at or beyond the threshold.
    """
    if not palette:
        raise ConfigurationError("classify_colors_array needs a non-empty palette")
    order = sorted(range(len(palette)), key=lambda i: palette[i].low_db)
    pal_lab = rgb_to_lab_array(
        np.array([tuple(palette[i].color) for i in order], dtype=np.float64)
    )
    color_lab = rgb_to_lab_array(np.asarray(colors, dtype=np.float64))
    # (n, bands) distance matrix; argmin picks the lowest-decibel band on ties.
    d = delta_e_2000_array(color_lab[:, None, :], pal_lab[None, :, :])
    nearest = np.argmin(d, axis=1)
    idx = np.array(order, dtype=np.int64)[nearest]
    idx[d[np.arange(len(nearest)), nearest] >= threshold] = -1
    return idx
