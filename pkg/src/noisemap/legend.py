"""Legend palettes: decibel bands tied to the heatmap colors that encode them.

Two palettes ship built in, one per source map family.  Custom palettes
load from a JSON file so other cities' legends can be described without
code changes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .colorspace import RgbColor
from .errors import ConfigurationError

THESSALONIKI_NEAPOLI = "thessaloniki_neapoli"
KALAMARIA = "kalamaria"

# The top band is published open-ended ("80+"); it is closed at 85 dB so the
# midpoint is defined, matching the dataset's declared noise range [0, 85].
OPEN_TOP_CLOSE_DB = 85.0


@dataclass(frozen=True)
class LegendBand:
    low_db: float
    high_db: float
    color: RgbColor
    open_ended: bool = False

    @property
    def midpoint_db(self) -> float:
        return 0.5 * (self.low_db + self.high_db)

    def contains(self, value_db: float) -> bool:
        """Band membership: [low, high), closed at the top for the final band."""
        if self.open_ended:
            return self.low_db <= value_db <= self.high_db
        return self.low_db <= value_db < self.high_db


def band_midpoint(band: LegendBand) -> float:
    """Representative decibel value of a band: the arithmetic mean of its bounds."""
    return band.midpoint_db


_BUILTIN_TABLES = {
    THESSALONIKI_NEAPOLI: [
        (40, 45, (182, 254, 191)),
        (45, 50, (255, 255, 0)),
        (50, 55, (254, 196, 71)),
        (55, 60, (253, 103, 2)),
        (60, 65, (255, 51, 50)),
        (65, 70, (152, 0, 51)),
        (70, 75, (174, 155, 219)),
        (75, 80, (1, 0, 251)),
        (80, OPEN_TOP_CLOSE_DB, (1, 1, 65)),
    ],
    KALAMARIA: [
        (35, 40, (80, 167, 50)),
        (40, 45, (14, 113, 49)),
        (45, 50, (255, 243, 59)),
        (50, 55, (172, 121, 78)),
        (55, 60, (255, 94, 55)),
        (60, 65, (192, 23, 18)),
        (65, 70, (138, 18, 19)),
        (70, 75, (144, 14, 102)),
        (75, 80, (40, 115, 183)),
        (80, OPEN_TOP_CLOSE_DB, (10, 65, 121)),
    ],
}


def _validate_palette(bands: list[LegendBand], origin: str) -> list[LegendBand]:
    if not bands:
        raise ConfigurationError(f"palette {origin!r} is empty")
    bands = sorted(bands, key=lambda b: b.low_db)
    colors = set()
    prev_high = None
    for band in bands:
        if not band.low_db < band.high_db:
            raise ConfigurationError(
                f"palette {origin!r}: band bounds out of order ({band.low_db}, {band.high_db})"
            )
        if band.color in colors:
            raise ConfigurationError(f"palette {origin!r}: duplicate color {band.color}")
        colors.add(band.color)
        if prev_high is not None and band.low_db < prev_high:
            raise ConfigurationError(f"palette {origin!r}: overlapping bands at {band.low_db}")
        prev_high = band.high_db
    return bands


def builtin_palette(name: str) -> list[LegendBand]:
    """One of the two built-in palettes, sorted by decibel range."""
    try:
        table = _BUILTIN_TABLES[name]
    except KeyError:
        known = ", ".join(sorted(_BUILTIN_TABLES))
        raise ConfigurationError(f"unknown palette {name!r} (known: {known})") from None
    bands = [
        LegendBand(float(low), float(high), RgbColor(*rgb), open_ended=(high == OPEN_TOP_CLOSE_DB))
        for low, high, rgb in table
    ]
    return _validate_palette(bands, name)


def load_palette(path: str | Path) -> list[LegendBand]:
    """Load a palette from a JSON list of {low_db, high_db, red, green, blue}."""
    path = Path(path)
    try:
        entries = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read palette file {path}: {exc}") from exc
    if not isinstance(entries, list):
        raise ConfigurationError(f"palette file {path} must hold a JSON list of bands")
    bands = []
    for i, entry in enumerate(entries):
        try:
            band = LegendBand(
                float(entry["low_db"]),
                float(entry["high_db"]),
                RgbColor(int(entry["red"]), int(entry["green"]), int(entry["blue"])),
                open_ended=bool(entry.get("open_ended", False)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"palette file {path}, entry {i}: {exc}") from exc
        bands.append(band)
    return _validate_palette(bands, str(path))


def resolve_palette(name_or_path: str) -> list[LegendBand]:
    """Accept either a built-in palette name or a palette file path."""
    if name_or_path in _BUILTIN_TABLES:
        return builtin_palette(name_or_path)
    if Path(name_or_path).exists():
        return load_palette(name_or_path)
    raise ConfigurationError(f"{name_or_path!r} is neither a built-in palette nor a palette file")


def band_for_value(palette: list[LegendBand], value_db: float) -> Optional[LegendBand]:
    """The band whose decibel range contains the value, if any."""
    for band in palette:
        if band.contains(value_db):
            return band
    return None
