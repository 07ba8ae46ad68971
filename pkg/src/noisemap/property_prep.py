"""Cleaning, imputation and encoding of property listing tables.

The expected column layout is the listing schema: Size, NumberOfRooms,
Latitude, Longitude, EnergyEfficiencyId, ConstructionDate, SubTypeId,
FloorLevelId, BasicHeatingTypeId, DoorFrameTypeId, plus a Price target
and any attached noise columns.
"""

from __future__ import annotations

import datetime
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from .errors import (
    ConfigurationError,
    InsufficientDataError,
    SchemaError,
    UnseenCategoryError,
)

DATE_COLUMNS = ("ConstructionDate",)
MODE_COLUMNS = ("SubTypeId", "BasicHeatingTypeId", "DoorFrameTypeId")
ROUNDED_MEAN_COLUMNS = ("FloorLevelId",)
ORDINAL_COLUMNS = ("EnergyEfficiencyId", "FloorLevelId")
ONE_HOT_COLUMNS = ("SubTypeId", "BasicHeatingTypeId", "DoorFrameTypeId")
DEFAULT_TARGET = "Price"


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def iqr_bounds(values: Iterable[float], k: float = 1.5) -> tuple[float, float]:
    """Tukey fences (Q1 - k*IQR, Q3 + k*IQR) with linearly interpolated quartiles."""
    arr = np.asarray([v for v in values if not pd.isna(v)], dtype=np.float64)
    if arr.size < 4:
        raise InsufficientDataError(f"IQR bounds need >= 4 values, got {arr.size}")
    if k <= 0:
        raise ConfigurationError(f"IQR multiplier must be positive, got {k}")
    q1, q3 = np.percentile(arr, [25.0, 75.0])
    iqr = q3 - q1
    return (float(q1 - k * iqr), float(q3 + k * iqr))


def filter_outliers(
    records: pd.DataFrame, rules: Mapping[str, Mapping[str, float]]
) -> tuple[pd.DataFrame, dict[str, int]]:
    """Drop rows violating per-column bounds; returns (filtered, removal counts).

    A rule maps a column to fixed bounds {"min": .., "max": ..} and/or
    {"iqr_k": k} for data-driven bounds.  Counts report violations per
    column; a row violating several rules is removed once.
    """
    removed = {}
    keep = pd.Series(True, index=records.index)
    for col, rule in rules.items():
        if col not in records.columns:
            raise ConfigurationError(f"outlier rule references missing column {col!r}")
        values = pd.to_numeric(records[col], errors="coerce")
        lower, upper = -np.inf, np.inf
        if "iqr_k" in rule:
            lower, upper = iqr_bounds(values.dropna(), float(rule["iqr_k"]))
        if "min" in rule:
            lower = max(lower, float(rule["min"]))
        if "max" in rule:
            upper = min(upper, float(rule["max"]))
        ok = values.isna() | ((values >= lower) & (values <= upper))
        removed[col] = int((~ok).sum())
        keep &= ok
    removed["total_removed"] = int((~keep).sum())
    return records.loc[keep].reset_index(drop=True), removed


def impute(
    records: pd.DataFrame,
    ordinal_orders: Optional[Mapping[str, Sequence]] = None,
) -> tuple[pd.DataFrame, dict[str, int]]:
    """Fill missing values column by column; returns (filled, fill counts).

    Date columns get the mean date (epoch-day mean rounded to the
    nearest day), nominal columns the mode (ties to the lowest value),
    and rounded-mean columns the rounded mean of their ordinal codes.
    Rows still missing a value in any other column are dropped, so the
    result is complete.
    """
    out = records.copy()
    fills: dict[str, int] = {}
    for col in DATE_COLUMNS:
        if col not in out.columns:
            continue
        parsed = pd.to_datetime(out[col], errors="raise")
        missing = parsed.isna()
        if missing.all():
            raise InsufficientDataError(f"column {col} has no values to average")
        if missing.any():
            days = parsed.dropna().map(lambda t: t.toordinal())
            mean_day = _round_half_up(float(days.mean()))
            fill = pd.Timestamp(datetime.date.fromordinal(mean_day))
            parsed = parsed.fillna(fill)
            fills[col] = int(missing.sum())
        out[col] = parsed
    for col in MODE_COLUMNS:
        if col not in out.columns:
            continue
        missing = out[col].isna()
        if missing.all():
            raise InsufficientDataError(f"column {col} has no values to take a mode of")
        if missing.any():
            # pandas mode() is sorted, so the first entry is the lowest code.
            fill = out[col].mode().iloc[0]
            out[col] = out[col].fillna(fill)
            fills[col] = int(missing.sum())
    for col in ROUNDED_MEAN_COLUMNS:
        if col not in out.columns:
            continue
        missing = out[col].isna()
        if missing.all():
            raise InsufficientDataError(f"column {col} has no values to average")
        if missing.any():
            order = list((ordinal_orders or {}).get(col, sorted(out[col].dropna().unique())))
            codes = out[col].dropna().map(order.index)
            fill = order[_round_half_up(float(codes.mean()))]
            out[col] = out[col].fillna(fill)
            fills[col] = int(missing.sum())
    leftover = out.isna().any(axis=1)
    if leftover.any():
        fills["rows_dropped"] = int(leftover.sum())
        out = out.loc[~leftover]
    return out.reset_index(drop=True), fills


@dataclass
class FeatureMatrix:
    feature_names: list[str]
    X: np.ndarray
    y: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.feature_names.index(name)]


def _category_label(value) -> str:
    # Integer-valued floats (a common CSV artifact) label as plain integers.
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


@dataclass
class PropertyEncoder:
    """Fit/transform encoder: ordinals to integer codes, nominals to one-hot.

    Ordinal code order comes from ``ordinal_orders`` when supplied
    (index in the list is the code) and from sorted unique values
    otherwise.  With ``binary_encoding`` nominal categories become
    bit columns instead of one-hot indicators.
    """

    target: str = DEFAULT_TARGET
    ordinal_orders: dict = field(default_factory=dict)
    binary_encoding: bool = False
    drop_columns: tuple = ()

    def fit(self, records: pd.DataFrame) -> "PropertyEncoder":
        if self.target not in records.columns:
            raise SchemaError(f"target column {self.target!r} missing")
        self.ordinal_maps_: dict[str, dict] = {}
        self.nominal_categories_: dict[str, list] = {}
        self.numeric_columns_: list[str] = []
        skip = set(self.drop_columns) | {self.target}
        for col in records.columns:
            if col in skip:
                continue
            if col in ORDINAL_COLUMNS:
                order = list(self.ordinal_orders.get(col, sorted(records[col].unique())))
                self.ordinal_maps_[col] = {v: i for i, v in enumerate(order)}
            elif col in ONE_HOT_COLUMNS:
                self.nominal_categories_[col] = sorted(records[col].unique())
            elif pd.api.types.is_datetime64_any_dtype(records[col]):
                self.numeric_columns_.append(col)
            else:
                if not pd.api.types.is_numeric_dtype(records[col]):
                    raise SchemaError(f"column {col!r} is neither numeric nor categorical")
                self.numeric_columns_.append(col)
        self.feature_names_ = list(self.numeric_columns_)
        self.feature_names_ += [c for c in ORDINAL_COLUMNS if c in self.ordinal_maps_]
        for col, cats in self.nominal_categories_.items():
            if self.binary_encoding:
                width = max(1, (len(cats) - 1).bit_length())
                self.feature_names_ += [f"{col}_bit{j}" for j in range(width)]
            else:
                self.feature_names_ += [f"{col}_{_category_label(cat)}" for cat in cats]
        return self

    def transform(self, records: pd.DataFrame) -> FeatureMatrix:
        if not hasattr(self, "feature_names_"):
            raise SchemaError("encoder is not fitted")
        columns: list[np.ndarray] = []
        for col in self.numeric_columns_:
            if col not in records.columns:
                raise SchemaError(f"column {col!r} missing at transform time")
            series = records[col]
            if pd.api.types.is_datetime64_any_dtype(series):
                values = series.map(lambda t: float(t.toordinal())).to_numpy()
            else:
                values = series.to_numpy(dtype=np.float64)
            columns.append(values)
        for col in ORDINAL_COLUMNS:
            if col not in self.ordinal_maps_:
                continue
            if col not in records.columns:
                raise SchemaError(f"column {col!r} missing at transform time")
            mapping = self.ordinal_maps_[col]
            codes = np.empty(len(records), dtype=np.float64)
            for i, v in enumerate(records[col]):
                if v not in mapping:
                    raise UnseenCategoryError(f"unseen {col} category {v!r}")
                codes[i] = mapping[v]
            columns.append(codes)
        for col, cats in self.nominal_categories_.items():
            if col not in records.columns:
                raise SchemaError(f"column {col!r} missing at transform time")
            cat_index = {c: i for i, c in enumerate(cats)}
            idx = np.empty(len(records), dtype=np.int64)
            for i, v in enumerate(records[col]):
                if v not in cat_index:
                    raise UnseenCategoryError(f"unseen {col} category {v!r}")
                idx[i] = cat_index[v]
            if self.binary_encoding:
                width = max(1, (len(cats) - 1).bit_length())
                for j in range(width):
                    columns.append(((idx >> j) & 1).astype(np.float64))
            else:
                for j in range(len(cats)):
                    columns.append((idx == j).astype(np.float64))
        X = np.column_stack(columns) if columns else np.empty((len(records), 0))
        y = records[self.target].to_numpy(dtype=np.float64)
        return FeatureMatrix(list(self.feature_names_), X, y)

    def fit_transform(self, records: pd.DataFrame) -> FeatureMatrix:
        return self.fit(records).transform(records)


def encode(
    records: pd.DataFrame,
    target: str = DEFAULT_TARGET,
    ordinal_orders: Optional[Mapping[str, Sequence]] = None,
    binary_encoding: bool = False,
    drop_columns: Sequence[str] = (),
) -> FeatureMatrix:
    """One-shot fit-and-transform of a complete (imputed) property table."""
    encoder = PropertyEncoder(
        target=target,
        ordinal_orders=dict(ordinal_orders or {}),
        binary_encoding=binary_encoding,
        drop_columns=tuple(drop_columns),
    )
    return encoder.fit_transform(records)
