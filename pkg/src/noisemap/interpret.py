"""Model diagnostics: split/gain importance, permutation importance,
partial dependence.

All diagnostics are read-only over a fitted ensemble; nothing here
mutates the model or the caller's data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .ensemble import TreeEnsemble, mae as _mae, mape as _mape, predict
from .errors import ConfigurationError, DegenerateGridError, SchemaError, StateError


@dataclass
class FeatureImportance:
    feature: str
    split_count: int = 0
    mean_gain: float = 0.0
    permutation_delta: Optional[float] = None
    permutation_std: Optional[float] = None


@dataclass
class ImportanceReport:
    entries: list[FeatureImportance]

    def by_feature(self) -> dict[str, FeatureImportance]:
        return {e.feature: e for e in self.entries}


@dataclass
class DependenceCurve:
    feature: str
    grid: np.ndarray
    mean_prediction: np.ndarray


_METRICS = {"mae": _mae, "mape": _mape}


def _feature_names(model: TreeEnsemble, names: Optional[Sequence[str]]) -> list[str]:
    if names is not None:
        if len(names) != model.n_features:
            raise SchemaError(
                f"{len(names)} names for {model.n_features} model features"
            )
        return list(names)
    if model.feature_names is not None:
        return list(model.feature_names)
    return [f"f{i}" for i in range(model.n_features)]


def _resolve_feature(model: TreeEnsemble, feature, names: list[str]) -> int:
    if isinstance(feature, str):
        try:
            return names.index(feature)
        except ValueError:
            raise ConfigurationError(f"unknown feature {feature!r}") from None
    index = int(feature)
    if not 0 <= index < model.n_features:
        raise ConfigurationError(f"feature index {index} out of range")
    return index


def split_and_gain_importance(
    model: TreeEnsemble, feature_names: Optional[Sequence[str]] = None
) -> ImportanceReport:
    """Per feature: how often it splits and the average gain of those splits."""
    if model is None or not model.trees:
        raise StateError("importance requires a fitted model")
    names = _feature_names(model, feature_names)
    counts = np.zeros(model.n_features, dtype=np.int64)
    gains = np.zeros(model.n_features, dtype=np.float64)

    def walk(node):
        if node.is_leaf:
            return
        counts[node.feature] += 1
        gains[node.feature] += node.gain
        walk(node.left)
        walk(node.right)

    for tree in model.trees:
        walk(tree)
    entries = []
    for i, name in enumerate(names):
        mean_gain = float(gains[i] / counts[i]) if counts[i] else 0.0
        entries.append(FeatureImportance(name, int(counts[i]), mean_gain))
    return ImportanceReport(entries)


def permutation_importance(
    model: TreeEnsemble,
    X,
    y,
    metric: str = "mae",
    repeats: int = 5,
    seed: int = 0,
    feature_names: Optional[Sequence[str]] = None,
) -> ImportanceReport:
    """Metric degradation when one feature column is shuffled (positive = relied on)."""
    if model is None or not model.trees:
        raise StateError("importance requires a fitted model")
    if repeats < 1:
        raise ConfigurationError(f"repeats must be >= 1, got {repeats}")
    if metric not in _METRICS:
        raise ConfigurationError(f"metric must be one of {sorted(_METRICS)}, got {metric!r}")
    score = _METRICS[metric]
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise SchemaError(
            f"model expects {model.n_features} feature columns, got shape {X.shape}"
        )
    names = _feature_names(model, feature_names)
    baseline = score(y, predict(model, X))
    rng = np.random.default_rng(seed)
    work = X.copy()
    entries = []
    for j, name in enumerate(names):
        deltas = np.empty(repeats, dtype=np.float64)
        original = work[:, j].copy()
        for r in range(repeats):
            work[:, j] = original[rng.permutation(X.shape[0])]
            deltas[r] = score(y, predict(model, work)) - baseline
        work[:, j] = original
        entries.append(
            FeatureImportance(
                name,
                permutation_delta=float(deltas.mean()),
                permutation_std=float(deltas.std()),
            )
        )
    return ImportanceReport(entries)


def partial_dependence(
    model: TreeEnsemble,
    X,
    feature,
    grid_size: int = 11,
    feature_names: Optional[Sequence[str]] = None,
) -> DependenceCurve:
    """Mean model prediction as one feature sweeps a quantile-spaced grid.

    The grid holds the distinct quantiles of the observed feature
    values, so it concentrates where the data live; duplicates collapse,
    which can make the curve shorter than ``grid_size``.
    """
    if model is None or not model.trees:
        raise StateError("partial dependence requires a fitted model")
    if grid_size < 2:
        raise ConfigurationError(f"grid_size must be >= 2, got {grid_size}")
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise SchemaError(
            f"model expects {model.n_features} feature columns, got shape {X.shape}"
        )
    names = _feature_names(model, feature_names)
    j = _resolve_feature(model, feature, names)
    values = X[:, j]
    grid = np.unique(np.quantile(values, np.linspace(0.0, 1.0, grid_size)))
    if grid.size < 2:
        raise DegenerateGridError(
            f"feature {names[j]!r} is constant over the data; no dependence grid exists"
        )
    work = X.copy()
    means = np.empty(grid.size, dtype=np.float64)
    for i, v in enumerate(grid):
        work[:, j] = v
        means[i] = float(predict(model, work).mean())
    return DependenceCurve(names[j], grid, means)
