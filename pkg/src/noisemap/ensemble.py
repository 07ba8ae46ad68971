"""Regression trees and tree ensembles built from scratch.

Trees split greedily on squared-error reduction with exact thresholds
(midpoints between consecutive distinct feature values).  Three model
kinds share the splitter: a single tree, a bootstrap forest and
stagewise gradient boosting on residuals.  Boosted trees grow either
level-wise (depth capped) or leaf-wise (leaf count capped, always the
highest-gain leaf next).

Every stochastic choice flows from an explicit seed through
numpy SeedSequence spawning, so results are reproducible and do not
depend on worker count.
"""

from __future__ import annotations

import heapq
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    InsufficientDataError,
    DataError,
    SchemaError,
)

LEVEL_WISE = "level_wise"
LEAF_WISE = "leaf_wise"
MODEL_FORMAT_VERSION = 1


def _as_seedseq(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


@dataclass
class TreeNode:
    prediction: float
    sample_count: int
    feature: Optional[int] = None
    threshold: Optional[float] = None
    gain: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass
class ModelSpec:
    """Declarative model description usable as a search-space sample."""

    kind: str = "boosted"  # single_tree | forest | boosted
    growth: str = LEVEL_WISE
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1
    max_leaves: Optional[int] = None
    tree_count: int = 100
    learning_rate: float = 0.1
    bootstrap: bool = True
    feature_subsample: Optional[float] = None
    row_subsample: float = 1.0

    def validate(self) -> "ModelSpec":
        if self.kind not in ("single_tree", "forest", "boosted"):
            raise ConfigurationError(f"unknown model kind {self.kind!r}")
        if self.growth not in (LEVEL_WISE, LEAF_WISE):
            raise ConfigurationError(f"unknown growth mode {self.growth!r}")
        if self.kind != "single_tree" and self.tree_count < 1:
            raise ConfigurationError(f"tree_count must be >= 1, got {self.tree_count}")
        if self.kind == "boosted" and not 0.0 < self.learning_rate <= 1.0:
            raise ConfigurationError(
                f"learning_rate must be in (0, 1], got {self.learning_rate}"
            )
        if self.min_samples_leaf < 1:
            raise ConfigurationError(
                f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}"
            )
        if self.max_depth is not None and self.max_depth < 0:
            raise ConfigurationError(f"max_depth must be >= 0, got {self.max_depth}")
        if self.max_leaves is not None and self.max_leaves < 1:
            raise ConfigurationError(f"max_leaves must be >= 1, got {self.max_leaves}")
        if self.feature_subsample is not None and not 0.0 < self.feature_subsample <= 1.0:
            raise ConfigurationError(
                f"feature_subsample must be in (0, 1], got {self.feature_subsample}"
            )
        if not 0.0 < self.row_subsample <= 1.0:
            raise ConfigurationError(
                f"row_subsample must be in (0, 1], got {self.row_subsample}"
            )
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelSpec":
        return cls(**data).validate()


@dataclass
class TreeEnsemble:
    kind: str
    growth: str
    trees: list
    n_features: int
    learning_rate: Optional[float] = None
    base_prediction: Optional[float] = None
    feature_names: Optional[list[str]] = None
    target_name: Optional[str] = None
    spec: Optional[dict] = None


# ---------------------------------------------------------------------------
# splitting


def _best_split(X, y, idx, min_samples_leaf, features):
    """Best (feature, threshold, gain) over candidate splits of the rows in idx.

    Gain is the reduction in summed squared error; candidates are
    midpoints between consecutive distinct sorted values.  Ties resolve
    to the lowest feature index, then the lowest threshold.
    """
    n = idx.size
    if n < 2 * min_samples_leaf:
        return None
    ysub = y[idx]
    total = float(ysub.sum())
    parent_term = total * total / n
    best = None
    best_gain = 0.0
    counts = np.arange(1, n)
    for j in features:
        xs = X[idx, j]
        order = np.argsort(xs, kind="stable")
        xs_sorted = xs[order]
        valid = xs_sorted[:-1] < xs_sorted[1:]
        if min_samples_leaf > 1:
            valid &= (counts >= min_samples_leaf) & (n - counts >= min_samples_leaf)
        if not valid.any():
            continue
        left_sum = np.cumsum(ysub[order])[:-1]
        right_sum = total - left_sum
        gains = left_sum**2 / counts + right_sum**2 / (n - counts) - parent_term
        gains[~valid] = -np.inf
        i = int(np.argmax(gains))
        if gains[i] > best_gain:
            best_gain = float(gains[i])
            best = (int(j), 0.5 * (float(xs_sorted[i]) + float(xs_sorted[i + 1])), best_gain)
    return best


def _pick_features(n_features, fraction, rng):
    if fraction is None or fraction >= 1.0:
        return np.arange(n_features)
    k = max(1, int(round(fraction * n_features)))
    return np.sort(rng.choice(n_features, size=k, replace=False))


def _make_leaf(y, idx):
    return TreeNode(prediction=float(y[idx].mean()), sample_count=int(idx.size))


def _is_pure(y, idx):
    ysub = y[idx]
    return float(ysub.min()) == float(ysub.max())


def _grow_level_wise(X, y, idx, depth, params: ModelSpec, rng):
    node = _make_leaf(y, idx)
    if params.max_depth is not None and depth >= params.max_depth:
        return node
    if _is_pure(y, idx):
        return node
    features = _pick_features(X.shape[1], params.feature_subsample, rng)
    split = _best_split(X, y, idx, params.min_samples_leaf, features)
    if split is None:
        return node
    feature, threshold, gain = split
    mask = X[idx, feature] <= threshold
    node.feature = feature
    node.threshold = threshold
    node.gain = gain
    node.left = _grow_level_wise(X, y, idx[mask], depth + 1, params, rng)
    node.right = _grow_level_wise(X, y, idx[~mask], depth + 1, params, rng)
    return node


def _grow_leaf_wise(X, y, idx, params: ModelSpec, rng):
    """Grow by always splitting the leaf with the largest gain next."""
    root = _make_leaf(y, idx)
    max_leaves = params.max_leaves if params.max_leaves is not None else idx.size

    def candidate(node, node_idx, depth):
        if params.max_depth is not None and depth >= params.max_depth:
            return None
        if _is_pure(y, node_idx):
            return None
        features = _pick_features(X.shape[1], params.feature_subsample, rng)
        split = _best_split(X, y, node_idx, params.min_samples_leaf, features)
        if split is None:
            return None
        return (node, node_idx, depth, split)

    heap = []
    counter = 0
    first = candidate(root, idx, 0)
    if first is not None:
        heapq.heappush(heap, (-first[3][2], counter, first))
        counter += 1
    leaves = 1
    while heap and leaves < max_leaves:
        _, _, (node, node_idx, depth, (feature, threshold, gain)) = heapq.heappop(heap)
        mask = X[node_idx, feature] <= threshold
        node.feature = feature
        node.threshold = threshold
        node.gain = gain
        node.left = _make_leaf(y, node_idx[mask])
        node.right = _make_leaf(y, node_idx[~mask])
        leaves += 1
        for child, child_idx in ((node.left, node_idx[mask]), (node.right, node_idx[~mask])):
            cand = candidate(child, child_idx, depth + 1)
            if cand is not None:
                heapq.heappush(heap, (-cand[3][2], counter, cand))
                counter += 1
    return root


def _fit_tree_impl(X, y, params: ModelSpec, rng) -> TreeNode:
    idx = np.arange(X.shape[0])
    if params.growth == LEAF_WISE:
        return _grow_leaf_wise(X, y, idx, params, rng)
    return _grow_level_wise(X, y, idx, 0, params, rng)


def _check_training_data(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise SchemaError(f"X must be 2-D, got shape {X.shape}")
    if X.shape[0] != y.shape[0]:
        raise SchemaError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    if X.shape[0] == 0:
        raise InsufficientDataError("no training rows")
    return X, y


def fit_tree(X, y, params: Optional[ModelSpec] = None, seed: int = 0) -> TreeNode:
    """Fit one regression tree; deterministic given (data, params, seed)."""
    X, y = _check_training_data(X, y)
    params = (params or ModelSpec(kind="single_tree")).validate()
    rng = np.random.default_rng(seed)
    return _fit_tree_impl(X, y, params, rng)


def _predict_tree_into(node: TreeNode, X, idx, out):
    if node.is_leaf:
        out[idx] = node.prediction
        return
    mask = X[idx, node.feature] <= node.threshold
    _predict_tree_into(node.left, X, idx[mask], out)
    _predict_tree_into(node.right, X, idx[~mask], out)


def predict_tree(node: TreeNode, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    out = np.empty(X.shape[0], dtype=np.float64)
    _predict_tree_into(node, X, np.arange(X.shape[0]), out)
    return out


# ---------------------------------------------------------------------------
# ensembles


def fit_forest(
    X, y, params: Optional[ModelSpec] = None, seed: int = 0, workers: int = 1
) -> TreeEnsemble:
    """Bootstrap forest; per-tree seeds are pre-spawned so any worker count
    produces identical trees."""
    X, y = _check_training_data(X, y)
    params = (params or ModelSpec(kind="forest")).validate()
    n = X.shape[0]
    children = _as_seedseq(seed).spawn(params.tree_count)

    def build(child):
        rng = np.random.default_rng(child)
        if params.bootstrap:
            rows = rng.integers(0, n, size=n)
            return _fit_tree_impl(X[rows], y[rows], params, rng)
        return _fit_tree_impl(X, y, params, rng)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trees = list(pool.map(build, children))
    else:
        trees = [build(c) for c in children]
    return TreeEnsemble(
        kind="forest",
        growth=params.growth,
        trees=trees,
        n_features=X.shape[1],
        spec=params.to_dict(),
    )


def fit_boosted(X, y, params: Optional[ModelSpec] = None, seed: int = 0) -> TreeEnsemble:
    """Stagewise least-squares boosting on residuals from the mean."""
    X, y = _check_training_data(X, y)
    params = (params or ModelSpec(kind="boosted")).validate()
    if not 0.0 < params.learning_rate <= 1.0:
        raise ConfigurationError(f"learning_rate must be in (0, 1], got {params.learning_rate}")
    n = X.shape[0]
    base = float(y.mean())
    residual = y - base
    children = _as_seedseq(seed).spawn(params.tree_count)
    trees = []
    for child in children:
        rng = np.random.default_rng(child)
        if params.row_subsample < 1.0:
            m = max(1, int(round(params.row_subsample * n)))
            rows = np.sort(rng.choice(n, size=m, replace=False))
            tree = _fit_tree_impl(X[rows], residual[rows], params, rng)
        else:
            tree = _fit_tree_impl(X, residual, params, rng)
        residual -= params.learning_rate * predict_tree(tree, X)
        trees.append(tree)
    return TreeEnsemble(
        kind="boosted",
        growth=params.growth,
        trees=trees,
        n_features=X.shape[1],
        learning_rate=params.learning_rate,
        base_prediction=base,
        spec=params.to_dict(),
    )


def fit_model(spec: ModelSpec, X, y, seed: int = 0, workers: int = 1) -> TreeEnsemble:
    """Dispatch on spec.kind; single trees are wrapped so predict() is uniform."""
    spec = spec.validate()
    if spec.kind == "single_tree":
        tree = fit_tree(X, y, spec, seed)
        return TreeEnsemble(
            kind="single_tree",
            growth=spec.growth,
            trees=[tree],
            n_features=np.asarray(X).shape[1],
            spec=spec.to_dict(),
        )
    if spec.kind == "forest":
        return fit_forest(X, y, spec, seed, workers)
    return fit_boosted(X, y, spec, seed)


def predict(model: TreeEnsemble, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise SchemaError(
            f"model expects {model.n_features} feature columns, got shape {X.shape}"
        )
    if model.kind == "single_tree":
        return predict_tree(model.trees[0], X)
    if model.kind == "forest":
        acc = np.zeros(X.shape[0], dtype=np.float64)
        for tree in model.trees:
            acc += predict_tree(tree, X)
        return acc / len(model.trees)
    acc = np.full(X.shape[0], model.base_prediction, dtype=np.float64)
    for tree in model.trees:
        acc += model.learning_rate * predict_tree(tree, X)
    return acc


# ---------------------------------------------------------------------------
# metrics and evaluation


def _check_metric_inputs(y_true, y_pred):
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.shape != y_pred.shape:
        raise SchemaError(f"length mismatch: {y_true.shape} vs {y_pred.shape}")
    if y_true.size == 0:
        raise InsufficientDataError("metrics need at least one pair")
    return y_true, y_pred


def mae(y_true, y_pred) -> float:
    y_true, y_pred = _check_metric_inputs(y_true, y_pred)
    return float(np.mean(np.abs(y_true - y_pred)))


def mape(y_true, y_pred) -> float:
    """Mean absolute percentage error as a fraction (0.15 means 15%)."""
    y_true, y_pred = _check_metric_inputs(y_true, y_pred)
    if np.any(y_true == 0.0):
        raise DataError("MAPE undefined when a true value is zero")
    return float(np.mean(np.abs((y_true - y_pred) / y_true)))


@dataclass
class FoldScore:
    mae: float
    mape: float
    n: int


@dataclass
class CvResult:
    folds: list[FoldScore]
    mean_mae: float
    mean_mape: float


def kfold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Seeded shuffle split into k folds whose sizes differ by at most one."""
    if k < 2:
        raise ConfigurationError(f"k must be >= 2, got {k}")
    if n < k:
        raise InsufficientDataError(f"cannot make {k} folds from {n} rows")
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, k)


def cross_validate(
    X, y, spec: ModelSpec, k: int = 5, seed: int = 0, workers: int = 1
) -> CvResult:
    """k-fold cross-validation; folds partition the rows exactly."""
    X, y = _check_training_data(X, y)
    folds = kfold_indices(X.shape[0], k, seed)
    fit_seeds = _as_seedseq(seed).spawn(len(folds))
    scores = []
    for fold, fit_seed in zip(folds, fit_seeds):
        mask = np.ones(X.shape[0], dtype=bool)
        mask[fold] = False
        model = fit_model(spec, X[mask], y[mask], seed=fit_seed, workers=workers)
        pred = predict(model, X[fold])
        scores.append(FoldScore(mae(y[fold], pred), mape(y[fold], pred), int(fold.size)))
    return CvResult(
        folds=scores,
        mean_mae=float(np.mean([s.mae for s in scores])),
        mean_mape=float(np.mean([s.mape for s in scores])),
    )


# ---------------------------------------------------------------------------
# hyperparameter search and learning curves


@dataclass
class SearchResult:
    best_params: dict
    best_score: float
    trace: list = field(default_factory=list)


def _sample_space(space: dict, rng) -> dict:
    """One uniform draw per parameter, parameter names in sorted order.

    Ranges are {"low": a, "high": b} dicts (integer bounds sample
    integers inclusive, otherwise floats) or Python (low, high) tuples;
    lists are discrete choice sets.
    """
    sample = {}
    for name in sorted(space):
        choices = space[name]
        if isinstance(choices, dict):
            try:
                low, high = choices["low"], choices["high"]
            except KeyError:
                raise ConfigurationError(
                    f"range for {name!r} needs 'low' and 'high', got {choices!r}"
                ) from None
            choices = (low, high)
        if isinstance(choices, tuple):
            if len(choices) != 2:
                raise ConfigurationError(f"range for {name!r} must be (low, high)")
            low, high = choices
            if isinstance(low, int) and isinstance(high, int):
                sample[name] = int(rng.integers(low, high + 1))
            else:
                sample[name] = float(rng.uniform(low, high))
        elif isinstance(choices, list):
            if not choices:
                raise ConfigurationError(f"empty choice list for {name!r}")
            sample[name] = choices[int(rng.integers(0, len(choices)))]
        else:
            raise ConfigurationError(f"unsupported search range for {name!r}: {choices!r}")
    return sample


def random_search(
    space: dict,
    budget: int,
    objective: Callable[[dict], float],
    seed: int = 0,
) -> SearchResult:
    """Uniform random search; returns the earliest of the lowest-scoring trials.

    ``space`` maps a parameter name to either a list of choices or a
    (low, high) tuple sampled uniformly (integers when both ends are
    ints, floats otherwise).
    """
    if not space:
        raise ConfigurationError("empty search space")
    if budget < 1:
        raise ConfigurationError(f"budget must be >= 1, got {budget}")
    rng = np.random.default_rng(seed)
    best_params = None
    best_score = math.inf
    trace = []
    for _ in range(budget):
        params = _sample_space(space, rng)
        score = float(objective(params))
        trace.append((params, score))
        if score < best_score:
            best_params, best_score = params, score
    return SearchResult(best_params=best_params, best_score=best_score, trace=trace)


def train_validate(
    X, y, spec: ModelSpec, seed: int = 0, val_fraction: float = 0.2, workers: int = 1
) -> float:
    """Single train/validate split; returns validation MAE.

    Equals the fraction-1.0 point of :func:`learning_curve` run with the
    same seed.
    """
    curve = learning_curve(X, y, spec, [1.0], seed, val_fraction, workers)
    return curve[0][1]


def learning_curve(
    X,
    y,
    spec: ModelSpec,
    fractions: Sequence[float],
    seed: int = 0,
    val_fraction: float = 0.2,
    workers: int = 1,
) -> list[tuple[float, float]]:
    """Validation MAE over nested growing training subsets of a fixed split."""
    X, y = _check_training_data(X, y)
    fr = list(fractions)
    if not fr or any(not 0.0 < f <= 1.0 for f in fr) or fr != sorted(fr):
        raise ConfigurationError(f"fractions must be ascending within (0, 1], got {fractions}")
    n = X.shape[0]
    split_seed, fit_seed = _as_seedseq(seed).spawn(2)
    perm = np.random.default_rng(split_seed).permutation(n)
    n_val = max(1, int(round(val_fraction * n)))
    if n_val >= n:
        raise InsufficientDataError(f"no training rows left after holding out {n_val} of {n}")
    val_idx, pool = perm[:n_val], perm[n_val:]
    points = []
    for f in fr:
        m = math.ceil(f * pool.size)
        if m == 0:
            raise InsufficientDataError(f"fraction {f} leaves an empty training set")
        subset = pool[:m]
        model = fit_model(spec, X[subset], y[subset], seed=fit_seed, workers=workers)
        points.append((float(f), mae(y[val_idx], predict(model, X[val_idx]))))
    return points


# ---------------------------------------------------------------------------
# serialization


def _flatten_tree(root: TreeNode) -> dict:
    nodes = []

    def walk(node) -> int:
        i = len(nodes)
        nodes.append(node)
        if not node.is_leaf:
            walk(node.left)
            walk(node.right)
        return i

    walk(root)
    index = {id(n): i for i, n in enumerate(nodes)}
    return {
        "feature": [-1 if n.is_leaf else n.feature for n in nodes],
        "threshold": [None if n.is_leaf else n.threshold for n in nodes],
        "gain": [n.gain for n in nodes],
        "prediction": [n.prediction for n in nodes],
        "sample_count": [n.sample_count for n in nodes],
        "left": [-1 if n.is_leaf else index[id(n.left)] for n in nodes],
        "right": [-1 if n.is_leaf else index[id(n.right)] for n in nodes],
    }


def _unflatten_tree(data: dict) -> TreeNode:
    nodes = [
        TreeNode(
            prediction=p,
            sample_count=c,
            feature=None if f < 0 else f,
            threshold=t,
            gain=g,
        )
        for f, t, g, p, c in zip(
            data["feature"], data["threshold"], data["gain"],
            data["prediction"], data["sample_count"],
        )
    ]
    for node, li, ri in zip(nodes, data["left"], data["right"]):
        if li >= 0:
            node.left = nodes[li]
            node.right = nodes[ri]
    return nodes[0]


def save_model(model: TreeEnsemble, path: str | Path) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": model.kind,
        "growth": model.growth,
        "n_features": model.n_features,
        "learning_rate": model.learning_rate,
        "base_prediction": model.base_prediction,
        "feature_names": model.feature_names,
        "target_name": model.target_name,
        "spec": model.spec,
        "trees": [_flatten_tree(t) for t in model.trees],
    }
    Path(path).write_text(json.dumps(payload) + "\n")


def load_model(path: str | Path) -> TreeEnsemble:
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read model file {path}: {exc}") from exc
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ConfigurationError(
            f"unsupported model format version {version!r} in {path}"
        )
    return TreeEnsemble(
        kind=payload["kind"],
        growth=payload["growth"],
        trees=[_unflatten_tree(t) for t in payload["trees"]],
        n_features=payload["n_features"],
        learning_rate=payload["learning_rate"],
        base_prediction=payload["base_prediction"],
        feature_names=payload["feature_names"],
        target_name=payload.get("target_name"),
        spec=payload.get("spec"),
    )
