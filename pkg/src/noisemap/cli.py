"""Command-line pipeline: georeference, reconstruct, tessellate, join,
prep, train, explain, render, report.

Commands are thin wrappers over the library modules.  Every output file
is written atomically (temp file + rename) and contains no timestamps;
the only timestamped artifact is the run.log sidecar in the output
directory.  Exit code 0 means success; failures print one JSON line
with a machine-readable error category to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import os
import sys
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from PIL import Image

from . import ensemble, interpret, property_prep
from .colorspace import DEFAULT_MATCH_THRESHOLD
from .errors import ConfigurationError, NoisemapError, SchemaError
from .georef import fit_affine, read_gcps, read_transform, residual_rmse, write_transform
from .legend import LegendBand, band_for_value, resolve_palette
from .reconstruct import load_image, read_samples, scan_image, write_samples
from .spatial_join import JoinConfig, NoiseCharacteristic, attach_noise
from .synthetic import grid_aligned_transform
from .tessellate import Tile, read_tiles, reduction_ratio, tessellate, write_tiles

RESULT_COLUMNS = [
    "area",
    "radius_m",
    "characteristic",
    "model",
    "noise",
    "mae",
    "mape",
    "params",
]


# ---------------------------------------------------------------------------
# small infrastructure


@contextmanager
def atomic_path(final: Path):
    """Yield a temp path in the target directory, renamed into place on success."""
    final = Path(final)
    final.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=final.parent, prefix=f".{final.name}.")
    os.close(fd)
    try:
        yield Path(tmp)
        os.replace(tmp, final)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _log_run(out_dir: Path, message: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    stamp = datetime.datetime.now().isoformat(timespec="seconds")
    with (out_dir / "run.log").open("a") as fh:
        fh.write(f"{stamp} {message}\n")


def _require_file(path: str | Path, what: str) -> Path:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"{what} not found: {path}")
    return path


# ---------------------------------------------------------------------------
# experiment configuration


@dataclass
class ExperimentConfig:
    seed: int
    folds: int = 5
    target: str = "Price"
    property_file: Optional[Path] = None
    outlier_rules: dict = field(default_factory=dict)
    ordinal_orders: dict = field(default_factory=dict)
    binary_encoding: bool = False
    drop_columns: list = field(default_factory=list)
    tiles: dict = field(default_factory=dict)
    radii_m: list = field(default_factory=lambda: [100.0])
    characteristics: list = field(default_factory=lambda: ["I"])
    areas: dict = field(default_factory=dict)
    models: list = field(default_factory=list)
    with_noise: bool = True
    without_noise: bool = True
    save_models: bool = False
    learning_curve_fractions: list = field(default_factory=list)
    palette: Optional[str] = None
    gcp_file: Optional[Path] = None
    images: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        path = _require_file(path, "config file")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config file {path} is not valid JSON: {exc}") from exc
        if "seed" not in raw:
            raise ConfigurationError("config must set an explicit integer seed")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**{k: v for k, v in raw.items()})
        base = path.parent

        def resolve(p):
            p = Path(p)
            return p if p.is_absolute() else base / p

        if cfg.property_file is not None:
            cfg.property_file = _require_file(resolve(cfg.property_file), "property file")
        cfg.tiles = {k: _require_file(resolve(v), f"{k} tile file") for k, v in cfg.tiles.items()}
        cfg.areas = {k: _require_file(resolve(v), f"area polygon {k}") for k, v in cfg.areas.items()}
        if cfg.gcp_file is not None:
            cfg.gcp_file = _require_file(resolve(cfg.gcp_file), "GCP file")
        cfg.images = {k: _require_file(resolve(v), f"{k} image") for k, v in cfg.images.items()}
        if not isinstance(cfg.seed, int):
            raise ConfigurationError(f"seed must be an integer, got {cfg.seed!r}")
        if not cfg.models:
            raise ConfigurationError("config lists no models to train")
        for m in cfg.models:
            if "name" not in m or "kind" not in m:
                raise ConfigurationError(f"each model needs a name and kind: {m}")
        return cfg


def _point_in_polygon(lat: float, lon: float, vertices: Sequence[Sequence[float]]) -> bool:
    """Ray casting on (lat, lon) vertex lists; boundary points count as inside."""
    inside = False
    n = len(vertices)
    for i in range(n):
        y1, x1 = vertices[i]
        y2, x2 = vertices[(i + 1) % n]
        if (x1 > lon) != (x2 > lon):
            t = (lon - x1) / (x2 - x1)
            y_cross = y1 + t * (y2 - y1)
            if lat < y_cross:
                inside = not inside
            elif lat == y_cross:
                return True
    return inside


def _load_polygon(path: Path) -> list:
    data = json.loads(path.read_text())
    vertices = data["vertices"] if isinstance(data, dict) else data
    if len(vertices) < 3:
        raise ConfigurationError(f"polygon {path} needs at least 3 vertices")
    return [(float(v[0]), float(v[1])) for v in vertices]


# ---------------------------------------------------------------------------
# rendering tiles back to a raster


def render_tiles(
    tiles: Sequence[Tile],
    palette: Sequence[LegendBand],
    px_per_cell: int = 4,
    decimals: int = 4,
):
    """Draw tiles as filled squares colored by the band containing their mean.

    Cells without a tile, and tiles whose mean falls outside every band,
    stay transparent (white under zero alpha so rescans drop them).
    Returns (RGBA array, AffineTransform for the rendered raster).
    """
    if not tiles:
        raise ConfigurationError("no tiles to render")
    if px_per_cell < 1:
        raise ConfigurationError(f"px_per_cell must be >= 1, got {px_per_cell}")
    scale = 10**decimals
    lat_keys = [int(round(t.lat_key * scale)) for t in tiles]
    lon_keys = [int(round(t.lon_key * scale)) for t in tiles]
    if min(lat_keys) < 0 or min(lon_keys) < 0:
        raise ConfigurationError("rendering expects non-negative coordinate keys")
    lat_max, lat_min = max(lat_keys), min(lat_keys)
    lon_max, lon_min = max(lon_keys), min(lon_keys)
    height = (lat_max - lat_min + 1) * px_per_cell
    width = (lon_max - lon_min + 1) * px_per_cell
    rgba = np.zeros((height, width, 4), dtype=np.uint8)
    rgba[:, :, :3] = 255  # transparent white: rescans classify nothing here
    unmatched = 0
    for tile, lat_i, lon_i in zip(tiles, lat_keys, lon_keys):
        band = band_for_value(palette, tile.mean_noise_db)
        if band is None:
            unmatched += 1
            continue
        row = (lat_max - lat_i) * px_per_cell
        col = (lon_i - lon_min) * px_per_cell
        rgba[row : row + px_per_cell, col : col + px_per_cell, :3] = tuple(band.color)
        rgba[row : row + px_per_cell, col : col + px_per_cell, 3] = 255
    cell = 10.0**-decimals
    transform = grid_aligned_transform(
        north_lat=(lat_max + 1) * cell, west_lon=lon_min * cell,
        decimals=decimals, px_per_cell=px_per_cell,
    )
    return rgba, transform, unmatched


# ---------------------------------------------------------------------------
# commands


def cmd_georef(args) -> int:
    gcps = read_gcps(_require_file(args.gcps, "GCP file"))
    transform = fit_affine(gcps)
    out_dir = Path(args.out)
    with atomic_path(out_dir / "transform.json") as tmp:
        write_transform(transform, tmp)
    rmse = residual_rmse(transform, gcps)
    _log_run(out_dir, f"georef {args.gcps} rmse_deg={rmse!r}")
    print(f"fitted affine transform from {len(gcps)} points, residual RMSE {rmse:.3e} deg")
    return 0


def cmd_reconstruct(args) -> int:
    image = load_image(_require_file(args.image, "image"))
    transform = read_transform(_require_file(args.transform, "transform file"))
    palette = resolve_palette(args.palette)
    out_dir = Path(args.out)
    samples = scan_image(image, transform, palette, args.threshold)
    with atomic_path(out_dir / "samples.csv") as tmp:
        count = write_samples(samples, tmp)
    total = image.shape[0] * image.shape[1]
    _log_run(out_dir, f"reconstruct {args.image} matched={count}/{total}")
    print(f"matched {count} of {total} pixels -> samples.csv")
    return 0


def cmd_tessellate(args) -> int:
    samples = read_samples(_require_file(args.samples, "sample file"))
    out_dir = Path(args.out)
    tiles = tessellate(samples, args.decimals)
    with atomic_path(out_dir / "tiles.csv") as tmp:
        write_tiles(tiles, tmp, args.decimals)
    n_samples = sum(t.sample_count for t in tiles)
    ratio = reduction_ratio(n_samples, len(tiles)) if n_samples else 0.0
    _log_run(out_dir, f"tessellate {args.samples} tiles={len(tiles)}")
    print(f"{n_samples} samples -> {len(tiles)} tiles (reduction {ratio:.1%})")
    return 0


def cmd_join(args) -> int:
    props = pd.read_csv(_require_file(args.properties, "property file"))
    day = read_tiles(_require_file(args.day, "day tile file")) if args.day else None
    night = read_tiles(_require_file(args.night, "night tile file")) if args.night else None
    cfg = JoinConfig(args.radius, NoiseCharacteristic.from_code(args.characteristic))
    joined = attach_noise(props, day, night, cfg)
    out_dir = Path(args.out)
    with atomic_path(out_dir / "joined.csv") as tmp:
        joined.to_csv(tmp, index=False)
    _log_run(out_dir, f"join {args.properties} kept={len(joined)}/{len(props)}")
    print(f"kept {len(joined)} of {len(props)} properties within {args.radius} m of a tile")
    return 0


def cmd_prep(args) -> int:
    props = pd.read_csv(_require_file(args.properties, "property file"))
    if "ConstructionDate" in props.columns:
        props["ConstructionDate"] = pd.to_datetime(props["ConstructionDate"])
    rules = json.loads(_require_file(args.rules, "rules file").read_text()) if args.rules else {}
    ordinal_orders = rules.pop("ordinal_orders", {}) if isinstance(rules, dict) else {}
    filtered, removed = property_prep.filter_outliers(props, rules)
    imputed, fills = property_prep.impute(filtered, ordinal_orders)
    out_dir = Path(args.out)
    with atomic_path(out_dir / "prepared.csv") as tmp:
        imputed.to_csv(tmp, index=False)
    report = {"rows_in": len(props), "rows_out": len(imputed), "removed": removed, "filled": fills}
    with atomic_path(out_dir / "prep_report.json") as tmp:
        tmp.write_text(json.dumps(report, indent=2) + "\n")
    _log_run(out_dir, f"prep {args.properties} rows={len(imputed)}")
    print(f"prepared {len(imputed)} rows (removed {removed.get('total_removed', 0)})")
    return 0


def _model_seed(root_seed: int, *key: int) -> np.random.SeedSequence:
    # Documented derivation: one root seed fans out by structural position.
    return np.random.SeedSequence(entropy=root_seed, spawn_key=tuple(key))


def _spec_from_model_entry(entry: dict, overrides: Optional[dict] = None) -> ensemble.ModelSpec:
    params = dict(entry.get("params", {}))
    if overrides:
        params.update(overrides)
    params.setdefault("kind", entry["kind"])
    params["kind"] = entry["kind"]
    if "growth" in entry:
        params.setdefault("growth", entry["growth"])
    return ensemble.ModelSpec.from_dict(params)


def _evaluate_model(entry, matrix, folds, seed, workers):
    """Optionally random-search the entry's space, then cross-validate."""
    search = entry.get("search")
    chosen = {}
    if search:
        space = search.get("space", {})
        budget = int(search.get("budget", 8))

        def objective(params):
            spec = _spec_from_model_entry(entry, params)
            return ensemble.cross_validate(matrix.X, matrix.y, spec, folds, seed, workers).mean_mae

        result = ensemble.random_search(space, budget, objective, seed=seed)
        chosen = result.best_params
    spec = _spec_from_model_entry(entry, chosen)
    cv = ensemble.cross_validate(matrix.X, matrix.y, spec, folds, seed, workers)
    return spec, cv


def cmd_train(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if cfg.property_file is None:
        raise ConfigurationError("config must set property_file for training")
    out_dir = Path(args.out)
    workers = args.workers

    raw = pd.read_csv(cfg.property_file)
    if "ConstructionDate" in raw.columns:
        raw["ConstructionDate"] = pd.to_datetime(raw["ConstructionDate"])
    filtered, _ = property_prep.filter_outliers(raw, cfg.outlier_rules)
    prepared, _ = property_prep.impute(filtered, cfg.ordinal_orders)

    tile_sets = {name: read_tiles(path) for name, path in cfg.tiles.items()}
    areas = {name: _load_polygon(path) for name, path in cfg.areas.items()} or {"all": None}

    def encode_frame(frame, extra_drop=()):
        return property_prep.encode(
            frame,
            target=cfg.target,
            ordinal_orders=cfg.ordinal_orders,
            binary_encoding=cfg.binary_encoding,
            drop_columns=tuple(cfg.drop_columns) + tuple(extra_drop) + ("Latitude", "Longitude"),
        )

    rows = []
    saved = []
    for a_i, (area_name, polygon) in enumerate(sorted(areas.items())):
        if polygon is None:
            area_frame = prepared
        else:
            inside = [
                _point_in_polygon(lat, lon, polygon)
                for lat, lon in zip(prepared["Latitude"], prepared["Longitude"])
            ]
            area_frame = prepared.loc[inside].reset_index(drop=True)
        if area_frame.empty:
            raise ConfigurationError(f"area {area_name!r} contains no properties")
        for m_i, entry in enumerate(cfg.models):
            if cfg.without_noise:
                matrix = encode_frame(area_frame)
                seed = _model_seed(cfg.seed, a_i, m_i, 0)
                spec, cv = _evaluate_model(entry, matrix, cfg.folds, seed, workers)
                rows.append(
                    [area_name, "-", "-", entry["name"], "no",
                     repr(cv.mean_mae), repr(cv.mean_mape), json.dumps(spec.to_dict())]
                )
                if cfg.save_models:
                    saved.append(_save_fitted(out_dir, area_name, entry["name"], "plain",
                                              "-", "-", spec, matrix, seed, workers, cfg.target))
            if cfg.learning_curve_fractions:
                matrix = encode_frame(area_frame)
                seed = _model_seed(cfg.seed, a_i, m_i, 2)
                spec = _spec_from_model_entry(entry)
                curve = ensemble.learning_curve(
                    matrix.X, matrix.y, spec, cfg.learning_curve_fractions, seed=seed, workers=workers
                )
                _write_curve(out_dir / "curves" / f"{area_name}_{entry['name']}_learning.csv",
                             ["fraction", "mae"], curve)
            if not cfg.with_noise:
                continue
            for r_i, radius in enumerate(cfg.radii_m):
                for c_i, code in enumerate(cfg.characteristics):
                    char = NoiseCharacteristic.from_code(code)
                    joined = attach_noise(
                        area_frame,
                        tile_sets.get("day"),
                        tile_sets.get("night"),
                        JoinConfig(radius, char),
                    )
                    if joined.empty:
                        raise ConfigurationError(
                            f"no properties within {radius} m of a tile for area {area_name!r}"
                        )
                    matrix = encode_frame(joined)
                    seed = _model_seed(cfg.seed, a_i, m_i, 1, r_i, c_i)
                    spec, cv = _evaluate_model(entry, matrix, cfg.folds, seed, workers)
                    rows.append(
                        [area_name, repr(float(radius)), char.value, entry["name"], "yes",
                         repr(cv.mean_mae), repr(cv.mean_mape), json.dumps(spec.to_dict())]
                    )
                    if cfg.save_models:
                        saved.append(_save_fitted(out_dir, area_name, entry["name"], "noise",
                                                  radius, char.value, spec, matrix, seed, workers, cfg.target))

    with atomic_path(out_dir / "results.csv") as tmp:
        with tmp.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(RESULT_COLUMNS)
            writer.writerows(rows)
    _log_run(out_dir, f"train {args.config} rows={len(rows)} models_saved={len(saved)}")
    print(f"wrote {len(rows)} result rows -> results.csv")
    return 0


def _save_fitted(out_dir, area, model_name, flavor, radius, char, spec, matrix, seed, workers, target):
    name = f"{area}_{model_name}_{flavor}"
    if flavor == "noise":
        name += f"_r{int(radius)}_{char}"
    model_dir = out_dir / "models"
    model = ensemble.fit_model(spec, matrix.X, matrix.y, seed=seed, workers=workers)
    model.feature_names = list(matrix.feature_names)
    model.target_name = target
    with atomic_path(model_dir / f"{name}.json") as tmp:
        ensemble.save_model(model, tmp)
    frame = pd.DataFrame(matrix.X, columns=matrix.feature_names)
    frame[target] = matrix.y
    with atomic_path(model_dir / f"{name}_data.csv") as tmp:
        frame.to_csv(tmp, index=False)
    return name


def _write_curve(path: Path, header, rows) -> None:
    with atomic_path(path) as tmp:
        with tmp.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(float(v)) for v in row])
    _plot_curve(path, header)


def _plot_curve(csv_path: Path, header) -> None:
    # Convenience raster twin of the canonical CSV curve.
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    frame = pd.read_csv(csv_path)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(frame[header[0]], frame[header[1]], marker="o")
    ax.set_xlabel(header[0])
    ax.set_ylabel(header[1])
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    with atomic_path(csv_path.with_suffix(".png")) as tmp:
        fig.savefig(tmp, format="png", dpi=110)
    plt.close(fig)


def cmd_explain(args) -> int:
    model = ensemble.load_model(_require_file(args.model, "model file"))
    frame = pd.read_csv(_require_file(args.data, "data file"))
    if model.feature_names is None or model.target_name is None:
        raise ConfigurationError("model file lacks feature/target names; cannot explain")
    missing = [c for c in model.feature_names + [model.target_name] if c not in frame.columns]
    if missing:
        raise SchemaError(f"data file lacks columns: {missing}")
    X = frame[model.feature_names].to_numpy(dtype=np.float64)
    y = frame[model.target_name].to_numpy(dtype=np.float64)
    out_dir = Path(args.out)

    gain_report = interpret.split_and_gain_importance(model)
    perm_report = interpret.permutation_importance(
        model, X, y, metric=args.metric, repeats=args.repeats, seed=args.seed or 0
    )
    perm_by_name = perm_report.by_feature()
    with atomic_path(out_dir / "importance.csv") as tmp:
        with tmp.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["feature", "split_count", "mean_gain", "permutation_delta", "permutation_std"]
            )
            for entry in gain_report.entries:
                perm = perm_by_name[entry.feature]
                writer.writerow(
                    [entry.feature, entry.split_count, repr(entry.mean_gain),
                     repr(perm.permutation_delta), repr(perm.permutation_std)]
                )

    features = args.features.split(",") if args.features else [
        name for name in model.feature_names if name.startswith("noise")
    ]
    for feature in [f for f in features if f]:
        curve = interpret.partial_dependence(model, X, feature, grid_size=args.grid_size)
        _write_curve(
            out_dir / f"pdp_{feature}.csv",
            [feature, "mean_prediction"],
            list(zip(curve.grid, curve.mean_prediction)),
        )
    _log_run(out_dir, f"explain {args.model}")
    print(f"wrote importance.csv and {len([f for f in features if f])} dependence curves")
    return 0


def cmd_render(args) -> int:
    tiles = read_tiles(_require_file(args.tiles, "tile file"))
    palette = resolve_palette(args.palette)
    rgba, transform, unmatched = render_tiles(tiles, palette, args.px_per_cell, args.decimals)
    out_dir = Path(args.out)
    with atomic_path(out_dir / "rendered.png") as tmp:
        Image.fromarray(rgba, mode="RGBA").save(tmp, format="PNG")
    with atomic_path(out_dir / "rendered_transform.json") as tmp:
        write_transform(transform, tmp)
    _log_run(out_dir, f"render {args.tiles} tiles={len(tiles)} unmatched={unmatched}")
    print(f"rendered {len(tiles)} tiles ({unmatched} without a band) -> rendered.png")
    return 0


def cmd_report(args) -> int:
    frames = []
    for path in args.results:
        frame = pd.read_csv(_require_file(path, "results file"))
        if list(frame.columns) != RESULT_COLUMNS:
            raise SchemaError(
                f"results file {path} has columns {list(frame.columns)}, expected {RESULT_COLUMNS}"
            )
        frames.append(frame)
    merged = pd.concat(frames, ignore_index=True)

    # Keep the best characteristic per (radius, area, model) for noise rows.
    noise_rows = merged[merged["noise"] == "yes"]
    plain_rows = merged[merged["noise"] == "no"]
    best_noise = (
        noise_rows.sort_values(["mae", "characteristic"])
        .groupby(["radius_m", "area", "model"], as_index=False)
        .first()
        if not noise_rows.empty
        else noise_rows
    )

    areas = sorted(merged["area"].unique())
    radii = sorted(set(best_noise["radius_m"])) if not best_noise.empty else ["-"]
    out_rows = []
    lines = []
    for radius in radii:
        lines.append(f"radius {radius} m" if radius != "-" else "no radius (noise-free only)")
        header = ["model", "noise"] + [f"{a}:MAE" for a in areas] + [f"{a}:MAPE" for a in areas] + ["characteristic"]
        lines.append("  ".join(f"{h:>14}" for h in header))
        section = []
        for model in sorted(merged["model"].unique()):
            for flag, source in (("no", plain_rows), ("yes", best_noise)):
                sub = source[source["model"] == model]
                if flag == "yes":
                    sub = sub[sub["radius_m"] == radius]
                if sub.empty:
                    continue
                row = {"radius_m": radius, "model": model, "noise": flag}
                for a in areas:
                    cell = sub[sub["area"] == a]
                    row[f"mae:{a}"] = float(cell["mae"].iloc[0]) if not cell.empty else math.nan
                    row[f"mape:{a}"] = float(cell["mape"].iloc[0]) if not cell.empty else math.nan
                chars = sub["characteristic"].unique()
                row["characteristic"] = chars[0] if len(chars) == 1 else ",".join(chars)
                section.append(row)
        for a in areas:
            maes = [r[f"mae:{a}"] for r in section if not math.isnan(r[f"mae:{a}"])]
            best = min(maes) if maes else math.nan
            for r in section:
                r[f"best:{a}"] = (not math.isnan(r[f"mae:{a}"])) and r[f"mae:{a}"] == best
        for r in section:
            cells = [f"{r['model']:>14}", f"{r['noise']:>14}"]
            for a in areas:
                star = "*" if r[f"best:{a}"] else " "
                cells.append(f"{r[f'mae:{a}']:>13.1f}{star}")
            for a in areas:
                cells.append(f"{r[f'mape:{a}']:>14.4f}")
            cells.append(f"{r['characteristic']:>14}")
            lines.append("  ".join(cells))
            out_rows.append(r)
        lines.append("")

    out_dir = Path(args.out)
    with atomic_path(out_dir / "report.csv") as tmp:
        pd.DataFrame(out_rows).to_csv(tmp, index=False)
    with atomic_path(out_dir / "report.txt") as tmp:
        tmp.write_text("\n".join(lines))
    _log_run(out_dir, f"report files={len(args.results)}")
    print("\n".join(lines))
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noisemap",
        description="Noise-map reconstruction and housing-price modeling pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="root random seed")
        p.add_argument("--workers", type=int, default=1, help="parallel workers")

    p = sub.add_parser("georef", help="fit a pixel->geo affine transform from control points")
    p.add_argument("gcps", help="control point file (pixel_x,pixel_y,longitude,latitude)")
    add_common(p)
    p.set_defaults(func=cmd_georef)

    p = sub.add_parser("reconstruct", help="scan a heatmap into noise samples")
    p.add_argument("image", help="heatmap PNG")
    p.add_argument("--transform", required=True, help="transform JSON from georef/render")
    p.add_argument("--palette", required=True, help="built-in palette name or palette JSON file")
    p.add_argument("--threshold", type=float, default=DEFAULT_MATCH_THRESHOLD)
    add_common(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("tessellate", help="aggregate samples into fixed-precision tiles")
    p.add_argument("samples", help="sample CSV from reconstruct")
    p.add_argument("--decimals", type=int, default=4)
    add_common(p)
    p.set_defaults(func=cmd_tessellate)

    p = sub.add_parser("join", help="attach tile noise to properties within a radius")
    p.add_argument("properties", help="property CSV with Latitude/Longitude columns")
    p.add_argument("--day", help="day tile CSV")
    p.add_argument("--night", help="night tile CSV")
    p.add_argument("--radius", type=float, required=True, help="radius in meters")
    p.add_argument("--characteristic", required=True, help="I, II, III or IV")
    add_common(p)
    p.set_defaults(func=cmd_join)

    p = sub.add_parser("prep", help="filter outliers and impute missing property values")
    p.add_argument("properties", help="property CSV")
    p.add_argument("--rules", help="JSON outlier rules file")
    add_common(p)
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("train", help="run the configured model grid with cross-validation")
    p.add_argument("--config", required=True, help="experiment config JSON")
    add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("explain", help="importance and dependence diagnostics for a model")
    p.add_argument("model", help="model JSON written by train")
    p.add_argument("data", help="matrix CSV written next to the model")
    p.add_argument("--features", help="comma-separated feature names for dependence curves")
    p.add_argument("--metric", default="mae", choices=["mae", "mape"])
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--grid-size", type=int, default=11)
    add_common(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("render", help="draw tiles as a legend-colored raster")
    p.add_argument("tiles", help="tile CSV")
    p.add_argument("--palette", required=True)
    p.add_argument("--px-per-cell", type=int, default=4)
    p.add_argument("--decimals", type=int, default=4)
    add_common(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("report", help="aligned comparison table across result files")
    p.add_argument("results", nargs="+", help="results.csv files from train")
    add_common(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NoisemapError as exc:
        print(json.dumps({"error": exc.category, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
