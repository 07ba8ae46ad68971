import numpy as np
import pytest

from noisemap import (
    AffineTransform,
    ConfigurationError,
    GeometryError,
    GroundControlPoint,
    InsufficientDataError,
    fit_affine,
    pixel_to_geo,
    read_gcps,
    residual_rmse,
)
from noisemap.georef import read_transform, write_transform


def _noisy_fixture(seed=42, n=10, sigma=0.5):
    """GCPs from a known affine with Gaussian jitter on the pixel coordinates."""
    true = AffineTransform(a=1e-4, b=2e-6, c=22.90, d=-1e-6, e=-1e-4, f=40.65)
    rng = np.random.default_rng(seed)
    gcps = []
    for _ in range(n):
        x = rng.uniform(0, 200)
        y = rng.uniform(0, 200)
        lon, lat = true.apply(x, y)
        gcps.append(
            GroundControlPoint(x + rng.normal(0, sigma), y + rng.normal(0, sigma), lon, lat)
        )
    return true, gcps


def _lstsq_oracle(gcps):
    """Independent fit through numpy's QR/SVD least squares on the design matrix."""
    design = np.array([[p.pixel_x, p.pixel_y, 1.0] for p in gcps])
    lon = np.array([p.longitude for p in gcps])
    lat = np.array([p.latitude for p in gcps])
    abc, *_ = np.linalg.lstsq(design, lon, rcond=None)
    de_f, *_ = np.linalg.lstsq(design, lat, rcond=None)
    return AffineTransform(*abc, *de_f)


def test_identity_from_three_points():
    gcps = [
        GroundControlPoint(0, 0, 0, 0),
        GroundControlPoint(1, 0, 1, 0),
        GroundControlPoint(0, 1, 0, 1),
    ]
    t = fit_affine(gcps)
    assert t.a == pytest.approx(1, abs=1e-12)
    assert t.b == pytest.approx(0, abs=1e-12)
    assert t.c == pytest.approx(0, abs=1e-12)
    assert t.d == pytest.approx(0, abs=1e-12)
    assert t.e == pytest.approx(1, abs=1e-12)
    assert t.f == pytest.approx(0, abs=1e-12)


def test_scale_translation_construction():
    gcps = [
        GroundControlPoint(0, 0, 22.90, 40.60),
        GroundControlPoint(100, 0, 22.91, 40.60),
        GroundControlPoint(0, 100, 22.90, 40.59),
    ]
    t = fit_affine(gcps)
    assert t.a == pytest.approx(1e-4, rel=1e-9)
    assert t.b == pytest.approx(0, abs=1e-12)
    assert t.c == pytest.approx(22.90, abs=1e-9)
    assert t.d == pytest.approx(0, abs=1e-12)
    assert t.e == pytest.approx(-1e-4, rel=1e-9)
    assert t.f == pytest.approx(40.60, abs=1e-9)


def test_exact_three_point_fit_interpolates():
    _, gcps = _noisy_fixture(n=3, sigma=0.0)
    t = fit_affine(gcps)
    assert residual_rmse(t, gcps) <= 1e-9


def test_noisy_fit_matches_independent_oracle():
    _, gcps = _noisy_fixture()
    t = fit_affine(gcps)
    oracle = _lstsq_oracle(gcps)
    for field in "abcdef":
        assert getattr(t, field) == pytest.approx(getattr(oracle, field), abs=1e-9)
    assert residual_rmse(t, gcps) == pytest.approx(residual_rmse(oracle, gcps), abs=1e-9)


def test_noisy_fit_rmse_within_noise_budget():
    true, gcps = _noisy_fixture()
    t = fit_affine(gcps)
    # residuals should stay below 2 * sigma * degrees-per-pixel
    assert residual_rmse(t, gcps) < 2 * 0.5 * 1e-4


def test_fit_invariant_under_reordering():
    _, gcps = _noisy_fixture()
    t1 = fit_affine(gcps)
    t2 = fit_affine(list(reversed(gcps)))
    for field in "abcdef":
        assert getattr(t1, field) == pytest.approx(getattr(t2, field), abs=1e-12)


def test_recovers_known_affine_without_noise():
    true, gcps = _noisy_fixture(sigma=0.0)
    t = fit_affine(gcps)
    for x, y in [(0.0, 0.0), (12.5, 200.0), (333.0, 7.0)]:
        assert pixel_to_geo(t, x, y) == pytest.approx(true.apply(x, y), abs=1e-9)


def test_too_few_points_rejected():
    gcps = [GroundControlPoint(0, 0, 0, 0), GroundControlPoint(1, 1, 1, 1)]
    with pytest.raises(InsufficientDataError):
        fit_affine(gcps)


def test_collinear_points_rejected():
    gcps = [GroundControlPoint(i, 2 * i, i * 1e-4, i * 1e-4) for i in range(5)]
    with pytest.raises(GeometryError):
        fit_affine(gcps)


def test_pixel_to_geo_identity_and_translation():
    ident = AffineTransform(1, 0, 0, 0, 1, 0)
    assert pixel_to_geo(ident, 3.5, 7.25) == (3.5, 7.25)
    shift = AffineTransform(1, 0, 10, 0, 1, 20)
    assert pixel_to_geo(shift, 0, 0) == (10, 20)


def test_residual_rmse_conflicting_duplicates_positive():
    gcps = [
        GroundControlPoint(0, 0, 0, 0),
        GroundControlPoint(1, 0, 1e-3, 0),
        GroundControlPoint(0, 1, 0, 1e-3),
        GroundControlPoint(0, 0, 5e-4, 5e-4),
    ]
    t = fit_affine(gcps)
    assert residual_rmse(t, gcps) > 0


def test_residual_rmse_empty_rejected():
    with pytest.raises(InsufficientDataError):
        residual_rmse(AffineTransform(1, 0, 0, 0, 1, 0), [])


def test_gcp_coordinate_validation():
    with pytest.raises(ValueError):
        GroundControlPoint(0, 0, 190.0, 0.0)
    with pytest.raises(ValueError):
        GroundControlPoint(0, 0, 0.0, -91.0)


def test_read_gcps_fixture_file():
    gcps = read_gcps("tests/data/gcps_synthetic.csv")
    assert len(gcps) == 4
    t = fit_affine(gcps)
    assert residual_rmse(t, gcps) <= 1e-9
    assert t.a == pytest.approx(1e-5, rel=1e-6)


def test_read_gcps_header_check(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y,lon,lat\n0,0,0,0\n")
    with pytest.raises(ConfigurationError):
        read_gcps(bad)


def test_transform_file_roundtrip(tmp_path):
    t = AffineTransform(1e-4, 2e-6, 22.9, -1e-6, -1e-4, 40.65)
    path = tmp_path / "transform.json"
    write_transform(t, path)
    assert read_transform(path) == t


def test_condition_warning_on_extreme_geometry():
    # Huge pixel coordinates drive the normal matrix condition number up.
    gcps = [
        GroundControlPoint(0, 0, 22.90, 40.60),
        GroundControlPoint(1e6, 0, 22.91, 40.60),
        GroundControlPoint(0, 1e6, 22.90, 40.59),
        GroundControlPoint(1e6, 1e6, 22.91, 40.59),
    ]
    with pytest.warns(UserWarning):
        fit_affine(gcps)
