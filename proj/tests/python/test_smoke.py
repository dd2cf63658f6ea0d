import math
from pathlib import Path

import numpy as np
import pytest

import fracobstacle as fo

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def test_constants():
    assert fo.normalization_constant(1, 0.5) == pytest.approx(1.0 / math.pi)
    s = 0.75
    expected = 2 ** (2 * s - 1) * math.gamma(s) / math.gamma(1 - s)
    assert fo.flux_scale(1, s) == pytest.approx(expected, rel=1e-12)
    assert fo.poisson_constant(2, 0.5) * math.pi / 0.5 == pytest.approx(1.0, rel=1e-12)


def test_beta_is_vectorized():
    x = np.array([-0.1, 0.0, 0.1])
    np.testing.assert_allclose(fo.beta(x, 0.1), np.exp(-x / 0.1))
    assert fo.beta(-100.0, 1e-3) == 1e12


def test_spectral_eigenmode():
    n, s = 64, 0.75
    x = -math.pi + 2 * math.pi * np.arange(n) / n
    u = np.cos(2 * x)
    np.testing.assert_allclose(fo.dft_frac_laplacian(u, math.pi, s), 2 ** (2 * s) * u, atol=1e-12)
    np.testing.assert_allclose(fo.heat_evolve(u, math.pi, 0.5, s), math.exp(-0.5 * 2 ** (2 * s)) * u, atol=1e-12)


def test_quadrature_matches_spectral():
    L, n, s = 16.0, 513, 0.75
    x = np.linspace(-L, L, n)
    u = np.exp(-x**2 / 2)
    quad = fo.frac_laplacian(u, L, s)
    spec = fo.dft_frac_laplacian(u[:-1], L, s)
    inner = np.abs(x[:-1]) <= 4
    err = np.max(np.abs(quad[:-1][inner] - spec[inner])) / np.max(np.abs(spec))
    assert err < 0.02


def test_frac_laplacian_2d_constant():
    u = np.full((17, 17), 0.3)
    out = fo.frac_laplacian(u, 1.0, 0.75, far=0.3)
    assert out.shape == (17, 17)
    assert np.max(np.abs(out)) < 1e-10


def test_bad_input_raises():
    with pytest.raises(ValueError):
        fo.frac_laplacian(np.zeros((17, 9)), 1.0, 0.75)
    with pytest.raises(ValueError):
        fo.Config.load(str(CONFIGS / "missing.cfg"))


def test_ladder_and_eigenvalue():
    lad = fo.exponent_ladder(0.75, 1 / 12, 40)
    assert lad["fixed_point"] == pytest.approx(1 / 6)
    assert abs(lad["alphas"][-1] - lad["fixed_point"]) < 1e-12
    assert fo.halfsphere_rayleigh(2, 0.75, 64) > 0


def test_config_round_trip():
    cfg = fo.Config.load(str(CONFIGS / "put1d.cfg"))
    assert cfg.dim == 1 and cfg.n == 513
    again = fo.Config.parse(cfg.to_yaml())
    assert again.to_yaml() == cfg.to_yaml()
    cfg.eps = 0.05
    assert cfg.eps == 0.05


def test_projected_solve_stays_above_obstacle():
    cfg = fo.Config.load(str(CONFIGS / "put1d.cfg"))
    cfg.scheme = "projected"
    cfg.T = 0.05
    res = fo.solve(cfg)
    psi = fo.obstacle(cfg)
    assert res["values"].shape == (len(res["times"]), cfg.n)
    assert np.all(res["values"] >= psi - 1e-12)
    assert res["min_slack"] >= 0.0
    assert res["monotonicity_violation"] == 0.0


def test_diagnostics_rows():
    cfg = fo.Config.load(str(CONFIGS / "put1d.cfg"))
    cfg.diagnostics = ["lipschitz"]
    rows = fo.diagnostics(cfg)
    assert rows and all({"quantity", "value", "pass"} <= set(r) for r in rows)
