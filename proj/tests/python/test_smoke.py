import math

import numpy as np
import pytest

import ctcfar


@pytest.fixture(scope="module")
def params():
    return ctcfar.RadarParams.defaults()


def test_default_geometry(params):
    assert (params.samples, params.chirps, params.channels) == (256, 128, 4)
    assert params.range_per_bin() == pytest.approx(299792458.0 * 9e6 / (2 * 120.023e12 * 256))


def test_simulate_shape_and_determinism(params):
    sc = ctcfar.random_scenario(params, 3, 10.0, 0.5, 7)
    a = ctcfar.simulate(sc)
    b = ctcfar.simulate(sc)
    assert a.shape == (4, 256, 128)
    assert a.dtype == np.complex128
    assert np.array_equal(a, b)


def test_rd_transform_matches_numpy_fft(params):
    sc = ctcfar.random_scenario(params, 2, 0.0, 0.5, 3)
    cube = ctcfar.simulate(sc)
    rd = ctcfar.rd_transform(cube, params)
    ref = np.fft.fft2(cube, axes=(1, 2))
    assert np.max(np.abs(rd - ref)) < 1e-9 * np.max(np.abs(ref))
    power = ctcfar.nca(rd, params)
    assert np.allclose(power, np.sum(np.abs(ref) ** 2, axis=0), rtol=1e-9)


def test_estimate_noise_constant_map():
    m = ctcfar.estimate_noise(np.full((64, 32), 2.5), 4)
    assert m.mu_z == pytest.approx(2.5 / m.g_u, rel=1e-12)
    assert m.theta == pytest.approx(m.mu_z / 4, rel=1e-12)


def test_estimate_noise_on_pure_noise(params):
    sc = ctcfar.Scenario()
    sc.params = params
    sc.noise_var = 1.5
    sc.seed = 11
    power = ctcfar.nca(ctcfar.rd_transform(ctcfar.simulate(sc), params), params)
    m = ctcfar.estimate_noise(power, 4)
    truth = 4 * 256 * 128 * 1.5
    assert abs(m.mu_z - truth) / truth < 0.02


def test_gamma_helpers():
    assert ctcfar.invert_gamma_cdf(1, 1e-3) == pytest.approx(math.log(1000.0), rel=1e-10)
    assert ctcfar.alpha_from_pfa(1, 1e-3) == pytest.approx(math.log(1000.0) - 1, rel=1e-10)
    u = math.log(1000.0)
    g = (1 - (1 + u) * math.exp(-u)) / (1 - math.exp(-u))
    assert ctcfar.truncation_gain(1, u) == pytest.approx(g, rel=1e-12)


def test_ct_detects_single_strong_target(params):
    sc = ctcfar.Scenario()
    sc.params = params
    sc.targets = [ctcfar.Target(40 * params.range_per_bin())]
    sc.noise_var = 1.0 / 100.0
    sc.seed = 5
    rd = ctcfar.rd_transform(ctcfar.simulate(sc), params)
    out = ctcfar.detect(rd, params, "ct", p_fa=1e-9)
    assert list(out["r_ind"]) == [40]
    assert list(out["v_ind"]) == [0]
    assert out["noise_model"] is not None


def test_every_detector_runs(params):
    rd = ctcfar.rd_transform(ctcfar.simulate(ctcfar.random_scenario(params, 5, 10.0, 0.5, 2)), params)
    assert ctcfar.detectors() == ["ct", "ca", "cago", "caso", "os", "tm", "ts"]
    for name in ctcfar.detectors():
        out = ctcfar.detect(rd, params, name)
        assert len(out["r_ind"]) == len(out["power"])


def test_window_ordering():
    rng = np.random.default_rng(0)
    m = rng.gamma(4.0, 1.0, size=(128, 64))
    ca = ctcfar.window_statistic(m, "ca")
    go = ctcfar.window_statistic(m, "cago")
    so = ctcfar.window_statistic(m, "caso")
    assert np.all(so <= ca) and np.all(ca <= go)
    assert np.array_equal(ctcfar.window_statistic(m, "tm", tm_trim=0), ca)


def test_cube_roundtrip(tmp_path, params):
    cube = ctcfar.simulate(ctcfar.random_scenario(params, 1, 0.0, 0.5, 9))
    path = str(tmp_path / "c.rdc1")
    ctcfar.write_cube(path, cube, params)
    back, p2 = ctcfar.read_cube(path)
    # samples are stored as f32 pairs
    assert np.array_equal(back, cube.astype(np.complex64).astype(np.complex128))
    assert p2.samples == 256


def test_monte_carlo_small(params):
    rows = ctcfar.monte_carlo(["ct", "ca"], [10.0], [5], trials=3, seed=4, threads=1)
    assert [r["detector"] for r in rows] == ["ct", "ca"]
    for r in rows:
        assert r["trials"] == 3
        assert 0.0 <= r["pd"] <= 1.0


def test_errors(params):
    with pytest.raises(ValueError):
        ctcfar.detect(np.zeros((4, 256, 128), complex), params, "nope")
    with pytest.raises(ValueError):
        ctcfar.rd_transform(np.zeros((2, 3, 4), complex), params)
    with pytest.raises(ctcfar.CtcfarError):
        ctcfar.detect(np.zeros((4, 256, 128), complex), params, "ct")
    with pytest.raises(ctcfar.CtcfarError):
        ctcfar.read_cube("/nonexistent/file.rdc1")
