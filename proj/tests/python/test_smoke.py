"""Smoke tests for the python bindings: the main operations round-trip
through numpy and agree with their closed forms."""

import math
import os
import subprocess
import tempfile

import numpy as np
import pytest

import eio


@pytest.fixture(scope="module")
def spec():
    theta = np.array([k ** -3.0 for k in range(1, 21)])
    return eio.sine_spec(20, theta, 0.09)


def test_spec_and_covariance(spec):
    assert spec.dim == 20
    sigma = eio.true_covariance(spec)
    assert sigma.shape == (20, 20)
    assert sigma[0, 0] == 0.5
    assert np.allclose(np.diag(sigma), spec.spectrum)


def test_generation_is_deterministic(spec):
    a = eio.gen_design(spec, 50, seed=3, stream_id=1)
    b = eio.gen_design(spec, 50, seed=3, stream_id=1)
    assert np.array_equal(a.x, b.x)
    assert np.array_equal(a.y, b.y)
    c = eio.gen_design(spec, 50, seed=4, stream_id=1)
    assert not np.array_equal(a.y, c.y)


def test_sufficient_stats_identity(spec):
    data = eio.gen_design(spec, 200, seed=0)
    stats = eio.sufficient_stats(data, spec)
    lhs = stats.sigma_hat @ spec.theta_circ + stats.u
    assert np.linalg.norm(lhs - stats.z) <= 1e-10 * max(1.0, np.linalg.norm(stats.z))


def test_fit_matches_plugin_at_large_mu(spec):
    data = eio.gen_design(spec, 200, seed=1)
    stats = eio.sufficient_stats(data, spec)
    hp = eio.Hyperparams()
    hp.mu = 1e8
    hp.lambda_ = 0.5
    report = eio.eio_fit(stats, hp)
    assert report.converged
    plugin = eio.plugin_fit(stats, 0.5)
    gap = np.linalg.norm(report.estimate.theta - plugin) / np.linalg.norm(plugin)
    assert gap <= 1e-4
    # the objective trace never increases
    trace = np.asarray(report.objective_trace)
    assert np.all(np.diff(trace) <= 1e-9 * np.maximum(1.0, np.abs(trace[:-1])))


def test_mu_infinity_sentinel(spec):
    data = eio.gen_design(spec, 100, seed=2)
    stats = eio.sufficient_stats(data, spec)
    hp = eio.Hyperparams()
    hp.mu = eio.MU_INFINITY
    hp.lambda_ = 0.5
    report = eio.eio_fit(stats, hp)
    assert np.array_equal(report.estimate.theta, eio.plugin_fit(stats, 0.5))


def test_ridge_scalar_case():
    theta = np.array([1.0])
    gspec = eio.gaussian_spec(np.array([1.0]), theta, 0.0)
    data = eio.gen_design(gspec, 1, seed=5)
    x, y = data.x[0, 0], data.y[0]
    tau = 1.0
    expected = x * y / (x * x + tau)
    assert eio.ridge_fit(data, tau)[0] == pytest.approx(expected, rel=1e-12)


def test_errors_surface_as_exceptions():
    with pytest.raises(eio.EioError):
        eio.sine_spec(3, np.array([1.0]), 0.09)  # dimension mismatch


def test_theory_helpers(spec):
    sigma = eio.true_covariance(spec)
    b = eio.bias_leading_term(sigma, spec.theta_circ, 0.0)
    assert np.array_equal(b, np.zeros(20))

    summary = eio.spectral_summary(spec.spectrum, 1.0 / 32.0)
    assert summary["k_star"] == 16
    assert summary["r4"] <= summary["r2"]

    cfg = eio.BoundConfig()
    cfg.sigma_psi1 = 0.09
    psi_n = eio.psi_bound(400, cfg, sigma, spec.theta_circ)
    psi_2n = eio.psi_bound(800, cfg, sigma, spec.theta_circ)
    assert psi_n == pytest.approx(2.0 * psi_2n, rel=1e-14)


def test_population_ratio_experiment(spec):
    hp = eio.Hyperparams()
    records = eio.ratio_bias_experiment(spec, hp, [1e8, eio.MU_INFINITY], [1.0])
    assert len(records) == 2
    finite, sentinel = records
    assert sentinel["mean"] == 1.0
    assert 0.99 <= finite["mean"] <= 1.01


def test_cli_round_trip(tmp_path):
    cli = os.environ.get("EIO_CLI")
    if not cli:
        pytest.skip("EIO_CLI not set")
    out = tmp_path / "run"
    result = subprocess.run(
        [cli, "fit", "--d", "8", "--n", "50", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stderr
    header = (out / "fit.csv").read_text().splitlines()[0]
    assert header == "n,d,mu,lambda,excess_risk,objective,iterations,converged"
