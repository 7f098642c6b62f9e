"""Monte Carlo engine: determinism, theory agreement, and CSV output."""

import math

import numpy as np
import pytest

from adaptquant.noise import gg, st
from adaptquant.quantizer import QuantizerSpec, design_uniform
from adaptquant.simulator import (
    ExperimentConfig,
    SignalKind,
    SignalModel,
    generate_path,
    run_continuous_reference,
    run_experiment,
    write_result_csv,
    write_summary,
)


def make_config(**overrides):
    base = dict(
        signal=SignalModel(SignalKind.CONSTANT),
        noise=gg(2.0),
        quantizer=QuantizerSpec.uniform(4, 0.69),
        replications=200,
        horizon=300,
        seed=123,
        initial_offset=2.0,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_signal_model_validation():
    SignalModel(SignalKind.CONSTANT, x0=1.0)
    SignalModel(SignalKind.WIENER, sigma_w=0.1)
    SignalModel(SignalKind.WIENER_DRIFT, sigma_w=1e-4, u=1e-4)
    with pytest.raises(ValueError):
        SignalModel(SignalKind.CONSTANT, sigma_w=0.1)
    with pytest.raises(ValueError):
        SignalModel(SignalKind.WIENER, sigma_w=0.0)
    with pytest.raises(ValueError):
        SignalModel(SignalKind.WIENER_DRIFT, sigma_w=0.1, u=0.0)


def test_generate_path_statistics(rng):
    const = generate_path(SignalModel(SignalKind.CONSTANT, x0=3.0), 50, rng)
    np.testing.assert_array_equal(const, 3.0)
    sig = SignalModel(SignalKind.WIENER_DRIFT, x0=1.0, sigma_w=0.01, u=0.5)
    paths = np.array([generate_path(sig, 100, np.random.default_rng(i))
                      for i in range(400)])
    # mean follows the drift line, variance grows linearly
    np.testing.assert_allclose(paths[:, -1].mean(), 1.0 + 0.5 * 100, rtol=1e-3)
    assert paths[:, -1].var() == pytest.approx(100 * 0.01**2, rel=0.3)


def test_config_validation():
    with pytest.raises(ValueError):
        make_config(replications=0)
    with pytest.raises(ValueError):
        make_config(horizon=10, burn_in=10)


def test_determinism_same_seed_and_threads():
    cfg = make_config(replications=700)  # spans two chunks
    a = run_experiment(cfg, threads=1)
    b = run_experiment(cfg, threads=1)
    c = run_experiment(cfg, threads=3)
    np.testing.assert_array_equal(a.mse_curve, b.mse_curve)
    np.testing.assert_array_equal(a.mse_curve, c.mse_curve)


def test_different_seed_changes_result():
    a = run_experiment(make_config(seed=1))
    b = run_experiment(make_config(seed=2))
    assert not np.array_equal(a.mse_curve, b.mse_curve)


def test_constant_signal_matches_theory():
    m = gg(2.0)
    spec, design = design_uniform(m, 4)
    cfg = make_config(noise=m, quantizer=spec, replications=3000,
                      horizon=800, initial_offset=0.0, seed=7)
    res = run_experiment(cfg, threads=2, design=design)
    k = np.arange(1, cfg.horizon + 1)
    np.testing.assert_allclose(res.theory_mse_curve, 1.0 / (k * design.info),
                               rtol=1e-12)
    # normalized tail within a few percent of the asymptotic constant
    tail = res.mse_curve[-200:] * k[-200:] * design.info
    assert abs(tail.mean() - 1.0) < 0.08
    assert res.diverged == 0


def test_wiener_signal_matches_theory():
    m = gg(2.0)
    spec, design = design_uniform(m, 4)
    sig = SignalModel(SignalKind.WIENER, sigma_w=0.01)
    cfg = make_config(signal=sig, noise=m, quantizer=spec, replications=400,
                      horizon=4000, burn_in=1000, initial_offset=0.0, seed=11)
    res = run_experiment(cfg, threads=2, design=design)
    predicted = 0.01 / math.sqrt(design.info)
    np.testing.assert_allclose(res.theory_mse_curve, predicted)
    assert res.asymptotic_mse == pytest.approx(predicted, rel=0.05)


def test_drift_signal_matches_theory():
    m = gg(2.0)
    spec, design = design_uniform(m, 4)
    u = 1e-3
    sig = SignalModel(SignalKind.WIENER_DRIFT, sigma_w=1e-3, u=u)
    cfg = make_config(signal=sig, noise=m, quantizer=spec, replications=300,
                      horizon=4000, burn_in=1000, initial_offset=0.0,
                      seed=13, drift_initial=None)  # oracle warm start
    res = run_experiment(cfg, threads=2, design=design)
    predicted = 3.0 * (u / (4.0 * design.info)) ** (2.0 / 3.0)
    assert res.asymptotic_mse == pytest.approx(predicted, rel=0.2)


def test_continuous_reference_constant():
    m = st(1.0)  # heavy-tailed noise, information 1/2
    cfg = make_config(noise=m, quantizer=None, replications=2000,
                      horizon=2500, initial_offset=0.0, seed=17)
    res = run_continuous_reference(cfg, threads=2)
    k = np.arange(1, cfg.horizon + 1)
    np.testing.assert_allclose(res.theory_mse_curve, 1.0 / (k * 0.5),
                               rtol=1e-12)
    tail = res.mse_curve[-200:] * k[-200:] * 0.5
    assert abs(tail.mean() - 1.0) < 0.1
    assert res.diverged == 0


def test_quantized_never_beats_continuous_loss():
    m = gg(2.0)
    spec, design = design_uniform(m, 2)
    cfg = make_config(noise=m, quantizer=spec, replications=2000,
                      horizon=600, initial_offset=0.0, seed=19)
    res = run_experiment(cfg, threads=2, design=design)
    # theory loss for 1-bit Gaussian-type noise is the classic 1.96 dB
    assert res.theory_loss_db == pytest.approx(1.9612, abs=5e-5)
    assert res.simulated_loss_db == pytest.approx(res.theory_loss_db, abs=0.35)


def test_loss_curve_db_shape_and_tail():
    m = gg(2.0)
    spec, design = design_uniform(m, 4)
    # an initial offset gives an elevated loss curve that decays back
    cfg = make_config(noise=m, quantizer=spec, replications=400,
                      horizon=600, initial_offset=3.0, seed=23)
    res = run_experiment(cfg, threads=2, design=design)
    curve = res.loss_curve_db()
    assert curve.shape == res.mse_curve.shape
    assert curve[0] > res.theory_loss_db + 3.0
    assert curve[-1] < curve[0] - 3.0
    # starting at the true value the tail sits near the theoretical loss
    cfg0 = make_config(noise=m, quantizer=spec, replications=1500,
                       horizon=600, initial_offset=0.0, seed=23)
    res0 = run_experiment(cfg0, threads=2, design=design)
    curve0 = res0.loss_curve_db()
    assert abs(curve0[-50:].mean() - res0.theory_loss_db) < 0.5


def test_metadata_contents():
    res = run_experiment(make_config())
    md = res.metadata
    assert md["signal_kind"] == "constant"
    assert md["family"] == "gg"
    assert md["beta"] == 2.0
    assert md["replications"] == 200
    assert md["seed"] == 123
    assert res.wall_time_s > 0.0


def test_csv_roundtrip(tmp_path):
    res = run_experiment(make_config(replications=50, horizon=40))
    out = tmp_path / "result.csv"
    write_result_csv(res, out)
    text = out.read_text()
    lines = text.strip().splitlines()
    meta = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    assert meta  # metadata present as comments
    assert not any("wall" in ln.lower() for ln in meta)  # timing excluded
    assert body[0] == "k,mse,theory_mse"
    data = np.loadtxt(body[1:], delimiter=",", skiprows=1) if False else \
        np.array([[float(v) for v in ln.split(",")] for ln in body[1:]])
    assert data.shape == (40, 3)
    np.testing.assert_array_equal(data[:, 0], np.arange(1, 41))
    np.testing.assert_allclose(data[:, 1], res.mse_curve, rtol=1e-11)
    # values written with 12 significant digits
    sample = body[1].split(",")[1]
    mantissa = sample.replace("-", "").replace(".", "").lstrip("0")
    assert len(mantissa.split("e")[0]) <= 12


def test_csv_identical_across_thread_counts(tmp_path):
    cfg = make_config(replications=600, horizon=60)
    res1 = run_experiment(cfg, threads=1)
    res4 = run_experiment(cfg, threads=4)
    p1, p4 = tmp_path / "t1.csv", tmp_path / "t4.csv"
    write_result_csv(res1, p1)
    write_result_csv(res4, p4)
    assert p1.read_bytes() == p4.read_bytes()


def test_write_summary_mentions_wall_time(tmp_path):
    res = run_experiment(make_config(replications=50, horizon=40))
    out = tmp_path / "summary.txt"
    write_summary(res, out)
    assert "wall" in out.read_text().lower()


def test_all_replications_diverging_raises():
    """A grossly mis-scaled gain drives every replication past the guard."""
    from adaptquant.quantizer import QuantizerDesign, interval_stats
    from adaptquant.simulator import DivergenceError

    m = gg(2.0)
    spec = QuantizerSpec.uniform(2, 1.0)
    probs, drops = interval_stats(m, spec)
    # absurd levels make the fixed-gain recursion blow up
    design = QuantizerDesign(probs, drops, np.array([1e9]),
                             info=4.0 / math.pi, step=1.0)
    sig = SignalModel(SignalKind.WIENER, sigma_w=1.0)
    cfg = make_config(signal=sig, noise=m, quantizer=spec, replications=20,
                      horizon=100, burn_in=10, seed=29)
    with pytest.raises(DivergenceError):
        run_experiment(cfg, design=design)
