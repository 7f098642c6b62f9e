"""Monte Carlo engine: replicated estimator runs, MSE curves, simulated losses.

Replications are vectorized in fixed-size chunks; each replication owns an
RNG stream derived from (seed, replication index), so results are
bit-identical for a given seed regardless of chunking or thread count.
Aggregation sums chunk results in chunk order.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import analysis
from .estimator import ScheduleKind
from .noise import NoiseModel
from .quantizer import QuantizerDesign, QuantizerSpec, build_design

#: replications per vectorized chunk; fixed so chunking never depends on
#: the thread count (determinism of the aggregate)
CHUNK_SIZE = 512

#: a replication whose estimate exceeds this many noise scales is aborted
DIVERGENCE_FACTOR = 1e6


class SignalKind(str, Enum):
    CONSTANT = "constant"
    WIENER = "wiener"
    WIENER_DRIFT = "wiener_drift"


@dataclass(frozen=True)
class SignalModel:
    """Parameter evolution: constant, random walk, or random walk with drift."""

    kind: SignalKind
    x0: float = 0.0
    sigma_w: float = 0.0
    u: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", SignalKind(self.kind))
        if self.kind is SignalKind.CONSTANT and (self.sigma_w != 0.0 or self.u != 0.0):
            raise ValueError("constant signal requires sigma_w = 0 and u = 0")
        if self.kind is SignalKind.WIENER and (self.sigma_w <= 0.0 or self.u != 0.0):
            raise ValueError("wiener signal requires sigma_w > 0 and u = 0")
        if self.kind is SignalKind.WIENER_DRIFT and (self.sigma_w <= 0.0 or self.u == 0.0):
            raise ValueError("wiener_drift signal requires sigma_w > 0 and u != 0")


def generate_path(signal: SignalModel, horizon: int,
                  rng: np.random.Generator) -> np.ndarray:
    """Sample X_1..X_horizon of the parameter process."""
    if signal.kind is SignalKind.CONSTANT:
        return np.full(horizon, signal.x0)
    incr = signal.u + signal.sigma_w * rng.standard_normal(horizon)
    return signal.x0 + np.cumsum(incr)


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo experiment.

    ``quantizer`` None selects the continuous-measurement reference
    algorithm.  ``drift_initial`` None initializes the drift estimate at
    the true drift (oracle warm start); the default is 0.
    """

    signal: SignalModel
    noise: NoiseModel
    quantizer: QuantizerSpec | None
    replications: int = 10_000
    horizon: int = 2000
    burn_in: int = 0
    seed: int = 0
    initial_offset: float = 0.0
    drift_gain: float = 1e-5
    drift_initial: float | None = 0.0
    u_floor: float = 1e-8

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")
        if not (self.horizon > self.burn_in >= 0):
            raise ValueError(
                f"need horizon > burn_in >= 0, got {self.horizon}, {self.burn_in}"
            )


@dataclass
class ExperimentResult:
    mse_curve: np.ndarray
    theory_mse_curve: np.ndarray
    asymptotic_mse: float
    simulated_loss_db: float
    theory_loss_db: float
    diverged: int
    metadata: dict = field(default_factory=dict)
    wall_time_s: float = 0.0

    def loss_curve_db(self) -> np.ndarray:
        """Per-step simulated loss relative to the continuous-case reference."""
        ic = self.metadata["ic"]
        kind = SignalKind(self.metadata["signal_kind"])
        k = np.arange(1, len(self.mse_curve) + 1)
        if kind is SignalKind.CONSTANT:
            baseline = 1.0 / (k * ic)
        elif kind is SignalKind.WIENER:
            baseline = analysis.bcrb_asymptotic_approx(ic, self.metadata["sigma_w"])
        else:
            baseline = 3.0 * (abs(self.metadata["u"]) / (4.0 * ic)) ** (2.0 / 3.0)
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.mse_curve / baseline)


class DivergenceError(RuntimeError):
    """Raised when every replication diverged."""


# ---- core chunked simulation ------------------------------------------


def _noise_matrix(model: NoiseModel, rngs, horizon):
    rows = [model.sample(rng, horizon) for rng in rngs]
    return np.vstack(rows)


def _chunk_errors(config: ExperimentConfig, design, rep_lo, rep_hi):
    """Squared-error matrix for replications [rep_lo, rep_hi) plus divergers."""
    signal, noise = config.signal, config.noise
    horizon = config.horizon
    rngs = [np.random.default_rng([config.seed, rep]) for rep in range(rep_lo, rep_hi)]
    paths = np.vstack([generate_path(signal, horizon, rng) for rng in rngs])
    noises = _noise_matrix(noise, rngs, horizon)
    n_rep = rep_hi - rep_lo

    quantized = design is not None
    if quantized:
        info = design.info
        thr = np.asarray(config.quantizer.tau[:-1]) * design.step
        levels = design.levels
    else:
        info = noise.fisher_continuous()

    kind = ScheduleKind(signal.kind.value)
    if kind is ScheduleKind.WIENER:
        g_const = signal.sigma_w / math.sqrt(info)
    u_hat = np.full(n_rep, signal.u if config.drift_initial is None
                    else config.drift_initial)

    x_hat = np.full(n_rep, signal.x0 + config.initial_offset)
    limit = DIVERGENCE_FACTOR * noise.delta
    dead = np.zeros(n_rep, dtype=bool)
    err2 = np.empty((n_rep, horizon))

    for k in range(1, horizon + 1):
        y = paths[:, k - 1] + noises[:, k - 1]
        diff = y - x_hat
        if kind is ScheduleKind.CONSTANT:
            g = 1.0 / (k * info)
        elif kind is ScheduleKind.WIENER:
            g = g_const
        else:
            u_eff = np.maximum(np.abs(u_hat), config.u_floor)
            g = (4.0 * u_eff**2 / info**2) ** (1.0 / 3.0)
        if quantized:
            idx = np.searchsorted(thr, np.abs(diff), side="right")
            upd = g * np.where(diff >= 0.0, 1.0, -1.0) * levels[idx]
        else:
            upd = -g * noise.score(diff)
        x_hat = x_hat + upd
        if kind is ScheduleKind.WIENER_DRIFT:
            u_hat = u_hat + config.drift_gain * (upd - u_hat)
        newly_dead = (~dead) & (np.abs(x_hat) > limit)
        if newly_dead.any():
            dead |= newly_dead
            x_hat = np.where(dead, paths[:, k - 1], x_hat)
        e = x_hat - paths[:, k - 1]
        err2[:, k - 1] = e * e

    diverged = [rep_lo + i for i in np.nonzero(dead)[0]]
    sumsq = err2[~dead].sum(axis=0)
    return sumsq, int(n_rep - dead.sum()), diverged


def _aggregate(config: ExperimentConfig, design, threads: int):
    chunks = [(lo, min(lo + CHUNK_SIZE, config.replications))
              for lo in range(0, config.replications, CHUNK_SIZE)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                lambda c: _chunk_errors(config, design, *c), chunks))
    else:
        results = [_chunk_errors(config, design, *c) for c in chunks]
    total = np.zeros(config.horizon)
    alive = 0
    diverged = []
    for sumsq, n_alive, div in results:
        total += sumsq
        alive += n_alive
        diverged.extend(div)
    if alive == 0:
        raise DivergenceError(
            f"all {config.replications} replications diverged: {diverged[:10]}..."
        )
    return total / alive, diverged


# ---- experiment drivers -----------------------------------------------


def _continuous_info(noise: NoiseModel):
    try:
        return noise.fisher_continuous()
    except ValueError:
        return math.nan


def _finalize(config: ExperimentConfig, info: float, mse, diverged,
              quantized: bool, t0: float) -> ExperimentResult:
    kind = config.signal.kind
    k = np.arange(1, config.horizon + 1)
    ic = _continuous_info(config.noise)
    if kind is SignalKind.CONSTANT:
        theory = 1.0 / (k * info)
        asym = config.horizon * mse[-1]
        sim_loss = 10.0 * math.log10(asym * ic) if ic == ic else math.nan
    elif kind is SignalKind.WIENER:
        theory = np.full(config.horizon, config.signal.sigma_w / math.sqrt(info))
        asym = float(np.mean(mse[config.burn_in:]))
        base = analysis.bcrb_asymptotic_approx(ic, config.signal.sigma_w)
        sim_loss = 10.0 * math.log10(asym / base) if ic == ic else math.nan
    else:
        theory = np.full(
            config.horizon, 3.0 * (abs(config.signal.u) / (4.0 * info)) ** (2.0 / 3.0)
        )
        asym = float(np.mean(mse[config.burn_in:]))
        base = 3.0 * (abs(config.signal.u) / (4.0 * ic)) ** (2.0 / 3.0)
        sim_loss = 10.0 * math.log10(asym / base) if ic == ic else math.nan

    if not quantized or ic != ic:
        theory_loss = 0.0 if not quantized else math.nan
    elif kind is SignalKind.CONSTANT:
        theory_loss = analysis.loss_constant_db(info, ic)
    elif kind is SignalKind.WIENER:
        theory_loss = analysis.loss_wiener_db(info, ic)
    else:
        theory_loss = analysis.loss_drift_db(info, ic)

    meta = {
        "mode": "quantized" if quantized else "continuous",
        "signal_kind": kind.value,
        "x0": config.signal.x0,
        "sigma_w": config.signal.sigma_w,
        "u": config.signal.u,
        "family": config.noise.family.value,
        "beta": config.noise.beta,
        "delta": config.noise.delta,
        "replications": config.replications,
        "horizon": config.horizon,
        "burn_in": config.burn_in,
        "seed": config.seed,
        "initial_offset": config.initial_offset,
        "drift_gain": config.drift_gain,
        "drift_initial": ("true" if config.drift_initial is None
                          else config.drift_initial),
        "info": info,
        "ic": ic,
    }
    if quantized:
        meta["nbits"] = config.quantizer.nbits
        meta["c_delta"] = config.quantizer.c_delta
    return ExperimentResult(
        mse_curve=mse,
        theory_mse_curve=theory,
        asymptotic_mse=asym,
        simulated_loss_db=sim_loss,
        theory_loss_db=theory_loss,
        diverged=len(diverged),
        metadata=meta,
        wall_time_s=time.perf_counter() - t0,
    )


def run_experiment(config: ExperimentConfig, threads: int = 1,
                   design: QuantizerDesign | None = None) -> ExperimentResult:
    """Run the quantized-observation experiment described by ``config``.

    ``design`` may be passed to reuse a precomputed design table; otherwise
    it is built from the config's quantizer spec.
    """
    if config.quantizer is None:
        raise ValueError("config has no quantizer spec; use run_continuous_reference")
    t0 = time.perf_counter()
    if design is None:
        design = build_design(config.noise, config.quantizer)
    mse, diverged = _aggregate(config, design, threads)
    return _finalize(config, design.info, mse, diverged, True, t0)


def run_continuous_reference(config: ExperimentConfig,
                             threads: int = 1) -> ExperimentResult:
    """Run the continuous-measurement reference algorithm."""
    t0 = time.perf_counter()
    info = config.noise.fisher_continuous()
    if config.noise.family.value == "gg" and config.noise.beta <= 1.0:
        raise ValueError("continuous reference requires a differentiable density")
    mse, diverged = _aggregate(config, None, threads)
    return _finalize(config, info, mse, diverged, False, t0)


# ---- persistence -------------------------------------------------------


def write_result_csv(result: ExperimentResult, path) -> None:
    """CSV with '#'-prefixed metadata lines and columns k, mse, theory_mse.

    Numeric cells carry 12 significant digits.  Wall time is deliberately
    excluded so identical (config, seed) runs produce byte-identical files.
    """
    lines = ["# adaptquant experiment result"]
    for key in sorted(result.metadata):
        lines.append(f"# {key} = {result.metadata[key]}")
    lines.append("k,mse,theory_mse")
    for i, (m, t) in enumerate(zip(result.mse_curve, result.theory_mse_curve), 1):
        lines.append(f"{i},{m:.12g},{t:.12g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_summary(result: ExperimentResult, path) -> None:
    """Plain-text summary: losses, information values and run metadata."""
    lines = []
    for key in sorted(result.metadata):
        lines.append(f"{key} = {result.metadata[key]}")
    lines.append(f"asymptotic_mse = {result.asymptotic_mse:.12g}")
    lines.append(f"simulated_loss_db = {result.simulated_loss_db:.12g}")
    lines.append(f"theory_loss_db = {result.theory_loss_db:.12g}")
    lines.append(f"diverged = {result.diverged}")
    lines.append(f"wall_time_s = {result.wall_time_s:.3f}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
