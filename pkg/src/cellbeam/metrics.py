"""Performance measures: CCDF coverage, sum-rate capacity, loss convergence.

All functions here are pure; file emitters format floats via repr() so
identical inputs always produce byte-identical output.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation


@dataclass
class SinrSampleSet:
    """Effective SINR samples (dB) tagged with their experiment cell."""

    samples: np.ndarray
    algorithm: str = ""
    m_antennas: int = 1
    seed: int = 0


@dataclass
class RunSummary:
    """Headline numbers of one (algorithm, M, seed) experiment cell."""

    algorithm: str
    m_antennas: int
    seed: int
    avg_sum_rate: float
    avg_effective_sinr_db: float
    avg_normalized_tx_power: float
    abort_rate: float
    loss_series: list = field(default_factory=list)
    convergence_episode: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.avg_normalized_tx_power <= 1.0:
            raise ContractViolation("normalized transmit power must lie in [0, 1]")
        if not 0.0 <= self.abort_rate <= 1.0:
            raise ContractViolation("abort rate must lie in [0, 1]")

    def metric_items(self):
        yield "avg_sum_rate", self.avg_sum_rate
        yield "avg_effective_sinr_db", self.avg_effective_sinr_db
        yield "avg_normalized_tx_power", self.avg_normalized_tx_power
        yield "abort_rate", self.abort_rate
        yield "convergence_episode", (math.nan if self.convergence_episode is None
                                      else float(self.convergence_episode))


def ccdf(samples, threshold_grid) -> list[tuple[float, float]]:
    """Empirical P(sample > x) for each threshold x, with strict comparison."""
    values = np.asarray(getattr(samples, "samples", samples), dtype=float)
    if values.size == 0:
        raise ContractViolation("CCDF needs at least one sample")
    if not np.all(np.isfinite(values)):
        raise ContractViolation("CCDF samples must be finite")
    return [(float(x), float(np.mean(values > x))) for x in np.asarray(threshold_grid)]


def sum_rate(eff_sinr_linear, horizon: int | None = None) -> float:
    """Time-averaged sum of log2(1 + gamma) across base stations.

    `eff_sinr_linear` is (T, n_bs) of linear effective SINRs, already
    capped.  `horizon` defaults to T; passing a larger horizon treats the
    missing frames as delivering zero rate (a link that died early).
    """
    gammas = np.atleast_2d(np.asarray(eff_sinr_linear, dtype=float))
    if gammas.size and not np.all(np.isfinite(gammas)):
        raise ContractViolation("effective SINR values must be finite")
    if np.any(gammas < 0.0):
        raise ContractViolation("effective SINR values must be non-negative")
    horizon = horizon if horizon is not None else gammas.shape[0]
    if horizon < gammas.shape[0] or horizon < 1:
        raise ContractViolation("horizon must cover all provided steps")
    return float(np.log2(1.0 + gammas).sum() / horizon)


def convergence_point(loss_series, window: int = 20, rel_tol: float = 0.05) -> int | None:
    """First episode whose trailing moving average holds within tolerance.

    The moving average uses expanding windows at the start, then a fixed
    trailing window.  The returned index is the first e such that every
    later average stays within rel_tol (relative) of the average at e;
    None when the series never settles.  A candidate needs at least one
    full window of later episodes as evidence, so the trivially-stable
    tail does not count.  NaN entries (episodes without a training step)
    are forward filled; an all-NaN series returns None.
    """
    series = np.asarray(loss_series, dtype=float)
    if series.size < window:
        raise ContractViolation(f"series length must be >= window ({window})")
    finite = np.isfinite(series)
    if not finite.any():
        return None
    first = int(np.argmax(finite))
    filled = series.copy()
    for i in range(first + 1, len(filled)):
        if not np.isfinite(filled[i]):
            filled[i] = filled[i - 1]
    filled = filled[first:]

    n = len(filled)
    averages = np.empty(n)
    csum = np.concatenate([[0.0], np.cumsum(filled)])
    for e in range(n):
        lo = max(0, e - window + 1)
        averages[e] = (csum[e + 1] - csum[lo]) / (e + 1 - lo)

    # deviation of all later averages from the candidate's value
    for e in range(n - window + 1):
        ref = averages[e]
        tol = rel_tol * max(abs(ref), 1e-12)
        if np.all(np.abs(averages[e:] - ref) < tol):
            return first + e
    return None


# -- file emitters ----------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_episode_csv(path, logs) -> None:
    """One row per training episode with its headline quantities."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["episode", "steps", "episode_return", "mean_loss", "aborted",
                         "avg_power_dbm", "avg_norm_power", "mean_eff_sinr_db"])
        for i, log in enumerate(logs):
            writer.writerow([i, log.steps, _fmt(log.episode_return), _fmt(log.mean_loss),
                             _fmt(log.aborted), _fmt(log.powers_dbm.mean()),
                             _fmt(log.norm_power.mean()), _fmt(log.eff_sinr_db.mean())])


def write_summary_csv(path, summaries) -> None:
    """Long-format rows: one per (algorithm, M, seed, metric)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "m_antennas", "seed", "metric", "value"])
        for s in summaries:
            for metric, value in s.metric_items():
                writer.writerow([s.algorithm, s.m_antennas, s.seed, metric, _fmt(value)])


def write_ccdf_csv(path, sample_sets, threshold_grid) -> None:
    """Long-format CCDF rows for every sample set over one threshold grid."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "m_antennas", "seed", "threshold_db", "probability"])
        for sset in sample_sets:
            for threshold, prob in ccdf(sset, threshold_grid):
                writer.writerow([sset.algorithm, sset.m_antennas, sset.seed,
                                 _fmt(threshold), _fmt(prob)])


def write_json_summary(path, summary: RunSummary) -> None:
    payload = {
        "algorithm": summary.algorithm,
        "m_antennas": summary.m_antennas,
        "seed": summary.seed,
        "avg_sum_rate": summary.avg_sum_rate,
        "avg_effective_sinr_db": summary.avg_effective_sinr_db,
        "avg_normalized_tx_power": summary.avg_normalized_tx_power,
        "abort_rate": summary.abort_rate,
        "convergence_episode": summary.convergence_episode,
        "loss_series": [None if not math.isfinite(x) else x for x in summary.loss_series],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
