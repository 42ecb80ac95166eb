"""Experiment harness: config files, seeded sweeps, metrics files, CLI.

A plan is the cross product (algorithm x antenna count x seed).  Every
cell derives its own random streams from a stable hash of its identity,
trains a fresh agent on a fresh environment, then runs greedy evaluation
episodes.  Evaluation geometry seeds are shared across algorithms (same
M and base seed) so algorithm comparisons are paired.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from . import metrics
from .agents import ALGORITHMS, AgentHyperparams, make_agent
from .channel import SCENARIO_PRESETS, Scenario, preset
from .environment import DownlinkEnv, SinrPolicy
from .errors import CellbeamError, ConfigurationError

ENV_VAR_PREFIX = "CELLBEAM_"
VALID_ANTENNA_COUNTS = (1, 4, 8, 16, 32, 64)
_ALGO_IDS = {name: i for i, name in enumerate(ALGORITHMS)}


@dataclass
class EnvSettings:
    """Episode-level environment knobs."""

    horizon: int = 50
    gamma_cutoff_db: float = 4.0
    gamma0_db: float = 5.0
    power_floor_dbm: float = 0.0


@dataclass
class ExperimentPlan:
    """What to sweep and where to put the results."""

    algorithms: tuple = ("fpa", "qlearning", "dqn", "ddpg", "hddpg")
    antenna_counts: tuple = (1, 4, 8)
    seeds: tuple = (0, 1, 2)
    episodes: int = 300
    eval_episodes: int = 50
    scenario: str = "sub6"
    output_dir: str = "out"
    out_format: str = "csv"

    def validate(self) -> None:
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ConfigurationError(
                    f"unknown algorithm {algo!r}; choose from {ALGORITHMS}")
        for m in self.antenna_counts:
            if m not in VALID_ANTENNA_COUNTS:
                raise ConfigurationError(
                    f"antenna count {m} not in the supported set {VALID_ANTENNA_COUNTS}")
        if not self.seeds:
            raise ConfigurationError("at least one seed is required")
        if self.episodes < 1:
            raise ConfigurationError("episodes must be >= 1")
        if self.eval_episodes < 1:
            raise ConfigurationError("eval_episodes must be >= 1")
        if self.scenario not in SCENARIO_PRESETS:
            raise ConfigurationError(
                f"unknown scenario preset {self.scenario!r}")
        if self.out_format not in ("csv", "json"):
            raise ConfigurationError("format must be 'csv' or 'json'")


@dataclass
class RunConfig:
    plan: ExperimentPlan = field(default_factory=ExperimentPlan)
    scenario: Scenario = field(default_factory=lambda: preset("sub6"))
    hyper: AgentHyperparams = field(default_factory=AgentHyperparams)
    env: EnvSettings = field(default_factory=EnvSettings)


# -- config file handling ----------------------------------------------------

def _parse_list(cast):
    def parse(text):
        return tuple(cast(part.strip()) for part in str(text).split(",") if part.strip())
    return parse


def _parse_bool(text):
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (section, field name, parser)
CONFIG_SCHEMA = {
    "algo": ("plan", "algorithms", _parse_list(str)),
    "antennas": ("plan", "antenna_counts", _parse_list(int)),
    "seeds": ("plan", "seeds", _parse_list(int)),
    "episodes": ("plan", "episodes", int),
    "eval_episodes": ("plan", "eval_episodes", int),
    "scenario": ("plan", "scenario", str),
    "out": ("plan", "output_dir", str),
    "format": ("plan", "out_format", str),
    "carrier_freq_hz": ("scenario", "carrier_freq_hz", float),
    "cell_radius_m": ("scenario", "cell_radius_m", float),
    "inter_site_distance_m": ("scenario", "inter_site_distance_m", float),
    "n_paths": ("scenario", "n_paths", int),
    "p_los": ("scenario", "p_los", float),
    "ue_speed_kmh": ("scenario", "ue_speed_kmh", float),
    "frame_duration_s": ("scenario", "frame_duration_s", float),
    "noise_power_dbm": ("scenario", "noise_power_dbm", float),
    "tx_antenna_gain_dbi": ("scenario", "tx_antenna_gain_dbi", float),
    "max_bs_power_w": ("scenario", "max_bs_power_w", float),
    "horizon": ("env", "horizon", int),
    "gamma_cutoff_db": ("env", "gamma_cutoff_db", float),
    "gamma0_db": ("env", "gamma0_db", float),
    "power_floor_dbm": ("env", "power_floor_dbm", float),
    "discount": ("hyper", "discount", float),
    "tau": ("hyper", "tau", float),
    "lr": ("hyper", "lr", float),
    "actor_lr": ("hyper", "actor_lr", float),
    "width": ("hyper", "width", int),
    "depth": ("hyper", "depth", int),
    "batch_size": ("hyper", "batch_size", int),
    "meta_batch_size": ("hyper", "meta_batch_size", int),
    "controller_batch_size": ("hyper", "controller_batch_size", int),
    "meta_period": ("hyper", "meta_period", int),
    "noise_scale": ("hyper", "noise_scale", float),
    "noise_end_frac": ("hyper", "noise_end_frac", float),
    "use_ou_noise": ("hyper", "use_ou_noise", _parse_bool),
    "eps_start": ("hyper", "eps_start", float),
    "eps_end": ("hyper", "eps_end", float),
    "eps_decay_frac": ("hyper", "eps_decay_frac", float),
    "replay_capacity": ("hyper", "replay_capacity", int),
    "dqn_updates_per_step": ("hyper", "dqn_updates_per_step", int),
    "dqn_greedy_margin": ("hyper", "dqn_greedy_margin", float),
    "reward_scale": ("hyper", "reward_scale", float),
    "final_layer_scale": ("hyper", "final_layer_scale", float),
    "actor_weight_decay": ("hyper", "actor_weight_decay", float),
    "critic_weight_decay": ("hyper", "critic_weight_decay", float),
    "goal_penalty_weight": ("hyper", "goal_penalty_weight", float),
    "power_step_db": ("hyper", "power_step_db", _parse_list(float)),
    "pc_limit_db": ("hyper", "pc_limit_db", float),
    "ic_limit_db": ("hyper", "ic_limit_db", float),
    "bf_limit_multiplier": ("hyper", "bf_limit_multiplier", float),
    "optimizer": ("hyper", "optimizer", str),
    "train_geometry_cycle": ("hyper", "train_geometry_cycle", int),
    "position_bins": ("hyper", "position_bins", int),
    "power_levels": ("hyper", "power_levels", int),
    "q_lr": ("hyper", "q_lr", float),
    "q_power_step_db": ("hyper", "q_power_step_db", _parse_list(float)),
}


def _read_config_lines(path) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}: line {lineno}: expected key=value")
            key, _, text = line.partition("=")
            key = key.strip()
            if key not in CONFIG_SCHEMA:
                raise ConfigurationError(f"{path}: line {lineno}: unknown key {key!r}")
            values[key] = (text.strip(), f"line {lineno}")
    return values


def parse_config(path=None) -> RunConfig:
    """Load a key=value config file into a full RunConfig.

    Absent keys keep their defaults.  Environment variables named
    CELLBEAM_<KEY> override file values.  Scenario keys override the
    chosen preset field by field.
    """
    values = _read_config_lines(path) if path is not None else {}
    for key in CONFIG_SCHEMA:
        env_name = ENV_VAR_PREFIX + key.upper()
        if env_name in os.environ:
            values[key] = (os.environ[env_name], f"environment variable {env_name}")

    sections = {"plan": {}, "scenario": {}, "hyper": {}, "env": {}}
    for key, (text, where) in values.items():
        section, attr, parser = CONFIG_SCHEMA[key]
        try:
            sections[section][attr] = parser(text)
        except (ValueError, TypeError) as exc:
            raise ConfigurationError(f"{where}: cannot parse {key}={text!r}: {exc}") from exc

    plan = ExperimentPlan(**sections["plan"])
    plan.validate()
    scenario_params = dict(SCENARIO_PRESETS[plan.scenario])
    scenario_params.update(sections["scenario"])
    scenario = Scenario(**scenario_params)
    hyper = AgentHyperparams(**sections["hyper"])
    env = EnvSettings(**sections["env"])
    if env.horizon < 1:
        raise ConfigurationError("horizon must be >= 1")
    return RunConfig(plan=plan, scenario=scenario, hyper=hyper, env=env)


def serialize_config(cfg: RunConfig) -> str:
    """Emit a config file that parses back to the same RunConfig."""
    lines = []
    holders = {"plan": cfg.plan, "scenario": cfg.scenario, "hyper": cfg.hyper,
               "env": cfg.env}
    for key, (section, attr, _) in CONFIG_SCHEMA.items():
        value = getattr(holders[section], attr)
        if value is None:
            continue
        if isinstance(value, tuple):
            text = ",".join(str(v) for v in value)
        elif isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{key}={text}")
    return "\n".join(lines) + "\n"


# -- seeded sweep ------------------------------------------------------------

def _cell_entropy(algo: str, m: int, seed: int) -> list[int]:
    return [int(seed), _ALGO_IDS[algo], int(m)]


def _derive_seed(entropy, spawn_key) -> int:
    ss = np.random.SeedSequence(entropy, spawn_key=tuple(spawn_key))
    return int(ss.generate_state(1, np.uint64)[0])


def train_env_seed(algo: str, m: int, seed: int, episode: int) -> int:
    return _derive_seed(_cell_entropy(algo, m, seed), (1, episode))


def eval_env_seed(m: int, seed: int, episode: int) -> int:
    # no algorithm in the entropy: evaluation geometry is paired across algos
    return _derive_seed([int(seed), int(m)], (2, episode))


def build_env(cfg: RunConfig, m_antennas: int) -> DownlinkEnv:
    policy = SinrPolicy(gamma_cutoff_db=cfg.env.gamma_cutoff_db,
                        gamma0_db=cfg.env.gamma0_db, m_antennas=m_antennas)
    return DownlinkEnv(cfg.scenario, m_antennas=m_antennas, horizon=cfg.env.horizon,
                       policy=policy, power_floor_dbm=cfg.env.power_floor_dbm,
                       power_span_db=(cfg.hyper.pc_limit_db, cfg.hyper.ic_limit_db),
                       bf_limit_multiplier=cfg.hyper.bf_limit_multiplier)


def run_cell(cfg: RunConfig, algo: str, m_antennas: int, seed: int):
    """Train and evaluate one plan cell; fully deterministic given its seed."""
    env = build_env(cfg, m_antennas)
    hyper = replace(cfg.hyper, total_episodes=cfg.plan.episodes)
    agent_seed = _derive_seed(_cell_entropy(algo, m_antennas, seed), (0,))
    agent = make_agent(algo, env, hyper, agent_seed)

    cycle = cfg.hyper.train_geometry_cycle
    train_logs = [agent.run_episode(
        env, train_env_seed(algo, m_antennas, seed, e % cycle if cycle else e),
        train=True) for e in range(cfg.plan.episodes)]
    eval_logs = [agent.run_episode(env, eval_env_seed(m_antennas, seed, e), train=False)
                 for e in range(cfg.plan.eval_episodes)]

    loss_series = [log.mean_loss for log in train_logs]
    convergence = None
    if len(loss_series) >= 20:
        convergence = metrics.convergence_point(loss_series)

    sum_rates = [metrics.sum_rate(10.0 ** (log.eff_sinr_db / 10.0), horizon=env.horizon)
                 for log in eval_logs]
    eff_all = np.concatenate([log.eff_sinr_db.ravel() for log in eval_logs])
    norm_all = np.concatenate([log.norm_power for log in eval_logs])
    summary = metrics.RunSummary(
        algorithm=algo, m_antennas=m_antennas, seed=seed,
        avg_sum_rate=float(np.mean(sum_rates)),
        avg_effective_sinr_db=float(eff_all.mean()),
        avg_normalized_tx_power=float(norm_all.mean()),
        abort_rate=float(np.mean([log.aborted for log in eval_logs])),
        loss_series=loss_series,
        convergence_episode=convergence,
    )
    samples = metrics.SinrSampleSet(samples=eff_all, algorithm=algo,
                                    m_antennas=m_antennas, seed=seed)
    return agent, train_logs, eval_logs, summary, samples


def run_plan(cfg: RunConfig):
    """Execute every plan cell and write logs, metrics and checkpoints."""
    cfg.plan.validate()
    out_dir = cfg.plan.output_dir
    os.makedirs(out_dir, exist_ok=True)

    summaries = []
    sample_sets = []
    max_cap = max(cfg.env.gamma0_db + 10.0 * math.log2(m) for m in cfg.plan.antenna_counts)
    grid = np.arange(-1.0, math.ceil(max_cap) + 1.5, 0.5)

    for algo in cfg.plan.algorithms:
        for m in cfg.plan.antenna_counts:
            for seed in cfg.plan.seeds:
                agent, train_logs, eval_logs, summary, samples = run_cell(cfg, algo, m, seed)
                tag = f"{algo}_m{m}_seed{seed}"
                metrics.write_episode_csv(os.path.join(out_dir, f"{tag}_train.csv"),
                                          train_logs)
                metrics.write_episode_csv(os.path.join(out_dir, f"{tag}_eval.csv"),
                                          eval_logs)
                metrics.write_json_summary(os.path.join(out_dir, f"{tag}_summary.json"),
                                           summary)
                ckpt_dir = os.path.join(out_dir, "checkpoints", tag)
                os.makedirs(ckpt_dir, exist_ok=True)
                agent.save(ckpt_dir)
                summaries.append(summary)
                sample_sets.append(samples)

    pooled = _pool_sample_sets(sample_sets)
    if cfg.plan.out_format == "csv":
        metrics.write_summary_csv(os.path.join(out_dir, "summary.csv"), summaries)
        metrics.write_ccdf_csv(os.path.join(out_dir, "ccdf.csv"), sample_sets, grid)
        metrics.write_ccdf_csv(os.path.join(out_dir, "ccdf_pooled.csv"), pooled, grid)
    else:
        import json
        rows = [{"algorithm": s.algorithm, "m_antennas": s.m_antennas, "seed": s.seed,
                 "metric": name, "value": None if not math.isfinite(value) else value}
                for s in summaries for name, value in s.metric_items()]
        with open(os.path.join(out_dir, "summary.json"), "w") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)
            fh.write("\n")
        ccdf_rows = [{"algorithm": s.algorithm, "m_antennas": s.m_antennas,
                      "seed": s.seed, "threshold_db": t, "probability": p}
                     for s in sample_sets + pooled for t, p in metrics.ccdf(s, grid)]
        with open(os.path.join(out_dir, "ccdf.json"), "w") as fh:
            json.dump(ccdf_rows, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return summaries


def _pool_sample_sets(sample_sets):
    """Merge per-seed SINR samples into one set per (algorithm, M)."""
    pooled = {}
    for sset in sample_sets:
        key = (sset.algorithm, sset.m_antennas)
        pooled.setdefault(key, []).append(sset.samples)
    return [metrics.SinrSampleSet(samples=np.concatenate(chunks), algorithm=algo,
                                  m_antennas=m, seed=-1)
            for (algo, m), chunks in pooled.items()]


# -- CLI ----------------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cellbeam",
        description="Run seeded downlink power/beam control experiments.")
    parser.add_argument("--config", metavar="PATH", help="key=value config file")
    parser.add_argument("--algo", help="comma list of algorithms")
    parser.add_argument("--antennas", help="comma list of antenna counts")
    parser.add_argument("--seeds", help="comma list of seeds")
    parser.add_argument("--episodes", type=int, help="training episodes per cell")
    parser.add_argument("--scenario", help="scenario preset name")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), dest="out_format",
                        help="pooled metrics file format")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config)
        plan_updates = {}
        if args.algo:
            plan_updates["algorithms"] = tuple(a.strip() for a in args.algo.split(","))
        if args.antennas:
            plan_updates["antenna_counts"] = tuple(int(m) for m in args.antennas.split(","))
        if args.seeds:
            plan_updates["seeds"] = tuple(int(s) for s in args.seeds.split(","))
        if args.episodes is not None:
            plan_updates["episodes"] = args.episodes
        if args.scenario:
            plan_updates["scenario"] = args.scenario
            cfg = replace(cfg, scenario=preset(args.scenario))
        if args.out:
            plan_updates["output_dir"] = args.out
        if args.out_format:
            plan_updates["out_format"] = args.out_format
        if plan_updates:
            cfg = replace(cfg, plan=replace(cfg.plan, **plan_updates))
        cfg.plan.validate()
        summaries = run_plan(cfg)
    except CellbeamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for s in summaries:
        print(f"{s.algorithm} M={s.m_antennas} seed={s.seed}: "
              f"sum_rate={s.avg_sum_rate:.3f} eff_sinr={s.avg_effective_sinr_db:.2f} dB "
              f"norm_power={s.avg_normalized_tx_power:.3f} abort_rate={s.abort_rate:.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
