#!/usr/bin/env python3
"""Train the static baseline and the deterministic-policy agent, then compare
them on shared evaluation geometry.  One seed of the benchmark recipe; the
harness runs the full grid over many seeds.

Run:  python3 demos/04_train_and_compare.py
"""

import time
from dataclasses import replace

import numpy as np

from cellbeam import harness, metrics
from cellbeam.agents import make_agent

EPISODES = 300
EVAL_EPISODES = 30

base = harness.parse_config(None)
cfg = replace(base,
              env=replace(base.env, horizon=20),
              hyper=replace(base.hyper, lr=1e-3, noise_scale=0.15, noise_end_frac=1.0,
                            eps_decay_frac=0.4, actor_weight_decay=1.0,
                            critic_weight_decay=1e-2, train_geometry_cycle=60,
                            total_episodes=EPISODES))

for algo in ("fpa", "ddpg"):
    env = harness.build_env(cfg, m_antennas=1)
    agent = make_agent(algo, env, cfg.hyper, seed=7)
    t0 = time.time()
    returns = []
    for e in range(EPISODES):
        log = agent.run_episode(env, harness.train_env_seed(algo, 1, 7, e % 60),
                                train=True)
        returns.append(log.episode_return)
    rates, aborts = [], []
    for e in range(EVAL_EPISODES):
        log = agent.run_episode(env, harness.eval_env_seed(1, 7, e), train=False)
        rates.append(metrics.sum_rate(10 ** (log.eff_sinr_db / 10), horizon=env.horizon))
        aborts.append(log.aborted)
    print(f"{algo:5s} trained {EPISODES} episodes in {time.time()-t0:4.1f}s | "
          f"first/last-20 mean return {np.mean(returns[:20]):6.1f} -> "
          f"{np.mean(returns[-20:]):6.1f} | eval sum-rate {np.mean(rates):.3f} "
          f"bits/s/Hz, abort rate {np.mean(aborts):.2f}")

print("\nEvaluation episodes share geometry seeds, so the comparison is paired;")
print("the full acceptance experiment runs 300 episodes over 8 seeds per agent.")
