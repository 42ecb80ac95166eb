"""Hierarchical DDPG: a meta controller sets goals, a controller chases them.

Both layers are full DDPG systems.  The meta controller emits one
action-shaped goal per window of `meta_period` steps and is trained on
the raw reward summed over the window; the controller acts every step on
the environment reward minus the absolute goal deviation.
"""

from __future__ import annotations

import numpy as np

from ..environment import hierarchical_reward
from .common import AgentHyperparams, BaseAgent, Transition
from .ddpg import DdpgAgent


class HddpgAgent(BaseAgent):
    """Two-timescale agent built from a controller and a meta DDPG."""

    name = "hddpg"

    def __init__(self, env, hyper: AgentHyperparams, seed: int,
                 meta_seed: int | None = None):
        self.hyper = hyper
        # the controller derives its streams exactly like a plain DDPG agent
        # with the same seed, so the two degenerate to each other
        self.controller = DdpgAgent(env, hyper, seed,
                                    batch_size=hyper.controller_batch_size)
        if meta_seed is None:
            meta_seed = int(np.random.SeedSequence(seed, spawn_key=(1000,))
                            .generate_state(1)[0])
        self.meta = DdpgAgent(env, hyper, meta_seed, batch_size=hyper.meta_batch_size)
        self.meta.name = "hddpg_meta"
        self.controller.name = "hddpg_controller"
        self._goal = None
        self._window_start = None
        self._window_rewards: list[float] = []

    def begin_episode(self, state: np.ndarray) -> None:
        self.controller.begin_episode(state)
        self.meta.begin_episode(state)
        self._window_start = np.asarray(state, dtype=float)
        self._window_rewards = []
        self._goal = self.meta.act(state, explore=True)

    def act(self, state: np.ndarray, explore: bool = True) -> np.ndarray:
        return self.controller.act(state, explore=explore)

    def observe(self, state, action, reward, next_state, done):
        shaped = hierarchical_reward(reward, self._goal, action,
                                     self.hyper.goal_penalty_weight)
        self.controller.buffer.push(Transition(np.asarray(state, dtype=float),
                                               np.asarray(action, dtype=float),
                                               float(shaped),
                                               np.asarray(next_state, dtype=float),
                                               bool(done)))
        loss = self.controller.train_step()

        self._window_rewards.append(float(reward))
        if len(self._window_rewards) == self.hyper.meta_period:
            meta_reward = float(np.sum(self._window_rewards))
            self.meta.buffer.push(Transition(self._window_start, self._goal, meta_reward,
                                             np.asarray(next_state, dtype=float),
                                             bool(done)))
            self.meta.train_step()
            if not done:
                self._window_start = np.asarray(next_state, dtype=float)
                self._window_rewards = []
                self._goal = self.meta.act(next_state, explore=True)
        return loss

    def end_episode(self, trained: bool) -> None:
        self.controller.end_episode(trained)
        self.meta.end_episode(trained)

    def save(self, directory) -> None:
        self.controller.save(directory)
        self.meta.save(directory)
