"""Deep Q-network over the joint discrete power-step/beam-step action set.

The value function uses a dueling decomposition Q(s,a) = V(s) + A(s,a) -
mean_a A(s,a) with weight decay on the advantage stream: states without
consistent evidence collapse to A ~ 0, so the greedy argmax falls back to
the first (both-powers-up) action instead of acting on fitting noise.
Targets follow the standard bootstrapped rule against a soft-updated
target network.
"""

from __future__ import annotations

import numpy as np

from ..neuralnet import AdamOptimizer, Mlp, soft_update
from .common import (AgentHyperparams, BaseAgent, ReplayBuffer, StateNormalizer,
                     Transition, agent_stream, discrete_action_table,
                     discrete_to_env_action)


def dqn_target(r: float, next_q_values, discount: float, done: bool) -> float:
    """Target value r + discount * max Q'(s', .), dropping the bootstrap when done."""
    next_q_values = np.asarray(next_q_values, dtype=float)
    if done:
        return float(r)
    return float(r + discount * next_q_values.max())


class DqnAgent(BaseAgent):
    """Epsilon-greedy value learner with replay and a soft-updated target net."""

    name = "dqn"

    def __init__(self, env, hyper: AgentHyperparams, seed: int):
        self.hyper = hyper
        self.actions = discrete_action_table(hyper.power_step_db, env.codebook.size)
        self.codebook_size = env.codebook.size
        self.power_low = env.power_floor_dbm
        self.power_high = env.scenario.max_bs_power_dbm
        self.normalize = StateNormalizer(env.state_low, env.state_high)

        init_rng = agent_stream(seed, 0)
        self._explore_rng = agent_stream(seed, 1)
        buffer_rng = agent_stream(seed, 2)

        hidden = [hyper.width] * hyper.depth
        self.value_net = Mlp([8] + hidden + [1], rng=init_rng,
                             final_layer_scale=hyper.final_layer_scale)
        self.adv_net = Mlp([8] + hidden + [len(self.actions)], rng=init_rng,
                           final_layer_scale=hyper.final_layer_scale)
        self.target_value_net = self.value_net.copy()
        self.target_adv_net = self.adv_net.copy()
        self.value_opt = AdamOptimizer(self.value_net, lr=hyper.lr)
        self.adv_opt = AdamOptimizer(self.adv_net, lr=hyper.lr,
                                     weight_decay=hyper.critic_weight_decay)
        self.buffer = ReplayBuffer(hyper.replay_capacity, buffer_rng)
        self._episode = 0

    @property
    def epsilon(self) -> float:
        return self.hyper.epsilon_at(self._episode)

    def _q_from(self, value_net: Mlp, adv_net: Mlp, states: np.ndarray) -> np.ndarray:
        value = value_net.forward(states)
        adv = adv_net.forward(states)
        if adv.ndim == 1:
            return value[0] + adv - adv.mean()
        return value + adv - adv.mean(axis=1, keepdims=True)

    def q_values(self, state: np.ndarray) -> np.ndarray:
        return self._q_from(self.value_net, self.adv_net, self.normalize(state))

    def act(self, state: np.ndarray, explore: bool = True) -> np.ndarray:
        if explore and self._explore_rng.random() < self.epsilon:
            joint = int(self._explore_rng.integers(len(self.actions)))
        else:
            # argmax over Q equals argmax over the advantages alone; a value
            # lead below dqn_greedy_margin falls back to the neutral action,
            # mirroring the tabular agent's untrained-row default
            adv = self.adv_net.forward(self.normalize(state))
            joint = int(np.argmax(adv))
            if adv[joint] - adv[0] <= self.hyper.dqn_greedy_margin:
                joint = 0
        self._last_joint = joint
        return discrete_to_env_action(state, self.actions[joint], self.codebook_size,
                                      self.power_low, self.power_high)

    def observe(self, state, action, reward, next_state, done):
        self.buffer.push(Transition(np.asarray(state, dtype=float), self._last_joint,
                                    float(reward), np.asarray(next_state, dtype=float),
                                    bool(done)))
        loss = None
        for _ in range(max(1, self.hyper.dqn_updates_per_step)):
            step_loss = self.train_step()
            loss = step_loss if step_loss is not None else loss
        return loss

    def train_step(self):
        hyper = self.hyper
        if len(self.buffer) < hyper.batch_size:
            return None
        batch = self.buffer.sample(hyper.batch_size)
        states = self.normalize(np.stack([t.state for t in batch]))
        next_states = self.normalize(np.stack([t.next_state for t in batch]))
        action_ids = np.array([t.action for t in batch], dtype=int)
        rewards = np.array([t.reward for t in batch]) * hyper.reward_scale
        dones = np.array([t.done for t in batch], dtype=float)

        next_q = self._q_from(self.target_value_net, self.target_adv_net, next_states)
        targets = rewards + hyper.discount * (1.0 - dones) * next_q.max(axis=1)

        q_all = self._q_from(self.value_net, self.adv_net, states)
        rows = np.arange(len(batch))
        error = q_all[rows, action_ids] - targets
        loss = float(np.mean(error ** 2))

        scaled = 2.0 * error / len(batch)
        n_actions = len(self.actions)
        # dQ/dV = 1; dQ/dA_j = 1[j = a] - 1/|A|
        upstream_adv = np.full((len(batch), n_actions), -1.0 / n_actions)
        upstream_adv[rows, action_ids] += 1.0
        upstream_adv *= scaled[:, None]
        self.value_net.forward(states)
        self.value_opt.step(self.value_net.backward(scaled[:, None]))
        self.adv_net.forward(states)
        self.adv_opt.step(self.adv_net.backward(upstream_adv))
        soft_update(self.target_value_net, self.value_net, hyper.tau)
        soft_update(self.target_adv_net, self.adv_net, hyper.tau)
        return loss

    def end_episode(self, trained: bool) -> None:
        if trained:
            self._episode += 1

    def save(self, directory) -> None:
        self.value_net.save(f"{directory}/dqn_value_net.npz")
        self.adv_net.save(f"{directory}/dqn_adv_net.npz")
