"""Deep deterministic policy gradient with replay and Polyak target nets.

The actor maps the normalized state to a [-1, 1] action per dimension;
the critic scores (normalized state, normalized action) pairs.  Env-unit
actions only exist at the environment boundary.
"""

from __future__ import annotations

import numpy as np

from ..neuralnet import AdamOptimizer, GradientSet, Mlp, soft_update
from .common import (ActionScaler, AgentHyperparams, BaseAgent, OrnsteinUhlenbeckNoise,
                     ReplayBuffer, StateNormalizer, Transition, agent_stream)


def ddpg_act(actor: Mlp, state_norm: np.ndarray, sigma_env: np.ndarray,
             rng: np.random.Generator, scaler: ActionScaler) -> np.ndarray:
    """Deterministic policy output plus Gaussian exploration, clamped to bounds."""
    action = scaler.to_env(actor.forward(state_norm))
    if np.any(sigma_env > 0.0):
        action = action + rng.normal(0.0, 1.0, action.shape) * sigma_env
    return np.clip(action, scaler.low, scaler.high)


def actor_policy_gradient(critic: Mlp, actor: Mlp, states_norm: np.ndarray) -> GradientSet:
    """Gradient of the batch-mean critic value with respect to actor parameters.

    Implements the sampled deterministic policy gradient: the critic's
    input gradient at (s, mu(s)) is chained through the actor.  Returned
    with a minus sign so a descent-style optimizer ascends Q.
    """
    batch = states_norm.shape[0]
    actions = actor.forward(states_norm)
    critic.forward(np.concatenate([states_norm, actions], axis=1))
    ones = np.ones((batch, 1))
    dq_dinput = critic.backward(ones / batch).wrt_input
    dq_daction = dq_dinput[:, states_norm.shape[1]:]
    return actor.backward(-dq_daction)


def ddpg_train_step(buffer: ReplayBuffer, actor: Mlp, critic: Mlp, target_actor: Mlp,
                    target_critic: Mlp, actor_opt: AdamOptimizer, critic_opt: AdamOptimizer,
                    hyper: AgentHyperparams, normalize, scaler: ActionScaler,
                    batch_size: int | None = None):
    """One minibatch update of critic, actor and both target networks.

    Returns the critic loss, or None (no-op) while the buffer is smaller
    than the batch.  Terminal transitions drop the bootstrap term.
    """
    batch_size = batch_size or hyper.batch_size
    if len(buffer) < batch_size:
        return None
    states, actions, rewards, next_states, dones = buffer.sample_arrays(batch_size)
    states_n = normalize(states)
    next_states_n = normalize(next_states)
    actions_n = scaler.to_normalized(actions)
    rewards = rewards * hyper.reward_scale

    next_actions_n = target_actor.forward(next_states_n)
    next_q = target_critic.forward(
        np.concatenate([next_states_n, next_actions_n], axis=1))[:, 0]
    targets = rewards + hyper.discount * (1.0 - dones) * next_q

    q = critic.forward(np.concatenate([states_n, actions_n], axis=1))[:, 0]
    error = q - targets
    loss = float(np.mean(error ** 2))
    critic_opt.step(critic.backward((2.0 * error / batch_size)[:, None]))

    actor_opt.step(actor_policy_gradient(critic, actor, states_n))

    soft_update(target_critic, critic, hyper.tau)
    soft_update(target_actor, actor, hyper.tau)
    return loss


class DdpgAgent(BaseAgent):
    """Continuous power/beam controller with replay and Polyak-averaged targets."""

    name = "ddpg"

    def __init__(self, env, hyper: AgentHyperparams, seed: int,
                 batch_size: int | None = None):
        self.hyper = hyper
        self.batch_size = batch_size or hyper.batch_size
        self.normalize = StateNormalizer(env.state_low, env.state_high)
        self.scaler = ActionScaler(env.action_low, env.action_high)

        init_rng = agent_stream(seed, 0)
        self._noise_rng = agent_stream(seed, 1)
        buffer_rng = agent_stream(seed, 2)

        n_actions = len(env.action_low)
        hidden = [hyper.width] * hyper.depth
        self.actor = Mlp([8] + hidden + [n_actions],
                         output_low=-np.ones(n_actions), output_high=np.ones(n_actions),
                         rng=init_rng, final_layer_scale=hyper.final_layer_scale)
        self.critic = Mlp([8 + n_actions] + hidden + [1], rng=init_rng,
                          final_layer_scale=hyper.final_layer_scale)
        self.target_actor = self.actor.copy()
        self.target_critic = self.critic.copy()
        actor_lr = hyper.lr if hyper.actor_lr is None else hyper.actor_lr
        self.actor_opt = AdamOptimizer(self.actor, lr=actor_lr,
                                       weight_decay=hyper.actor_weight_decay)
        self.critic_opt = AdamOptimizer(self.critic, lr=hyper.lr,
                                        weight_decay=hyper.critic_weight_decay)
        self.buffer = ReplayBuffer(hyper.replay_capacity, buffer_rng)
        self._ou = OrnsteinUhlenbeckNoise(n_actions) if hyper.use_ou_noise else None
        self._episode = 0

    @property
    def noise_sigma(self) -> np.ndarray:
        """Per-dimension exploration std, decaying linearly to a floor.

        A non-zero floor keeps replay coverage stationary over training,
        which stops the critic from soaking up time-trend confounds.
        """
        span = max(1.0, (self.hyper.total_episodes - 1) * self.hyper.eps_decay_frac)
        frac = min(1.0, self._episode / span)
        scale = 1.0 + (self.hyper.noise_end_frac - 1.0) * frac
        return self.hyper.noise_scale * scale * (self.scaler.high - self.scaler.low)

    def begin_episode(self, state: np.ndarray) -> None:
        if self._ou is not None:
            self._ou.reset()

    def act(self, state: np.ndarray, explore: bool = True) -> np.ndarray:
        state_n = self.normalize(state)
        if not explore:
            return np.clip(self.scaler.to_env(self.actor.forward(state_n)),
                           self.scaler.low, self.scaler.high)
        if self._ou is not None:
            action = self.scaler.to_env(self.actor.forward(state_n))
            action = action + self._ou(self._noise_rng, self.noise_sigma)
            return np.clip(action, self.scaler.low, self.scaler.high)
        return ddpg_act(self.actor, state_n, self.noise_sigma, self._noise_rng, self.scaler)

    def observe(self, state, action, reward, next_state, done):
        self.buffer.push(Transition(np.asarray(state, dtype=float),
                                    np.asarray(action, dtype=float), float(reward),
                                    np.asarray(next_state, dtype=float), bool(done)))
        return self.train_step()

    def train_step(self):
        return ddpg_train_step(self.buffer, self.actor, self.critic, self.target_actor,
                               self.target_critic, self.actor_opt, self.critic_opt,
                               self.hyper, self.normalize, self.scaler, self.batch_size)

    def end_episode(self, trained: bool) -> None:
        if trained:
            self._episode += 1

    def save(self, directory) -> None:
        self.actor.save(f"{directory}/{self.name}_actor.npz")
        self.critic.save(f"{directory}/{self.name}_critic.npz")
