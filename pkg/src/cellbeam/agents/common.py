"""Shared agent machinery: replay buffer, hyperparameters, episode loop."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..beamcode import step_beam
from ..errors import ConfigurationError, ContractViolation


@dataclass
class Transition:
    state: np.ndarray
    action: object          # continuous vector or discrete action id
    reward: float
    next_state: np.ndarray
    done: bool


class ReplayBuffer:
    """Ring buffer of transitions with uniform minibatch sampling."""

    def __init__(self, capacity: int, rng: np.random.Generator):
        if capacity < 1:
            raise ConfigurationError("replay capacity must be >= 1")
        self.capacity = capacity
        self.rng = rng
        self._items: list[Transition] = []
        self._next = 0

    def __len__(self) -> int:
        return len(self._items)

    @property
    def contents(self) -> tuple[Transition, ...]:
        return tuple(self._items)

    def push(self, transition: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(transition)
        else:
            self._items[self._next] = transition
        self._next = (self._next + 1) % self.capacity

    def sample(self, batch_size: int) -> list[Transition]:
        """Uniform sample without replacement within the minibatch."""
        if batch_size > len(self._items):
            raise ContractViolation("not enough stored transitions to sample")
        idx = self.rng.choice(len(self._items), size=batch_size, replace=False)
        return [self._items[i] for i in idx]

    def sample_arrays(self, batch_size: int):
        batch = self.sample(batch_size)
        states = np.stack([t.state for t in batch])
        actions = np.stack([np.asarray(t.action, dtype=float) for t in batch])
        rewards = np.array([t.reward for t in batch])
        next_states = np.stack([t.next_state for t in batch])
        dones = np.array([t.done for t in batch], dtype=float)
        return states, actions, rewards, next_states, dones


@dataclass
class AgentHyperparams:
    """Training knobs; defaults follow the standard parameter table."""

    discount: float = 0.9
    tau: float = 0.1
    lr: float = 1e-4
    actor_lr: float | None = None     # defaults to lr when unset
    width: int = 28
    depth: int = 4
    batch_size: int = 128
    meta_batch_size: int = 64
    controller_batch_size: int = 64
    meta_period: int = 3
    noise_scale: float = 0.25         # initial std as a fraction of action range
    noise_end_frac: float = 0.0       # final noise scale as a fraction of initial
    use_ou_noise: bool = False
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_frac: float = 1.0       # fraction of training over which eps decays
    replay_capacity: int = 10_000
    dqn_updates_per_step: int = 1     # minibatch updates per environment step
    dqn_greedy_margin: float = 0.0    # value lead over the neutral action needed to act on it
    reward_scale: float = 0.1         # conditioning factor for network targets
    final_layer_scale: float = 0.05   # shrink factor for output layer init
    actor_weight_decay: float = 0.0   # decoupled decay; keeps policy heads unsaturated
    critic_weight_decay: float = 0.0
    goal_penalty_weight: float = 1.0
    power_step_db: tuple = (1.0, 3.0)
    pc_limit_db: float = 40.0
    ic_limit_db: float = 40.0
    bf_limit_multiplier: float = 1.0
    optimizer: str = "adam"
    total_episodes: int = 300
    train_geometry_cycle: int = 0     # >0 cycles training over that many geometries
    position_bins: int = 8
    power_levels: int = 4
    q_lr: float = 0.1                 # tabular Q-learning step size
    q_power_step_db: tuple = (3.0,)   # tabular agent's power deltas (+/- each)

    def __post_init__(self):
        if not 0.0 < self.discount < 1.0:
            raise ConfigurationError("discount must lie in (0, 1)")
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigurationError("tau must lie in [0, 1]")
        if self.meta_period < 1:
            raise ConfigurationError("meta_period must be >= 1")
        if self.lr <= 0:
            raise ConfigurationError("learning rate must be positive")
        if not 0.0 <= self.eps_end <= self.eps_start <= 1.0:
            raise ConfigurationError("epsilon schedule must satisfy 0 <= end <= start <= 1")
        if not 0.0 < self.eps_decay_frac <= 1.0:
            raise ConfigurationError("eps_decay_frac must lie in (0, 1]")

    def epsilon_at(self, episode: int) -> float:
        """Linear decay from eps_start to eps_end over the decay fraction."""
        span = max(1.0, (self.total_episodes - 1) * self.eps_decay_frac)
        frac = min(1.0, episode / span)
        return self.eps_start + (self.eps_end - self.eps_start) * frac


def agent_stream(seed: int, key: int) -> np.random.Generator:
    """Named, independent generator derived from one agent seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(key,)))


class OrnsteinUhlenbeckNoise:
    """Temporally correlated exploration noise (selectable alternative)."""

    def __init__(self, size: int, theta: float = 0.15, dt: float = 1.0):
        self.theta = theta
        self.dt = dt
        self.state = np.zeros(size)

    def reset(self) -> None:
        self.state[:] = 0.0

    def __call__(self, rng: np.random.Generator, sigma: np.ndarray) -> np.ndarray:
        drift = -self.theta * self.state * self.dt
        diffusion = sigma * np.sqrt(self.dt) * rng.standard_normal(self.state.shape)
        self.state = self.state + drift + diffusion
        return self.state.copy()


def discrete_action_table(power_step_db=(1.0, 3.0), codebook_size: int = 2) -> list[tuple]:
    """Joint discrete actions: power deltas (dB) per BS x beam direction per BS.

    Power deltas enumerate +/- each configured step, largest raise first
    so an untrained greedy argmax (all-zero values, ties broken by lowest
    index) defaults to pushing both powers up rather than draining them.
    With a single-entry codebook the beam steps are no-ops and collapse
    to one direction, shrinking the joint table fourfold.
    """
    steps = sorted(set(abs(float(s)) for s in power_step_db), reverse=True)
    deltas = [s for s in steps] + [-s for s in reversed(steps)]
    dirs = [1] if codebook_size == 1 else [1, -1]
    return [(dp_l, dp_b, db_l, db_b)
            for dp_l in deltas for dp_b in deltas for db_l in dirs for db_b in dirs]


def discrete_to_env_action(state: np.ndarray, joint: tuple, codebook_size: int,
                           power_low: float = -np.inf,
                           power_high: float = np.inf) -> np.ndarray:
    """Turn (power delta, beam direction) pairs into an absolute env action."""
    dp_l, dp_b, db_l, db_b = joint
    n_l = step_beam(int(round(state[6])), db_l, codebook_size)
    n_b = step_beam(int(round(state[7])), db_b, codebook_size)
    p_l = float(np.clip(state[4] + dp_l, power_low, power_high))
    p_b = float(np.clip(state[5] + dp_b, power_low, power_high))
    return np.array([p_l, p_b, float(n_l), float(n_b)])


@dataclass
class EpisodeLog:
    """Everything one episode produced, for logging and metrics."""

    seed: int
    states: np.ndarray        # (T + 1, 8)
    actions: np.ndarray       # (T, 4)
    rewards: np.ndarray       # (T,)
    losses: np.ndarray        # (T,) NaN when no training happened
    eff_sinr_db: np.ndarray   # (T, n_ue)
    powers_dbm: np.ndarray    # (T, n_bs)
    norm_power: np.ndarray    # (T,) mean applied power / max power
    beam_indices: np.ndarray  # (T, n_bs)
    aborted: bool

    @property
    def steps(self) -> int:
        return len(self.rewards)

    @property
    def episode_return(self) -> float:
        return float(self.rewards.sum())

    @property
    def mean_loss(self) -> float:
        if np.all(np.isnan(self.losses)):
            return float("nan")
        return float(np.nanmean(self.losses))


class BaseAgent:
    """Common train/act interface; subclasses fill in the four hooks."""

    name = "base"

    def begin_episode(self, state: np.ndarray) -> None:
        pass

    def act(self, state: np.ndarray, explore: bool = True) -> np.ndarray:
        raise NotImplementedError

    def observe(self, state, action, reward, next_state, done):
        """Store the transition and train; returns a loss or None."""
        return None

    def end_episode(self, trained: bool) -> None:
        pass

    def save(self, directory) -> None:
        pass

    def run_episode(self, env, seed: int, train: bool = True) -> EpisodeLog:
        """Roll one episode, training after every step when train=True."""
        state = env.reset(seed)
        self.begin_episode(state)
        states = [state]
        actions, rewards, losses = [], [], []
        eff, powers, normp, beams = [], [], [], []
        aborted = False
        done = False
        while not done:
            action = self.act(state, explore=train)
            outcome = env.step(action)
            loss = self.observe(state, action, outcome.reward,
                                outcome.next_state, outcome.done) if train else None
            states.append(outcome.next_state)
            actions.append(np.asarray(action, dtype=float))
            rewards.append(outcome.reward)
            losses.append(float("nan") if loss is None else float(loss))
            eff.append(outcome.info["eff_sinr_db"])
            powers.append(outcome.info["powers_dbm"])
            # min() guards the dBm->W round trip landing a few ulp above the cap
            normp.append(min(1.0, float(np.mean(outcome.info["powers_w"])
                                        / env.scenario.max_bs_power_w)))
            beams.append(outcome.info["beam_indices"])
            aborted = outcome.info["aborted"]
            state = outcome.next_state
            done = outcome.done
        self.end_episode(train)
        return EpisodeLog(seed=seed, states=np.stack(states), actions=np.stack(actions),
                          rewards=np.array(rewards), losses=np.array(losses),
                          eff_sinr_db=np.stack(eff), powers_dbm=np.stack(powers),
                          norm_power=np.array(normp), beam_indices=np.stack(beams),
                          aborted=aborted)


class StateNormalizer:
    """Affine map of the 8-feature state onto [-1, 1] per feature."""

    def __init__(self, low: np.ndarray, high: np.ndarray):
        self.low = np.asarray(low, dtype=float)
        span = np.asarray(high, dtype=float) - self.low
        self.span = np.where(span > 0.0, span, 1.0)

    def __call__(self, state) -> np.ndarray:
        return 2.0 * (np.asarray(state, dtype=float) - self.low) / self.span - 1.0


class ActionScaler:
    """Affine map between env action units and the [-1, 1] policy space."""

    def __init__(self, low: np.ndarray, high: np.ndarray):
        self.low = np.asarray(low, dtype=float)
        self.high = np.asarray(high, dtype=float)
        span = self.high - self.low
        self.span = np.where(span > 0.0, span, 1.0)

    def to_env(self, normalized) -> np.ndarray:
        return self.low + (np.asarray(normalized, dtype=float) + 1.0) / 2.0 * (self.high - self.low)

    def to_normalized(self, env_action) -> np.ndarray:
        return 2.0 * (np.asarray(env_action, dtype=float) - self.low) / self.span - 1.0
