"""Episodic RL environment over the two-cell downlink simulator.

Observations are the 8 features used by all agents (two UE positions,
two transmit powers in dBm, two beam indices).  Actions are 4 features:
requested powers for the serving and interfering BS plus one raw beam
control per BS.  Rewards sum the per-UE effective SINR in dB, where the
effective value is clamped into [0 dB, gamma_max]; an episode aborts as
soon as any served UE's raw SINR drops below the cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import channel as chan
from .beamcode import beam_from_continuous, build_codebook
from .errors import ConfigurationError, ContractViolation, UsageError

STATE_SIZE = 8
ACTION_SIZE = 4


@dataclass(frozen=True)
class SinrPolicy:
    """Cutoff / target / cap rules applied to received SINR."""

    gamma_cutoff_db: float = 4.0
    gamma0_db: float = 5.0
    m_antennas: int = 1

    @property
    def gamma_target_db(self) -> float:
        return self.gamma0_db + 10.0 * math.log10(self.m_antennas)

    @property
    def gamma_max_db(self) -> float:
        return self.gamma0_db + 10.0 * math.log2(self.m_antennas)

    def effective_db(self, raw_db) -> np.ndarray:
        """Clamp raw SINR (dB) into the reportable band [0, gamma_max]."""
        return np.clip(raw_db, 0.0, self.gamma_max_db)


@dataclass
class StepOutcome:
    next_state: np.ndarray
    reward: float
    done: bool
    info: dict


def hierarchical_reward(step_reward: float, goal, action, weight: float = 1.0) -> float:
    """Environment reward minus the summed absolute goal-action deviation."""
    goal = np.asarray(goal, dtype=float)
    action = np.asarray(action, dtype=float)
    if goal.shape != action.shape:
        raise ContractViolation("goal and action must have the same arity")
    return float(step_reward - weight * np.abs(goal - action).sum())


class DownlinkEnv:
    """Two-cell downlink world with power and beam control.

    One UE per BS; BS 0 plays the serving role and BS 1 the interfering
    role of the 8-feature observation (the reward covers both UEs, so
    the labelling is symmetric).
    """

    def __init__(self, scenario: chan.Scenario, m_antennas: int = 1, horizon: int = 50,
                 policy: SinrPolicy | None = None, power_floor_dbm: float = 0.0,
                 power_span_db=40.0, bf_limit_multiplier: float = 1.0,
                 spacing_in_wavelengths: float = 0.5, num_bs: int = 2, ues_per_bs: int = 1):
        if num_bs != 2 or ues_per_bs != 1:
            raise ConfigurationError(
                "the 8-feature observation fixes the world to 2 BSs with 1 UE each")
        if horizon < 1:
            raise ConfigurationError("horizon must be >= 1")
        self.scenario = scenario
        self.m_antennas = int(m_antennas)
        self.horizon = int(horizon)
        self.codebook = build_codebook(self.m_antennas, spacing_in_wavelengths)
        self.policy = policy or SinrPolicy(m_antennas=self.m_antennas)
        if self.policy.m_antennas != self.m_antennas:
            raise ConfigurationError("SinrPolicy antenna count must match the environment")
        self.power_floor_dbm = float(power_floor_dbm)
        # one requested-power span per BS role (power control / interference coordination)
        self.power_span_db = np.broadcast_to(
            np.asarray(power_span_db, dtype=float), (2,)).copy()
        self.bf_limit = bf_limit_multiplier * self.m_antennas - 1.0
        if self.power_floor_dbm > scenario.max_bs_power_dbm:
            raise ConfigurationError("power floor exceeds the maximum transmit power")

        self.topology = None
        self.channel_state = None
        self._mobility_rng = None
        self._powers_dbm = None
        self._beams = None
        self._t = 0
        self._done = True

    # -- action/state ranges ------------------------------------------------

    @property
    def action_low(self) -> np.ndarray:
        return np.array([self.power_floor_dbm, self.power_floor_dbm, 0.0, 0.0])

    @property
    def action_high(self) -> np.ndarray:
        hi = self.power_floor_dbm + self.power_span_db
        return np.array([hi[0], hi[1], self.bf_limit, self.bf_limit])

    @property
    def state_low(self) -> np.ndarray:
        r = self.scenario.cell_radius_m / 2.0
        c0, c1 = self.topology_centers()
        return np.array([c0[0] - r, c0[1] - r, c1[0] - r, c1[1] - r,
                         self.power_floor_dbm, self.power_floor_dbm, 0.0, 0.0])

    @property
    def state_high(self) -> np.ndarray:
        r = self.scenario.cell_radius_m / 2.0
        c0, c1 = self.topology_centers()
        cap = self.scenario.max_bs_power_dbm
        nmax = float(self.codebook.size - 1)
        return np.array([c0[0] + r, c0[1] + r, c1[0] + r, c1[1] + r,
                         cap, cap, nmax, nmax])

    def topology_centers(self):
        isd = self.scenario.inter_site_distance_m
        return np.array([0.0, 0.0]), np.array([isd, 0.0])

    # -- episode API ---------------------------------------------------------

    def reset(self, seed: int) -> np.ndarray:
        """Start a fresh episode: new geometry, fading state and controls."""
        ss = np.random.SeedSequence(seed)
        topo_ss, mob_ss, chan_ss = ss.spawn(3)
        self.topology = chan.init_topology(self.scenario, 2, 1, topo_ss)
        self._mobility_rng = np.random.default_rng(mob_ss)
        self.channel_state = chan.new_channel_state(chan_ss)
        chan.draw_channels(self.topology, self.scenario, self.m_antennas,
                           self.channel_state, self.codebook.spacing_in_wavelengths)
        # start both BSs 3 dB below the power cap, beams at index 0
        self._powers_dbm = np.full(2, self.scenario.max_bs_power_dbm - 3.0)
        self._beams = np.zeros(2, dtype=int)
        self._t = 0
        self._done = False
        return self._observe()

    def apply_action(self, action) -> tuple[np.ndarray, np.ndarray]:
        """Clamp an action onto applied powers (dBm) and beam indices."""
        a = np.asarray(action, dtype=float)
        if a.shape != (ACTION_SIZE,):
            raise ContractViolation(f"action must have {ACTION_SIZE} entries")
        if not np.all(np.isfinite(a)):
            raise ContractViolation("action entries must be finite")
        powers = np.clip(a[:2], self.power_floor_dbm, self.scenario.max_bs_power_dbm)
        beams = np.array([beam_from_continuous(a[2], self.codebook.size),
                          beam_from_continuous(a[3], self.codebook.size)], dtype=int)
        return powers, beams

    def step(self, action) -> StepOutcome:
        """Apply controls, advance the world one frame and score it."""
        if self._done:
            raise UsageError("step() called on a finished episode; call reset() first")
        self._powers_dbm, self._beams = self.apply_action(action)

        self.topology = chan.step_mobility(self.topology, self.scenario, self._mobility_rng)
        chan.draw_channels(self.topology, self.scenario, self.m_antennas,
                           self.channel_state, self.codebook.spacing_in_wavelengths)

        powers_w = np.array([chan.dbm_to_watts(p) for p in self._powers_dbm])
        beam_vectors = self.codebook.vectors[self._beams]
        sinr_lin = chan.compute_sinr(self.channel_state, self.topology, beam_vectors,
                                     powers_w, self.scenario)
        with np.errstate(divide="ignore"):
            raw_db = np.where(sinr_lin > 0.0, 10.0 * np.log10(
                np.where(sinr_lin > 0.0, sinr_lin, 1.0)), -np.inf)
        eff_db = self.policy.effective_db(raw_db)
        reward = float(eff_db.sum())

        self._t += 1
        aborted = bool(np.any(raw_db < self.policy.gamma_cutoff_db))
        self._done = aborted or self._t >= self.horizon
        info = {
            "sinr_linear": sinr_lin,
            "sinr_db": raw_db,
            "eff_sinr_db": eff_db,
            "eff_sinr_linear": chan.db_to_linear(eff_db),
            "powers_dbm": self._powers_dbm.copy(),
            "powers_w": powers_w,
            "beam_indices": self._beams.copy(),
            "aborted": aborted,
            "step": self._t,
        }
        return StepOutcome(next_state=self._observe(), reward=reward,
                           done=self._done, info=info)

    def _observe(self) -> np.ndarray:
        ue = self.topology.ue_positions
        return np.array([ue[0, 0], ue[0, 1], ue[1, 0], ue[1, 1],
                         self._powers_dbm[0], self._powers_dbm[1],
                         float(self._beams[0]), float(self._beams[1])])
