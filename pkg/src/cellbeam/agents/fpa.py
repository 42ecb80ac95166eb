"""Fixed power allocation: the static industry baseline."""

from __future__ import annotations

import math

import numpy as np

from ..channel import Scenario
from ..errors import ContractViolation
from .common import BaseAgent


def fpa_power(scenario: Scenario, n_prb_total: int, n_prb_allocated: int) -> float:
    """Transmit power (dBm) when the cap is split equally over resource blocks.

    P = P_max_dBm - 10 log10(N_PRB) + 10 log10(N_PRB_allocated)
    """
    if n_prb_total < 1 or n_prb_allocated < 1:
        raise ContractViolation("resource block counts must be >= 1")
    if n_prb_allocated > n_prb_total:
        raise ContractViolation("allocated blocks cannot exceed the total")
    return (scenario.max_bs_power_dbm
            - 10.0 * math.log10(n_prb_total)
            + 10.0 * math.log10(n_prb_allocated))


class FpaAgent(BaseAgent):
    """Requests the same fixed power every step and never moves the beams."""

    name = "fpa"

    def __init__(self, env, n_prb_total: int = 100, n_prb_allocated: int = 100):
        raw = fpa_power(env.scenario, n_prb_total, n_prb_allocated)
        self.power_dbm = float(np.clip(raw, env.power_floor_dbm,
                                       env.scenario.max_bs_power_dbm))

    def act(self, state: np.ndarray, explore: bool = True) -> np.ndarray:
        return np.array([self.power_dbm, self.power_dbm, state[6], state[7]])
