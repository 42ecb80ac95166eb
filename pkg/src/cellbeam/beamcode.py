"""Beamsteering codebook for a uniform linear array.

The codebook holds one unit-norm steering vector per angle, with the
steering angles splitting [0, pi) into M equal steps.  Agents address it
by index: circular +/-1 stepping for discrete-action agents, floor of a
continuous output for the deterministic-policy agents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractViolation


def steering_vector(theta: float, m_antennas: int,
                    spacing_in_wavelengths: float = 0.5) -> np.ndarray:
    """Array response a(theta) of an M-element ULA, entries of modulus 1/sqrt(M)."""
    return steering_matrix(np.asarray(theta, dtype=float), m_antennas,
                           spacing_in_wavelengths)


def steering_matrix(thetas, m_antennas: int,
                    spacing_in_wavelengths: float = 0.5) -> np.ndarray:
    """Steering vectors for an array of angles; output shape thetas.shape + (M,)."""
    if m_antennas < 1:
        raise ConfigurationError("m_antennas must be >= 1")
    kd = 2.0 * math.pi * spacing_in_wavelengths
    m_idx = np.arange(m_antennas)
    phase = kd * np.cos(np.asarray(thetas, dtype=float))[..., None] * m_idx
    return np.exp(1j * phase) / math.sqrt(m_antennas)


@dataclass(frozen=True)
class Codebook:
    """Immutable ordered set of beamsteering vectors."""

    m_antennas: int
    spacing_in_wavelengths: float
    angles: np.ndarray = field(repr=False)   # (N_CB,) radians
    vectors: np.ndarray = field(repr=False)  # (N_CB, M) complex

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    def __getitem__(self, n: int) -> np.ndarray:
        return self.vectors[n]


def build_codebook(m_antennas: int, spacing_in_wavelengths: float = 0.5) -> Codebook:
    """Codebook with steering angles theta_n = pi n / M, n = 0..M-1."""
    if m_antennas < 1:
        raise ConfigurationError("codebook needs at least one antenna")
    angles = math.pi * np.arange(m_antennas) / m_antennas
    vectors = steering_matrix(angles, m_antennas, spacing_in_wavelengths)
    angles.setflags(write=False)
    vectors.setflags(write=False)
    return Codebook(m_antennas=m_antennas, spacing_in_wavelengths=spacing_in_wavelengths,
                    angles=angles, vectors=vectors)


def step_beam(index: int, direction: int, codebook_size: int) -> int:
    """Circular +/-1 move through the codebook: (index +/- 1) mod size."""
    if not 0 <= index < codebook_size:
        raise ContractViolation(f"beam index {index} outside [0, {codebook_size})")
    if direction not in (1, -1):
        raise ContractViolation("direction must be +1 or -1")
    return (index + direction) % codebook_size


def beam_from_continuous(raw: float, codebook_size: int) -> int:
    """Map a continuous control value onto a beam index by flooring.

    Values are clamped into [0, codebook_size - 1] after the floor, so any
    finite input yields a valid index.
    """
    raw = float(raw)
    if not math.isfinite(raw):
        raise ContractViolation("beam control value must be finite")
    return int(min(max(math.floor(raw), 0), codebook_size - 1))
