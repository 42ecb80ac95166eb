#!/usr/bin/env python3
"""Beamsteering codebook: entries, array gain pattern, index arithmetic.

Run:  python3 demos/02_beam_codebook.py
"""

import numpy as np

from cellbeam import beam_from_continuous, build_codebook, step_beam
from cellbeam.beamcode import steering_matrix

print("=== codebook structure ===")
for m in (1, 2, 4, 8):
    cb = build_codebook(m)
    print(f"M={m}: {cb.size} beams, steering angles (deg) = "
          f"{np.degrees(cb.angles).round(1)}, |entry| = {abs(cb.vectors[0, 0]):.4f}")

print("\n=== array gain of an M=8 codebook across arrival angles ===")
cb = build_codebook(8)
thetas = np.linspace(0, np.pi, 19)
responses = steering_matrix(thetas, 8)
gains = np.abs(responses.conj() @ cb.vectors.T) ** 2
print("theta(deg)  best-beam gain  best index")
for theta, row in zip(thetas, gains):
    print(f"   {np.degrees(theta):6.1f}       {row.max():6.3f}        {int(row.argmax())}")
print("gain is 1.0 exactly on the grid angles and below 1.0 everywhere else")

print("\n=== circular stepping (discrete agents) ===")
idx = 0
path = [idx]
for direction in (+1, +1, +1, -1, -1, -1, -1):
    idx = step_beam(idx, direction, 8)
    path.append(idx)
print("index walk:", path, "(wraps modulo the codebook size)")

print("\n=== continuous control flooring (deterministic-policy agents) ===")
for raw in (-0.4, 0.0, 3.7, 7.99, 9.5):
    print(f"  raw {raw:5.2f} -> beam {beam_from_continuous(raw, 8)}")
