"""Angle encoding of normalized features into a product state.

Each feature x in [0, 1] becomes one qubit in
cos(pi/2 * x)|0> + sin(pi/2 * x)|1>, which is exactly Ry(pi * x) applied
to |0>.  x = 0 maps to |0>, x = 1 to |1>, and P(|1>) grows monotonically
in between.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sim import MAX_QUBITS, QuantumState


@dataclass(frozen=True)
class EncodedInput:
    """Product state produced from one normalized feature vector."""

    source: np.ndarray
    state: QuantumState


def _check_features(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or not 1 <= x.size <= MAX_QUBITS:
        raise ValueError(
            f"expected a 1-D vector of 1..{MAX_QUBITS} features, got shape {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        i = int(np.flatnonzero(~np.isfinite(x))[0])
        raise ValueError(f"feature {i} is not finite: {x[i]!r}")
    bad = (x < 0.0) | (x > 1.0)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise ValueError(f"feature {i} out of range [0, 1]: {x[i]!r}")
    return x


def angle_encode(x) -> EncodedInput:
    """Encode a vector of [0, 1] features, one qubit per feature."""
    x = _check_features(x)
    half = 0.5 * np.pi * x
    amps = np.ones(1, dtype=np.complex128)
    for c, s in zip(np.cos(half), np.sin(half)):
        amps = np.kron(amps, np.array([c, s], dtype=np.complex128))
    return EncodedInput(source=x, state=QuantumState(x.size, amps))


def encode_as_ry_rotations(x) -> np.ndarray:
    """The same encoding expressed as per-qubit Ry angles (pi * x)."""
    return np.pi * _check_features(x)
