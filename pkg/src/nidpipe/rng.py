"""Seeded random streams.

Every run works from one master seed; subsystems derive independent
streams through spawn keys so that adding a consumer of randomness
never perturbs the others.
"""

from __future__ import annotations

import numpy as np

# spawn-key tags for the independent streams of one run
EMBED = 1
LIFT = 2
START_COEFFS = 3
GAMMA = 4
SQUARE = 5


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def unit_complex(rng: np.random.Generator, n: int | None = None):
    """Uniform on the complex unit circle."""
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return np.exp(1j * theta)


def random_complex(rng: np.random.Generator, n: int | None = None):
    """Unit-circle direction scaled by a uniform modulus in (0.5, 1.5)."""
    r = rng.uniform(0.5, 1.5, size=n)
    return r * unit_complex(rng, n)
