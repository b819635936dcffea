"""Synthetic data: the three-bump surface on the unit square, spike trains
on a flat baseline, and piecewise-constant test images.

All noise comes from numpy's PCG64 generator through the Box-Muller
transform, so a seed fixes the data completely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import errors
from .io import ScatterSet

BROAD_CENTER = (0.5, 0.5)
SHARP_CENTERS = ((0.25, 0.25), (0.75, 0.75))


def rng_for(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def box_muller(rng: np.random.Generator, size: int, sd: float = 1.0) -> np.ndarray:
    """Gaussian draws from pairs of uniforms."""
    m = (size + 1) // 2
    u1 = 1.0 - rng.random(m)  # (0, 1], keeps the log finite
    u2 = rng.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])
    return sd * z[:size]


def bump_function(x1, x2):
    """One broad positive bump at the centre, two sharp negative ones on the diagonal."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return (np.exp(-100 * ((x1 - 0.5) ** 2 + (x2 - 0.5) ** 2))
            - np.exp(-1000 * ((x1 - 0.25) ** 2 + (x2 - 0.25) ** 2))
            - np.exp(-1000 * ((x1 - 0.75) ** 2 + (x2 - 0.75) ** 2)))


def bump_radius(rate: float, level: float = 0.01) -> float:
    """Distance from a bump centre at which exp(-rate r^2) falls to ``level``."""
    return float(np.sqrt(np.log(1 / level) / rate))


def generate_simulation(n: int, noise_sd: float, seed) -> ScatterSet:
    """n uniform design points on the unit square, response = bumps + noise."""
    if n < 3:
        raise errors.TooFewPoints(f"need at least 3 points, got {n}")
    rng = rng_for(seed)
    x = rng.random((n, 2))
    y = bump_function(x[:, 0], x[:, 1]) + box_muller(rng, n, noise_sd)
    return ScatterSet(x[:, 0], x[:, 1], y)


@dataclass
class SpikeSignal:
    x: np.ndarray
    y: np.ndarray
    truth: np.ndarray
    spikes: list[tuple[int, int]]  # half-open index ranges

    @property
    def off_spike(self) -> np.ndarray:
        mask = np.ones(len(self.y), dtype=bool)
        for a, b in self.spikes:
            mask[a:b] = False
        return mask


def spike_signal(n: int = 500, n_spikes: int = 5, height: float = 5.0, width: int = 3,
                 noise_sd: float = 0.1, baseline: float = 0.0, seed=0) -> SpikeSignal:
    """Evenly spaced rectangular spikes on a constant baseline."""
    if n_spikes * width > n:
        raise errors.LengthMismatch("spikes do not fit into the signal")
    truth = np.full(n, float(baseline))
    spikes = []
    for i in range(n_spikes):
        a = int((i + 0.5) * n / n_spikes) - width // 2
        spikes.append((a, a + width))
        truth[a:a + width] = baseline + height
    rng = rng_for(seed)
    y = truth + box_muller(rng, n, noise_sd)
    return SpikeSignal(np.arange(n, dtype=float), y, truth, spikes)


def piecewise_image(eta: int = 64) -> np.ndarray:
    """Test image in [0, 1]: a dark background with a bright rectangle, a
    mid-grey disc and a thin bar."""
    i, j = np.mgrid[0:eta, 0:eta] / eta
    img = np.full((eta, eta), 0.2)
    img[(i > 0.15) & (i < 0.55) & (j > 0.1) & (j < 0.45)] = 0.8
    img[(i - 0.65) ** 2 + (j - 0.68) ** 2 < 0.22 ** 2] = 0.5
    img[(i > 0.75) & (i < 0.82) & (j > 0.08) & (j < 0.5)] = 0.65
    return img


def noisy_image(truth, noise_sd: float, seed) -> np.ndarray:
    rng = rng_for(seed)
    return truth + box_muller(rng, truth.size, noise_sd).reshape(truth.shape)
