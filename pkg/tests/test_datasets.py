import math

import numpy as np
import pytest

from graphtv import errors
from graphtv.datasets import (box_muller, bump_function, bump_radius, generate_simulation,
                              noisy_image, piecewise_image, rng_for, spike_signal)


def test_bump_values():
    assert bump_function(0.5, 0.5) == pytest.approx(1 - 2 * math.exp(-125), abs=1e-15)
    assert bump_function(0.25, 0.25) == pytest.approx(math.exp(-12.5) - 1 - math.exp(-500), abs=1e-15)
    assert bump_function(0.25, 0.25) == pytest.approx(-0.999996, abs=1e-6)
    assert abs(bump_function(0.0, 0.0)) < 1e-20


def test_bump_radius():
    r = bump_radius(100)
    assert math.exp(-100 * r * r) == pytest.approx(0.01)


def test_simulation_deterministic():
    a = generate_simulation(200, 0.05, 7)
    b = generate_simulation(200, 0.05, 7)
    c = generate_simulation(200, 0.05, 8)
    assert np.array_equal(a.y, b.y) and np.array_equal(a.x1, b.x1)
    assert not np.array_equal(a.y, c.y)
    assert 0 <= a.x1.min() and a.x2.max() < 1
    with pytest.raises(errors.TooFewPoints):
        generate_simulation(2, 0.05, 0)


def test_box_muller_moments():
    z = box_muller(rng_for(0), 200001, 2.0)
    assert len(z) == 200001
    assert abs(z.mean()) < 0.02 and abs(z.std() - 2.0) < 0.02


def test_spike_signal():
    s = spike_signal(n=100, n_spikes=4, height=5, width=3, noise_sd=0.0)
    assert len(s.spikes) == 4
    assert s.truth[~s.off_spike].tolist() == [5.0] * 12
    assert np.all(s.y[s.off_spike] == 0.0)
    with pytest.raises(errors.LengthMismatch):
        spike_signal(n=5, n_spikes=3, width=2)


def test_images():
    img = piecewise_image(32)
    assert img.shape == (32, 32) and set(np.unique(img)) == {0.2, 0.8, 0.5, 0.65}
    assert np.array_equal(noisy_image(img, 0.1, 3), noisy_image(img, 0.1, 3))
