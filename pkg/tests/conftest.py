"""Shared generators for property tests."""

import numpy as np
import pytest

from cvdistill import add_symmetric_noise, loss_channel, ppt_separable, tmss
from cvdistill.symplectic import local_symplectic, rotation


def random_local_rotations(rng):
    """Local phase rotations on both modes (entanglement-preserving)."""
    return local_symplectic(
        rotation(rng.uniform(0.0, 2.0 * np.pi)), rotation(rng.uniform(0.0, 2.0 * np.pi))
    )


def random_noisy_qsym(rng):
    """Quadrature-symmetric mixed state: squeezing, loss, and excess noise.

    Mirrors the experimentally relevant family (the analytic measure chain
    is only guaranteed away from the pure-state boundary, see the ledger).
    """
    r = 0.2 + 1.0 * rng.random()
    eta = 0.2 + 0.75 * rng.random()
    xi = 0.02 + 0.25 * rng.random()
    return add_symmetric_noise(loss_channel(tmss(r), eta), xi)


def random_entangled_qsym(rng, max_tries: int = 50):
    for _ in range(max_tries):
        V = random_noisy_qsym(rng)
        if not ppt_separable(V):
            return V
    raise AssertionError("failed to draw an entangled state")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
