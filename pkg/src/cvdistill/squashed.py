"""Upper bound on squashed entanglement via a purified channel model.

A quadrature-symmetric state is fitted as two-mode squeezing followed by a
thermal-loss channel on mode B.  Purifying the channel environment (loss
port E1, thermal-purification partner E2) gives a pure four-mode extension;
splitting E1 on a balanced beamsplitter with a vacuum ancilla is the
squashing channel, and half the conditional mutual information of the
result bounds the squashed entanglement from above.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DecompositionError
from .measures import entropy_g
from .symplectic import (
    StandardFormParams,
    _as_cov,
    beamsplitter,
    ensure_physical,
    is_physical,
    standard_form,
    standard_form_matrix,
    symplectic_spectrum,
    tmss,
)


def symmetrize(V) -> np.ndarray:
    """Average the x and p correlation magnitudes of a standard-form state.

    Replaces (c1, c2) by +-(|c1| + |c2|)/2 and returns the standard-form
    matrix; if the averaged state leaks past the physical boundary it is
    clipped back with a warning.
    """
    p = standard_form(ensure_physical(V))
    c = (abs(p.c1) + abs(p.c2)) / 2.0
    out = standard_form_matrix(StandardFormParams(p.m, p.n, c, -c))
    if not is_physical(out, tol=1e-12):
        warnings.warn("symmetrized state clipped back to the physical boundary", stacklevel=2)
        lo, hi = 0.0, c
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            W = standard_form_matrix(StandardFormParams(p.m, p.n, mid, -mid))
            if is_physical(W, tol=1e-12):
                lo = mid
            else:
                hi = mid
        out = standard_form_matrix(StandardFormParams(p.m, p.n, lo, -lo))
    return out


@dataclass(frozen=True)
class ExtendedState:
    """Pure four-mode extension (A, B, E1, E2) of a two-mode state."""

    covariance: np.ndarray
    squeezing: float
    transmissivity: float
    env_variance: float


def _fit_channel_model(V_sym: np.ndarray):
    """Moment-match V_sym = TMSS(r) -> thermal loss(eta, nu_env) on mode B."""
    p = standard_form(V_sym)
    m, n, c = p.m, p.n, p.c1
    if m < 1.0 - 1e-9:
        raise DecompositionError("mode-A variance below vacuum")
    m = max(m, 1.0)
    r = 0.5 * np.arccosh(m)
    sh = np.sqrt(max(m * m - 1.0, 0.0))
    if sh == 0.0:
        if abs(c) > 1e-6:
            raise DecompositionError("correlations incompatible with an unsqueezed source")
        eta = 0.0
    else:
        eta = float((c / sh) ** 2)
    if eta > 1.0 + 1e-6:
        raise DecompositionError(
            f"state needs transmissivity {eta:.6g} > 1; outside the loss/noise family"
        )
    eta = min(eta, 1.0)
    xi = n - eta * m - (1.0 - eta)
    if xi < -1e-6:
        raise DecompositionError(f"state needs negative excess noise {xi:.3g}")
    xi = max(xi, 0.0)
    nu_env = 1.0 + xi / (1.0 - eta) if eta < 1.0 - 1e-12 else 1.0
    return float(r), eta, float(nu_env)


def channel_purification(V) -> ExtendedState:
    """Pure (A, B, E1, E2) covariance whose AB marginal reproduces V.

    Modes: 0 = A, 1 = B, 2 = loss port E1, 3 = thermal partner E2.
    """
    V_sym = symmetrize(V)
    r, eta, nu_env = _fit_channel_model(V_sym)
    s = 0.5 * np.arccosh(max(nu_env, 1.0))
    full = np.eye(8)
    full[:4, :4] = tmss(r)
    full[4:, 4:] = tmss(s)
    S = beamsplitter(eta, n_modes=4, modes=(1, 2))
    return ExtendedState(S @ full @ S.T, r, eta, nu_env)


def _reduce(V: np.ndarray, keep) -> np.ndarray:
    idx = np.concatenate([[2 * k, 2 * k + 1] for k in keep])
    return V[np.ix_(idx, idx)]


def _entropy(V: np.ndarray) -> float:
    nus = np.maximum(symplectic_spectrum(V), 1.0)
    return float(np.sum(entropy_g(nus)))


def squashed_upper_bound(V) -> float:
    """Half the conditional mutual information I(A:B|E) of the squashed extension.

    E is one output of a balanced beamsplitter applied to the loss port of
    the channel purification; the value upper-bounds the squashed
    entanglement of the (symmetrized) input state.
    """
    ext = channel_purification(V)
    wide = np.eye(10)
    wide[:8, :8] = ext.covariance
    S = beamsplitter(0.5, n_modes=5, modes=(2, 4))
    W = S @ wide @ S.T
    s_ae = _entropy(_reduce(W, [0, 2]))
    s_be = _entropy(_reduce(W, [1, 2]))
    s_e = _entropy(_reduce(W, [2]))
    s_abe = _entropy(_reduce(W, [0, 1, 2]))
    return max(0.0, 0.5 * (s_ae + s_be - s_e - s_abe))
