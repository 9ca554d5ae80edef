"""Measurement-based noiseless linear amplification.

The emulation is pure data processing on heterodyne outcomes: each Bob
outcome alpha is kept with the cutoff filter probability and survivors are
rescaled alpha -> alpha / g.

Heterodyne convention (shared with the pipeline and the file formats):
the dual-quadrature outcome components are x_h = (x_B + x_vac)/sqrt(2) and
p_h = (p_B - p_vac')/sqrt(2) with independent vacua, the complex outcome is
alpha = (x_h + i p_h)/sqrt(2), and the inferred-state inversion is
V_B = 2 Var(h) - 1 with cross covariances scaled by sqrt(2).  This makes
the gain g and cutoff alpha_c dimensionless in vacuum units.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import dblquad

from .errors import DivergenceError, QuadratureConvergenceError, StarvationError
from .symplectic import _as_cov, blocks

_CHUNK = 65536


@dataclass(frozen=True)
class FilterParams:
    """Amplitude gain g >= 1 and heterodyne-amplitude cutoff alpha_c >= 0."""

    gain: float
    cutoff: float

    def __post_init__(self):
        if not np.isfinite(self.gain) or self.gain < 1.0:
            raise ValueError(f"gain must be a finite real >= 1, got {self.gain}")
        if not np.isfinite(self.cutoff) or self.cutoff < 0.0:
            raise ValueError(f"cutoff must be a finite nonnegative real, got {self.cutoff}")


@dataclass(frozen=True)
class EffectiveState:
    """Post-selected effective state with its success probability."""

    covariance: np.ndarray
    p_success: float
    method: str
    stderr: np.ndarray | None = None
    n_accepted: int | None = None


def acceptance_probability(alpha, fp: FilterParams):
    """Cutoff filter: exp((1 - 1/g^2)(|alpha|^2 - alpha_c^2)) inside the cutoff, else 1."""
    alpha = np.asarray(alpha, dtype=complex)
    tau = 1.0 - 1.0 / fp.gain**2
    mag2 = np.abs(alpha) ** 2
    out = np.where(
        mag2 <= fp.cutoff**2,
        np.exp(tau * (mag2 - fp.cutoff**2)),
        1.0,
    )
    return out if out.ndim else float(out)


def rescale(alpha, g: float):
    """Deterministic post-filter rescaling alpha -> alpha / g."""
    if g < 1.0:
        raise ValueError(f"gain must be >= 1, got {g}")
    alpha = np.asarray(alpha, dtype=complex)
    out = alpha / g
    return out if out.ndim else complex(out)


def _heterodyne_joint(V: np.ndarray) -> np.ndarray:
    """Joint covariance of (x_A, p_A, x_h, p_h) after heterodyning mode B."""
    M, N, C = blocks(V)
    out = np.zeros((4, 4))
    out[:2, :2] = M
    out[2:, 2:] = 0.5 * (N + np.eye(2))
    out[:2, 2:] = C / np.sqrt(2.0)
    out[2:, :2] = out[:2, 2:].T
    return out


def invert_heterodyne(joint: np.ndarray) -> np.ndarray:
    """Undo the heterodyne vacuum penalty on the (x_h, p_h) sector."""
    out = np.zeros((4, 4))
    out[:2, :2] = joint[:2, :2]
    out[2:, 2:] = 2.0 * joint[2:, 2:] - np.eye(2)
    out[:2, 2:] = np.sqrt(2.0) * joint[:2, 2:]
    out[2:, :2] = out[:2, 2:].T
    return 0.5 * (out + out.T)


def ideal_nla_state(V, g: float) -> np.ndarray:
    """Effective Gaussian state for the infinite-cutoff filter, in closed form.

    Reweights the joint Gaussian of Alice and Bob's heterodyne record by
    exp((1 - 1/g^2)|alpha|^2), rescales the record by 1/g, and inverts the
    heterodyne penalty.  Diverges unless (1 - 1/g^2) lambda_max < 1 with
    lambda_max the largest eigenvalue of the heterodyne-outcome covariance
    (g tanh r < 1 for a two-mode squeezed vacuum).
    """
    V = _as_cov(V)
    if g < 1.0:
        raise ValueError(f"gain must be >= 1, got {g}")
    if g == 1.0:
        return V.copy()
    joint = _heterodyne_joint(V)
    tau = 1.0 - 1.0 / g**2
    lam = float(np.linalg.eigvalsh(joint[2:, 2:]).max())
    if tau * lam >= 1.0 - 1e-9:
        raise DivergenceError(
            f"filter weight not integrable: (1 - 1/g^2) * {lam:.6g} >= 1 at gain {g}"
        )
    reweight = np.diag([0.0, 0.0, tau, tau])
    joint_post = np.linalg.inv(np.linalg.inv(joint) - reweight)
    scale = np.diag([1.0, 1.0, 1.0 / g, 1.0 / g])
    return invert_heterodyne(scale @ joint_post @ scale.T)


def success_probability(V, fp: FilterParams) -> float:
    """Average acceptance probability over Bob's heterodyne outcome density.

    Splits the average into the filtered disk contribution and the
    pass-through tail, both positive adaptive quadratures (relative
    tolerance 1e-6), so small probabilities keep full relative accuracy.
    """
    V = _as_cov(V)
    if fp.gain == 1.0 or fp.cutoff == 0.0:
        return 1.0
    sigma = 0.5 * (blocks(V)[1] + np.eye(2))  # covariance of (x_h, p_h)
    prec = np.linalg.inv(sigma)
    norm = 1.0 / (2.0 * np.pi * np.sqrt(np.linalg.det(sigma)))
    tau = 1.0 - 1.0 / fp.gain**2
    radius = np.sqrt(2.0) * fp.cutoff

    def density(theta, rho):
        v = np.array([rho * np.cos(theta), rho * np.sin(theta)])
        return norm * np.exp(-0.5 * v @ prec @ v) * rho

    def disk_integrand(theta, rho):
        return density(theta, rho) * np.exp(tau * (rho * rho / 2.0 - fp.cutoff**2))

    disk, err_disk = dblquad(
        disk_integrand, 0.0, radius, 0.0, 2.0 * np.pi, epsabs=1e-14, epsrel=1e-8
    )
    sig_max = np.sqrt(float(np.linalg.eigvalsh(sigma).max()))
    outer_lim = radius + 12.0 * sig_max
    tail, err_tail = dblquad(
        density, radius, outer_lim, 0.0, 2.0 * np.pi, epsabs=1e-16, epsrel=1e-8
    )
    p = disk + tail
    err = err_disk + err_tail
    if not np.isfinite(p) or err > max(1e-6 * p, 1e-13):
        raise QuadratureConvergenceError(
            f"success-probability quadrature error {err:.3g} exceeds tolerance at p = {p:.3g}"
        )
    return float(min(p, 1.0))


def acceptance_mask(records, fp: FilterParams, seed, workers: int = 1,
                    chunk_size: int = _CHUNK) -> np.ndarray:
    """Seeded accept/reject decisions for a shot stream (as used by mc_distill)."""
    return _accept_mask(records.bob_x, records.bob_p, fp, seed, chunk_size, workers)


def _accept_mask(bob_x, bob_p, fp: FilterParams, seed, chunk_size: int, workers: int):
    """Chunk-seeded accept/reject decisions, independent of worker count."""
    n = bob_x.size
    tau = 1.0 - 1.0 / fp.gain**2
    mag2 = 0.5 * (bob_x**2 + bob_p**2)
    prob = np.where(mag2 <= fp.cutoff**2, np.exp(tau * (mag2 - fp.cutoff**2)), 1.0)
    n_chunks = (n + chunk_size - 1) // chunk_size
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    mask = np.zeros(n, dtype=bool)

    def run(i):
        sl = slice(i * chunk_size, min((i + 1) * chunk_size, n))
        u = np.random.default_rng(children[i]).random(sl.stop - sl.start)
        mask[sl] = u < prob[sl]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, range(n_chunks)))
    else:
        for i in range(n_chunks):
            run(i)
    return mask


def mc_distill(records, fp: FilterParams, seed, workers: int = 1,
               chunk_size: int = _CHUNK) -> EffectiveState:
    """Monte Carlo post-selection of a shot stream.

    Accepts each shot with the filter probability using chunk-derived seeds
    (associative over chunks, so the output is independent of the worker
    count), rescales accepted heterodyne outcomes by 1/g, and re-estimates
    the covariance with the heterodyne penalty inverted.
    """
    from . import pipeline

    if len(records) < 10**4:
        raise ValueError(f"need at least 1e4 shots for distillation, got {len(records)}")
    if fp.gain == 1.0:
        est = pipeline.estimate_covariance(records)
        return EffectiveState(est.covariance, 1.0, "monte-carlo", est.stderr, len(records))
    mask = _accept_mask(records.bob_x, records.bob_p, fp, seed, chunk_size, workers)
    n_acc = int(mask.sum())
    if n_acc < 100:
        raise StarvationError(
            f"only {n_acc} of {len(records)} shots survived post-selection"
        )
    survivors = records.select(mask).rescale_bob(1.0 / fp.gain)
    est = pipeline.estimate_covariance(survivors)
    return EffectiveState(
        est.covariance, n_acc / len(records), "monte-carlo", est.stderr, n_acc
    )
