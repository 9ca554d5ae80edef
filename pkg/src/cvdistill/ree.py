"""Gaussian relative entropy of entanglement, with a truncated-Fock validation oracle.

The closed-form relative entropy between zero-mean Gaussian states rests on
the Gibbs representation rho = exp(-x^T G x / 2) / Z with
G = i Omega arccoth(V i Omega) and Z a function of the symplectic spectrum.
The Fock-space oracle reproduces the same quantity with dense matrix
functions on a photon-number-truncated basis and is used in tests to pin
the closed form down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln

from .errors import DecompositionError, DegenerateStateError, PhysicalityError
from .measures import vn_entropy
from .symplectic import (
    OMEGA,
    StandardFormParams,
    _as_cov,
    partial_transpose,
    pt_spectrum,
    standard_form,
    standard_form_matrix,
    symplectic_spectrum,
    to_standard_form,
)

_BOUNDARY_SLACK = 1e-9


def _gibbs_exponent(V: np.ndarray) -> np.ndarray:
    """Exponent matrix G of rho = exp(-x^T G x / 2)/Z for covariance V."""
    i_omega = 1j * OMEGA
    w, P = np.linalg.eig(V @ i_omega)
    arccoth = 0.5 * np.log((w + 1.0) / (w - 1.0))
    F = P @ np.diag(arccoth) @ np.linalg.inv(P)
    G = (i_omega @ F).real
    return 0.5 * (G + G.T)


def _log_partition(nus: np.ndarray) -> float:
    return float(np.sum(0.5 * np.log(nus * nus - 1.0) - np.log(2.0)))


def gaussian_relative_entropy(V1, V2) -> float:
    """S(rho1 || rho2) in nats for zero-mean Gaussian states.

    V2 must be strictly physical so that log rho2 exists; a boundary V2
    yields 0 for V1 == V2 and +inf otherwise.
    """
    V1 = _as_cov(V1)
    V2 = _as_cov(V2)
    nus1 = symplectic_spectrum(V1)
    if nus1.min() < 1.0 - _BOUNDARY_SLACK:
        raise PhysicalityError("first argument is not a physical state")
    nus2 = symplectic_spectrum(V2)
    if nus2.min() <= 1.0 + _BOUNDARY_SLACK:
        if np.abs(V1 - V2).max() <= 1e-12:
            return 0.0
        return math.inf
    s1 = vn_entropy(V1)
    G2 = _gibbs_exponent(V2)
    val = -s1 + 0.5 * float(np.trace(G2 @ V1)) + _log_partition(nus2)
    return max(val, 0.0)


# ---------------------------------------------------------------------------
# Gaussian relative entropy of entanglement
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GreeResult:
    gree_nats: float
    closest_separable: np.ndarray
    iterations: int
    converged: bool
    multistart_spread: float


def _qsym_matrix(a: float, b: float, c: float) -> np.ndarray:
    return standard_form_matrix(StandardFormParams(a, b, c, -c))


def _invariants(W: np.ndarray):
    """(det M, det N, det C, det W) with cheap 2x2 determinants."""
    dm = W[0, 0] * W[1, 1] - W[0, 1] * W[1, 0]
    dn = W[2, 2] * W[3, 3] - W[2, 3] * W[3, 2]
    dc = W[0, 2] * W[1, 3] - W[0, 3] * W[1, 2]
    return dm, dn, dc, float(np.linalg.det(W))


def _fast_nus(W: np.ndarray):
    """Two-mode symplectic spectrum and PT spectrum from local invariants."""
    dm, dn, dc, dw = _invariants(W)
    out = []
    for delta in (dm + dn + 2.0 * dc, dm + dn - 2.0 * dc):
        rad = max(delta * delta - 4.0 * dw, 0.0)
        s = np.sqrt(rad)
        out.append(
            (
                np.sqrt(max((delta + s) / 2.0, 0.0)),
                np.sqrt(max((delta - s) / 2.0, 0.0)),
            )
        )
    return out[0], out[1]  # (nu+, nu-), (pt nu+, pt nu-)


def _boundary_c(a: float, b: float) -> float:
    """Correlation placing the quadrature-symmetric state (a, b, c) on the PT boundary."""
    u = (a * b + 1.0) - np.sqrt(max((a * b + 1.0) ** 2 - (a * a - 1.0) * (b * b - 1.0), 0.0))
    return float(np.sqrt(max(u, 0.0)))


def _nu_min(V: np.ndarray) -> float:
    return float(symplectic_spectrum(V).min())


def _project_to_separable(V_sf: np.ndarray) -> np.ndarray:
    """Shrink the correlation block of a standard-form state onto the PPT set."""
    p = standard_form(V_sf)
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        W = standard_form_matrix(StandardFormParams(p.m, p.n, mid * p.c1, mid * p.c2))
        if pt_spectrum(W).nu_minus >= 1.0 + 1e-9 and _nu_min(W) > 1.0 + 1e-9:
            lo = mid
        else:
            hi = mid
    return standard_form_matrix(StandardFormParams(p.m, p.n, lo * p.c1, lo * p.c2))


def _chol_params(W: np.ndarray) -> np.ndarray:
    return np.linalg.cholesky(W)[np.tril_indices(4)]


def _unpack_chol(theta: np.ndarray) -> np.ndarray:
    L = np.zeros((4, 4))
    L[np.tril_indices(4)] = theta
    return L @ L.T


def gree(V, n_starts: int = 8, seed: int = 0) -> GreeResult:
    """Gaussian relative entropy of entanglement via constrained minimization.

    Minimizes the relative entropy to states W obeying both uncertainty
    relations W + i Omega >= 0 and PT(W) + i Omega >= 0 (PPT, equivalent
    to separability for two-mode Gaussian states).  Strategy: a smooth
    search on the PT-boundary manifold of quadrature-symmetric candidates
    seeds a multi-start simplex descent over a Cholesky factor of W with a
    penalty enforcing the PPT constraint; starts are identity-seeded,
    input-state-projected, and randomized.
    """
    V = _as_cov(V)
    if pt_spectrum(V).nu_minus >= 1.0 - _BOUNDARY_SLACK:
        return GreeResult(0.0, V.copy(), 0, True, 0.0)

    # relative entropy is invariant under joint symplectics and separability
    # under local ones, so optimize in V's standard-form frame
    V_sf, S_loc = to_standard_form(V)
    S_inv = np.linalg.inv(S_loc)
    s_target = vn_entropy(V_sf)
    iterations = 0

    def relent_with(W: np.ndarray, nus) -> float:
        lz = float(np.sum(0.5 * np.log(np.array(nus) ** 2 - 1.0) - np.log(2.0)))
        return -s_target + 0.5 * float(np.trace(_gibbs_exponent(W) @ V_sf)) + lz

    def relent(W: np.ndarray) -> float:
        nus, _ = _fast_nus(W)
        return relent_with(W, nus)

    # stage A: smooth 2-parameter search on the quadrature-symmetric PT boundary
    def stage_a_objective(x):
        a = 1.0 + 1e-7 + np.exp(x[0])
        b = 1.0 + 1e-7 + np.exp(x[1])
        W = _qsym_matrix(a, b, _boundary_c(a, b))
        nus, _ = _fast_nus(W)
        if min(nus) <= 1.0 + _BOUNDARY_SLACK:
            return 1e6
        return relent_with(W, nus)

    p = standard_form(V_sf)
    x0 = np.log([max(p.m - 1.0, 1e-3), max(p.n - 1.0, 1e-3)])
    best_a = None
    for start in (x0, x0 + np.log(0.5), np.zeros(2)):
        res = minimize(
            stage_a_objective,
            start,
            method="Nelder-Mead",
            options=dict(maxiter=800, xatol=1e-10, fatol=1e-13),
        )
        iterations += res.nit
        if best_a is None or res.fun < best_a[0]:
            best_a = (res.fun, res.x)
    a = 1.0 + 1e-7 + np.exp(best_a[1][0])
    b = 1.0 + 1e-7 + np.exp(best_a[1][1])
    W_stage_a = _qsym_matrix(a, b, _boundary_c(a, b))

    penalty = 1e4

    def penalized(W: np.ndarray) -> float:
        nus, pt_nus = _fast_nus(W)
        numin = min(nus)
        pen = penalty * max(0.0, 1.0 - min(pt_nus))
        if numin <= 1.0 + _BOUNDARY_SLACK:
            return 1e4 + penalty * (1.0 + _BOUNDARY_SLACK - numin) + pen
        return relent_with(W, nus) + pen

    # stage A': 4-parameter standard-form refinement (captures c1 != -c2 optima)
    def stage_a2_objective(x):
        a, b, c1, c2 = x
        if a < 1.0 or b < 1.0:
            return 1e8
        W = standard_form_matrix(StandardFormParams(a, b, c1, c2))
        return penalized(W)

    res = minimize(
        stage_a2_objective,
        np.array([a, b, _boundary_c(a, b), -_boundary_c(a, b)]),
        method="Nelder-Mead",
        options=dict(maxiter=1200, xatol=1e-9, fatol=1e-13),
    )
    iterations += res.nit
    a2_val = float(res.fun)
    W_stage_a2 = standard_form_matrix(StandardFormParams(*res.x))
    if a2_val > best_a[0]:
        a2_val = float(best_a[0])
        W_stage_a2 = W_stage_a

    # stage B: multi-start simplex descent over a Cholesky factor of W
    def objective(theta):
        return penalized(_unpack_chol(theta))

    rng = np.random.default_rng(seed)
    base = _chol_params(W_stage_a2)
    starts = [
        base,
        _chol_params(_project_to_separable(V_sf)),
        _chol_params((1.0 + 1e-4) * np.eye(4)),
    ]
    while len(starts) < n_starts:
        starts.append(base * (1.0 + 0.05 * rng.standard_normal(base.shape)))

    # the structured stage already produced one candidate value; stage-B runs
    # confirm it (or beat it) and stop as soon as two routes agree
    results = [(a2_val, base)]
    for theta0 in starts:
        res = minimize(
            objective,
            theta0,
            method="Nelder-Mead",
            options=dict(maxiter=1200, xatol=1e-7, fatol=1e-10),
        )
        iterations += res.nit
        results.append((float(res.fun), res.x))
        vals = sorted(v for v, _ in results)
        if len(vals) >= 2 and vals[1] - vals[0] < 1e-5:
            break

    results.sort(key=lambda t: t[0])
    spread = results[1][0] - results[0][0] if len(results) > 1 else 0.0
    converged = spread <= 1e-4

    # tie-breaking: among near-minimal candidates keep the W closest to V
    tied = [th for val, th in results if val - results[0][0] < 1e-6]
    W_best = min(
        (_unpack_chol(th) for th in tied),
        key=lambda W: float(np.linalg.norm(W - V_sf)),
    )
    # safeguard: keep the reported state on the separable side of the boundary
    if _fast_nus(W_best)[1][1] < 1.0:
        W_best = _project_to_separable(W_best)
    value = max(relent(W_best), 0.0)
    W_orig = S_inv @ W_best @ S_inv.T
    return GreeResult(float(value), W_orig, int(iterations), bool(converged), float(spread))


# ---------------------------------------------------------------------------
# truncated-Fock oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FockStateMatrix:
    """Dense two-mode density matrix on a photon-number-truncated basis."""

    amplitudes: np.ndarray
    n_max: int
    trace_deficit: float
    truncation_warning: bool


def _schmidt_probs(r: float, n_max: int) -> np.ndarray:
    lam = np.tanh(r)
    n = np.arange(n_max + 1)
    if lam == 0.0:
        p = np.zeros(n_max + 1)
        p[0] = 1.0
        return p
    return (1.0 - lam * lam) * lam ** (2 * n)


def fock_lossy_tmsv(r: float, eta: float, n_max: int) -> FockStateMatrix:
    """Two-mode squeezed vacuum with loss eta on mode B, in the Fock basis.

    Built from the Schmidt series p_n = (1 - tanh^2 r) tanh^(2n) r and the
    binomial loss Kraus operators acting on mode B.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmissivity must be in [0, 1], got {eta}")
    if n_max > 60:
        raise ValueError("n_max above 60 is not supported")
    if not np.isfinite(r) or r < 0:
        raise ValueError(f"squeezing parameter must be a finite nonnegative real, got {r}")
    d = n_max + 1
    p = _schmidt_probs(r, n_max)
    amp = np.sqrt(p)
    rho = np.zeros((d, d, d, d))
    ns = np.arange(d)
    for k in range(d):
        m = ns[ns >= k]
        if eta == 0.0:
            coef = np.where(m == k, 1.0, 0.0)
        elif eta == 1.0:
            coef = np.where(k == 0, 1.0, 0.0) * np.ones_like(m, dtype=float)
        else:
            logc = 0.5 * (
                gammaln(m + 1)
                - gammaln(k + 1)
                - gammaln(m - k + 1)
                + (m - k) * np.log(eta)
                + k * np.log(1.0 - eta)
            )
            coef = np.exp(logc)
        vec = amp[m] * coef  # component on |m>_A |m-k>_B
        if not np.any(vec):
            continue
        block = np.outer(vec, vec)
        rho[m[:, None], (m - k)[:, None], m[None, :], (m - k)[None, :]] += block
    mat = rho.reshape(d * d, d * d)
    deficit = float(1.0 - np.trace(mat))
    return FockStateMatrix(mat, n_max, deficit, deficit > 1e-6)


def fock_quadrature_symmetric(m: float, n: float, c: float, n_max: int,
                              n_work: int | None = None) -> FockStateMatrix:
    """Fock matrix of the quadrature-symmetric Gaussian state (m, n, c).

    Fits the state as two-mode squeezing, then a thermal-loss channel on
    mode B realized as attenuator followed by amplifier Kraus compositions.
    Raises DecompositionError when the state lies outside that family.
    """
    if n_max > 60:
        raise ValueError("n_max above 60 is not supported")
    if m < 1.0 - 1e-9 or n < 1.0 - 1e-9:
        raise DecompositionError("diagonal variances below vacuum")
    m = max(m, 1.0)
    r = 0.5 * np.arccosh(m)
    sh = np.sqrt(max(m * m - 1.0, 0.0))
    if sh == 0.0:
        if abs(c) > 1e-9:
            raise DecompositionError("correlations incompatible with a vacuum A mode")
        eta = 0.0
    else:
        eta = float((c / sh) ** 2)
    if eta > 1.0 + 1e-6:
        raise DecompositionError(f"required transmissivity {eta:.6g} exceeds 1")
    eta = min(eta, 1.0)
    xi = n - eta * m - (1.0 - eta)
    if xi < -1e-6:
        raise DecompositionError(f"required excess noise {xi:.3g} is negative")
    xi = max(xi, 0.0)
    # thermal-loss split: attenuate to eta1 = eta/G then amplify by G;
    # the composite adds 2G - eta - 1 units of noise, so G = 1 + xi/2
    gain = 1.0 + xi / 2.0
    eta1 = eta / gain
    if n_work is None:
        n_work = min(n_max + 24, 84)
    dw = n_work + 1
    amp = np.sqrt(_schmidt_probs(r, n_work))
    ms = np.arange(dw)
    ginv = 1.0 / gain

    def att_coef(k):
        # <m-k|K_k|m> on the source photon numbers m >= k
        src = ms[ms >= k]
        if eta1 == 0.0:
            return src, np.where(src == k, 1.0, 0.0)
        if eta1 == 1.0:
            return src, np.where(np.full(src.shape, k == 0), 1.0, 0.0)
        logc = 0.5 * (
            gammaln(src + 1)
            - gammaln(k + 1)
            - gammaln(src - k + 1)
            + (src - k) * np.log(eta1)
            + k * np.log(1.0 - eta1)
        )
        return src, np.exp(logc)

    def amp_coef(ell, b):
        # <b+l|B_l|b> elementwise on B photon numbers b
        if gain <= 1.0 + 1e-15:
            return np.where(np.full(b.shape, ell == 0), 1.0, 0.0)
        logc = (
            0.5
            * (gammaln(b + ell + 1) - gammaln(ell + 1) - gammaln(b + 1)
               + ell * np.log(1.0 - ginv))
            + (b + 1) * 0.5 * np.log(ginv)
        )
        return np.exp(logc)

    # both channel stages conserve the photon-number difference m_A - m_B,
    # so the output splits into shift blocks accumulated from Kraus vectors
    blocks: dict[int, np.ndarray] = {}
    l_max = 0 if gain <= 1.0 + 1e-15 else dw - 1
    for k in range(dw):
        src, att = att_coef(k)
        base = amp[src] * att
        if not np.any(np.abs(base) > 1e-18):
            if k > 0 and eta1 not in (0.0, 1.0):
                break
            continue
        for ell in range(l_max + 1):
            b = src - k
            keep = b + ell <= n_work
            if not np.any(keep):
                break
            vec_m = src[keep]
            vec = base[keep] * amp_coef(ell, b[keep])
            if not np.any(np.abs(vec) > 1e-18):
                if ell > 4:
                    break
                continue
            s = k - ell
            block = blocks.setdefault(s, np.zeros((dw, dw)))
            block[np.ix_(vec_m, vec_m)] += np.outer(vec, vec)

    d = n_max + 1
    rho = np.zeros((d, d, d, d))
    for s, block in blocks.items():
        lo = max(0, s)
        hi = min(n_max, n_max + s)
        if lo > hi:
            continue
        idx = np.arange(lo, hi + 1)
        rho[idx[:, None], (idx - s)[:, None], idx[None, :], (idx - s)[None, :]] = block[
            np.ix_(idx, idx)
        ]
    mat = rho.reshape(d * d, d * d)
    deficit = float(1.0 - np.trace(mat))
    return FockStateMatrix(mat, n_max, deficit, deficit > 1e-6)


def fock_relative_entropy(rho1: FockStateMatrix, rho2: FockStateMatrix) -> float:
    """tr rho1 (log rho1 - log rho2) by dense eigendecomposition."""
    if rho1.n_max != rho2.n_max:
        raise ValueError("density matrices must share the same truncation")
    a = 0.5 * (rho1.amplitudes + rho1.amplitudes.T.conj())
    b = 0.5 * (rho2.amplitudes + rho2.amplitudes.T.conj())
    w1, u1 = np.linalg.eigh(a)
    w2, u2 = np.linalg.eigh(b)
    if w2.min() < -1e-10:
        raise DegenerateStateError(
            f"second state is not positive semidefinite: min eigenvalue {w2.min():.3g}"
        )
    support = w1 > 1e-16
    term1 = float(np.sum(w1[support] * np.log(w1[support])))
    w2c = np.clip(w2, 1e-300, None)
    weights = np.real(np.diag(u2.T.conj() @ a @ u2))
    term2 = float(np.sum(weights * np.log(w2c)))
    return max(term1 - term2, 0.0)
