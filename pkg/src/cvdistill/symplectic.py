"""Symplectic linear algebra for two-mode Gaussian states.

Conventions used throughout the toolkit:

* quadrature ordering is xpxp: (x_A, p_A, x_B, p_B);
* covariance matrices are dimensionless with the vacuum variance
  normalized to 1 (the hbar = 2 convention).  Callers holding hbar = 1
  data must rescale before entering the toolkit;
* mode A is the retained (verification) mode, mode B the transmitted one.

A two-mode covariance matrix V is physical when V + i*Omega >= 0,
equivalently when both symplectic eigenvalues are >= 1.  Measured
matrices sit within noise of that boundary, so validation accepts a
1e-9 slack and clips eigenvalues in [1 - 1e-9, 1) up to the boundary
with a warning.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateStateError, PhysicalityError

PHYSICALITY_TOL = 1e-9

OMEGA1 = np.array([[0.0, 1.0], [-1.0, 0.0]])
PAULI_Z = np.diag([1.0, -1.0])


_OMEGA_CACHE: dict[int, np.ndarray] = {}


def omega(n_modes: int) -> np.ndarray:
    """Symplectic form for n modes in xpxp ordering."""
    if n_modes not in _OMEGA_CACHE:
        _OMEGA_CACHE[n_modes] = np.kron(np.eye(n_modes), OMEGA1)
    return _OMEGA_CACHE[n_modes]


OMEGA = omega(2)

MEASURE_IDS = (
    "logneg",
    "eof",
    "ree_distillable",
    "rci",
    "steering_fwd",
    "steering_rev",
    "coherent_info",
)


@dataclass(frozen=True)
class StandardFormParams:
    """Local-unitary invariants (m, n, c1, c2) of the standard form.

    Sign convention: c1 >= 0 and |c1| >= |c2|.
    """

    m: float
    n: float
    c1: float
    c2: float


@dataclass(frozen=True)
class PtSpectrum:
    """Symplectic spectrum of the partially transposed state."""

    nu_plus: float
    nu_minus: float
    delta_tilde: float


def _as_cov(V) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    if V.shape != (4, 4):
        raise ValueError(f"expected a 4x4 covariance matrix, got shape {V.shape}")
    if not np.all(np.isfinite(V)):
        raise ValueError("covariance matrix contains non-finite entries")
    if np.abs(V - V.T).max() > 1e-12 * max(1.0, np.abs(V).max()):
        raise ValueError("covariance matrix is not symmetric within 1e-12")
    return 0.5 * (V + V.T)


def blocks(V: np.ndarray):
    """Return the 2x2 blocks (M, N, C) of the xpxp block form."""
    return V[:2, :2], V[2:, 2:], V[:2, 2:]


# ---------------------------------------------------------------------------
# symplectic building blocks
# ---------------------------------------------------------------------------


def rotation(theta: float) -> np.ndarray:
    """Single-mode phase rotation."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def squeezer(z: float) -> np.ndarray:
    """Single-mode squeezer, x variance scaled by e^(-2z)."""
    return np.diag([np.exp(-z), np.exp(z)])


def local_symplectic(sa: np.ndarray, sb: np.ndarray) -> np.ndarray:
    """Direct sum of single-mode symplectics acting on A and B."""
    out = np.zeros((4, 4))
    out[:2, :2] = sa
    out[2:, 2:] = sb
    return out


def beamsplitter(t: float, n_modes: int = 2, modes=(0, 1)) -> np.ndarray:
    """Beamsplitter of transmissivity t between two modes of an n-mode system."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"transmissivity must be in [0, 1], got {t}")
    S = np.eye(2 * n_modes)
    i, j = modes
    si, sj = slice(2 * i, 2 * i + 2), slice(2 * j, 2 * j + 2)
    a, b = np.sqrt(t), np.sqrt(1.0 - t)
    S[si, si] = a * np.eye(2)
    S[si, sj] = b * np.eye(2)
    S[sj, si] = -b * np.eye(2)
    S[sj, sj] = a * np.eye(2)
    return S


def two_mode_squeezer(r: float) -> np.ndarray:
    """Symplectic matrix of the two-mode squeezing operation."""
    ch, sh = np.cosh(r), np.sinh(r)
    return np.block([[ch * np.eye(2), sh * PAULI_Z], [sh * PAULI_Z, ch * np.eye(2)]])


# ---------------------------------------------------------------------------
# states and channels
# ---------------------------------------------------------------------------


def tmss(r: float) -> np.ndarray:
    """Covariance matrix of the two-mode squeezed vacuum with parameter r.

    Diagonal blocks cosh(2r) * I, off-diagonal block sinh(2r) * diag(1, -1):
    x quadratures correlated, p quadratures anti-correlated.
    """
    if not np.isfinite(r) or r < 0:
        raise ValueError(f"squeezing parameter must be a finite nonnegative real, got {r}")
    if r > 25:
        raise ValueError(f"squeezing parameter {r} exceeds the overflow guard r <= 25")
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    return np.block([[ch * np.eye(2), sh * PAULI_Z], [sh * PAULI_Z, ch * np.eye(2)]])


def symplectic_spectrum(V: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues of a 2n x 2n covariance matrix, sorted descending."""
    V = np.asarray(V, dtype=float)
    n = V.shape[0] // 2
    try:
        ev = np.linalg.eigvals(omega(n) @ V)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("eigenvalue computation failed to converge") from exc
    # eigenvalues of Omega V come in +-(i nu) pairs; average each pair
    nus = np.sort(np.abs(ev))
    return np.sort(nus.reshape(n, 2).mean(axis=1))[::-1]


def symplectic_eigenvalues(V) -> tuple[float, float]:
    """The two symplectic eigenvalues (nu_plus, nu_minus) of a two-mode state."""
    V = _as_cov(V)
    if np.any(np.linalg.eigvalsh(V) <= 0):
        raise ValueError("covariance matrix must be positive definite")
    nus = symplectic_spectrum(V)
    return float(nus[0]), float(nus[1])


def is_physical(V, tol: float = PHYSICALITY_TOL) -> bool:
    """True when the least symplectic eigenvalue is >= 1 - tol."""
    V = _as_cov(V)
    if np.any(np.linalg.eigvalsh(V) <= 0):
        return False
    return bool(symplectic_spectrum(V).min() >= 1.0 - tol)


def ensure_physical(V, tol: float = PHYSICALITY_TOL) -> np.ndarray:
    """Validate V; clip eigenvalues in [1 - tol, 1) to the boundary with a warning.

    Eigenvalues within machine precision of the boundary pass untouched;
    values below 1 - tol raise PhysicalityError.
    """
    V = _as_cov(V)
    if np.any(np.linalg.eigvalsh(V) <= 0):
        raise PhysicalityError("covariance matrix is not positive definite")
    nus = symplectic_spectrum(V)
    if nus.min() >= 1.0 - 1e-12:
        return V
    if nus.min() < 1.0 - tol:
        raise PhysicalityError(
            f"unphysical covariance matrix: min symplectic eigenvalue {nus.min():.12g} < 1 - {tol}"
        )
    warnings.warn(
        f"clipping symplectic eigenvalue {nus.min():.12g} to the physical boundary",
        stacklevel=2,
    )
    S, nus = williamson(V)
    D = np.repeat(np.maximum(nus, 1.0), 2)
    return S @ np.diag(D) @ S.T


def williamson(V: np.ndarray):
    """Williamson decomposition V = S diag(nu_i) S^T with S symplectic.

    Works for any 2n x 2n positive-definite V; returns (S, nus) with the
    eigenvalues repeated per quadrature pair in diag(nu_1, nu_1, ...).
    """
    V = np.asarray(V, dtype=float)
    n = V.shape[0] // 2
    w, U = np.linalg.eigh(V)
    if np.any(w <= 0):
        raise ValueError("Williamson decomposition needs a positive-definite matrix")
    Vh = (U * np.sqrt(w)) @ U.T
    Vmh = (U / np.sqrt(w)) @ U.T
    A = Vmh @ omega(n) @ Vmh
    T, Z = sla.schur(0.5 * (A - A.T), output="real")
    for i in range(n):
        if T[2 * i, 2 * i + 1] < 0:
            Z[:, [2 * i, 2 * i + 1]] = Z[:, [2 * i + 1, 2 * i]]
            T[[2 * i, 2 * i + 1]] = T[[2 * i + 1, 2 * i]]
            T[:, [2 * i, 2 * i + 1]] = T[:, [2 * i + 1, 2 * i]]
    nus = np.array([1.0 / T[2 * i, 2 * i + 1] for i in range(n)])
    S = Vh @ Z @ np.diag(np.repeat(1.0 / np.sqrt(nus), 2))
    return S, nus


def partial_transpose(V) -> np.ndarray:
    """Flip the sign of mode B's phase quadrature (time reversal of B)."""
    V = _as_cov(V)
    T = np.diag([1.0, 1.0, 1.0, -1.0])
    return T @ V @ T


def pt_spectrum(V) -> PtSpectrum:
    """Symplectic spectrum of the partial transpose from local invariants.

    Uses nu^2 = (dt +- sqrt(dt^2 - 4 det V)) / 2 with
    dt = det M + det N - 2 det C.
    """
    V = _as_cov(V)
    M, N, C = blocks(V)
    dM, dN, dC = np.linalg.det(M), np.linalg.det(N), np.linalg.det(C)
    dV = np.linalg.det(V)
    dt = dM + dN - 2.0 * dC
    rad = dt * dt - 4.0 * dV
    if rad < -1e-9 * max(dt * dt, 1.0):
        raise PhysicalityError(f"inconsistent covariance matrix: PT discriminant {rad:.3g} < 0")
    s = np.sqrt(max(rad, 0.0))
    nu_plus = np.sqrt(max((dt + s) / 2.0, 0.0))
    nu_minus = np.sqrt(max((dt - s) / 2.0, 0.0))
    return PtSpectrum(float(nu_plus), float(nu_minus), float(dt))


def standard_form(V) -> StandardFormParams:
    """Standard-form parameters (m, n, c1, c2) from local invariants.

    Invariant route: m^2 = det M, n^2 = det N, c1 c2 = det C, and det V
    pins c1^2 + c2^2.  Raises DegenerateStateError when a reduced mode is
    singular.
    """
    V = _as_cov(V)
    M, N, C = blocks(V)
    if np.any(np.linalg.eigvalsh(M) <= 0) or np.any(np.linalg.eigvalsh(N) <= 0):
        raise DegenerateStateError("reduced single-mode state is not positive definite")
    dM, dN, dC = np.linalg.det(M), np.linalg.det(N), np.linalg.det(C)
    dV = np.linalg.det(V)
    m, n = np.sqrt(dM), np.sqrt(dN)
    q = (dM * dN + dC * dC - dV) / (m * n)
    disc = max(q * q - 4.0 * dC * dC, 0.0)
    # determinant roundoff injects O(eps * m * n) noise into the c^2 values
    tiny = 64.0 * np.finfo(float).eps * max(1.0, m * n)
    t_hi = max((q + np.sqrt(disc)) / 2.0, 0.0)
    t_lo = max((q - np.sqrt(disc)) / 2.0, 0.0)
    t_hi = 0.0 if t_hi < tiny else t_hi
    t_lo = 0.0 if t_lo < tiny else t_lo
    c1 = np.sqrt(t_hi)
    c2 = np.copysign(np.sqrt(t_lo), dC) if dC != 0 else np.sqrt(t_lo)
    return StandardFormParams(float(m), float(n), float(c1), float(c2))


def standard_form_matrix(p: StandardFormParams) -> np.ndarray:
    """Covariance matrix of a state in standard form."""
    return np.array(
        [
            [p.m, 0.0, p.c1, 0.0],
            [0.0, p.m, 0.0, p.c2],
            [p.c1, 0.0, p.n, 0.0],
            [0.0, p.c2, 0.0, p.n],
        ]
    )


def to_standard_form(V):
    """Constructive reduction V -> (V_sf, S) with S a local symplectic.

    S = S_A (+) S_B satisfies V_sf = S V S^T with V_sf in standard form
    under the c1 >= 0, |c1| >= |c2| convention.
    """
    V = _as_cov(V)
    M, N, _ = blocks(V)
    if np.any(np.linalg.eigvalsh(M) <= 0) or np.any(np.linalg.eigvalsh(N) <= 0):
        raise DegenerateStateError("reduced single-mode state is not positive definite")

    def _iso(B):
        # det-1 map sending B to sqrt(det B) * I
        L = np.linalg.cholesky(B)
        return np.linalg.det(B) ** 0.25 * np.linalg.inv(L)

    S = local_symplectic(_iso(M), _iso(N))
    W = S @ V @ S.T
    C = W[:2, 2:]
    U, sv, Vt = np.linalg.svd(C)
    eu = np.diag([1.0, np.linalg.det(U)])
    ev = np.diag([1.0, np.linalg.det(Vt)])
    Ra = (U @ eu).T
    Rb = (Vt.T @ ev).T
    S = local_symplectic(Ra, Rb) @ S
    W = S @ V @ S.T
    # scrub numerically tiny off-form entries
    p = StandardFormParams(W[0, 0], W[2, 2], W[0, 2], W[1, 3])
    return standard_form_matrix(p), S


def loss_channel(V, eta: float, mode: str = "B") -> np.ndarray:
    """Pure-loss (beamsplitter) channel of transmissivity eta on one mode."""
    V = _as_cov(V)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmissivity must be in [0, 1], got {eta}")
    if mode not in ("A", "B"):
        raise ValueError(f"mode must be 'A' or 'B', got {mode!r}")
    sl = slice(0, 2) if mode == "A" else slice(2, 4)
    G = np.eye(4)
    G[sl, sl] = np.sqrt(eta) * np.eye(2)
    out = G @ V @ G.T
    out[sl, sl] += (1.0 - eta) * np.eye(2)
    return out


def add_symmetric_noise(V, xi: float) -> np.ndarray:
    """Add xi vacuum units of excess noise to every quadrature."""
    if xi < 0:
        raise ValueError(f"excess noise must be nonnegative, got {xi}")
    return _as_cov(V) + xi * np.eye(4)


# ---------------------------------------------------------------------------
# Choi-limit (deterministic) bounds
# ---------------------------------------------------------------------------


def _g_scalar(nu: float) -> float:
    # stable identity g(nu) = ln((nu+1)/2) + (nu-1) atanh(1/nu)
    if nu <= 1.0 + 1e-12:
        return 0.0
    return float(np.log((nu + 1.0) / 2.0) + (nu - 1.0) * np.arctanh(1.0 / nu))


def _choi_measure_at(eta: float, measure_id: str, r: float) -> float:
    """Stable evaluation of a measure on loss_channel(tmss(r), eta).

    Direct matrix evaluation cancels catastrophically for cosh(2r) ~ 1e12,
    so the lossy-TMSV invariants are formed in factored form first.
    """
    u = 1.0 - eta
    ch = np.cosh(2.0 * r)
    e2r = np.exp(-2.0 * r)
    n = eta * ch + u
    det_sqrt = u * ch + eta  # sqrt(det V), exact for pure loss
    if measure_id == "eof":
        kap_sqrt = u * (ch - 1.0) + 2.0
        lam_minus_sqrt = (1.0 - np.sqrt(eta)) ** 2 * ch + 2.0 * np.sqrt(eta) * e2r + u
        r0 = max(0.5 * np.log(kap_sqrt / lam_minus_sqrt), 0.0)
        ch2, sh2 = np.cosh(r0) ** 2, np.sinh(r0) ** 2
        return float(ch2 * np.log(ch2) - sh2 * np.log(sh2)) if sh2 > 0 else 0.0
    if measure_id == "rci":
        return _g_scalar(ch) - _g_scalar(det_sqrt)
    if measure_id == "coherent_info":
        return _g_scalar(n) - _g_scalar(det_sqrt)
    if measure_id == "steering_fwd":
        return float((u + eta / ch) ** 2)
    if measure_id == "steering_rev":
        return float(((u * ch + eta) / (eta * ch + u)) ** 2)
    raise ValueError(f"unknown measure_id {measure_id!r}")


def choi_bound(eta: float, measure_id: str) -> float:
    """Measure value on the infinite-squeezing state through the loss channel.

    Closed forms: logneg -> ln((1+eta)/(1-eta)); the distillable-entanglement
    / relative-entropy ceiling -> -ln(1-eta).  Remaining measures are
    evaluated at r = 15 and gated against r = 18 (agreement < 1e-6).
    """
    if not 0.0 < eta < 1.0:
        raise ValueError(f"transmissivity must be strictly inside (0, 1), got {eta}")
    if measure_id not in MEASURE_IDS:
        raise ValueError(f"unknown measure_id {measure_id!r}; expected one of {MEASURE_IDS}")
    if measure_id == "logneg":
        return float(np.log((1.0 + eta) / (1.0 - eta)))
    if measure_id == "ree_distillable":
        return float(-np.log(1.0 - eta))
    v15 = _choi_measure_at(eta, measure_id, 15.0)
    v18 = _choi_measure_at(eta, measure_id, 18.0)
    if abs(v15 - v18) >= 1e-6:
        raise RuntimeError(
            f"choi bound for {measure_id} not converged: r=15 and r=18 differ by {abs(v15 - v18):.3g}"
        )
    return float(v18)


# ---------------------------------------------------------------------------
# random-state generators (property tests and multi-start seeding)
# ---------------------------------------------------------------------------


def random_local_symplectic(rng: np.random.Generator) -> np.ndarray:
    """Random rotation-squeezer-rotation on each mode separately."""

    def single():
        return (
            rotation(rng.uniform(0.0, 2.0 * np.pi))
            @ squeezer(rng.uniform(-1.0, 1.0))
            @ rotation(rng.uniform(0.0, 2.0 * np.pi))
        )

    return local_symplectic(single(), single())


def random_symplectic(rng: np.random.Generator) -> np.ndarray:
    """Generic two-mode symplectic: local ops, a beamsplitter, and two-mode squeezing."""
    S = random_local_symplectic(rng)
    S = S @ beamsplitter(rng.uniform(0.05, 0.95))
    S = S @ two_mode_squeezer(rng.uniform(-1.2, 1.2))
    S = S @ random_local_symplectic(rng)
    return S


def random_physical_state(seed) -> np.ndarray:
    """Generic physical two-mode state S diag(nu1, nu1, nu2, nu2) S^T, nu in [1, 5]."""
    rng = np.random.default_rng(seed)
    S = random_symplectic(rng)
    nus = 1.0 + 4.0 * rng.random(2)
    return S @ np.diag(np.repeat(nus, 2)) @ S.T


# ---------------------------------------------------------------------------
# covariance file format
# ---------------------------------------------------------------------------

_HEADER_ORDERING = "xpxp"
_HEADER_HBAR = 2


def save_covariance(path, V) -> None:
    """Write a covariance matrix in the plain-text exchange format.

    Header pins the ordering and hbar conventions; the 16 row-major values
    carry 17 significant digits so the round trip is bit exact.
    """
    V = _as_cov(V)
    vals = " ".join(format(x, ".17g") for x in V.reshape(-1))
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"ordering = {_HEADER_ORDERING}\n")
        fh.write(f"hbar = {_HEADER_HBAR}\n")
        fh.write(f"values = {vals}\n")


def load_covariance(path) -> np.ndarray:
    """Read a covariance matrix written by save_covariance.

    Validates header conventions, the value count, symmetry, and
    physicality (boundary clipping with a warning per the tolerance policy).
    """
    fields = {}
    with open(path, encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key in fields:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            fields[key] = (lineno, value.strip())
    for key in ("ordering", "hbar", "values"):
        if key not in fields:
            raise ValueError(f"{path}: missing required key {key!r}")
    lineno, ordering = fields["ordering"]
    if ordering != _HEADER_ORDERING:
        raise ValueError(f"{path}:{lineno}: unsupported ordering {ordering!r} (need 'xpxp')")
    lineno, hbar = fields["hbar"]
    if float(hbar) != _HEADER_HBAR:
        raise ValueError(f"{path}:{lineno}: unsupported hbar = {hbar} (need 2)")
    lineno, values = fields["values"]
    try:
        vals = np.array([float(tok) for tok in values.split()], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}:{lineno}: malformed value in covariance list: {exc}") from exc
    if vals.size != 16:
        raise ValueError(f"{path}:{lineno}: expected 16 values, got {vals.size}")
    V = vals.reshape(4, 4)
    if np.abs(V - V.T).max() > 1e-12 * max(1.0, np.abs(V).max()):
        raise ValueError(f"{path}: covariance matrix is not symmetric")
    return ensure_physical(V)
