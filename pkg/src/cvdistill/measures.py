"""Entanglement measures and inseparability criteria on two-mode covariance matrices.

All entropic quantities are in nats.  Steering and the sum criterion are
dimensionless criteria values: steering products below 1 certify steering,
sum-criterion values below 2 certify inseparability (vacuum units).
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import DegenerateStateError, PhysicalityError, SymmetryError
from .symplectic import (
    PHYSICALITY_TOL,
    StandardFormParams,
    _as_cov,
    beamsplitter,
    blocks,
    pt_spectrum,
    standard_form,
    standard_form_matrix,
    symplectic_spectrum,
)


def entropy_g(nu):
    """Thermal-mode entropy kernel g(nu), elementwise, g(nu <= 1) = 0.

    Uses g(nu) = ln((nu+1)/2) + (nu-1) atanh(1/nu), which is exact and
    stays accurate for nu up to ~1e15 where the textbook two-term form
    cancels catastrophically.
    """
    nu = np.asarray(nu, dtype=float)
    out = np.zeros_like(nu)
    m = nu > 1.0 + 1e-12
    out[m] = np.log((nu[m] + 1.0) / 2.0) + (nu[m] - 1.0) * np.arctanh(1.0 / nu[m])
    return out if out.ndim else float(out)


def vn_entropy(V) -> float:
    """von Neumann entropy of a Gaussian state from its symplectic spectrum."""
    V = _as_cov(V)
    nus = symplectic_spectrum(V)
    if nus.min() < 1.0 - PHYSICALITY_TOL:
        raise PhysicalityError(
            f"entropy undefined: symplectic eigenvalue {nus.min():.12g} below 1"
        )
    return float(np.sum(entropy_g(np.maximum(nus, 1.0))))


def _single_mode_nu(block: np.ndarray) -> float:
    d = np.linalg.det(block)
    if d <= 0:
        raise DegenerateStateError("reduced single-mode state is singular")
    return float(np.sqrt(d))


def entanglement_entropy(V) -> float:
    """Entropy of either single-mode reduction of a pure two-mode state."""
    V = _as_cov(V)
    nus = symplectic_spectrum(V)
    if np.abs(nus - 1.0).max() > 1e-6:
        raise PhysicalityError(
            f"state is not pure: symplectic eigenvalues {nus} deviate from 1 beyond 1e-6"
        )
    M, N, _ = blocks(V)
    sa = float(entropy_g(_single_mode_nu(M)))
    sb = float(entropy_g(_single_mode_nu(N)))
    if abs(sa - sb) > 1e-9:
        raise PhysicalityError(f"reduction entropies disagree: {sa} vs {sb}")
    return 0.5 * (sa + sb)


def log_negativity(V) -> float:
    """max(0, -ln nu_minus) of the partially transposed spectrum."""
    num = pt_spectrum(V).nu_minus
    if num >= 1.0:
        return 0.0
    return float(-np.log(num))


def ppt_separable(V, tol: float = PHYSICALITY_TOL) -> bool:
    """Separability of a two-mode Gaussian state via the PPT criterion."""
    return pt_spectrum(V).nu_minus >= 1.0 - tol


# ---------------------------------------------------------------------------
# entanglement of formation (analytic, quadrature-symmetric)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EofResult:
    eof_nats: float
    r0: float
    kappa: float
    lambda_plus: float
    lambda_minus: float
    exact: bool


def tmss_entropy(r0: float) -> float:
    """Entanglement entropy of a two-mode squeezed vacuum with parameter r0."""
    ch2 = np.cosh(r0) ** 2
    sh2 = np.sinh(r0) ** 2
    if sh2 == 0.0:
        return 0.0
    return float(ch2 * np.log(ch2) - sh2 * np.log(sh2))


def eof_quadrature_symmetric(V) -> EofResult:
    """Analytic entanglement of formation for quadrature-symmetric states.

    The formula is exact when the standard form satisfies c1 = -c2; inputs
    with larger asymmetry are symmetrized by averaging |c1| and |c2| and the
    result is flagged exact=False (a lower-bound surrogate).
    """
    p = standard_form(V)
    m, n = p.m, p.n
    asym = abs(p.c1 + p.c2)
    c = (abs(p.c1) + abs(p.c2)) / 2.0
    exact = asym <= 1e-6
    det_sym = (m * n - c * c) ** 2
    kappa = 2.0 * (det_sym + 1.0) - (m - n) ** 2
    lam_plus = (m + n + 2.0 * c) ** 2
    lam_minus = (m + n - 2.0 * c) ** 2
    if lam_minus <= 0.0:
        raise ValueError("state sits at the infinite-squeezing boundary (m + n = 2c)")
    # kappa^2 - lam+ lam- in factored form; squaring first would lose half
    # the significant digits whenever the radicand nearly vanishes
    prod = abs((m + n - 2.0 * c) * (m + n + 2.0 * c))
    rad = (kappa - prod) * (kappa + prod)
    if rad < -1e-9 * max(kappa * kappa, 1.0):
        raise ValueError(f"entanglement-of-formation radicand {rad:.3g} is negative")
    rad = max(rad, 0.0)
    r0 = 0.25 * np.log((kappa - np.sqrt(rad)) / lam_minus)
    r0 = max(float(r0), 0.0)
    return EofResult(tmss_entropy(r0), r0, float(kappa), float(lam_plus), float(lam_minus), exact)


# ---------------------------------------------------------------------------
# operational squeezing extraction
# ---------------------------------------------------------------------------


def _require_quadrature_symmetric(V, tol: float = 1e-6) -> np.ndarray:
    V = _as_cov(V)
    M, N, C = blocks(V)
    template = standard_form_matrix(
        StandardFormParams(M[0, 0], N[0, 0], C[0, 0], -C[0, 0])
    )
    dev = np.abs(V - template).max()
    if abs(M[0, 0] - M[1, 1]) > tol or abs(N[0, 0] - N[1, 1]) > tol or dev > tol:
        raise SymmetryError(
            f"operation needs a quadrature-symmetric matrix; deviation {dev:.3g} exceeds {tol}"
        )
    return V


def _golden_min(f, lo: float, hi: float, tol: float = 1e-8):
    """Golden-section minimum of a unimodal scalar function on [lo, hi]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)


def max_extractable_squeezing(V) -> tuple[float, float]:
    """Minimum single-mode quadrature variance over beamsplitter ratios.

    Interferes the two modes on a beamsplitter of transmissivity T and
    returns (min_variance, argmin T).  For quadrature-symmetric states the
    minimum equals the least PT symplectic eigenvalue.
    """
    V = _require_quadrature_symmetric(V)

    def min_var(t):
        S = beamsplitter(t)
        return float(np.diag(S @ V @ S.T).min())

    grid = np.linspace(1e-6, 1.0 - 1e-6, 201)
    vals = [min_var(t) for t in grid]
    k = int(np.argmin(vals))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, grid.size - 1)]
    t_best, v_best = _golden_min(min_var, lo, hi, tol=1e-10)
    return v_best, float(t_best)


def duan_sum(V) -> float:
    """Scale-optimized sum criterion; values below 2 certify inseparability.

    Minimizes [Var(a x_A + s x_B / a) + Var(a p_A - s p_B / a)] / (a^2 + 1/a^2)
    over the sign s and the Duan scaling a > 0.
    """
    V = _as_cov(V)
    M, N, C = blocks(V)

    def value(log_a, s):
        a2 = np.exp(2.0 * log_a)
        vu = a2 * M[0, 0] + N[0, 0] / a2 + 2.0 * s * C[0, 0]
        vv = a2 * M[1, 1] + N[1, 1] / a2 - 2.0 * s * C[1, 1]
        return (vu + vv) / (a2 + 1.0 / a2)

    best = np.inf
    for s in (1.0, -1.0):
        grid = np.linspace(-4.0, 4.0, 161)
        vals = [value(x, s) for x in grid]
        k = int(np.argmin(vals))
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
        _, v = _golden_min(lambda x: value(x, s), lo, hi, tol=1e-8)
        best = min(best, v)
    return float(best)


# ---------------------------------------------------------------------------
# EPR steering (Reid criterion)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SteeringResult:
    forward_product: float
    reverse_product: float
    v_xb_given_xa: float
    v_pb_given_pa: float
    v_xa_given_xb: float
    v_pa_given_pb: float


def reid_steering(V) -> SteeringResult:
    """Reid conditional-variance products; a product below 1 certifies steering.

    Forward: A measures and steers B.  Conditional variances are Gaussian
    Schur complements, e.g. V(x_B | x_A) = N_xx - C_xx^2 / M_xx.
    """
    V = _as_cov(V)
    M, N, C = blocks(V)
    for name, var in (("M_xx", M[0, 0]), ("M_pp", M[1, 1]), ("N_xx", N[0, 0]), ("N_pp", N[1, 1])):
        if var <= 0:
            raise DegenerateStateError(f"conditioning variance {name} = {var} is not positive")
    v_xb = N[0, 0] - C[0, 0] ** 2 / M[0, 0]
    v_pb = N[1, 1] - C[1, 1] ** 2 / M[1, 1]
    v_xa = M[0, 0] - C[0, 0] ** 2 / N[0, 0]
    v_pa = M[1, 1] - C[1, 1] ** 2 / N[1, 1]
    return SteeringResult(
        float(v_xb * v_pb), float(v_xa * v_pa), float(v_xb), float(v_pb), float(v_xa), float(v_pa)
    )


# ---------------------------------------------------------------------------
# coherent information
# ---------------------------------------------------------------------------


def coherent_information(V) -> float:
    """S(rho_B) - S(rho_AB) in nats; may be negative."""
    V = _as_cov(V)
    _, N, _ = blocks(V)
    return float(entropy_g(_single_mode_nu(N))) - vn_entropy(V)


def reverse_coherent_information(V) -> float:
    """S(rho_A) - S(rho_AB) in nats; may be negative."""
    V = _as_cov(V)
    M, _, _ = blocks(V)
    return float(entropy_g(_single_mode_nu(M))) - vn_entropy(V)


# ---------------------------------------------------------------------------
# consolidated report
# ---------------------------------------------------------------------------

CSV_COLUMNS = (
    "eta",
    "gain",
    "cutoff",
    "p_success",
    "logneg",
    "eof",
    "r0",
    "gree",
    "squashed_ub",
    "ci",
    "rci",
    "duan",
    "steer_fwd",
    "steer_rev",
    "separable",
)


@dataclass(frozen=True)
class MeasureReport:
    """One protocol configuration's full measure set (CSV row)."""

    eta: float
    gain: float
    cutoff: float
    p_success: float
    logneg: float
    eof: float
    r0: float
    gree: float
    squashed_ub: float
    ci: float
    rci: float
    duan: float
    steer_fwd: float
    steer_rev: float
    separable: bool

    def to_csv_row(self) -> str:
        cells = []
        for f in fields(self):
            val = getattr(self, f.name)
            if isinstance(val, bool):
                cells.append("true" if val else "false")
            else:
                cells.append(repr(float(val)))
        return ",".join(cells)

    @staticmethod
    def csv_header() -> str:
        return ",".join(CSV_COLUMNS)
