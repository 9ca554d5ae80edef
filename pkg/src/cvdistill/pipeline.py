"""Synthetic shot generation, covariance estimation, and statistical gating.

Shot files are plain decimal CSV with the header
``shot_id,alice_basis,alice_outcome,bob_x,bob_p``; Alice homodynes one
randomly chosen quadrature per shot, Bob records both heterodyne
components under the convention documented in the nla module.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import chi2

from .errors import DegenerateStateError, InsufficientDataError, PhysicalityError
from .symplectic import _as_cov

SHOT_HEADER = "shot_id,alice_basis,alice_outcome,bob_x,bob_p"


@dataclass(frozen=True)
class ShotRecords:
    """Columnar stream of measurement events."""

    shot_id: np.ndarray
    alice_basis: np.ndarray  # 'X' or 'P' per shot
    alice_outcome: np.ndarray
    bob_x: np.ndarray
    bob_p: np.ndarray

    def __post_init__(self):
        n = self.shot_id.size
        for name in ("alice_basis", "alice_outcome", "bob_x", "bob_p"):
            if getattr(self, name).size != n:
                raise ValueError(f"column {name} has mismatched length")
        for name in ("alice_outcome", "bob_x", "bob_p"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"column {name} contains non-finite values")
        bad = ~np.isin(self.alice_basis, ("X", "P"))
        if np.any(bad):
            raise ValueError(f"invalid basis label {self.alice_basis[bad][0]!r}")

    def __len__(self) -> int:
        return int(self.shot_id.size)

    def select(self, mask: np.ndarray) -> "ShotRecords":
        return ShotRecords(
            self.shot_id[mask],
            self.alice_basis[mask],
            self.alice_outcome[mask],
            self.bob_x[mask],
            self.bob_p[mask],
        )

    def rescale_bob(self, factor: float) -> "ShotRecords":
        return replace(self, bob_x=self.bob_x * factor, bob_p=self.bob_p * factor)


@dataclass(frozen=True)
class CovEstimate:
    """Estimated covariance with per-entry asymptotic standard errors."""

    covariance: np.ndarray
    stderr: np.ndarray
    n_shots: int


def synth_shots(V, n: int, seed) -> ShotRecords:
    """Simulate n shots of the homodyne/heterodyne acquisition for state V."""
    V = _as_cov(V)
    if n < 1:
        raise ValueError(f"need at least one shot, got {n}")
    try:
        L = np.linalg.cholesky(V)
    except np.linalg.LinAlgError as exc:
        raise PhysicalityError("covariance matrix is not positive definite") from exc
    rng = np.random.default_rng(seed)
    quads = rng.standard_normal((n, 4)) @ L.T
    coin = rng.integers(0, 2, size=n)
    vac = rng.standard_normal((n, 2))
    basis = np.where(coin == 0, "X", "P")
    alice = np.where(coin == 0, quads[:, 0], quads[:, 1])
    bob_x = (quads[:, 2] + vac[:, 0]) / np.sqrt(2.0)
    bob_p = (quads[:, 3] - vac[:, 1]) / np.sqrt(2.0)
    return ShotRecords(np.arange(n, dtype=np.int64), basis, alice, bob_x, bob_p)


def _weighted_cov(x, y, w):
    sw = w.sum()
    mx = np.sum(w * x) / sw
    my = np.sum(w * y) / sw
    return float(np.sum(w * (x - mx) * (y - my)) / sw)


def estimate_covariance(records: ShotRecords, weights=None) -> CovEstimate:
    """Assemble an xpxp covariance estimate from a shot stream.

    Alice's second moments come from her per-basis outcomes, Bob's from the
    heterodyne record with the vacuum penalty inverted, and cross terms from
    matched-basis coincidences scaled by sqrt(2).  Means are subtracted.
    Alice's cross-quadrature moment is not observable with single-basis
    homodyne and is fixed to zero (standard-form alignment).
    """
    n = len(records)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if w.size != n:
        raise ValueError("weights length must match the record count")
    n_eff = float(w.sum()) ** 2 / float(np.sum(w * w)) if n else 0.0
    if n_eff < 100:
        raise InsufficientDataError(f"need >= 100 effective shots, got {n_eff:.1f}")
    mX = records.alice_basis == "X"
    mP = ~mX
    nX = float(w[mX].sum() ** 2 / np.sum(w[mX] ** 2)) if mX.any() else 0.0
    nP = float(w[mP].sum() ** 2 / np.sum(w[mP] ** 2)) if mP.any() else 0.0
    if nX < 2 or nP < 2:
        raise InsufficientDataError("need shots in both Alice bases")

    a, bx, bp = records.alice_outcome, records.bob_x, records.bob_p
    var_ax = _weighted_cov(a[mX], a[mX], w[mX])
    var_ap = _weighted_cov(a[mP], a[mP], w[mP])
    var_bx = _weighted_cov(bx, bx, w)
    var_bp = _weighted_cov(bp, bp, w)
    cov_bxp = _weighted_cov(bx, bp, w)
    cov_ax_bx = _weighted_cov(a[mX], bx[mX], w[mX])
    cov_ax_bp = _weighted_cov(a[mX], bp[mX], w[mX])
    cov_ap_bx = _weighted_cov(a[mP], bx[mP], w[mP])
    cov_ap_bp = _weighted_cov(a[mP], bp[mP], w[mP])
    if min(var_ax, var_ap, var_bx, var_bp) <= 1e-300:
        raise DegenerateStateError("degenerate stream: a channel has zero variance")

    V = np.zeros((4, 4))
    V[0, 0], V[1, 1] = var_ax, var_ap
    V[2, 2], V[3, 3] = 2.0 * var_bx - 1.0, 2.0 * var_bp - 1.0
    V[2, 3] = V[3, 2] = 2.0 * cov_bxp
    V[0, 2] = V[2, 0] = np.sqrt(2.0) * cov_ax_bx
    V[0, 3] = V[3, 0] = np.sqrt(2.0) * cov_ax_bp
    V[1, 2] = V[2, 1] = np.sqrt(2.0) * cov_ap_bx
    V[1, 3] = V[3, 1] = np.sqrt(2.0) * cov_ap_bp

    E = np.zeros((4, 4))
    E[0, 0] = var_ax * np.sqrt(2.0 / (nX - 1))
    E[1, 1] = var_ap * np.sqrt(2.0 / (nP - 1))
    E[2, 2] = 2.0 * var_bx * np.sqrt(2.0 / (n_eff - 1))
    E[3, 3] = 2.0 * var_bp * np.sqrt(2.0 / (n_eff - 1))
    E[2, 3] = E[3, 2] = 2.0 * np.sqrt((var_bx * var_bp + cov_bxp**2) / (n_eff - 1))
    E[0, 2] = E[2, 0] = np.sqrt(2.0 * (var_ax * var_bx + cov_ax_bx**2) / (nX - 1))
    E[0, 3] = E[3, 0] = np.sqrt(2.0 * (var_ax * var_bp + cov_ax_bp**2) / (nX - 1))
    E[1, 2] = E[2, 1] = np.sqrt(2.0 * (var_ap * var_bx + cov_ap_bx**2) / (nP - 1))
    E[1, 3] = E[3, 1] = np.sqrt(2.0 * (var_ap * var_bp + cov_ap_bp**2) / (nP - 1))
    return CovEstimate(V, E, int(n))


def jarque_bera(samples) -> tuple[float, float]:
    """Jarque-Bera normality statistic and its two-degree chi-square p-value."""
    x = np.asarray(samples, dtype=float)
    if x.size < 1000:
        raise InsufficientDataError(f"Jarque-Bera needs >= 1000 samples, got {x.size}")
    c = x - x.mean()
    s2 = np.mean(c * c)
    skew = np.mean(c**3) / s2**1.5
    kurt = np.mean(c**4) / s2**2 - 3.0
    stat = x.size / 6.0 * (skew * skew + kurt * kurt / 4.0)
    return float(stat), float(chi2.sf(stat, 2))


def bootstrap_errorbars(records: ShotRecords, fp, n_reps: int = 100, seed=0,
                        measure_keys=None):
    """Spread of the measures over repeated post-selection randomness.

    Repeats mc_distill on the fixed record stream with derived seeds
    (resampling only the accept/reject decisions), evaluates the measures
    each time, and returns {measure: (mean, 1.5 * standard deviation)}.
    """
    from .nla import mc_distill
    from .report import evaluate_measures

    if n_reps < 2:
        raise ValueError(f"need at least two repetitions, got {n_reps}")
    children = np.random.SeedSequence(seed).spawn(n_reps)
    values: dict[str, list[float]] = {}
    for child in children:
        eff = mc_distill(records, fp, child)
        row = evaluate_measures(eff.covariance, keys=measure_keys)
        row["p_success"] = eff.p_success
        for key, val in row.items():
            values.setdefault(key, []).append(val)
    out = {}
    for key, vals in values.items():
        arr = np.asarray(vals)
        out[key] = (float(arr.mean()), float(1.5 * arr.std(ddof=1)))
    return out


# ---------------------------------------------------------------------------
# shot file format
# ---------------------------------------------------------------------------


def write_shots(path, records: ShotRecords) -> None:
    """Write a shot stream as plain decimal CSV."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(SHOT_HEADER + "\n")
        for i in range(len(records)):
            fh.write(
                f"{records.shot_id[i]},{records.alice_basis[i]},"
                f"{records.alice_outcome[i]!r},{records.bob_x[i]!r},{records.bob_p[i]!r}\n"
            )


def read_shots(path) -> ShotRecords:
    """Read a shot stream, rejecting malformed lines with line numbers."""
    ids, bases, alices, bxs, bps = [], [], [], [], []
    with open(path, encoding="ascii") as fh:
        header = fh.readline().rstrip("\n")
        if header != SHOT_HEADER:
            raise ValueError(f"{path}:1: bad header {header!r}; expected {SHOT_HEADER!r}")
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 fields, got {len(parts)}")
            sid, basis, alice, bx, bp = parts
            if basis not in ("X", "P"):
                raise ValueError(f"{path}:{lineno}: basis must be X or P, got {basis!r}")
            try:
                ids.append(int(sid))
                alices.append(float(alice))
                bxs.append(float(bx))
                bps.append(float(bp))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed numeric field: {exc}") from exc
            bases.append(basis)
    if not ids:
        raise ValueError(f"{path}: no shot records found")
    return ShotRecords(
        np.asarray(ids, dtype=np.int64),
        np.asarray(bases),
        np.asarray(alices),
        np.asarray(bxs),
        np.asarray(bps),
    )
