"""Consolidated measure evaluation feeding MeasureReport rows."""

from __future__ import annotations

import math

import numpy as np

from .measures import (
    MeasureReport,
    coherent_information,
    duan_sum,
    eof_quadrature_symmetric,
    log_negativity,
    ppt_separable,
    reid_steering,
    reverse_coherent_information,
)
from .ree import gree
from .squashed import squashed_upper_bound

ALL_KEYS = (
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
)


def evaluate_measures(V, keys=None, gree_seed: int = 0) -> dict[str, float]:
    """Evaluate the requested measures on one covariance matrix."""
    keys = ALL_KEYS if keys is None else tuple(keys)
    out: dict[str, float] = {}
    if "logneg" in keys:
        out["logneg"] = log_negativity(V)
    if "eof" in keys or "r0" in keys:
        eof = eof_quadrature_symmetric(V)
        out["eof"] = eof.eof_nats
        out["r0"] = eof.r0
    if "gree" in keys:
        out["gree"] = gree(V, seed=gree_seed).gree_nats
    if "squashed_ub" in keys:
        out["squashed_ub"] = squashed_upper_bound(V)
    if "ci" in keys:
        out["ci"] = coherent_information(V)
    if "rci" in keys:
        out["rci"] = reverse_coherent_information(V)
    if "duan" in keys:
        out["duan"] = duan_sum(V)
    if "steer_fwd" in keys or "steer_rev" in keys:
        steer = reid_steering(V)
        out["steer_fwd"] = steer.forward_product
        out["steer_rev"] = steer.reverse_product
    return out


def build_report(V, eta: float = math.nan, gain: float = 1.0, cutoff: float = math.nan,
                 p_success: float = 1.0, gree_seed: int = 0) -> MeasureReport:
    """Full MeasureReport for one protocol configuration."""
    vals = evaluate_measures(V, gree_seed=gree_seed)
    return MeasureReport(
        eta=eta,
        gain=gain,
        cutoff=cutoff,
        p_success=p_success,
        logneg=vals["logneg"],
        eof=vals["eof"],
        r0=vals["r0"],
        gree=vals["gree"],
        squashed_ub=vals["squashed_ub"],
        ci=vals["ci"],
        rci=vals["rci"],
        duan=vals["duan"],
        steer_fwd=vals["steer_fwd"],
        steer_rev=vals["steer_rev"],
        separable=ppt_separable(np.asarray(V, dtype=float)),
    )
