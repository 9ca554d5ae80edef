"""Command-line front end: figure-reproduction sweeps, reports, and bounds.

Subcommands: sweep-loss, distill, measures, choi.  All randomness derives
from the configured seed, rows are sorted deterministically, and floats are
written with shortest round-trip precision, so identical configurations
produce byte-identical CSV files regardless of the worker count.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import DivergenceError, StarvationError
from .measures import MeasureReport
from .nla import FilterParams, acceptance_mask, ideal_nla_state, mc_distill, success_probability
from .pipeline import ShotRecords, estimate_covariance, jarque_bera, synth_shots
from .report import build_report
from .symplectic import (
    MEASURE_IDS,
    add_symmetric_noise,
    choi_bound,
    load_covariance,
    loss_channel,
    tmss,
)

_CUTOFF_GRID = tuple(np.arange(2.0, 6.01, 0.5))


@dataclass(frozen=True)
class RunConfig:
    """Flat configuration shared by the subcommands."""

    r: float = 0.576
    excess_noise: float = 0.02
    eta: float = 0.1
    gain_max: float = 1.6
    gain_steps: int = 7
    cutoff: str = "auto"  # 'auto' or a float literal
    n_sets: int = 10
    shots_per_set: int = 100_000
    seed: int = 12345
    workers: int = 1
    bootstrap_reps: int = 0
    db_per_km: float = 0.2
    eta_min: float = 0.05
    eta_max: float = 0.95
    eta_steps: int = 19
    out: str = "out.csv"

    def to_text(self) -> str:
        lines = [f"{f.name} = {getattr(self, f.name)}" for f in fields(self)]
        return "\n".join(lines) + "\n"


_INT_KEYS = {"gain_steps", "n_sets", "shots_per_set", "seed", "workers",
             "bootstrap_reps", "eta_steps"}
_FLOAT_KEYS = {"r", "excess_noise", "eta", "gain_max", "db_per_km", "eta_min", "eta_max"}
_STR_KEYS = {"cutoff", "out"}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse the flat key = value configuration format; unknown keys are errors."""
    known = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in known:
            raise ValueError(f"{source}:{lineno}: unknown configuration key {key!r}")
        if key in out:
            raise ValueError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            if key in _INT_KEYS:
                out[key] = int(value)
            elif key in _FLOAT_KEYS:
                out[key] = float(value)
            else:
                out[key] = value
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: bad value for {key}: {exc}") from exc
    return out


def load_config(path) -> RunConfig:
    with open(path, encoding="ascii") as fh:
        return replace(RunConfig(), **parse_config_text(fh.read(), source=str(path)))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    return repr(float(x))


def _source_state(cfg: RunConfig) -> np.ndarray:
    return add_symmetric_noise(tmss(cfg.r), cfg.excess_noise)


# ---------------------------------------------------------------------------
# sweep-loss
# ---------------------------------------------------------------------------


def cmd_sweep_loss(cfg: RunConfig) -> int:
    """Effective-squeezing comparison along a loss sweep, with a distance meter."""
    from .measures import eof_quadrature_symmetric
    from .symplectic import pt_spectrum

    V0 = _source_state(cfg)
    etas = np.linspace(0.0, 1.0, cfg.eta_steps)
    rows = []
    for eta in etas:
        V = loss_channel(V0, float(eta))
        nu_minus = pt_spectrum(V).nu_minus
        r0 = eof_quadrature_symmetric(V).r0
        if eta > 0:
            distance = -(10.0 / cfg.db_per_km) * math.log10(float(eta))
        else:
            distance = math.inf
        rows.append((float(eta), nu_minus, math.exp(-2.0 * r0), distance + 0.0))
    with open(cfg.out, "w", encoding="ascii") as fh:
        fh.write("eta,nu_minus,exp_neg2r0,distance_km\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")
    return 0


# ---------------------------------------------------------------------------
# distill
# ---------------------------------------------------------------------------

_JB_COLUMNS = ("jb_p_alice_x", "jb_p_alice_p", "jb_p_bob_x", "jb_p_bob_p")
_ERR_COLUMNS = ("err_logneg", "err_eof", "err_gree", "err_squashed_ub", "err_ci", "err_rci")


def _synth_sets(V, cfg: RunConfig, cell_seed) -> ShotRecords:
    """n_sets independently seeded acquisitions, concatenated."""
    children = np.random.SeedSequence(cell_seed).spawn(cfg.n_sets)
    parts = [synth_shots(V, cfg.shots_per_set, child) for child in children]
    return ShotRecords(
        np.concatenate([p.shot_id + i * cfg.shots_per_set for i, p in enumerate(parts)]),
        np.concatenate([p.alice_basis for p in parts]),
        np.concatenate([p.alice_outcome for p in parts]),
        np.concatenate([p.bob_x for p in parts]),
        np.concatenate([p.bob_p for p in parts]),
    )


def _jb_channels(records: ShotRecords) -> tuple[float, float, float, float]:
    mX = records.alice_basis == "X"
    return (
        jarque_bera(records.alice_outcome[mX])[1],
        jarque_bera(records.alice_outcome[~mX])[1],
        jarque_bera(records.bob_x)[1],
        jarque_bera(records.bob_p)[1],
    )


def _auto_cutoff(V, cfg: RunConfig) -> float:
    """Smallest grid cutoff whose accepted data pass the normality gate at gain_max."""
    n_pilot = min(cfg.n_sets * cfg.shots_per_set, 200_000)
    records = synth_shots(V, n_pilot, np.random.SeedSequence([cfg.seed, 1]))
    for ac in _CUTOFF_GRID:
        fp = FilterParams(cfg.gain_max, float(ac))
        mask = acceptance_mask(records, fp, np.random.SeedSequence([cfg.seed, 2]))
        if mask.sum() < 2500:
            continue
        survivors = records.select(mask).rescale_bob(1.0 / cfg.gain_max)
        try:
            if min(_jb_channels(survivors)) >= 0.05:
                return float(ac)
        except ValueError:
            continue
    return float(_CUTOFF_GRID[-1])


def _distill_cell(V, cfg: RunConfig, gain: float, cutoff: float, index: int):
    """Theory and Monte Carlo rows for one gain; returns (rows, errors)."""
    fp = FilterParams(gain, cutoff)
    rows, errors = [], []
    p_theory = success_probability(V, fp)
    try:
        v_eff = ideal_nla_state(V, gain)
        rep = build_report(v_eff, eta=cfg.eta, gain=gain, cutoff=cutoff, p_success=p_theory)
        rows.append(("theory", rep, (None,) * 4, None))
    except DivergenceError as exc:
        errors.append((cfg.eta, gain, f"theory: {exc}"))
    try:
        records = _synth_sets(V, cfg, [cfg.seed, 100 + index])
        accept_seed = np.random.SeedSequence([cfg.seed, 500 + index])
        eff = mc_distill(records, fp, accept_seed, workers=1)
        mask = acceptance_mask(records, fp, accept_seed)
        survivors = records.select(mask).rescale_bob(1.0 / gain)
        jb = _jb_channels(survivors)
        rep = build_report(
            eff.covariance, eta=cfg.eta, gain=gain, cutoff=cutoff, p_success=eff.p_success
        )
        spread = None
        if cfg.bootstrap_reps >= 2:
            from .pipeline import bootstrap_errorbars

            spread = bootstrap_errorbars(
                records, fp, n_reps=cfg.bootstrap_reps,
                seed=np.random.SeedSequence([cfg.seed, 900 + index]),
            )
        rows.append(("mc", rep, jb, spread))
    except (StarvationError, ValueError) as exc:
        errors.append((cfg.eta, gain, f"mc: {exc}"))
    return rows, errors


def cmd_distill(cfg: RunConfig) -> int:
    """Measure-versus-success-probability sweep over the gain grid."""
    V = loss_channel(_source_state(cfg), cfg.eta)
    if cfg.cutoff == "auto":
        cutoff = _auto_cutoff(V, cfg)
    else:
        cutoff = float(cfg.cutoff)
    gains = np.linspace(1.0, cfg.gain_max, cfg.gain_steps)
    try:
        choi = {
            "logneg": choi_bound(cfg.eta, "logneg"),
            "eof": choi_bound(cfg.eta, "eof"),
            "ree": choi_bound(cfg.eta, "ree_distillable"),
        }
    except ValueError:
        choi = {"logneg": None, "eof": None, "ree": None}

    def work(i):
        return i, _distill_cell(V, cfg, float(gains[i]), cutoff, i)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = dict(pool.map(work, range(gains.size)))
    else:
        results = dict(work(i) for i in range(gains.size))

    all_errors = []
    out_rows = []
    for i in range(gains.size):
        rows, errors = results[i]
        all_errors.extend(errors)
        for kind, rep, jb, spread in rows:
            cells = [kind] + rep.to_csv_row().split(",")
            cells += [_fmt(choi["logneg"]), _fmt(choi["eof"]), _fmt(choi["ree"])]
            cells += [_fmt(p) for p in jb]
            if cfg.bootstrap_reps >= 2:
                for key in ("logneg", "eof", "gree", "squashed_ub", "ci", "rci"):
                    cells.append(_fmt(spread[key][1]) if spread else "")
            out_rows.append((float(rep.gain), 0 if kind == "theory" else 1, cells))
    out_rows.sort(key=lambda t: (t[0], t[1]))

    header = ["kind"] + list(MeasureReport.csv_header().split(","))
    header += ["choi_logneg", "choi_eof", "choi_ree_distillable"]
    header += list(_JB_COLUMNS)
    if cfg.bootstrap_reps >= 2:
        header += list(_ERR_COLUMNS)
    with open(cfg.out, "w", encoding="ascii") as fh:
        fh.write(",".join(header) + "\n")
        for _, _, cells in out_rows:
            fh.write(",".join(cells) + "\n")
    for eta, gain, msg in all_errors:
        print(f"distill cell failed: eta={eta} gain={gain}: {msg}", file=sys.stderr)
    return 1 if all_errors else 0


# ---------------------------------------------------------------------------
# measures / choi
# ---------------------------------------------------------------------------


def cmd_measures(path, out=None) -> int:
    """Full measure report for one covariance file."""
    V = load_covariance(path)
    rep = build_report(V)
    lines = [f"{name}: {getattr(rep, name)}" for name in MeasureReport.csv_header().split(",")]
    print("\n".join(lines))
    if out:
        with open(out, "w", encoding="ascii") as fh:
            fh.write(MeasureReport.csv_header() + "\n")
            fh.write(rep.to_csv_row() + "\n")
    return 0


def cmd_choi(cfg: RunConfig) -> int:
    """Deterministic (Choi-limit) bounds over a transmissivity grid."""
    etas = np.linspace(cfg.eta_min, cfg.eta_max, cfg.eta_steps)
    if etas.min() <= 0.0 or etas.max() >= 1.0:
        raise ValueError("choi bounds need transmissivities strictly inside (0, 1)")
    with open(cfg.out, "w", encoding="ascii") as fh:
        fh.write("eta," + ",".join(MEASURE_IDS) + "\n")
        for eta in etas:
            vals = [choi_bound(float(eta), mid) for mid in MEASURE_IDS]
            fh.write(",".join([_fmt(eta)] + [_fmt(v) for v in vals]) + "\n")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--eta", type=float, help="channel transmissivity")
    p.add_argument("--gain-max", type=float, dest="gain_max")
    p.add_argument("--gain-steps", type=int, dest="gain_steps")
    p.add_argument("--shots", type=int, dest="shots_per_set", help="shots per set")
    p.add_argument("--n-sets", type=int, dest="n_sets")
    p.add_argument("--seed", type=int)
    p.add_argument("--cutoff", help="filter cutoff: a number or 'auto'")
    p.add_argument("--workers", type=int)
    p.add_argument("--bootstrap-reps", type=int, dest="bootstrap_reps")
    p.add_argument("--r", type=float, help="source squeezing parameter")
    p.add_argument("--excess-noise", type=float, dest="excess_noise")
    p.add_argument("--eta-min", type=float, dest="eta_min")
    p.add_argument("--eta-max", type=float, dest="eta_max")
    p.add_argument("--eta-steps", type=int, dest="eta_steps")
    p.add_argument("--out", help="output CSV path")


def _config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            overrides[f.name] = val
    return replace(cfg, **overrides)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cvdistill",
        description="Two-mode Gaussian entanglement measures and NLA distillation sweeps",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("sweep-loss", "effective squeezing along a loss sweep"),
        ("distill", "measures versus success probability for one loss setting"),
        ("choi", "deterministic bounds over a transmissivity grid"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
    p = sub.add_parser("measures", help="full measure report for a covariance file")
    p.add_argument("covariance", help="covariance file (see FORMATS.md)")
    p.add_argument("--out", help="also write the report as a CSV row")

    args = parser.parse_args(argv)
    try:
        if args.command == "measures":
            return cmd_measures(args.covariance, args.out)
        cfg = _config_from_args(args)
        if args.command == "sweep-loss":
            return cmd_sweep_loss(cfg)
        if args.command == "distill":
            return cmd_distill(cfg)
        if args.command == "choi":
            return cmd_choi(cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
