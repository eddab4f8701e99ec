"""Monte Carlo experiment runner: RMSE-vs-SNR sweeps and validation mode.

A sweep walks the grid of (C, SNR, pilot-to-data ratio) cells. Each cell
runs ``trials_per_point`` independent trials; a trial draws one channel
(delay uniform on [0, l_max], Doppler uniform on [-k_max, k_max], gain of
unit modulus with random phase), pushes ``estimates_per_trial`` frames
through it, runs every configured estimator on the same received samples,
and averages each estimator's per-frame composite estimates. The trial
error is that average minus the truth; the cell reports RMSE over trials.

Everything is seeded through one master seed with per-(cell, trial) spawn
keys, so results are byte-reproducible regardless of worker count or
completion order. Wall-clock columns are the only nondeterministic output.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass
from multiprocessing import Pool

import numpy as np

from . import baselines
from .channel import LosChannel, apply_los_channel, oversampled_oracle
from .core import AfdmGrid, add_prefix, daft_demodulate, daft_modulate, strip_prefix
from .effective import envelope_profile, exact_profile
from .estimator import (
    Estimate,
    PilotLayout,
    build_pilot_frame,
    joint_estimate,
)

__all__ = [
    "ExperimentConfig",
    "RmseReport",
    "CSV_HEADER",
    "SCHEMA_VERSION",
    "noise_variance",
    "run_trial",
    "run_sweep",
    "csv_lines",
    "emit",
    "validate_mode",
]

CSV_HEADER = "estimator,snr_db,ep_ei_db,C,delay_rmse,doppler_rmse,trials,mean_pspr,wall_ms"
SCHEMA_VERSION = 1

ESTIMATOR_NAMES = ("joint", "integer_only", "two_d_search")


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete, explicit description of one experiment."""

    n: int = 256
    k_max: int = 3
    l_max: int = 3
    c_list: tuple[int, ...] = (8,)
    n_prefix: int = 36
    snr_db_list: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    ep_ei_db_list: tuple[float, ...] = (10.0,)
    trials_per_point: int = 200
    estimates_per_trial: int = 10
    estimators: tuple[str, ...] = ("joint", "integer_only")
    master_seed: int = 1234
    fir_half_width: int = 16
    oracle_oversample: int = 16
    workers: int = 1

    def validate(self) -> None:
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be >= 1")
        if self.estimates_per_trial < 1:
            raise ValueError("estimates_per_trial must be >= 1")
        for lst, name in (
            (self.c_list, "c_list"),
            (self.snr_db_list, "snr_db_list"),
            (self.ep_ei_db_list, "ep_ei_db_list"),
            (self.estimators, "estimators"),
        ):
            if len(lst) == 0:
                raise ValueError(f"{name} must be non-empty")
        for name in self.estimators:
            if name not in ESTIMATOR_NAMES:
                raise ValueError(f"unknown estimator {name!r}")
        for c in self.c_list:
            if c <= 2 * self.k_max:
                raise ValueError("every C must exceed 2*k_max")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def grid_for(self, c: int) -> AfdmGrid:
        g = AfdmGrid(
            n=self.n,
            k_max=self.k_max,
            l_max=self.l_max,
            doppler_pad=c - 2 * self.k_max,
            n_prefix=self.n_prefix,
        )
        g.validate()
        return g


@dataclass
class RmseReport:
    """Sweep results: one row dict per (estimator, cell)."""

    config: ExperimentConfig
    rows: list


def noise_variance(grid: AfdmGrid, layout: PilotLayout, snr_db: float) -> float:
    """Per-sample complex noise variance for the requested SNR.

    SNR is defined against the mean transmitted frame power including the
    pilot: P = (pilot energy + data energy) / N, with unit-energy data
    symbols in every data slot.
    """
    n_data = grid.n - 2 * grid.guard_width - 1
    power = (layout.pilot_amplitude**2 + n_data) / grid.n
    return power / 10.0 ** (snr_db / 10.0)


def _run_estimator(
    name: str, grid: AfdmGrid, r: np.ndarray, layout: PilotLayout
) -> Estimate:
    if name == "joint":
        return joint_estimate(grid, r, layout)
    y = daft_demodulate(grid, r)
    if name == "integer_only":
        return baselines.integer_only(grid, y, layout)
    if name == "two_d_search":
        return baselines.two_d_search(grid, y, layout)
    raise ValueError(f"unknown estimator {name!r}")


def run_trial(
    grid: AfdmGrid,
    layout: PilotLayout,
    noise_var: float,
    estimators: tuple,
    frames: int,
    seed_seq: np.random.SeedSequence,
    fir_half_width: int = 16,
):
    """One channel draw, ``frames`` received frames, every estimator on each.

    Returns ((delay, doppler) truth, {name: (delay_hat, doppler_hat,
    mean_pspr, seconds)}) where the hats are plain means of the per-frame
    composite estimates.
    """
    rng = np.random.default_rng(seed_seq)
    delay = rng.uniform(0.0, grid.l_max)
    doppler = rng.uniform(-grid.k_max, grid.k_max)
    gain = np.exp(2j * np.pi * rng.uniform())
    ch = LosChannel(gain=gain, delay=delay, doppler=doppler, noise_var=noise_var)

    acc = {name: {"delay": [], "doppler": [], "pspr": [], "sec": 0.0} for name in estimators}
    for _ in range(frames):
        x = build_pilot_frame(grid, layout, rng)
        s = add_prefix(grid, daft_modulate(grid, x))
        r = apply_los_channel(grid, s, ch, half_width=fir_half_width, rng=rng)
        body = strip_prefix(grid, r)
        for name in estimators:
            t0 = time.perf_counter()
            est = _run_estimator(name, grid, body, layout)
            acc[name]["sec"] += time.perf_counter() - t0
            acc[name]["delay"].append(est.delay)
            acc[name]["doppler"].append(est.doppler)
            acc[name]["pspr"].append(est.pspr)

    out = {}
    for name in estimators:
        out[name] = (
            float(np.mean(acc[name]["delay"])),
            float(np.mean(acc[name]["doppler"])),
            float(np.mean(acc[name]["pspr"])),
            acc[name]["sec"],
        )
    return (delay, doppler), out


def _trial_worker(args):
    (
        grid,
        layout,
        noise_var,
        estimators,
        frames,
        master_seed,
        cell_idx,
        trial_idx,
        fir_half_width,
    ) = args
    ss = np.random.SeedSequence(master_seed, spawn_key=(cell_idx, trial_idx))
    return run_trial(grid, layout, noise_var, estimators, frames, ss, fir_half_width)


def _wrap_doppler(e: np.ndarray) -> np.ndarray:
    # score on the circle: integer shifts of the compensation phase are
    # indistinguishable to the fractional loop, so errors wrap to [-1/2, 1/2]
    return e - np.round(e)


def run_sweep(cfg: ExperimentConfig, progress=None) -> RmseReport:
    """Run the full experiment grid and aggregate RMSE per cell."""
    cfg.validate()
    cells = [
        (c, snr, ep)
        for c in cfg.c_list
        for snr in cfg.snr_db_list
        for ep in cfg.ep_ei_db_list
    ]
    rows = []
    pool = Pool(cfg.workers) if cfg.workers > 1 else None
    try:
        for cell_idx, (c, snr, ep) in enumerate(cells):
            grid = cfg.grid_for(c)
            layout = PilotLayout(pilot_index=0, ep_ei_db=ep)
            nv = noise_variance(grid, layout, snr)
            args = [
                (
                    grid,
                    layout,
                    nv,
                    tuple(cfg.estimators),
                    cfg.estimates_per_trial,
                    cfg.master_seed,
                    cell_idx,
                    t,
                    cfg.fir_half_width,
                )
                for t in range(cfg.trials_per_point)
            ]
            t0 = time.perf_counter()
            if pool is not None:
                results = pool.map(_trial_worker, args)
            else:
                results = [_trial_worker(a) for a in args]
            overhead_ms = (time.perf_counter() - t0) * 1e3

            for name in cfg.estimators:
                d_err = np.array([res[name][0] - truth[0] for truth, res in results])
                k_err = _wrap_doppler(
                    np.array([res[name][1] - truth[1] for truth, res in results])
                )
                mean_pspr = float(np.mean([res[name][2] for _, res in results]))
                est_ms = 1e3 * sum(res[name][3] for _, res in results)
                rows.append(
                    {
                        "estimator": name,
                        "snr_db": snr,
                        "ep_ei_db": ep,
                        "C": c,
                        "delay_rmse": float(np.sqrt(np.mean(d_err**2))),
                        "doppler_rmse": float(np.sqrt(np.mean(k_err**2))),
                        "trials": cfg.trials_per_point,
                        "mean_pspr": mean_pspr,
                        "wall_ms": est_ms,
                    }
                )
            if progress is not None:
                progress(cell_idx + 1, len(cells), overhead_ms)
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    return RmseReport(config=cfg, rows=rows)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def csv_lines(report: RmseReport) -> list:
    """Report rows rendered as CSV lines, header first."""
    cols = CSV_HEADER.split(",")
    lines = [CSV_HEADER]
    for row in report.rows:
        lines.append(",".join(_fmt(row[c]) for c in cols))
    return lines


def emit(report: RmseReport, csv_path=None, json_path=None) -> None:
    """Write the report as CSV (one row per cell/estimator) and/or JSON."""
    if csv_path is not None:
        with open(csv_path, "w") as f:
            f.write("\n".join(csv_lines(report)) + "\n")
    if json_path is not None:
        obj = {
            "schema_version": SCHEMA_VERSION,
            "config": asdict(report.config),
            "rows": report.rows,
        }
        with open(json_path, "w") as f:
            json.dump(obj, f, indent=2, sort_keys=True)
            f.write("\n")


# --- validation mode -------------------------------------------------------


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    a = a - a.mean()
    b = b - b.mean()
    return float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))


def validate_mode(cfg: ExperimentConfig, draws: int = 25) -> tuple[bool, list]:
    """Self-checks of the model stack; returns (all_ok, report lines).

    Covers transform round-trip, integer-channel decode, the closed-form
    envelope against the exact sum, and the FIR channel against the
    oversampled oracle. Pass thresholds mirror the module invariants.
    """
    lines = []
    ok = True

    def check(name: str, passed: bool, detail: str):
        nonlocal ok
        ok = ok and passed
        lines.append(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")

    rng = np.random.default_rng(cfg.master_seed)
    grid = cfg.grid_for(cfg.c_list[0])

    # transform round-trip
    worst = 0.0
    for _ in range(20):
        x = rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)
        err = np.max(np.abs(daft_demodulate(grid, daft_modulate(grid, x)) - x))
        worst = max(worst, err)
    check("transform-round-trip", worst < 1e-10, f"max |err| = {worst:.3e}")

    # integer channel decode
    layout = PilotLayout()
    x = build_pilot_frame(grid, layout)
    s = add_prefix(grid, daft_modulate(grid, x))
    worst_side = 0.0
    decode_ok = True
    for l in range(grid.l_max + 1):
        for k in range(-grid.k_max, grid.k_max + 1):
            ch = LosChannel(delay=float(l), doppler=float(k))
            r = strip_prefix(grid, apply_los_channel(grid, s, ch, cfg.fir_half_width))
            y = np.abs(daft_demodulate(grid, r))
            peak = int(np.argmax(y))
            expect = (layout.pilot_index - (k + grid.n_seg * l)) % grid.n
            decode_ok &= peak == expect
            side = np.partition(y, -2)[-2] / y[peak]
            worst_side = max(worst_side, side)
    check(
        "integer-channel-decode",
        decode_ok and worst_side < 1e-9,
        f"all peaks correct = {decode_ok}, worst sidelobe/peak = {worst_side:.3e}",
    )

    # envelope vs exact sum
    corrs = []
    for c in cfg.c_list:
        g = cfg.grid_for(c)
        cc = []
        for _ in range(draws):
            ch = LosChannel(
                delay=rng.uniform(0, g.l_max),
                doppler=rng.uniform(-g.k_max, g.k_max),
            )
            cc.append(_pearson(exact_profile(g, 0, ch), envelope_profile(g, 0, ch)))
        corrs.append(float(np.mean(cc)))
    check(
        "envelope-fidelity",
        all(c > 0.99 for c in corrs),
        "mean profile correlation per C: "
        + ", ".join(f"C={c}: {r:.4f}" for c, r in zip(cfg.c_list, corrs)),
    )

    # FIR channel vs oversampled oracle, coarse settings vs fine. Both
    # settings see the same channels (delays on the fine oracle grid so
    # neither reference carries snapping error), and the ensemble is a
    # fixed diagnostic one: the irreducible FIR/oracle disagreement sits
    # around 0.25 with heavy per-channel spread, and a verdict that flaps
    # with master_seed would be useless as a self-check.
    diag = np.random.default_rng(0)
    errs = {(4, 4): [], (16, 16): []}
    for _ in range(10):
        d = np.round(diag.uniform(0, grid.l_max) * 16) / 16
        ch = LosChannel(
            gain=np.exp(2j * np.pi * diag.uniform()),
            delay=float(d),
            doppler=diag.uniform(-grid.k_max, grid.k_max),
        )
        xf = build_pilot_frame(grid, layout, diag)
        sp = add_prefix(grid, daft_modulate(grid, xf))
        for w, o in errs:
            fir = strip_prefix(grid, apply_los_channel(grid, sp, ch, w))
            ora = oversampled_oracle(grid, xf, ch, o)
            errs[(w, o)].append(np.linalg.norm(fir - ora) / np.linalg.norm(ora))
    errs = {pair: float(np.mean(v)) for pair, v in errs.items()}
    check(
        "fir-vs-oracle",
        errs[(16, 16)] < errs[(4, 4)],
        f"rel RMS (W,O)=(4,4): {errs[(4, 4)]:.4f} -> (16,16): {errs[(16, 16)]:.4f}",
    )

    return ok, lines
