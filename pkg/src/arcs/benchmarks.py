"""Seeded experiment presets and report emission.

Each preset runs a family of synthetic trials through the pipeline stages and
collects one flat record per (trial, stage): rotation error in degrees where
a rotation is estimated, wall-clock runtime, consensus size, and inlier
purity where ground truth applies. Reports are written as one JSON document
(config echo, per-trial records, per-stage aggregates) plus a flat CSV.

Presets default to desk-scale sizes that finish in minutes; ``full_scale``
switches the large regimes to their original sizes. Every trial derives its
seed from (master seed, trial index), so results are independent of execution
order and worker count.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .consensus import prune
from .matching import arcs_n_match, arcs_solve
from .refinement import refine, residual_quadforms
from .rotation import quat_to_rotation, rotation_error_deg, rotation_to_quat
from .synthetic import (
    AXIS_GATE_SIGMA,
    NORM_GATE_SIGMA,
    RNG_ALGORITHM,
    gen_rrs,
    gen_srcs,
    success_rate,
    trial_seed,
)

__all__ = ["TrialRecord", "ExperimentReport", "run_experiment", "preset_names", "write_report"]


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    stage: str
    error_deg: float | None
    runtime_ms: float
    consensus_size: int | None
    inlier_purity: float | None


@dataclass
class ExperimentReport:
    preset: str
    config: dict
    rng: str
    records: list[TrialRecord] = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "preset": self.preset,
            "config": self.config,
            "rng": self.rng,
            "records": [asdict(r) for r in self.records],
            "aggregates": self.aggregates,
        }


class _Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = (time.perf_counter() - self.start) * 1000.0
        return False


def _pair_keys(pairs: np.ndarray, n: int) -> np.ndarray:
    return pairs[:, 0].astype(np.int64) * n + pairs[:, 1].astype(np.int64)


def _rrs_stages(inst, c, cbar, n_phi, threads, do_refine=True, stage_suffix=""):
    """Prune (and optionally refine) one paired instance; returns records."""
    records = []
    with _Timer() as t:
        result = prune(inst.y, inst.x, c=c, cbar=cbar, n_phi=n_phi, threads=threads)
    purity = (
        float(np.isin(result.consensus, inst.inliers).mean()) if result.size else 0.0
    )
    prune_err = rotation_error_deg(result.rotation, inst.rotation)
    prune_ms = t.ms
    records.append(("prune" + stage_suffix, prune_err, prune_ms, result.size, purity))
    if do_refine and result.size >= 1:
        with _Timer() as t:
            forms = residual_quadforms(inst.y[result.consensus], inst.x[result.consensus])
            w, _ = refine(forms, rotation_to_quat(result.rotation))
        err = rotation_error_deg(quat_to_rotation(w), inst.rotation)
        records.append(("refine" + stage_suffix, err, prune_ms + t.ms, result.size, purity))
    return records


def _srcs_stages(inst, c, cbar, n_phi, threads, do_refine=True, stage_suffix=""):
    """Match, prune and refine one two-cloud instance; returns records."""
    n = inst.p.shape[0]
    records = []
    with _Timer() as t:
        candidates = arcs_n_match(inst.q, inst.p, c)
    truth_keys = _pair_keys(inst.correspondences, n)
    cand_keys = _pair_keys(candidates, n)
    containment = float(np.isin(truth_keys, cand_keys).mean())
    records.append(("match" + stage_suffix, None, t.ms, candidates.shape[0], containment))
    if candidates.shape[0] == 0:
        return records, candidates

    y = inst.q[candidates[:, 0]]
    x = inst.p[candidates[:, 1]]
    with _Timer() as t:
        result = prune(y, x, c=c, cbar=cbar, n_phi=n_phi, threads=threads)
    consensus_keys = cand_keys[result.consensus]
    purity = float(np.isin(consensus_keys, truth_keys).mean()) if result.size else 0.0
    records.append(
        (
            "prune" + stage_suffix,
            rotation_error_deg(result.rotation, inst.rotation),
            t.ms,
            result.size,
            purity,
        )
    )
    if do_refine and result.size >= 1:
        with _Timer() as t:
            forms = residual_quadforms(y[result.consensus], x[result.consensus])
            w, _ = refine(forms, rotation_to_quat(result.rotation))
        err = rotation_error_deg(quat_to_rotation(w), inst.rotation)
        records.append(("refine" + stage_suffix, err, t.ms, result.size, purity))
    return records, candidates


def _emit(records_raw, trial) -> list[TrialRecord]:
    out = []
    for stage, err, ms, size, purity in records_raw:
        out.append(
            TrialRecord(
                trial=trial,
                stage=stage,
                error_deg=None if err is None else float(err),
                runtime_ms=float(ms),
                consensus_size=None if size is None else int(size),
                inlier_purity=None if purity is None else float(purity),
            )
        )
    return out


def _run_table2(cfg, progress):
    records = []
    for m in cfg["m_values"]:
        n = int(0.8 * m)
        for trial in range(cfg["trials"]):
            seed = trial_seed(cfg["seed"], trial)
            with _Timer() as t_gen:
                inst = gen_srcs(m, n, 2, 0.0, seed=seed)
            with _Timer() as t:
                rotation, pairs = arcs_solve(inst.q, inst.p)
            exact = np.array_equal(pairs, inst.correspondences)
            records += _emit(
                [
                    (f"gen_m{m}", None, t_gen.ms, None, None),
                    (
                        f"arcs_m{m}",
                        rotation_error_deg(rotation, inst.rotation),
                        t.ms,
                        pairs.shape[0],
                        1.0 if exact else 0.0,
                    ),
                ],
                trial,
            )
            progress(f"table2 m={m} trial={trial}")
    return records


def _run_table3(cfg, progress):
    records = []
    c = NORM_GATE_SIGMA * cfg["sigma"]
    for trial in range(cfg["trials"]):
        inst = gen_srcs(
            cfg["m"], cfg["n"], cfg["k"], cfg["sigma"], seed=trial_seed(cfg["seed"], trial)
        )
        with _Timer() as t:
            candidates = arcs_n_match(inst.q, inst.p, c)
        truth_keys = _pair_keys(inst.correspondences, cfg["n"])
        cand_keys = _pair_keys(candidates, cfg["n"])
        containment = float(np.isin(truth_keys, cand_keys).mean())
        records += _emit(
            [("match", None, t.ms, candidates.shape[0], containment)], trial
        )
        progress(f"table3 trial={trial}")
    return records


def _run_table4(cfg, progress):
    records = []
    c = NORM_GATE_SIGMA * cfg["sigma"]
    cbar = AXIS_GATE_SIGMA * cfg["sigma"]
    for trial in range(cfg["trials"]):
        inst = gen_srcs(
            cfg["m"], cfg["n"], cfg["k"], cfg["sigma"], seed=trial_seed(cfg["seed"], trial)
        )
        stage_records, _ = _srcs_stages(
            inst, c, cbar, cfg["n_phi"], cfg["threads"], do_refine=False
        )
        records += _emit(stage_records, trial)
        progress(f"table4 trial={trial}")
    return records


def _run_table5(cfg, progress):
    records = []
    c = NORM_GATE_SIGMA * cfg["sigma"]
    cbar = AXIS_GATE_SIGMA * cfg["sigma"]
    for trial in range(cfg["trials"]):
        inst = gen_rrs(
            cfg["l"],
            cfg["k"],
            cfg["sigma"],
            seed=trial_seed(cfg["seed"], trial),
            norm_constrained=True,
        )
        records += _emit(
            _rrs_stages(inst, c, cbar, cfg["n_phi"], cfg["threads"]), trial
        )
        progress(f"table5 trial={trial}")
    return records


def _run_fig1(cfg, progress):
    records = []
    c = NORM_GATE_SIGMA * cfg["sigma"]
    cbar = AXIS_GATE_SIGMA * cfg["sigma"]
    for trial in range(cfg["trials"]):
        inst = gen_rrs(
            cfg["l"],
            cfg["k"],
            cfg["sigma"],
            seed=trial_seed(cfg["seed"], trial),
            norm_constrained=True,
        )
        for s in cfg["s_values"]:
            records += _emit(
                _rrs_stages(inst, c, cbar, s, cfg["threads"], stage_suffix=f"_s{s}"),
                trial,
            )
        progress(f"fig1 trial={trial}")
    return records


def _run_fig2(cfg, progress):
    records = []
    c = NORM_GATE_SIGMA * cfg["sigma"]
    cbar = AXIS_GATE_SIGMA * cfg["sigma"]
    for k in cfg["k_values"]:
        for trial in range(cfg["trials"]):
            inst = gen_srcs(
                cfg["m"], cfg["n"], k, cfg["sigma"], seed=trial_seed(cfg["seed"], trial)
            )
            stage_records, _ = _srcs_stages(
                inst, c, cbar, cfg["n_phi"], cfg["threads"], stage_suffix=f"_k{k}"
            )
            records += _emit(stage_records, trial)
            progress(f"fig2 k={k} trial={trial}")
    return records


def _run_fig4(cfg, progress):
    records = []
    c = NORM_GATE_SIGMA * cfg["sigma"]
    cbar = AXIS_GATE_SIGMA * cfg["sigma"]
    for l in cfg["l_values"]:
        for ratio in cfg["ratios"]:
            k = max(2, int(round(l * ratio)))
            for trial in range(cfg["trials"]):
                inst = gen_rrs(
                    l,
                    k,
                    cfg["sigma"],
                    seed=trial_seed(cfg["seed"], trial),
                    norm_constrained=True,
                )
                suffix = f"_l{l}_r{ratio:g}"
                records += _emit(
                    _rrs_stages(inst, c, cbar, cfg["n_phi"], cfg["threads"], stage_suffix=suffix),
                    trial,
                )
                progress(f"fig4 l={l} ratio={ratio} trial={trial}")
    return records


def _run_fig5(cfg, progress):
    from .rotation import rodrigues, spherical_axis

    records = []
    c = NORM_GATE_SIGMA * cfg["sigma"]
    cbar = AXIS_GATE_SIGMA * cfg["sigma"]
    for omega in cfg["omega_values"]:
        rotation = rodrigues(spherical_axis(cfg["theta"], cfg["phi"]), omega)
        for trial in range(cfg["trials"]):
            inst = gen_rrs(
                cfg["l"],
                cfg["k"],
                cfg["sigma"],
                seed=trial_seed(cfg["seed"], trial),
                norm_constrained=True,
                rotation=rotation,
            )
            records += _emit(
                _rrs_stages(
                    inst, c, cbar, cfg["n_phi"], cfg["threads"], stage_suffix=f"_omega{omega:g}"
                ),
                trial,
            )
            progress(f"fig5 omega={omega:g} trial={trial}")
    for theta in cfg["theta_values"]:
        rotation = rodrigues(spherical_axis(theta, cfg["phi"]), cfg["omega"])
        for trial in range(cfg["trials"]):
            inst = gen_rrs(
                cfg["l"],
                cfg["k"],
                cfg["sigma"],
                seed=trial_seed(cfg["seed"], trial),
                norm_constrained=True,
                rotation=rotation,
            )
            records += _emit(
                _rrs_stages(
                    inst, c, cbar, cfg["n_phi"], cfg["threads"], stage_suffix=f"_theta{theta:g}"
                ),
                trial,
            )
            progress(f"fig5 theta={theta:g} trial={trial}")
    return records


def _run_fig6(cfg, progress):
    records = []
    for sigma in cfg["sigma_values"]:
        c = NORM_GATE_SIGMA * sigma
        cbar = AXIS_GATE_SIGMA * sigma
        for trial in range(cfg["trials"]):
            inst = gen_srcs(
                cfg["m"], cfg["n"], cfg["k"], sigma, seed=trial_seed(cfg["seed"], trial)
            )
            stage_records, _ = _srcs_stages(
                inst, c, cbar, cfg["n_phi"], cfg["threads"], stage_suffix=f"_sigma{sigma:g}"
            )
            records += _emit(stage_records, trial)
            progress(f"fig6 sigma={sigma:g} trial={trial}")
    return records


_PRESETS = {
    "table2": (
        _run_table2,
        {"m_values": [10_000, 100_000, 1_000_000], "trials": 10},
        {},
    ),
    "table3": (
        _run_table3,
        {"m": 1000, "n": 800, "k": 200, "sigma": 0.01, "trials": 100},
        {},
    ),
    "table4": (
        _run_table4,
        {"m": 1000, "n": 800, "k": 200, "sigma": 0.01, "n_phi": 90, "trials": 20},
        {},
    ),
    "table5_scaled": (
        _run_table5,
        {"l": 100_000, "k": 1000, "sigma": 0.01, "n_phi": 90, "trials": 20},
        {"l": 1_000_000},
    ),
    "fig1_s_sweep": (
        _run_fig1,
        {
            "l": 10_000,
            "k": 2000,
            "sigma": 0.01,
            "s_values": list(range(10, 181, 10)),
            "trials": 50,
        },
        {"l": 100_000, "k": 1000},
    ),
    "fig2_pipeline": (
        _run_fig2,
        {
            "m": 10_000,
            "n": 8000,
            "sigma": 0.01,
            "k_values": [1000, 2000, 4000],
            "n_phi": 90,
            "trials": 20,
        },
        {},
    ),
    "fig4_phase": (
        _run_fig4,
        {
            "l_values": [10_000, 30_000],
            "ratios": [0.01, 0.03, 0.09],
            "sigma": 0.01,
            "n_phi": 90,
            "trials": 10,
        },
        {"l_values": [10_000, 30_000, 90_000]},
    ),
    "fig5_sensitivity": (
        _run_fig5,
        {
            "l": 10_000,
            "k": 1000,
            "sigma": 0.01,
            "n_phi": 90,
            "trials": 10,
            "omega_values": [round(x, 4) for x in np.linspace(0.4, 5.9, 8)],
            "theta_values": [round(x, 4) for x in np.linspace(0.15, math.pi - 0.15, 5)],
            "theta": 1.0,
            "phi": 1.0,
            "omega": 2.0,
        },
        {"l": 100_000},
    ),
    "fig6_noise": (
        _run_fig6,
        {
            "m": 1000,
            "n": 800,
            "k": 200,
            "sigma_values": [0.005, 0.01, 0.02, 0.04],
            "n_phi": 90,
            "trials": 20,
        },
        {},
    ),
}


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def _aggregate(records: list[TrialRecord]) -> dict:
    stages: dict[str, dict] = {}
    by_stage: dict[str, list[TrialRecord]] = {}
    for r in records:
        by_stage.setdefault(r.stage, []).append(r)
    for stage, rs in sorted(by_stage.items()):
        errors = [r.error_deg for r in rs if r.error_deg is not None]
        sizes = [r.consensus_size for r in rs if r.consensus_size is not None]
        purities = [r.inlier_purity for r in rs if r.inlier_purity is not None]
        entry = {
            "count": len(rs),
            "mean_runtime_ms": float(np.mean([r.runtime_ms for r in rs])),
        }
        if errors:
            entry["mean_error_deg"] = float(np.mean(errors))
            entry["std_error_deg"] = float(np.std(errors))
            entry["success_rate_10deg"] = success_rate(errors, 10.0)
        if sizes:
            entry["mean_consensus_size"] = float(np.mean(sizes))
        if purities:
            entry["mean_inlier_purity"] = float(np.mean(purities))
        stages[stage] = entry
    return stages


def run_experiment(
    preset: str,
    trials: int | None = None,
    seed: int = 0,
    threads: int | None = None,
    full_scale: bool = False,
    overrides: dict | None = None,
    out_dir=None,
    verbose: bool = False,
) -> ExperimentReport:
    """Run a named preset and optionally write its report files.

    Raises:
        ValueError: unknown preset name.
    """
    if preset not in _PRESETS:
        raise ValueError(f"unknown preset {preset!r}; known: {', '.join(preset_names())}")
    runner, defaults, full_overrides = _PRESETS[preset]
    cfg = dict(defaults)
    if full_scale:
        cfg.update(full_overrides)
    if trials is not None:
        cfg["trials"] = int(trials)
    if overrides:
        cfg.update(overrides)
    cfg["seed"] = int(seed)
    cfg["threads"] = threads
    cfg.setdefault("n_phi", 90)

    def progress(msg):
        if verbose:
            print(msg, flush=True)

    records = runner(cfg, progress)
    report = ExperimentReport(
        preset=preset,
        config=cfg,
        rng=RNG_ALGORITHM,
        records=records,
        aggregates=_aggregate(records),
    )
    if out_dir is not None:
        write_report(report, out_dir)
    return report


def write_report(report: ExperimentReport, out_dir) -> tuple[Path, Path]:
    """Write ``<preset>.json`` and ``<preset>.csv`` under ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / f"{report.preset}.json"
    csv_path = out_dir / f"{report.preset}.csv"
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["trial", "stage", "error_deg", "runtime_ms", "consensus_size", "inlier_purity"]
        )
        for r in report.records:
            writer.writerow(
                [
                    r.trial,
                    r.stage,
                    "" if r.error_deg is None else repr(r.error_deg),
                    repr(r.runtime_ms),
                    "" if r.consensus_size is None else r.consensus_size,
                    "" if r.inlier_purity is None else repr(r.inlier_purity),
                ]
            )
    return json_path, csv_path
