"""Experiment engine: declarative configs, reproducible runs, CSV/JSONL out.

Every experiment maps a (n, p, q) grid to one output record per grid point
(the extremal and sample experiments emit one record per draw).  Estimates
inherit the deterministic block-stream contract, so re-running a config
reproduces records bit for bit regardless of worker count.
"""
from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from scipy.stats import ks_2samp

from . import divergences, extremal, fisher, jacobi, moments
from .ensembles import Spectrum, corner_batch, spectrum_batch
from .mc import MCEstimate, merge_estimates, run_blocked, sample_stream
from .params import EnsembleParams

EXPERIMENTS = ("fisher", "kl", "lsi", "moments", "extremal",
               "identity-check", "sampler-agreement", "sample")

OUTPUT_DIR_ENV = "HAARCORNER_OUT"


class ConfigError(ValueError):
    """Invalid experiment configuration; maps to CLI exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    """Declarative description of one experiment run."""

    experiment: str
    grid: tuple[tuple[int, int, int], ...]
    samples: int
    seed: int
    route: Optional[str] = None
    output_dir: Optional[str] = None
    format: str = "csv"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; "
                              f"expected one of {EXPERIMENTS}")
        if self.format not in ("csv", "jsonl"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if not self.grid:
            raise ConfigError("grid must contain at least one (n, p, q) entry")
        if self.route is not None and self.route not in fisher.ROUTES:
            raise ConfigError(f"unknown route {self.route!r}")
        norm = []
        for entry in self.grid:
            if len(entry) != 3:
                raise ConfigError(f"grid entry {entry!r} is not a triple")
            n, p, q = (int(v) for v in entry)
            if not (1 <= q <= p):
                raise ConfigError(
                    f"grid entry {entry!r} rejected: requires 1 <= q <= p")
            if p + q > n:
                raise ConfigError(
                    f"grid entry {entry!r} rejected: p + q = {p + q} > n = {n}")
            norm.append((n, p, q))
        object.__setattr__(self, "grid", tuple(norm))

    @staticmethod
    def from_json(path: str | Path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        known = {"experiment", "grid", "samples", "seed", "route",
                 "output_dir", "format"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            return RunConfig(
                experiment=raw["experiment"],
                grid=tuple(tuple(e) for e in raw["grid"]),
                samples=int(raw["samples"]),
                seed=int(raw["seed"]),
                route=raw.get("route"),
                output_dir=raw.get("output_dir"),
                format=raw.get("format", "csv"),
            )
        except KeyError as exc:
            raise ConfigError(f"missing config field: {exc}") from None


@dataclass(frozen=True)
class OutputRecord:
    """One experiment result row; ``fields`` hold the per-experiment columns."""

    experiment: str
    n: int
    p: int
    q: int
    fields: dict
    wall_time: float

    def as_flat_dict(self) -> dict:
        out = {"experiment": self.experiment, "n": self.n, "p": self.p,
               "q": self.q}
        out.update(self.fields)
        out["wall_time"] = round(self.wall_time, 6)
        return out


def _estimate_fields(est: MCEstimate) -> dict:
    return {"samples": est.count, "seed": est.seed, "mean": est.mean,
            "stderr": est.stderr, "flagged": est.flagged}


def _run_fisher(config: RunConfig, workers: int) -> list[OutputRecord]:
    route = config.route or "spectral-jacobi"
    records = []
    for n, p, q in config.grid:
        params = EnsembleParams(n, p, q)
        t0 = time.perf_counter()
        est = fisher.estimate_fisher(params, config.samples, config.seed,
                                     route, workers=workers)
        asym = fisher.fisher_asymptotic(params)
        fields = {"route": route, **_estimate_fields(est),
                  "asymptotic": asym,
                  "ratio": est.mean / asym if asym > 0 else math.nan}
        records.append(OutputRecord("fisher", n, p, q, fields,
                                    time.perf_counter() - t0))
    return records


def _run_kl(config: RunConfig, workers: int) -> list[OutputRecord]:
    records = []
    for n, p, q in config.grid:
        params = EnsembleParams(n, p, q)
        t0 = time.perf_counter()
        est = divergences.estimate_kl(params, config.samples, config.seed,
                                      workers=workers)
        asym = fisher.fisher_asymptotic(params)
        fields = {"route": "kl", **_estimate_fields(est), "asymptotic": asym,
                  "ratio": est.mean / asym if asym > 0 else math.nan}
        records.append(OutputRecord("kl", n, p, q, fields,
                                    time.perf_counter() - t0))
    return records


def _run_lsi(config: RunConfig, workers: int) -> list[OutputRecord]:
    route = config.route or "spectral-jacobi"
    records = []
    for n, p, q in config.grid:
        params = EnsembleParams(n, p, q)
        t0 = time.perf_counter()
        kl = divergences.estimate_kl(params, config.samples, config.seed,
                                     workers=workers)
        fi = fisher.estimate_fisher(params, config.samples, config.seed,
                                    route, workers=workers)
        report = divergences.check_lsi(kl, fi)
        fields = {"samples": config.samples, "seed": config.seed,
                  "kl": kl.mean, "kl_stderr": kl.stderr,
                  "fisher": fi.mean, "fisher_stderr": fi.stderr,
                  "slack": report.slack, "holds": report.holds}
        records.append(OutputRecord("lsi", n, p, q, fields,
                                    time.perf_counter() - t0))
    return records


def _run_moments(config: RunConfig, workers: int) -> list[OutputRecord]:
    records = []
    for n, p, q in config.grid:
        params = EnsembleParams(n, p, q)
        t0 = time.perf_counter()
        exp1 = moments.resolvent_expansion(params, 1)
        exp2 = moments.resolvent_expansion(params, 2)

        def t1_kernel(rng, count):
            c, cp = jacobi.sample_chain_batch(params, rng, count)
            t1, _ = jacobi.resolvent_traces_batch(c, cp)
            return t1, 0

        def t2_kernel(rng, count):
            c, cp = jacobi.sample_chain_batch(params, rng, count)
            _, t2 = jacobi.resolvent_traces_batch(c, cp)
            return t2, 0

        mc1 = run_blocked(t1_kernel, config.samples, config.seed,
                          workers=workers, provenance=(n, p, q, "t1"))
        mc2 = run_blocked(t2_kernel, config.samples, config.seed,
                          workers=workers, provenance=(n, p, q, "t2"))
        within = (abs(mc1.mean - exp1.value)
                  <= 5 * mc1.stderr + exp1.remainder_budget
                  and abs(mc2.mean - exp2.value)
                  <= 5 * mc2.stderr + exp2.remainder_budget)
        fields = {"exp1": exp1.value, "exp2": exp2.value,
                  "mc1": mc1.mean, "mc2": mc2.mean,
                  "stderr1": mc1.stderr, "stderr2": mc2.stderr,
                  "within_budget": bool(within)}
        records.append(OutputRecord("moments", n, p, q, fields,
                                    time.perf_counter() - t0))
    return records


def _run_extremal(config: RunConfig, workers: int) -> list[OutputRecord]:
    records = []
    for n, p, q in config.grid:
        params = EnsembleParams(n, p, q)
        t0 = time.perf_counter()
        rng = sample_stream(config.seed, 0)
        lo, hi = extremal.extremal_batch(params, rng, config.samples)
        dt = time.perf_counter() - t0
        sqpq = math.sqrt(p * q)
        edge = (math.sqrt(p) + math.sqrt(q)) ** 2
        tw_scale = (p * q) ** (1.0 / 6.0) / edge ** (2.0 / 3.0)
        for i in range(config.samples):
            hi_i, lo_i = float(hi[i]), float(lo[i])
            fields = {
                "seed": config.seed, "index": i,
                "lambda_max": hi_i, "lambda_min": lo_i,
                "slln_max": (n * hi_i - p) / sqpq,
                "slln_min": (n * lo_i - p) / sqpq,
                "tw_max_normalized": tw_scale * (n * hi_i - edge),
                "ratio": (math.sqrt(hi_i / lo_i) / q if p == q else ""),
            }
            records.append(OutputRecord("extremal", n, p, q, fields,
                                        dt / config.samples))
    return records


def _run_identity(config: RunConfig, workers: int) -> list[OutputRecord]:
    records = []
    for n, p, q in config.grid:
        params = EnsembleParams(n, p, q)
        t0 = time.perf_counter()
        rng = sample_stream(config.seed, 0)
        z = corner_batch(params, rng, config.samples)
        lam = spectrum_batch(z)
        worst = 0.0
        for i in range(config.samples):
            g = fisher.integrand_gradient(z[i], params)
            s = fisher.integrand_spectral(Spectrum(lam[i], "lambda"), params)
            rel = abs(g - s) / max(abs(s), 1e-14)
            worst = max(worst, rel)
        fields = {"samples": config.samples, "seed": config.seed,
                  "max_rel_diff": worst, "passed": bool(worst < 1e-8)}
        records.append(OutputRecord("identity-check", n, p, q, fields,
                                    time.perf_counter() - t0))
    return records


def _run_sampler_agreement(config: RunConfig, workers: int) -> list[OutputRecord]:
    records = []
    for n, p, q in config.grid:
        params = EnsembleParams(n, p, q)
        t0 = time.perf_counter()
        rng = sample_stream(config.seed, 0)
        lam = spectrum_batch(corner_batch(params, rng, config.samples))
        corner_stat = (1.0 / (1.0 - lam)).sum(axis=1)
        rng2 = sample_stream(config.seed, 1)
        c, cp = jacobi.sample_chain_batch(params, rng2, config.samples)
        jac_stat, _ = jacobi.resolvent_traces_batch(c, cp)
        res = ks_2samp(corner_stat, jac_stat)
        fields = {"samples": config.samples, "seed": config.seed,
                  "ks_stat": float(res.statistic),
                  "p_value": float(res.pvalue),
                  "passed": bool(res.pvalue > 0.01)}
        records.append(OutputRecord("sampler-agreement", n, p, q, fields,
                                    time.perf_counter() - t0))
    return records


def _run_sample(config: RunConfig, workers: int) -> list[OutputRecord]:
    records = []
    for n, p, q in config.grid:
        params = EnsembleParams(n, p, q)
        t0 = time.perf_counter()
        rng = sample_stream(config.seed, 0)
        lam = spectrum_batch(corner_batch(params, rng, config.samples))
        dt = time.perf_counter() - t0
        for i in range(config.samples):
            fields = {"seed": config.seed, "index": i,
                      "spectrum": [float(v) for v in lam[i]]}
            records.append(OutputRecord("sample", n, p, q, fields,
                                        dt / config.samples))
    return records


_RUNNERS = {
    "fisher": _run_fisher,
    "kl": _run_kl,
    "lsi": _run_lsi,
    "moments": _run_moments,
    "extremal": _run_extremal,
    "identity-check": _run_identity,
    "sampler-agreement": _run_sampler_agreement,
    "sample": _run_sample,
}


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "haarcorner-out"))


def write_records(records: list[OutputRecord], path: Path, fmt: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "jsonl" or (records and "spectrum" in records[0].fields):
        with open(path, "w") as fh:
            for rec in records:
                fh.write(json.dumps(rec.as_flat_dict()) + "\n")
        return
    if not records:
        path.write_text("")
        return
    header = list(records[0].as_flat_dict().keys())
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=header)
        writer.writeheader()
        for rec in records:
            writer.writerow(rec.as_flat_dict())


def run_experiment(config: RunConfig, *, workers: int = 1,
                   write: bool = True) -> list[OutputRecord]:
    """Run one configured experiment; optionally persist the records.

    Grid validation happens at config construction, before any sampling.
    The sample dump always uses JSONL; other experiments follow
    ``config.format``.
    """
    records = _RUNNERS[config.experiment](config, workers)
    if write:
        out_dir = Path(config.output_dir) if config.output_dir \
            else default_output_dir()
        ext = "jsonl" if (config.format == "jsonl"
                          or config.experiment == "sample") else "csv"
        write_records(records, out_dir / f"{config.experiment}.{ext}", ext)
        if config.experiment == "lsi":
            report = [{"params": [r.n, r.p, r.q],
                       "kl": r.fields["kl"], "fisher": r.fields["fisher"],
                       "slack": r.fields["slack"],
                       "holds": r.fields["holds"]} for r in records]
            (out_dir / "lsi_report.json").write_text(
                json.dumps(report, indent=2) + "\n")
    return records


__all__ = ["ConfigError", "RunConfig", "OutputRecord", "run_experiment",
           "merge_estimates", "write_records", "EXPERIMENTS",
           "OUTPUT_DIR_ENV", "default_output_dir"]
