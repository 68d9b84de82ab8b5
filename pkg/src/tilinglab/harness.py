"""Seeded Monte Carlo threshold sweeps over p = c n^(-2/r).

Each trial seed is ``derive_seed(master_seed, n, c_index, trial_index)`` and
every random object of the trial is derived from it, so a record can be
regenerated from its seed alone.  Records are sorted before anything is
written; the CSV is byte-identical whatever the worker count.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy import optimize, stats

from tilinglab.absorber import PipelineConfig, star_tiling_pipeline
from tilinglab.bounds import wilson_interval
from tilinglab.errors import BudgetExceeded, ConfigError, DegenerateData, TilingLabError
from tilinglab.generators import (
    RandomSpec, gen_extremal, gen_random, gen_sublinear, gen_superregular_star,
)
from tilinglab.mpgraph import PartiteGraph, complete_graph, deserialize, empty_graph
from tilinglab.rng import derive_seed
from tilinglab.tiler import (
    TilingSearchStats, exact_perfect_tiling, greedy_partial_tiling, tiling_digest, tiling_problems,
)

CSV_COLUMNS = ("n", "c", "p", "seed", "outcome", "wall_ms", "cliques", "leftover")
HOST_KINDS = ("extremal", "sublinear", "file", "none", "complete", "star")
SOLVERS = ("exact", "pipeline", "greedy", "auto")
EXACT_AUTO_MAX_N = 30


@dataclass(frozen=True)
class SweepConfig:
    r: int
    n_values: tuple[int, ...]
    c_grid: tuple[float, ...]
    trials_per_cell: int
    host: dict = field(default_factory=lambda: {"kind": "none"})
    solver: str = "auto"
    master_seed: int = 0
    budget: int = 200_000
    # pipeline solver only
    d: float = 0.4
    delta: float = 0.04
    attempts: int = 64
    record_wall_time: bool = False

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "c_grid", tuple(float(c) for c in self.c_grid))
        object.__setattr__(self, "host", dict(self.host))
        if self.r < 2:
            raise ConfigError(f"r must be >= 2, got {self.r}")
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ConfigError("n_values must be a nonempty list of positive integers")
        if not self.c_grid or any(not c > 0 for c in self.c_grid):
            raise ConfigError("c_grid must be a nonempty list of positive numbers")
        if len(set(self.c_grid)) != len(self.c_grid):
            raise ConfigError("c_grid entries must be distinct")
        if self.trials_per_cell < 1:
            raise ConfigError("trials_per_cell must be >= 1")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        kind = self.host.get("kind")
        if kind not in HOST_KINDS:
            raise ConfigError(f"host.kind must be one of {HOST_KINDS}, got {kind!r}")
        need = {"extremal": "alpha", "sublinear": "omega", "file": "path"}.get(kind)
        if need and need not in self.host:
            raise ConfigError(f"host kind {kind!r} needs field {need!r}")
        if self.solver == "pipeline" and kind != "star":
            raise ConfigError("the pipeline solver needs a star host")
        if self.budget < 1:
            raise ConfigError("budget must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        missing = {"r", "n_values", "c_grid", "trials_per_cell"} - set(data)
        if missing:
            raise ConfigError(f"missing config fields: {sorted(missing)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "SweepConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["n_values"] = list(self.n_values)
        out["c_grid"] = list(self.c_grid)
        return out

    def p_of(self, n: int, c: float) -> float:
        return min(1.0, c * n ** (-2 / self.r))

    def solver_for(self, n: int) -> str:
        if self.solver != "auto":
            return self.solver
        if self.host.get("kind") == "star":
            return "pipeline"
        return "exact" if n <= EXACT_AUTO_MAX_N else "greedy"


@dataclass(frozen=True)
class TrialRecord:
    n: int
    c: float
    p: float
    seed: int
    outcome: str  # perfect | no_tiling | budget_exceeded | heuristic_miss | pipeline_failure:<stage> | error:<type>
    wall_ms: float | None
    cliques: int
    leftover: int
    c_index: int = 0
    trial: int = 0
    digest: str | None = None

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.n, self.c_index, self.trial)

    def csv_row(self) -> list[str]:
        return [str(self.n), repr(self.c), repr(self.p), str(self.seed), self.outcome,
                "" if self.wall_ms is None else f"{self.wall_ms:.1f}", str(self.cliques), str(self.leftover)]

    def to_json(self) -> dict:
        return asdict(self)


def trial_seed(cfg: SweepConfig, n: int, c_index: int, trial: int) -> int:
    return derive_seed(cfg.master_seed, n, c_index, trial)


def build_host(cfg: SweepConfig, n: int, seed: int) -> PartiteGraph:
    h, r = cfg.host, cfg.r
    kind = h["kind"]
    if kind == "extremal":
        return gen_extremal(r, n, float(h["alpha"]))
    if kind == "sublinear":
        return gen_sublinear(r, n, float(h["omega"]))
    if kind == "complete":
        return complete_graph(r, n)
    if kind == "none":
        return empty_graph(r, n)
    if kind == "star":
        return gen_superregular_star(r, n, float(h.get("d", cfg.d)), RandomSpec(0.0, derive_seed(seed, 1)))
    g = deserialize(Path(h["path"]).read_bytes())
    if g.r != r or g.n != n:
        raise ConfigError(f"host file has r={g.r}, n={g.n}; sweep asks for r={r}, n={n}")
    return g


def perturbed_instance(cfg: SweepConfig, n: int, c_index: int, trial: int) -> PartiteGraph:
    """Host united with G_r(n, p), regenerated from the trial seed alone."""
    seed = trial_seed(cfg, n, c_index, trial)
    p = cfg.p_of(n, cfg.c_grid[c_index])
    return build_host(cfg, n, seed) | gen_random(cfg.r, n, RandomSpec(p, seed))


def run_trial(cfg: SweepConfig, n: int, c: float, trial_index: int) -> TrialRecord:
    """One trial; solver errors become outcomes instead of aborting the sweep."""
    c_index = cfg.c_grid.index(c)
    seed = trial_seed(cfg, n, c_index, trial_index)
    p = cfg.p_of(n, c)
    solver = cfg.solver_for(n)
    start = time.perf_counter()
    cliques, leftover, digest = 0, n, None
    try:
        host = build_host(cfg, n, seed)
        if solver == "pipeline":
            res = star_tiling_pipeline(host, PipelineConfig(cfg.d, cfg.delta, p, seed, attempts=cfg.attempts))
            if res.perfect:
                outcome, leftover, tiling = "perfect", 0, res.tiling
                if tiling_problems(res.perturbed, tiling):
                    outcome = "error:invalid_tiling"
                digest = tiling_digest(tiling)
            else:
                outcome, tiling = f"pipeline_failure:{res.stage}", None
        else:
            g = host | gen_random(cfg.r, n, RandomSpec(p, seed))
            if solver == "exact":
                st = TilingSearchStats()
                try:
                    tiling = exact_perfect_tiling(g, budget=cfg.budget, stats=st)
                    outcome = "perfect" if tiling is not None else "no_tiling"
                except BudgetExceeded:
                    tiling, outcome = None, "budget_exceeded"
                cliques = st.cliques
            else:
                tiling = greedy_partial_tiling(g, derive_seed(seed, 2))
                outcome = "perfect" if tiling.is_perfect else "heuristic_miss"
                leftover = tiling.leftover()[0]
                tiling = tiling if tiling.is_perfect else None
            if tiling is not None:
                if tiling_problems(g, tiling):
                    outcome = "error:invalid_tiling"
                leftover, digest = 0, tiling_digest(tiling)
    except (TilingLabError, ValueError) as exc:
        outcome = f"error:{type(exc).__name__}"
    wall = (time.perf_counter() - start) * 1000 if cfg.record_wall_time else None
    return TrialRecord(n, float(c), p, seed, outcome, wall, cliques, leftover, c_index, trial_index, digest)


def _task(args):
    cfg, n, c, trial = args
    return run_trial(cfg, n, c, trial)


@dataclass
class CellSummary:
    n: int
    c: float
    successes: int
    trials: int
    ci_low: float
    ci_high: float
    outcomes: dict

    @property
    def fraction(self) -> float:
        return self.successes / self.trials


@dataclass
class TransitionFit:
    c50: float
    c50_ci: tuple[float, float]
    slope: float
    deviance: float
    dof: int


@dataclass
class SweepResult:
    config: SweepConfig
    records: list[TrialRecord]
    cells: dict[tuple[int, float], CellSummary]
    fits: dict[int, TransitionFit | str]
    exponent_estimate: float | None
    ci_method: str = "wilson-95"

    def summary(self) -> dict:
        fits = {}
        for n, f in self.fits.items():
            fits[str(n)] = f if isinstance(f, str) else {
                "c50": f.c50, "c50_ci": list(f.c50_ci), "slope": f.slope,
                "p50": f.c50 * n ** (-2 / self.config.r), "deviance": f.deviance, "dof": f.dof,
            }
        return {
            "config": self.config.to_dict(),
            "ci_method": self.ci_method,
            "total_trials": len(self.records),
            "cells": [
                {"n": s.n, "c": s.c, "successes": s.successes, "trials": s.trials,
                 "fraction": s.fraction, "ci": [s.ci_low, s.ci_high], "outcomes": s.outcomes}
                for s in sorted(self.cells.values(), key=lambda s: (s.n, s.c))
            ],
            "fits": fits,
            "exponent_estimate": self.exponent_estimate,
            "target_exponent": -2 / self.config.r,
        }


def records_csv(records: list[TrialRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in sorted(records, key=lambda r: r.key):
        w.writerow(rec.csv_row())
    return buf.getvalue()


PARTIAL_NAME = "partial.jsonl"


def _load_partial(path: Path) -> dict[int, TrialRecord]:
    done = {}
    if not path.exists():
        return done
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        try:
            rec = TrialRecord(**json.loads(line))
        except (json.JSONDecodeError, TypeError):
            continue  # a torn last line from an interrupted run
        done[rec.seed] = rec
    return done


def sweep(cfg: SweepConfig, threads: int = 1, out_dir=None, resume: bool = False,
          gnuplot: bool = True) -> SweepResult:
    tasks = [(n, ci, t) for n in cfg.n_values for ci in range(len(cfg.c_grid))
             for t in range(cfg.trials_per_cell)]
    out = Path(out_dir) if out_dir is not None else None
    done: dict[int, TrialRecord] = {}
    partial = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        ppath = out / PARTIAL_NAME
        if resume:
            done = _load_partial(ppath)
        elif ppath.exists():
            ppath.unlink()
        partial = ppath.open("a")
        if resume and ppath.stat().st_size and not ppath.read_bytes().endswith(b"\n"):
            partial.write("\n")  # keep a torn line from swallowing the next record
    todo = [(cfg, n, cfg.c_grid[ci], t) for n, ci, t in tasks if trial_seed(cfg, n, ci, t) not in done]
    records = [done[trial_seed(cfg, n, ci, t)] for n, ci, t in tasks if trial_seed(cfg, n, ci, t) in done]

    def flush(rec):
        records.append(rec)
        if partial is not None:
            partial.write(json.dumps(rec.to_json()) + "\n")
            partial.flush()

    try:
        if threads > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                for rec in pool.map(_task, todo, chunksize=max(1, len(todo) // (8 * threads))):
                    flush(rec)
        else:
            for args in todo:
                flush(_task(args))
    finally:
        if partial is not None:
            partial.close()

    records.sort(key=lambda r: r.key)
    result = summarize(cfg, records)
    if out is not None:
        (out / "results.csv").write_text(records_csv(records))
        (out / "summary.json").write_text(json.dumps(result.summary(), indent=2, sort_keys=True) + "\n")
        if gnuplot:
            (out / "transition.dat").write_text(gnuplot_data(result))
    return result


def summarize(cfg: SweepConfig, records: list[TrialRecord]) -> SweepResult:
    cells = {}
    for n in cfg.n_values:
        for c in cfg.c_grid:
            recs = [r for r in records if r.n == n and r.c == c]
            if not recs:
                continue
            k = sum(r.outcome == "perfect" for r in recs)
            lo, hi = wilson_interval(k, len(recs))
            counts: dict[str, int] = {}
            for r in recs:
                counts[r.outcome] = counts.get(r.outcome, 0) + 1
            cells[(n, c)] = CellSummary(n, c, k, len(recs), lo, hi, dict(sorted(counts.items())))
    fits: dict[int, TransitionFit | str] = {}
    for n in cfg.n_values:
        data = [(s.c, s.successes, s.trials) for (m, _), s in cells.items() if m == n]
        try:
            fits[n] = fit_transition(data)
        except DegenerateData as exc:
            fits[n] = f"degenerate: {exc}"
    exponent = exponent_estimate({n: f.c50 for n, f in fits.items() if isinstance(f, TransitionFit)}, cfg.r)
    return SweepResult(cfg, records, cells, fits, exponent)


def exponent_estimate(c50_by_n: dict[int, float], r: int) -> float | None:
    """Least-squares slope of log p50 against log n, with p50 = c50 n^(-2/r)."""
    if len(c50_by_n) < 2:
        return None
    ns = np.array(sorted(c50_by_n), dtype=float)
    p50 = np.array([c50_by_n[int(n)] for n in ns]) * ns ** (-2 / r)
    slope, _ = np.polyfit(np.log(ns), np.log(p50), 1)
    return float(slope)


# -- logistic transition fit ------------------------------------------------

SLOPE_BOUNDS = (1e-3, 60.0)


def _nll(theta, x, k, m):
    mid, beta = theta
    z = beta * (x - mid)
    # log(sigmoid(z)) and log(1 - sigmoid(z)), both stable
    return float(np.sum(k * np.logaddexp(0, -z) + (m - k) * np.logaddexp(0, z)))


def fit_transition(cells) -> TransitionFit:
    """Two-parameter logistic in log c, maximum likelihood.

    ``cells`` is a list of (c, successes, trials) or (c, fraction) pairs; a
    bare fraction counts as one trial with fractional successes.  The
    midpoint CI is the 95% profile-likelihood interval, clipped to the
    bracket searched (widened grid edges).
    """
    rows = []
    for cell in cells:
        if len(cell) == 2:
            c, frac = cell
            rows.append((float(c), float(frac), 1.0))
        else:
            c, k, m = cell
            rows.append((float(c), float(k), float(m)))
    if len({c for c, _, _ in rows}) < 3:
        raise DegenerateData("need at least 3 distinct c values")
    k_tot = sum(k for _, k, _ in rows)
    m_tot = sum(m for _, _, m in rows)
    if k_tot == 0 or k_tot == m_tot:
        raise DegenerateData("all outcomes identical" + (" (all failures)" if k_tot == 0 else " (all successes)"))
    x = np.log([c for c, _, _ in rows])
    k = np.array([r[1] for r in rows])
    m = np.array([r[2] for r in rows])
    span = x.max() - x.min()
    lo_mid, hi_mid = x.min() - span, x.max() + span

    best = None
    for mid0 in np.linspace(x.min(), x.max(), 5):
        for beta0 in (0.5, 2.0, 8.0):
            res = optimize.minimize(_nll, (mid0, beta0), args=(x, k, m), method="L-BFGS-B",
                                    bounds=[(lo_mid, hi_mid), SLOPE_BOUNDS])
            if best is None or res.fun < best.fun - 1e-12:
                best = res
    mid, beta = best.x
    nll_min = best.fun

    def profile(mu):
        res = optimize.minimize_scalar(lambda b: _nll((mu, b), x, k, m), bounds=SLOPE_BOUNDS, method="bounded")
        return res.fun

    crit = stats.chi2.ppf(0.95, 1) / 2

    def edge(target):
        f = lambda mu: profile(mu) - nll_min - crit  # noqa: E731
        if f(target) <= 0:
            return target
        return optimize.brentq(f, min(mid, target), max(mid, target), xtol=1e-6)

    ci = (math.exp(edge(lo_mid)), math.exp(edge(hi_mid)))
    # deviance against the saturated model
    with np.errstate(divide="ignore", invalid="ignore"):
        ph = np.where(m > 0, k / m, 0)
        sat = -np.sum(np.where(k > 0, k * np.log(np.where(ph > 0, ph, 1)), 0)
                      + np.where(m - k > 0, (m - k) * np.log(np.where(ph < 1, 1 - ph, 1)), 0))
    deviance = float(2 * (nll_min - sat))
    return TransitionFit(float(math.exp(mid)), ci, float(beta), max(0.0, deviance), len(rows) - 2)


def gnuplot_data(result: SweepResult) -> str:
    lines = ["# n c p fraction ci_low ci_high successes trials"]
    for n in result.config.n_values:
        for c in result.config.c_grid:
            s = result.cells.get((n, c))
            if s is None:
                continue
            lines.append(f"{n} {c!r} {result.config.p_of(n, c)!r} {s.fraction!r} "
                         f"{s.ci_low!r} {s.ci_high!r} {s.successes} {s.trials}")
        lines.append("")
        lines.append("")
    return "\n".join(lines)


def default_threads() -> int:
    return max(1, os.cpu_count() or 1)
