"""Named experiments driven by a config mapping, producing a RunRecord.

Aggregate tables depend only on (config, seed); wall-clock timings are kept
apart so that the tables can be compared byte for byte across runs.
"""

from __future__ import annotations

import math
import subprocess
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .asymptotics import (fixed_k_limit_moment, fixed_k_prediction, fixed_k_spectrum,
                          linear_regime_predictions, rc_vs_ruc, s_function)
from .channel_lab import Regime, input_family
from .moment_engine import (EXACT_CAPS, diagrammatic_limit_moment, exact_moment, mc_moment,
                            technical_identity_lhs)
from .montecarlo import SimulationConfig, hw_violations, run_trials
from .permkit import MAX_ENUMERATION_ORDER, CapExceeded, Permutation
from .sampler import MomentProfile, WeightVector
from .weingarten import integer_partitions, weingarten_table, wg_asymptotic

HW_TOL = 1e-10
EXPERIMENTS = ("wg-table", "fixed-k-sim", "linear-k-sim", "moments-check", "identity-check",
               "compare-rc-ruc")


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


@dataclass(frozen=True)
class Gate:
    name: str
    value: float
    threshold: float
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold,
                "passed": self.passed}


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]]


@dataclass
class RunRecord:
    experiment: str
    config: dict
    seed: int | None
    version: str
    tables: dict[str, Table] = field(default_factory=dict)
    gates: list[Gate] = field(default_factory=list)
    trials: list[dict] = field(default_factory=list)
    predictions: dict = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    histogram: dict | None = None

    @property
    def passed(self) -> bool:
        return all(g.passed for g in self.gates)

    def gate(self, name: str, value: float, threshold: float, passed: bool | None = None):
        if passed is None:
            passed = bool(value <= threshold)
        self.gates.append(Gate(name, float(value), float(threshold), bool(passed)))

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment, "config": self.config, "seed": self.seed,
            "version": self.version, "passed": self.passed,
            "gates": [g.to_dict() for g in self.gates],
            "tables": {k: {"columns": t.columns, "rows": t.rows} for k, t in self.tables.items()},
            "trials": self.trials, "predictions": self.predictions, "timings": self.timings,
        }


def artifact_version() -> str:
    try:
        sha = subprocess.run(["git", "rev-parse", "--short", "HEAD"], capture_output=True,
                             text=True, timeout=5, cwd=Path(__file__).parent).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        sha = ""
    return f"{__version__}+g{sha}" if sha else __version__


# -- config helpers ---------------------------------------------------------

def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"missing required parameter {key!r}")
    return cfg[key]


def _int(cfg: dict, key: str, low: int = 1) -> int:
    val = _require(cfg, key)
    if isinstance(val, bool) or not isinstance(val, int) or val < low:
        raise ConfigError(f"{key} must be an integer >= {low}, got {val!r}")
    return val


def _real(cfg: dict, key: str, low: float | None = None, high: float | None = None) -> float:
    val = _require(cfg, key)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{key} must be a number, got {val!r}")
    if (low is not None and val < low) or (high is not None and val > high):
        raise ConfigError(f"{key}={val} outside [{low}, {high}]")
    return float(val)


def parse_weights(value, k: int | None) -> WeightVector:
    """'uniform' / 'ramp' (need k) or an explicit list (k inferred and cross-checked)."""
    if isinstance(value, str):
        if k is None:
            raise ConfigError(f"weights {value!r} needs k")
        if value == "uniform":
            return WeightVector.uniform(k)
        if value == "ramp":
            return WeightVector.ramp(k)
        raise ConfigError(f"unknown weight profile {value!r} (use uniform, ramp or a list)")
    if not isinstance(value, (list, tuple)):
        raise ConfigError("weights must be 'uniform', 'ramp' or a list of numbers")
    try:
        w = WeightVector(tuple(value))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid weights: {exc}") from None
    if k is not None and w.k != k:
        raise ConfigError(f"weights list has length {w.k} but k={k}")
    return w


def _m(cfg: dict) -> float:
    return _real(cfg, "m", 0.0, 1.0)


# -- experiments ------------------------------------------------------------

def _wg_table(cfg: dict, rec: RunRecord, jobs: int):
    n = _int(cfg, "n")
    ps = _require(cfg, "p")
    ps = [ps] if isinstance(ps, int) else list(ps)
    if any(not isinstance(p, int) or p < 1 for p in ps):
        raise ConfigError("p must be a positive integer or a list of them")
    if max(ps) > MAX_ENUMERATION_ORDER:
        raise CapExceeded(f"p is capped at {MAX_ENUMERATION_ORDER}")
    rows, worst = [], 0.0
    for p in ps:
        table = weingarten_table(n, p, exact=True)
        resid = table.pseudo_inverse_residual() if table.convention_dependent \
            else table.convolution_residual()
        worst = max(worst, resid)
        for ct in integer_partitions(p):
            val = Fraction(table.values[ct])
            asym = float(wg_asymptotic(n, _perm_of_type(ct)))
            ratio = float(val) / asym if asym else math.nan
            rows.append([" ".join(map(str, ct)), val.numerator, val.denominator, asym, ratio])
    rec.tables["wg_table"] = Table(["cycle_type", "exact_num", "exact_den", "asymptotic", "ratio"], rows)
    rec.predictions["convention_dependent"] = any(n < p for p in ps)
    rec.gate("convolution_residual", worst, 0.0)


def _perm_of_type(ct: tuple[int, ...]) -> Permutation:
    images, start = [], 0
    for length in ct:
        images += [start + (i + 1) % length for i in range(length)]
        start += length
    return Permutation(tuple(images))


def _fixed_k_sim(cfg: dict, rec: RunRecord, jobs: int):
    n, k, trials = _int(cfg, "n"), _int(cfg, "k"), _int(cfg, "trials", 2)
    w = parse_weights(_require(cfg, "weights"), k)
    m = _m(cfg)
    tol = _real(cfg, "tolerance", 0.0) if "tolerance" in cfg else 0.02
    sim = SimulationConfig(n, w, input_family(n, m), rec.seed, Regime.FIXED_K)
    summaries = _timed(rec, "trials", lambda: run_trials(sim, trials, jobs))
    spectra = np.stack([s.eigenvalues for s in summaries])
    mean = spectra.mean(axis=0)
    pred = fixed_k_spectrum(w, m)
    dev = np.abs(mean - pred)
    rows = [[r + 1, float(mean[r]), float(pred[r]), float(dev[r])] for r in range(k * k)]
    rec.tables["spectrum"] = Table(["eig_rank", "empirical_mean", "predicted", "abs_dev"], rows)
    rec.trials = [_trial_dict(s) for s in summaries]
    rec.predictions = fixed_k_prediction(w, m).to_record()
    rec.predictions["empirical_mean_entropy"] = float(np.mean([s.entropy for s in summaries]))
    rec.histogram = {"kind": "fixed_k", "values": spectra.ravel(), "atoms": pred,
                     "title": f"fixed-k output spectrum, n={n}, k={k}, m={m}"}
    # gate on per-trial deviations of the sorted spectrum, not on the averaged spectrum
    rec.gate("mean_abs_dev", float(np.abs(spectra - pred).mean()), tol)
    rec.gate("hayden_winter_violations", hw_violations(summaries, HW_TOL), 0)


def _linear_k_sim(cfg: dict, rec: RunRecord, jobs: int):
    n, trials = _int(cfg, "n", 2), _int(cfg, "trials", 2)
    if "k" in cfg:
        k = _int(cfg, "k")
    else:
        k = max(1, round(_real(cfg, "c", 0.0) * n))
    c = k / n
    w = parse_weights(_require(cfg, "weights"), k)
    profile = w.profile or MomentProfile("explicit", tuple(w.empirical_profile(q) for q in range(1, 9)))
    m = _m(cfg)
    p_max = _int(cfg, "p_max", 2) if "p_max" in cfg else 3
    tol = _real(cfg, "tolerance", 0.0) if "tolerance" in cfg else 0.15
    ent_tol = _real(cfg, "entropy_tolerance", 0.0) if "entropy_tolerance" in cfg else 0.05
    sim = SimulationConfig(n, w, input_family(n, m), rec.seed, Regime.LINEAR, compressed=True)
    summaries = _timed(rec, "trials", lambda: run_trials(sim, trials, jobs))
    pred = linear_regime_predictions(max(p_max, 2), c, profile, m, n)
    scale = c * n
    rows = []

    def add(name, emp, predicted, threshold):
        rel = abs(emp - predicted) / abs(predicted) if predicted else abs(emp)
        rows.append([name, float(emp), float(predicted), float(rel)])
        if threshold is not None:
            rec.gate(name, rel, threshold)

    add("top_eigenvalue", np.mean([scale * s.lambda_max for s in summaries]), pred.top_eigenvalue, tol)
    series = mc_moment(p_max, trials, sim, summaries=summaries)
    for p in range(2, p_max + 1):
        add(f"moment_{p}", series.estimate(p), pred.moment_table[p], tol if p == 2 else None)
    bulk = np.concatenate([(scale ** 2) * s.compressed for s in summaries])
    size = n * n - 1
    for q in (1, 2):
        emp = np.mean([np.sum(((scale ** 2) * s.compressed) ** q) / size for s in summaries])
        add(f"compressed_moment_{q}", emp, pred.compressed_moments[q], tol)
    if pred.entropy is not None:
        to_unit = 1 / math.log(2) if cfg.get("bits") else 1.0
        emp = np.mean([s.entropy for s in summaries]) * to_unit
        add("entropy", emp, pred.entropy * to_unit, ent_tol)
    rec.tables["linear"] = Table(["quantity", "empirical", "predicted", "rel_dev"], rows)
    rec.trials = [_trial_dict(s) for s in summaries]
    rec.predictions = pred.to_record()
    rec.histogram = {"kind": "linear", "values": bulk,
                     "moments": [pred.compressed_moments[1], pred.compressed_moments[2]],
                     "title": f"(cn)^2-rescaled compressed spectrum, n={n}, k={k}"}
    rec.gate("hayden_winter_violations", hw_violations(summaries, HW_TOL), 0)


def _moments_check(cfg: dict, rec: RunRecord, jobs: int):
    n, k, trials = _int(cfg, "n"), _int(cfg, "k"), _int(cfg, "trials", 2)
    p_max = _int(cfg, "p_max")
    w = parse_weights(_require(cfg, "weights"), k)
    m = _m(cfg)
    z_max = _real(cfg, "z_max", 0.0) if "z_max" in cfg else 3.0
    state = input_family(n, m)
    sim = SimulationConfig(n, w, state, rec.seed, Regime.FIXED_K)
    summaries = _timed(rec, "trials", lambda: run_trials(sim, trials, jobs))
    series = mc_moment(p_max, trials, sim, summaries=summaries)
    exact_ok = n <= EXACT_CAPS["n"] and k <= EXACT_CAPS["k"] and p_max <= EXACT_CAPS["p"]
    if exact_ok:
        series.predictions = _timed(rec, "exact", lambda: {
            p: exact_moment(p, n, k, w, state) for p in range(1, p_max + 1)})
    source = "exact" if exact_ok else "limit"
    rec.tables["moments"] = Table(["p", "estimate", "stderr", "prediction", "z_score"],
                                  [[r[c] for c in ("p", "estimate", "stderr", "prediction", "z_score")]
                                   for r in series.rows()])
    rec.predictions = {"source": source,
                       "diagrammatic": {str(p): diagrammatic_limit_moment(p, w, m) for p in range(1, p_max + 1)}}
    rec.trials = [_trial_dict(s) for s in summaries]
    worst = max(abs(series.z_score(p)) for p in range(1, p_max + 1))
    rec.gate(f"max_abs_z_vs_{source}", worst, z_max)
    rec.gate("hayden_winter_violations", hw_violations(summaries, HW_TOL), 0)


def _identity_check(cfg: dict, rec: RunRecord, jobs: int):
    count = _int(cfg, "instances")
    p_max, k_max = _int(cfg, "p_max"), _int(cfg, "k_max")
    tol = _real(cfg, "tolerance", 0.0) if "tolerance" in cfg else 1e-10
    rng = np.random.default_rng(rec.seed)
    rows, worst_id, worst_lim = [], 0.0, 0.0
    for i in range(count):
        p = int(rng.integers(1, p_max + 1))
        k = int(rng.integers(1, k_max + 1))
        w = WeightVector(tuple(_dirichlet(rng, k)))
        x, y = rng.uniform(0, 1, size=2)
        s = s_function(x, y, w)
        lhs = technical_identity_lhs(p, x, y, w)
        rhs = float(np.sum(s ** p) - x ** p * w.power_trace(2 * p))
        m = float(rng.uniform(0, 1))
        lim = diagrammatic_limit_moment(min(p, 6), w, m)
        ref = fixed_k_limit_moment(min(p, 6), w, m)
        worst_id = max(worst_id, abs(lhs - rhs))
        worst_lim = max(worst_lim, abs(lim - ref))
        rows.append([i, p, k, float(x), float(y), m, lhs, rhs, abs(lhs - rhs), lim, ref, abs(lim - ref)])
    rec.tables["identities"] = Table(
        ["instance", "p", "k", "x", "y", "m", "subset_sum", "spectral", "abs_err",
         "diagrammatic", "limit", "abs_err_limit"], rows)
    rec.gate("subset_identity_max_err", worst_id, tol)
    rec.gate("diagrammatic_vs_limit_max_err", worst_lim, tol)


def _dirichlet(rng: np.random.Generator, k: int) -> np.ndarray:
    w = rng.dirichlet(np.ones(k))
    w[-1] = 1.0 - w[:-1].sum()
    return np.abs(w)


def _compare_rc_ruc(cfg: dict, rec: RunRecord, jobs: int):
    ks = _require(cfg, "k")
    ks = [ks] if isinstance(ks, int) else list(ks)
    ms = _require(cfg, "m")
    ms = [ms] if isinstance(ms, (int, float)) else list(ms)
    if any(not isinstance(k, int) or k < 1 for k in ks):
        raise ConfigError("k must be a positive integer or a list of them")
    if any(not 0 <= m <= 1 for m in ms):
        raise ConfigError("m values must lie in [0, 1]")
    rows, worst = [], 0.0
    for k in ks:
        for m in ms:
            rc, ruc = rc_vs_ruc(k, float(m))
            worst = max(worst, abs(sum(rc) - 1), abs(sum(ruc) - 1))
            rows += [[k, float(m), r + 1, rc[r], ruc[r]] for r in range(k * k)]
    rec.tables["rc_ruc"] = Table(["k", "m", "rank", "rc", "ruc"], rows)
    rec.gate("max_sum_error", worst, 1e-12)


_RUNNERS: dict[str, Callable] = {
    "wg-table": _wg_table, "fixed-k-sim": _fixed_k_sim, "linear-k-sim": _linear_k_sim,
    "moments-check": _moments_check, "identity-check": _identity_check,
    "compare-rc-ruc": _compare_rc_ruc,
}
_NEEDS_SEED = {"fixed-k-sim", "linear-k-sim", "moments-check", "identity-check"}


def _timed(rec: RunRecord, key: str, fn):
    start = time.perf_counter()
    out = fn()
    rec.timings[key] = rec.timings.get(key, 0.0) + time.perf_counter() - start
    return out


def _trial_dict(s) -> dict:
    return {"trial": s.trial, "lambda_max": s.lambda_max, "hw_bound": s.hw_bound,
            "entropy": s.entropy}


def run_experiment(config: dict, seed: int | None = None, jobs: int | None = None) -> RunRecord:
    """Run the experiment named by ``config['experiment']``; ``seed``/``jobs`` override the config."""
    if not isinstance(config, dict):
        raise ConfigError("config must be a mapping")
    name = config.get("experiment")
    if name not in _RUNNERS:
        raise ConfigError(f"unknown experiment {name!r}; choose one of {', '.join(EXPERIMENTS)}")
    if seed is None:
        seed = config.get("seed")
    if name in _NEEDS_SEED and (isinstance(seed, bool) or not isinstance(seed, int) or seed < 0):
        raise ConfigError("a nonnegative integer seed is required (config 'seed' or --seed)")
    if jobs is None:
        jobs = config.get("jobs", 1)
    if isinstance(jobs, bool) or not isinstance(jobs, int) or jobs < 1:
        raise ConfigError("jobs must be a positive integer")
    rec = RunRecord(name, dict(config), seed, artifact_version())
    start = time.perf_counter()
    try:
        _RUNNERS[name](config, rec, jobs)
    except CapExceeded:
        raise
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid parameters: {exc}") from exc
    rec.timings["total"] = time.perf_counter() - start
    return rec
