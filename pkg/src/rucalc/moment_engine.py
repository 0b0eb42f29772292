"""Moments of the product-channel output: diagram sums, exact oracle, Monte Carlo.

Diagram conventions: the 2p copies of the block isometry in trace[Z^p] are
labelled 1^T..p^T, 1^B..p^B (indices 0..2p-1). A removal is a pair
(alpha, beta) of permutations of these labels.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .asymptotics import fixed_k_limit_moment
from .channel_lab import InputState, Regime
from .montecarlo import SimulationConfig, TrialSummary, run_trials
from .permkit import (CapExceeded, GeodesicPair, Permutation, SetPartition, bottom,
                      canonical_wirings, cycle_structure, geodesic_pairs, partition_join, top)
from .sampler import WeightVector
from .weingarten import LevelLabels, _matchings, wg_modified

MAX_IDENTITY_ORDER = 16
MAX_IDENTITY_BLOCKS = 8
EXACT_CAPS = {"p": 2, "n": 3, "k": 2}


def _orbit_partition(sigma: Permutation) -> SetPartition:
    return cycle_structure(sigma)[0]


def f_w_net(alpha: Permutation, beta: Permutation, w: WeightVector) -> float:
    """Product over blocks b of (gamma^-1 alpha v gamma^-1 beta) of trace W^|b|."""
    if alpha.size != beta.size or alpha.size % 2:
        raise ValueError("alpha and beta must act on the same 2p labels")
    gamma, _ = canonical_wirings(alpha.size // 2)
    ginv = gamma.inverse()
    joined = partition_join(_orbit_partition(ginv * alpha), _orbit_partition(ginv * beta))
    return math.prod(w.power_trace(len(b)) for b in joined.blocks)


def f_w_geodesic(pair: GeodesicPair, w: WeightVector) -> float:
    """Closed form of f_w_net on a geodesic pair, via the cyclic gaps of A."""
    p = pair.p
    if not pair.A:
        return w.power_trace(p) ** 2 if not pair.B else w.power_trace(2 * p)
    a = sorted(pair.A)
    gaps = [nxt - cur for cur, nxt in zip(a, a[1:])] + [p + a[0] - a[-1]]
    return math.prod(w.power_trace(2 * g) for g in gaps)


def f_a_necklace(beta: Permutation, A: np.ndarray) -> complex:
    """Product over cycles of beta^-1 delta of trace[A^{s_1} ... A^{s_c}], s = 1 on T labels, * on B."""
    if beta.size % 2:
        raise ValueError("beta must act on 2p labels")
    p = beta.size // 2
    A = np.asarray(A, dtype=complex)
    _, delta = canonical_wirings(p)
    out = 1.0 + 0j
    for cycle in (beta.inverse() * delta).cycles():
        M = np.eye(A.shape[0], dtype=complex)
        for x in cycle:
            M = M @ (A if x < p else A.conj().T)
        out *= np.trace(M)
    return complex(out)


def diagrammatic_limit_moment(p: int, w: WeightVector, m: complex) -> float:
    """Large-n limit of E trace[Z^p] as a sum over geodesics id -> alpha -> beta -> delta."""
    r2 = abs(m) ** 2
    total = 0.0
    for pair in geodesic_pairs(p):
        total += f_w_net(pair.alpha, pair.beta, w) * r2 ** len(pair.B) * (-1) ** len(pair.B - pair.A)
    return total


def technical_identity_lhs(p: int, x: float, y: float, w: WeightVector) -> float:
    """Sum over nonempty A of x^(p-|A|) y^|A| prod_i trace W^(2 (a_{i+1} - a_i)), gaps cyclic."""
    if p < 1 or p > MAX_IDENTITY_ORDER:
        raise CapExceeded(f"p must lie in 1..{MAX_IDENTITY_ORDER}")
    if w.k > MAX_IDENTITY_BLOCKS:
        raise CapExceeded(f"k must be at most {MAX_IDENTITY_BLOCKS}")
    traces = {g: w.power_trace(2 * g) for g in range(1, p + 1)}
    total = 0.0
    for size in range(1, p + 1):
        coeff = x ** (p - size) * y ** size
        for a in itertools.combinations(range(1, p + 1), size):
            gaps = [nxt - cur for cur, nxt in zip(a, a[1:])] + [p + a[0] - a[-1]]
            total += coeff * math.prod(traces[g] for g in gaps)
    return total


def _column_contraction(beta: Permutation, A: np.ndarray, p: int) -> complex:
    # Column letters: U factor T_r carries a_r, B_r carries b'_r. The conjugate
    # factor at slot s receives the letter of beta^-1(s).
    letters = "abcdefghijklmnopqrstuvwxyz"
    binv = beta.inverse()
    terms, operands = [], []
    for r in range(p):
        a_r = letters[top(r + 1, p)]
        b_r = letters[binv(bottom(r + 1, p))]
        a_pr = letters[binv(top(r + 1, p))]
        b_pr = letters[bottom(r + 1, p)]
        terms += [a_r + b_r, a_pr + b_pr]
        operands += [A, A.conj()]
    return complex(np.einsum(",".join(terms) + "->", *operands))


def exact_moment(p: int, n: int, k: int, w: WeightVector, state: InputState) -> float:
    """E trace[Z^p] at finite n for the fixed-k output, integrated exactly.

    trace[Z^p] is a polynomial in the entries of U^(1..k) and their conjugates
    with 2p factors of each kind. Each level assignment (x_r, y_r) fixes the
    block labels of every factor; the generalised Weingarten formula then
    integrates the whole polynomial with the per-assignment modified
    Weingarten weight. Row-index deltas contribute n^#alpha and column-index
    deltas contract the A, conj(A) tensors.
    """
    if p < 1 or p > EXACT_CAPS["p"] or n > EXACT_CAPS["n"] or k > EXACT_CAPS["k"]:
        raise CapExceeded(f"exact_moment is capped at p <= 2, n <= 3, k <= 2 (got p={p}, n={n}, k={k})")
    if w.k != k or state.n != n:
        raise ValueError("weights/input do not match (n, k)")
    size = 2 * p
    perms = [Permutation(t) for t in itertools.permutations(range(size))]
    columns = {beta: _column_contraction(beta, state.A, p) for beta in perms}
    rows = {alpha: n ** alpha.cycle_count() for alpha in perms}
    wa = w.as_array()
    total = 0.0 + 0j
    for xs in itertools.product(range(k), repeat=p):
        for ys in itertools.product(range(k), repeat=p):
            weight = float(np.prod(wa[list(xs)]) * np.prod(wa[list(ys)]))
            if weight == 0.0:
                continue
            l = [0] * size
            lp = [0] * size
            for r in range(p):
                l[top(r + 1, p)] = xs[r]
                l[bottom(r + 1, p)] = ys[(r + 1) % p]
                lp[top(r + 1, p)] = xs[(r + 1) % p]
                lp[bottom(r + 1, p)] = ys[r]
            labels = LevelLabels(l, lp)
            if labels.empty_class:
                continue
            members = list(_matchings(size, l, lp))
            acc = 0.0 + 0j
            for alpha in members:
                for beta in members:
                    wg = wg_modified(n, alpha, beta, labels, exact=True)
                    if wg:
                        acc += float(wg) * rows[alpha] * columns[beta]
            total += weight * acc
    if abs(total.imag) > 1e-9:
        raise ArithmeticError(f"moment has imaginary part {total.imag}")
    return float(total.real)


@dataclass
class MomentSeries:
    """Per-p estimates of E trace[Z^p] (or E trace[(cnZ)^p] in the linear regime)."""

    values: dict[int, tuple[float, float | None]]
    metadata: dict = field(default_factory=dict)
    predictions: dict[int, float] = field(default_factory=dict)

    def estimate(self, p: int) -> float:
        return self.values[p][0]

    def stderr(self, p: int) -> float | None:
        return self.values[p][1]

    def z_score(self, p: int) -> float | None:
        if p not in self.predictions:
            return None
        est, se = self.values[p]
        diff = est - self.predictions[p]
        # p = 1 is deterministic (trace Z = 1); floor the error at rounding level
        se = max(se or 0.0, 1e-12 * max(1.0, abs(est)))
        return diff / se

    def rows(self) -> list[dict]:
        out = []
        for p in sorted(self.values):
            est, se = self.values[p]
            out.append({"p": p, "estimate": est, "stderr": se,
                        "prediction": self.predictions.get(p), "z_score": self.z_score(p)})
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["p", "estimate", "stderr", "prediction", "z_score"],
                                lineterminator="\n")
        writer.writeheader()
        for row in self.rows():
            writer.writerow({key: "" if val is None else repr(val) if isinstance(val, float) else val
                             for key, val in row.items()})
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"metadata": self.metadata, "rows": self.rows()}, indent=2, sort_keys=True)


def moments_from_trials(summaries: list[TrialSummary], p_max: int, scale: float = 1.0,
                        metadata: dict | None = None) -> MomentSeries:
    if len(summaries) < 2:
        raise ValueError("at least two trials are needed for a standard error")
    values = {}
    for p in range(1, p_max + 1):
        x = np.array([s.power_trace(p, scale) for s in summaries])
        values[p] = (float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x))))
    return MomentSeries(values, dict(metadata or {}))


def mc_moment(p_max: int, trials: int, config: SimulationConfig, jobs: int = 1,
              summaries: list[TrialSummary] | None = None) -> MomentSeries:
    """Sample means and standard errors of trace[Z^p], p = 1..p_max.

    In the linear regime the eigenvalues are first multiplied by cn = k.
    Precomputed ``summaries`` for the same config may be passed in.
    """
    if trials < 2:
        raise ValueError("trials must be >= 2")
    if summaries is None:
        summaries = run_trials(config, trials, jobs)
    meta = {"regime": config.regime.value, "n": config.n, "k": config.k, "trials": trials,
            "seed": config.root_seed, "weights": list(config.weights.w), "m": repr(config.state.m)}
    series = moments_from_trials(summaries[:trials], p_max, config.scale, meta)
    if config.regime is Regime.FIXED_K:
        series.predictions = {p: fixed_k_limit_moment(p, config.weights, config.state.m)
                              for p in range(1, p_max + 1)}
    return series
