"""Monte Carlo trials: sample a channel, push the input through, record the spectrum.

A trial depends only on (config, trial index), so trials can be farmed out to
worker processes; results always come back in trial order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .channel_lab import (InputState, Regime, compressed_spectrum, entropy, hayden_winter_bound,
                          nonzero_spectrum, product_output)
from .sampler import WeightVector, sample_realization


@dataclass(frozen=True)
class SimulationConfig:
    n: int
    weights: WeightVector
    state: InputState
    root_seed: int
    regime: Regime = Regime.FIXED_K
    compressed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))
        if self.state.n != self.n:
            raise ValueError("input state dimension differs from n")
        if self.compressed and self.regime is not Regime.LINEAR:
            raise ValueError("Bell compression is only defined for the linear regime")

    @property
    def k(self) -> int:
        return self.weights.k

    @property
    def scale(self) -> float:
        """Factor applied to eigenvalues before taking moments: 1 (fixed_k) or cn = k (linear)."""
        return 1.0 if self.regime is Regime.FIXED_K else float(self.k)


@dataclass(frozen=True)
class TrialSummary:
    trial: int
    eigenvalues: np.ndarray = field(repr=False)
    hw_bound: float
    entropy: float
    compressed: np.ndarray | None = field(default=None, repr=False)

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0])

    def power_trace(self, p: int, scale: float = 1.0) -> float:
        return float(np.sum((scale * self.eigenvalues) ** p))


def run_trial(config: SimulationConfig, trial: int) -> TrialSummary:
    real = sample_realization(config.n, config.weights, config.root_seed, trial)
    comp = None
    if config.regime is Regime.FIXED_K:
        eigs = product_output(real, config.state, Regime.FIXED_K).eigenvalues()
    elif config.compressed:
        Z = product_output(real, config.state, Regime.LINEAR)
        eigs = Z.eigenvalues()
        comp = compressed_spectrum(Z, config.n)
    else:
        eigs = nonzero_spectrum(real, config.state)
    bound = hayden_winter_bound(config.state, config.weights)
    return TrialSummary(trial, eigs, bound, entropy(eigs), comp)


def run_trials(config: SimulationConfig, trials: int, jobs: int = 1) -> list[TrialSummary]:
    work = partial(run_trial, config)
    if jobs <= 1:
        return [work(t) for t in range(trials)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(work, range(trials), chunksize=max(1, trials // (4 * jobs))))


def hw_violations(summaries: list[TrialSummary], tol: float = 1e-10) -> int:
    return sum(s.lambda_max < s.hw_bound - tol for s in summaries)
