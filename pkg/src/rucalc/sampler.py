"""Seeded Haar sampling and weighted block isometries.

Every random matrix comes from its own stream, derived from a root seed and
the pair ``(trial, block)``. A trial can therefore run on any worker and still
produce the same unitaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

WEIGHT_SUM_TOL = 1e-12
UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class MomentProfile:
    """Limiting moments t_p = lim (1/k) trace[(kW)^p] of a weight family.

    ``kind`` is ``"uniform"`` (t_p = 1), ``"ramp"`` (t_p = 2^p / (p+1), the
    moments of the uniform law on [0, 2]) or ``"explicit"`` (``moments`` lists
    t_1, t_2, ...).
    """

    kind: str
    moments: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("uniform", "ramp", "explicit"):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        object.__setattr__(self, "moments", tuple(float(t) for t in self.moments))
        if self.kind == "explicit" and (not self.moments or abs(self.moments[0] - 1.0) > WEIGHT_SUM_TOL):
            raise ValueError("moment profile must have t_1 = 1")

    def __call__(self, p: int) -> float:
        if p < 1:
            raise ValueError("profile moments start at p = 1")
        if self.kind == "uniform":
            return 1.0
        if self.kind == "ramp":
            return 2.0 ** p / (p + 1)
        if p > len(self.moments):
            raise ValueError(f"profile only lists t_1..t_{len(self.moments)}")
        return self.moments[p - 1]


@dataclass(frozen=True)
class WeightVector:
    """Channel weights w (nonnegative, summing to one), optionally with a moment profile."""

    w: tuple[float, ...]
    profile: MomentProfile | None = None

    def __post_init__(self):
        w = tuple(float(x) for x in self.w)
        if not w:
            raise ValueError("weight vector must be nonempty")
        if min(w) < 0:
            raise ValueError("weights must be nonnegative")
        if abs(sum(w) - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {sum(w)!r}, expected 1")
        object.__setattr__(self, "w", w)

    @classmethod
    def uniform(cls, k: int) -> "WeightVector":
        return cls((1.0 / k,) * k, MomentProfile("uniform"))

    @classmethod
    def ramp(cls, k: int) -> "WeightVector":
        """w_i proportional to i."""
        total = k * (k + 1) / 2
        return cls(tuple(i / total for i in range(1, k + 1)), MomentProfile("ramp"))

    @property
    def k(self) -> int:
        return len(self.w)

    def as_array(self) -> np.ndarray:
        return np.array(self.w)

    def power_trace(self, p: int) -> float:
        """trace W^p."""
        return float(np.sum(self.as_array() ** p))

    def empirical_profile(self, p: int) -> float:
        """(1/k) trace[(kW)^p] at this finite k."""
        return float(np.mean((self.k * self.as_array()) ** p))


def stream(root_seed: int, trial: int, block: int = 0) -> np.random.Generator:
    """Independent generator for matrix ``block`` of trial ``trial``."""
    return np.random.default_rng(np.random.SeedSequence(root_seed, spawn_key=(trial, block)))


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_unitary(n: int, seed=None) -> np.ndarray:
    """Haar-distributed n x n unitary: QR of a Ginibre matrix with R's diagonal made positive."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _as_generator(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_isometry(n: int, k: int, seed=None) -> np.ndarray:
    """First n columns of a Haar unitary on C^(kn) (the truncated-Haar ensemble)."""
    return haar_unitary(k * n, seed)[:, :n]


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the k unitaries of a random unitary channel, with its weights."""

    n: int
    k: int
    unitaries: np.ndarray = field(repr=False)
    weights: WeightVector

    def __post_init__(self):
        u = np.asarray(self.unitaries, dtype=complex)
        if u.shape != (self.k, self.n, self.n):
            raise ValueError(f"expected unitaries of shape {(self.k, self.n, self.n)}, got {u.shape}")
        if self.weights.k != self.k:
            raise ValueError("weight vector length differs from block count")
        eye = np.eye(self.n)
        for U in u:
            if np.max(np.abs(U.conj().T @ U - eye)) > UNITARITY_TOL:
                raise ValueError("block is not unitary")
        object.__setattr__(self, "unitaries", u)


def sample_realization(n: int, weights: WeightVector, root_seed: int,
                       trial: int = 0) -> ChannelRealization:
    unitaries = np.stack([haar_unitary(n, stream(root_seed, trial, b)) for b in range(weights.k)])
    return ChannelRealization(n, weights.k, unitaries, weights)


def weighted_block_isometry(realization: ChannelRealization) -> tuple[np.ndarray, np.ndarray]:
    """Stacks V = sum_i e_i (x) U_i and V~ = (diag(sqrt w) (x) I) V, both kn x n."""
    V = realization.unitaries.reshape(realization.k * realization.n, realization.n)
    scale = np.repeat(np.sqrt(realization.weights.as_array()), realization.n)
    return V, scale[:, None] * V


def block_sample(n: int, k: int, root_seed: int, trial: int) -> np.ndarray:
    """Uniform-weight isometry V~ drawn from the block ensemble (for ensemble comparisons)."""
    real = sample_realization(n, WeightVector.uniform(k), root_seed, trial)
    return weighted_block_isometry(real)[1]


def entry_moments(samples: Sequence[complex] | np.ndarray, power: int) -> tuple[float, float]:
    """Sample mean and standard error of |x|^(2*power)."""
    x = np.abs(np.asarray(samples)) ** (2 * power)
    return float(x.mean()), float(x.std(ddof=1) / np.sqrt(len(x)))
