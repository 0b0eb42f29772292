"""Closed-form limiting spectra and moments.

Fixed number of unitaries k (n -> infinity): the k^2 limiting eigenvalues are
{w_i w_j : i != j} together with the spectrum of the k x k matrix H_Sigma.

Linear growth k/n -> c: moments of cn Z, the limit of cn * lambda_1, and the
compound free Poisson law of the Bell-compressed bulk rescaled by (cn)^2.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .permkit import noncrossing_partitions
from .sampler import MomentProfile, WeightVector


def h_sigma(x: float, y: float, w: WeightVector) -> np.ndarray:
    """Symmetric k x k matrix: (x+y) w_i^2 on the diagonal, y w_i w_j off it."""
    wa = w.as_array()
    H = y * np.outer(wa, wa)
    H[np.diag_indices_from(H)] += x * wa ** 2
    return H


def s_function(x: float, y: float, w: WeightVector) -> np.ndarray:
    """Descending spectrum of h_sigma(x, y, w)."""
    return np.sort(np.linalg.eigvalsh(h_sigma(x, y, w)))[::-1]


def _overlap(m: complex) -> float:
    r2 = abs(m) ** 2
    if r2 > 1 + 1e-12:
        raise ValueError("|m| must be at most 1")
    return float(min(r2, 1.0))


def fixed_k_spectrum(w: WeightVector, m: complex) -> np.ndarray:
    """Limiting k^2 output eigenvalues, descending."""
    r2 = _overlap(m)
    wa = w.as_array()
    off = np.outer(wa, wa)[~np.eye(w.k, dtype=bool)]
    s = s_function(1.0 - r2, r2, w)
    return np.sort(np.concatenate([off, s]))[::-1]


def fixed_k_limit_moment(p: int, w: WeightVector, m: complex) -> float:
    """sum_{i != j} (w_i w_j)^p + sum_i s_i^p."""
    if p < 1:
        raise ValueError("p must be >= 1")
    r2 = _overlap(m)
    wa = w.as_array()
    cross = np.sum(wa ** p) ** 2 - np.sum(wa ** (2 * p))
    s = s_function(1.0 - r2, r2, w)
    return float(cross + np.sum(s ** p))


@dataclass(frozen=True)
class CompoundPoissonParams:
    """Rate and jump-law moments m_1..m_P; free cumulants are rate * m_p."""

    rate: float
    jump_moments: tuple[float, ...]

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("rate must be nonnegative")
        object.__setattr__(self, "jump_moments", tuple(float(x) for x in self.jump_moments))

    def cumulant(self, p: int) -> float:
        if p > len(self.jump_moments):
            raise ValueError(f"jump moment m_{p} not supplied (have {len(self.jump_moments)})")
        return self.rate * self.jump_moments[p - 1]


def compound_poisson_moment(p: int, params: CompoundPoissonParams) -> float:
    """p-th moment via the moment-cumulant sum over non-crossing partitions."""
    if p < 1:
        raise ValueError("p must be >= 1")
    kappa = [params.cumulant(q) for q in range(1, p + 1)]
    return float(sum(math.prod(kappa[len(b) - 1] for b in pi.blocks)
                     for pi in noncrossing_partitions(p)))


@dataclass(frozen=True)
class SpectralPrediction:
    """Either a finite eigenvalue list (fixed_k) or linear-regime limits."""

    regime: str
    params: dict
    eigenvalues: tuple[float, ...] | None = None
    moment_table: dict[int, float] = field(default_factory=dict)
    top_eigenvalue: float | None = None
    compressed: CompoundPoissonParams | None = None
    compressed_moments: dict[int, float] = field(default_factory=dict)
    entropy: float | None = None

    def to_record(self) -> dict:
        rec = {"regime": self.regime, "params": self.params, "entropy": self.entropy}
        if self.eigenvalues is not None:
            rec["eigenvalues"] = list(self.eigenvalues)
        else:
            rec["moment_table"] = {str(p): v for p, v in self.moment_table.items()}
            rec["top_eigenvalue"] = self.top_eigenvalue
            rec["compressed_moments"] = {str(p): v for p, v in self.compressed_moments.items()}
        return rec


def shannon_entropy(probs: Sequence[float]) -> float:
    x = np.asarray(probs, dtype=float)
    x = x[x > 0]
    return float(-np.sum(x * np.log(x)))


def fixed_k_prediction(w: WeightVector, m: complex) -> SpectralPrediction:
    eigs = fixed_k_spectrum(w, m)
    return SpectralPrediction("fixed_k", {"k": w.k, "w": list(w.w), "m_abs2": _overlap(m)},
                              eigenvalues=tuple(float(x) for x in eigs),
                              entropy=shannon_entropy(eigs))


def linear_entropy_prediction(n: int, c: float) -> float:
    """Leading entropy of the output for uniform weights (natural log)."""
    if c >= 1:
        return 2 * math.log(n) - 1 / (2 * c * c)
    return 2 * math.log(c * n) - c * c / 2


def linear_regime_predictions(p_max: int, c: float, t: MomentProfile, m: complex,
                              n: int | None = None) -> SpectralPrediction:
    """Limits for k/n -> c with weight profile t and overlap m.

    moment_table[p] predicts E trace[(cnZ)^p] for p >= 2; top_eigenvalue
    predicts cn * lambda_1; compressed_moments[p] are moments of the
    (cn)^2-rescaled Bell-compressed bulk. The entropy needs ``n`` and is only
    given for the uniform profile.
    """
    if abs(t(1) - 1.0) > 1e-12:
        raise ValueError("profile must have t_1 = 1")
    if c <= 0:
        raise ValueError("c must be positive")
    r2 = _overlap(m)
    t2 = t(2)
    table = {}
    for p in range(2, p_max + 1):
        table[p] = t2 ** 2 + c ** 2 + t2 ** 2 * r2 ** 2 if p == 2 else t2 ** p * r2 ** p
    jumps = CompoundPoissonParams(c * c, tuple(t(q) ** 2 for q in range(1, p_max + 1)))
    compressed = {p: compound_poisson_moment(p, jumps) for p in range(1, p_max + 1)}
    ent = None
    if n is not None and t.kind == "uniform":
        ent = linear_entropy_prediction(n, c)
    return SpectralPrediction("linear", {"c": c, "profile": t.kind, "m_abs2": r2, "n": n},
                              moment_table=table, top_eigenvalue=t2 * r2, compressed=jumps,
                              compressed_moments=compressed, entropy=ent)


def rc_vs_ruc(k: int, m: complex) -> tuple[list[float], list[float]]:
    """Limiting fixed-k spectra for random channels (RC) and random unitary channels (RUC).

    Both lists have length k^2 and are sorted descending.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    rc, ruc = rc_vs_ruc_overlap(k, _overlap(m))
    return sorted(rc, reverse=True), sorted(ruc, reverse=True)


def rc_vs_ruc_overlap(k: int, r2):
    """Same lists as :func:`rc_vs_ruc` in terms of |m|^2; plain arithmetic, so exact or
    symbolic ``r2`` values pass through unchanged."""
    q = Fraction(1, k)
    rc = [r2 * q + q ** 2 - r2 * q ** 3] + [q ** 2 - r2 * q ** 3] * (k * k - 1)
    ruc = [r2 * q + (1 - r2) * q ** 2] + [(1 - r2) * q ** 2] * (k - 1) + [q ** 2] * (k * k - k)
    if isinstance(r2, float):
        rc, ruc = [float(x) for x in rc], [float(x) for x in ruc]
    return rc, ruc
