"""Random unitary channels, their complements, and product-channel outputs.

Output spaces are ordered as tensor products with the first factor slow:
the fixed-k output lives on C^k (x) C^k with index (x, y), the linear-regime
output on C^n (x) C^n with index (i, j).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .sampler import ChannelRealization, WeightVector, weighted_block_isometry

STATE_TOL = 1e-10
ENTROPY_CUTOFF = 1e-14


class Regime(str, Enum):
    FIXED_K = "fixed_k"
    LINEAR = "linear"


@dataclass(frozen=True)
class InputState:
    """Pure input psi = sum_ij A_ij e_i (x) e_j, with overlap m = trace(A)/sqrt(n)."""

    n: int
    A: np.ndarray = field(repr=False)
    m: complex

    def __post_init__(self):
        A = np.asarray(self.A, dtype=complex)
        if A.shape != (self.n, self.n):
            raise ValueError(f"coefficient matrix must be {self.n}x{self.n}")
        norm = np.vdot(A, A).real
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"trace[AA*] = {norm}, expected 1")
        object.__setattr__(self, "A", A)

    @classmethod
    def from_matrix(cls, A: np.ndarray) -> "InputState":
        A = np.asarray(A, dtype=complex)
        n = A.shape[0]
        return cls(n, A, complex(np.trace(A) / np.sqrt(n)))

    @property
    def vector(self) -> np.ndarray:
        return self.A.reshape(-1)

    def density(self) -> np.ndarray:
        psi = self.vector
        return np.outer(psi, psi.conj())


def bell_vector(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex).reshape(-1) / np.sqrt(n)


def input_family(n: int, m: complex) -> InputState:
    """Diagonal A with entries (|m| + sqrt(1-|m|^2) w^j) / sqrt(n), w = exp(2 pi i / n).

    A complex m multiplies A by the phase of m. |m| = 1 gives the Bell state
    (up to that phase).
    """
    r = abs(m)
    if r > 1 + 1e-15:
        raise ValueError("|m| must be at most 1")
    r = min(r, 1.0)
    s = np.sqrt(max(0.0, 1.0 - r * r))
    if n < 2 and s > 0:
        raise ValueError("n >= 2 is needed for |m| < 1")
    omega = np.exp(2j * np.pi * np.arange(1, n + 1) / n)
    phase = cmath.exp(1j * cmath.phase(m)) if r > 0 else 1.0
    diag = phase * (r + s * omega) / np.sqrt(n)
    return InputState(n, np.diag(diag), complex(m))


def apply_channel(realization: ChannelRealization, rho: np.ndarray) -> np.ndarray:
    """sum_i w_i U_i rho U_i*."""
    rho = _check_square(rho, realization.n)
    U = realization.unitaries
    w = realization.weights.as_array()
    return np.einsum("x,xia,ab,xjb->ij", w, U, rho, U.conj())


def apply_complementary(realization: ChannelRealization, rho: np.ndarray) -> np.ndarray:
    """k x k matrix with entries sqrt(w_i w_j) trace[U_i rho U_j*]."""
    rho = _check_square(rho, realization.n)
    U = realization.unitaries
    root = np.sqrt(realization.weights.as_array())
    traces = np.einsum("xia,ab,yib->xy", U, rho, U.conj())
    return np.outer(root, root) * traces


def _check_square(rho: np.ndarray, n: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} input, got {rho.shape}")
    return rho


@dataclass(frozen=True)
class OutputState:
    dim: int
    matrix: np.ndarray = field(repr=False)
    regime: Regime

    def __post_init__(self):
        M = self.matrix
        if M.shape != (self.dim, self.dim):
            raise ValueError("matrix shape does not match dim")
        if np.max(np.abs(M - M.conj().T)) > STATE_TOL:
            raise ValueError("output is not Hermitian")
        if abs(np.trace(M).real - 1.0) > STATE_TOL:
            raise ValueError("output trace differs from 1")

    def eigenvalues(self) -> np.ndarray:
        """Descending spectrum."""
        return np.sort(np.linalg.eigvalsh(self.matrix))[::-1]


def stinespring_image(realization: ChannelRealization, state: InputState) -> np.ndarray:
    """(V~ (x) conj V~) psi as a kn x kn matrix indexed [(x, i), (y, j)]; equals V~ A V~*."""
    if state.n != realization.n:
        raise ValueError("input dimension differs from channel dimension")
    _, Vt = weighted_block_isometry(realization)
    return Vt @ state.A @ Vt.conj().T


def product_output(realization: ChannelRealization, state: InputState,
                   regime: Regime | str) -> OutputState:
    """[Phi^C (x) conj Phi^C](psi psi*) for fixed_k, [Phi (x) conj Phi](psi psi*) for linear."""
    regime = Regime(regime)
    n, k = realization.n, realization.k
    X = stinespring_image(realization, state).reshape(k, n, k, n)
    if regime is Regime.FIXED_K:
        G = X.transpose(0, 2, 1, 3).reshape(k * k, n * n)
        dim = k * k
    else:
        G = X.transpose(1, 3, 0, 2).reshape(n * n, k * k)
        dim = n * n
    Z = G @ G.conj().T
    Z = 0.5 * (Z + Z.conj().T)
    return OutputState(dim, Z, regime)


def nonzero_spectrum(realization: ChannelRealization, state: InputState) -> np.ndarray:
    """Descending spectrum of the product output on the smaller of the two output spaces."""
    regime = Regime.FIXED_K if realization.k <= realization.n else Regime.LINEAR
    return product_output(realization, state, regime).eigenvalues()


def compress_bell(Z: OutputState | np.ndarray, n: int) -> np.ndarray:
    """Q Z Q with Q the projection orthogonal to the Bell vector."""
    if isinstance(Z, OutputState):
        if Z.regime is not Regime.LINEAR:
            raise ValueError("Bell compression applies to the linear-regime output on C^n (x) C^n")
        Z = Z.matrix
    if Z.shape != (n * n, n * n):
        raise ValueError(f"expected an {n * n}x{n * n} matrix")
    phi = bell_vector(n)
    Zphi = Z @ phi
    overlap = np.vdot(phi, Zphi)
    out = Z - np.outer(phi, phi.conj() @ Z) - np.outer(Zphi, phi.conj()) + overlap * np.outer(phi, phi.conj())
    return 0.5 * (out + out.conj().T)


def compressed_spectrum(Z: OutputState, n: int) -> np.ndarray:
    """The n^2 - 1 eigenvalues of QZQ on the range of Q, descending."""
    eigs = np.sort(np.linalg.eigvalsh(compress_bell(Z, n)))[::-1]
    return eigs[:-1]


def spectrum_and_entropy(H: np.ndarray | OutputState) -> tuple[np.ndarray, float]:
    """Descending eigenvalues and von Neumann entropy in nats."""
    if isinstance(H, OutputState):
        eigs = H.eigenvalues()
    else:
        eigs = np.sort(np.linalg.eigvalsh(np.asarray(H)))[::-1]
    return eigs, entropy(eigs)


def entropy(eigs: np.ndarray) -> float:
    lam = np.asarray(eigs)
    lam = lam[lam > ENTROPY_CUTOFF]
    return float(-np.sum(lam * np.log(lam)))


def hayden_winter_bound(state: InputState, weights: WeightVector) -> float:
    """Deterministic lower bound |trace A|^2 / n * sum w_i^2 on the top output eigenvalue."""
    return float(abs(np.trace(state.A)) ** 2 / state.n * weights.power_trace(2))
