"""Pauli-basis algebra for two-level pair states.

The canonical state representation throughout the package is the 4x4 real
correlation matrix ``gamma`` with entries ``gamma[mu, nu] = <sigma_mu (x)
sigma_nu>`` indexed in the fixed order ``(0, z, x, y)``.  Density matrices
are derived on demand.

Conventions
-----------
- Computational basis: ``|1> = |H>``, ``|0> = |V>``; single-qubit vectors
  are ordered ``(|1>, |0>)`` and two-qubit matrices use the product order
  ``(|11>, |10>, |01>, |00>)`` with Alice as the left tensor factor.
- Local pure states are represented by Bloch 4-vectors
  ``(1, <sigma_z>, <sigma_x>, <sigma_y>)``; rebit states have a vanishing
  y component.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

DEFAULT_TOL = 1e-9

AXES = ("0", "z", "x", "y")
IDX_0, IDX_Z, IDX_X, IDX_Y = 0, 1, 2, 3

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)

# stack in the global (0, z, x, y) order; KRON[mu, nu] = sigma_mu (x) sigma_nu
PAULI = np.stack([SIGMA_0, SIGMA_Z, SIGMA_X, SIGMA_Y])
KRON = np.stack([np.stack([np.kron(a, b) for b in PAULI]) for a in PAULI])


class NumberField(Enum):
    """Number system the analysis is carried out over."""

    REAL = "real"
    COMPLEX = "complex"


POLARIZATION_BLOCH = {
    "H": np.array([1.0, 1.0, 0.0, 0.0]),
    "V": np.array([1.0, -1.0, 0.0, 0.0]),
    "D": np.array([1.0, 0.0, 1.0, 0.0]),
    "A": np.array([1.0, 0.0, -1.0, 0.0]),
    "R": np.array([1.0, 0.0, 0.0, 1.0]),
    "L": np.array([1.0, 0.0, 0.0, -1.0]),
}


@dataclass(frozen=True)
class LocalState:
    """Single-subsystem state as a Bloch 4-vector, optionally labelled."""

    bloch: np.ndarray
    label: str | None = None

    def purity_error(self) -> float:
        b = self.bloch
        return abs(b[1] ** 2 + b[2] ** 2 + b[3] ** 2 - b[0] ** 2)

    def is_rebit(self, tol: float = DEFAULT_TOL) -> bool:
        return abs(self.bloch[IDX_Y]) <= tol


def polarization_state(label: str) -> LocalState:
    """Pauli eigenstate for one of the labels H, V, D, A, R, L."""
    try:
        bloch = POLARIZATION_BLOCH[label]
    except KeyError:
        raise ValueError(f"unknown polarization label {label!r}") from None
    return LocalState(bloch=bloch.copy(), label=label)


def bloch_of_ket(ket: np.ndarray) -> np.ndarray:
    """Bloch 4-vector (1, <z>, <x>, <y>) of a normalized 2-vector."""
    k = np.asarray(ket, dtype=complex)
    return np.real(np.einsum("i,mij,j->m", k.conj(), PAULI, k))


def check_correlation(g: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.shape != (4, 4):
        raise ValueError(f"correlation matrix must be 4x4, got {g.shape}")
    if abs(g[0, 0] - 1.0) > tol:
        raise ValueError(f"correlation matrix not normalized: gamma[0,0] = {g[0, 0]!r}")
    return g


def density_from_correlation(g: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Reassemble the density matrix (1/4) sum_{mu,nu} gamma[mu,nu] sigma_mu (x) sigma_nu."""
    g = check_correlation(g, tol)
    return np.einsum("mn,mnij->ij", g, KRON) / 4.0


def correlation_from_density(rho: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Correlation matrix gamma[mu,nu] = tr(rho sigma_mu (x) sigma_nu).

    Rejects non-Hermitian input and flags trace deviations; imaginary
    residue above 1e-10 raises rather than being dropped silently.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"density matrix must be 4x4, got {rho.shape}")
    herm_err = np.abs(rho - rho.conj().T).max()
    if herm_err > tol:
        raise ValueError(f"density matrix not Hermitian (max deviation {herm_err:.3e})")
    trace_err = abs(np.trace(rho) - 1.0)
    if trace_err > tol:
        raise ValueError(f"density matrix trace deviates from 1 by {trace_err:.3e}")
    gamma = np.einsum("ij,mnji->mn", rho, KRON)
    imag = np.abs(gamma.imag).max()
    if imag > 1e-10:
        raise ValueError(f"correlations carry imaginary residue {imag:.3e}")
    return gamma.real.copy()


def cfr_state(q: float) -> np.ndarray:
    """Correlation matrix diag(1, 0, 0, r) with r = 2q - 1, for q in [0, 1]."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    return np.diag([1.0, 0.0, 0.0, 2.0 * q - 1.0])


def hs_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Hilbert-Schmidt inner product tr(rho_a rho_b) = (1/4) sum a*b."""
    return float(np.sum(np.asarray(a, float) * np.asarray(b, float)) / 4.0)


def hs_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Hilbert-Schmidt distance sqrt(tr[(rho_a - rho_b)^2])."""
    d = np.asarray(a, float) - np.asarray(b, float)
    return float(np.sqrt(max(hs_inner(d, d), 0.0)))


def similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson-style overlap tr(ab) / sqrt(tr(a^2) tr(b^2)); 1 iff proportional."""
    na = hs_inner(a, a)
    nb = hs_inner(b, b)
    if na < 1e-30 or nb < 1e-30:
        raise ValueError("similarity undefined for a vanishing state")
    return hs_inner(a, b) / np.sqrt(na * nb)


def real_projection(g: np.ndarray) -> np.ndarray:
    """Correlation matrix of the real part of the state.

    Zeroes the y row and column except the [y, y] entry, which the real
    part retains.
    """
    out = np.asarray(g, float).copy()
    yy = out[IDX_Y, IDX_Y]
    out[IDX_Y, :] = 0.0
    out[:, IDX_Y] = 0.0
    out[IDX_Y, IDX_Y] = yy
    return out


def is_physical(g: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    """True iff the reassembled density matrix has no eigenvalue below -tol."""
    rho = density_from_correlation(g, tol=max(tol, DEFAULT_TOL))
    return bool(np.linalg.eigvalsh(rho).min() >= -tol)


def product_correlation(a: LocalState | np.ndarray, b: LocalState | np.ndarray) -> np.ndarray:
    """Correlation matrix of a product state, the outer product of Bloch vectors."""
    va = a.bloch if isinstance(a, LocalState) else np.asarray(a, float)
    vb = b.bloch if isinstance(b, LocalState) else np.asarray(b, float)
    return np.outer(va, vb)
