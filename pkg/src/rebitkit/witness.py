"""Entanglement witnesses from separability eigenvalue equations.

For an observable ``L`` the expectation over product states ``|a, b>`` is
stationary exactly when the coupled eigenvalue equations

    L_a |b> = g |b>    and    L_b |a> = g |a>

hold, where ``L_a = (<a| (x) 1) L (|a> (x) 1)`` and analogously for
``L_b``.  The extremal solutions ``g`` bound the expectation value over
separable states; an expectation outside those bounds certifies
entanglement with respect to the chosen number field.  For observables
diagonal in the Pauli-product basis the full solution set is known in
closed form; a multistart alternating solver covers general symmetric
observables.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .pauli_core import (
    KRON,
    IDX_X,
    IDX_Y,
    IDX_Z,
    LocalState,
    NumberField,
    POLARIZATION_BLOCH,
    bloch_of_ket,
    check_correlation,
)

_ZZ = np.real(KRON[IDX_Z, IDX_Z])
_XX = np.real(KRON[IDX_X, IDX_X])
_YY = np.real(KRON[IDX_Y, IDX_Y])


@dataclass(frozen=True)
class DiagObservable:
    """Observable lz * zz + lx * xx + ly * yy; real and symmetric."""

    lz: float
    lx: float
    ly: float

    def matrix(self) -> np.ndarray:
        return self.lz * _ZZ + self.lx * _XX + self.ly * _YY


@dataclass
class SeparabilityEigenpair:
    value: float
    alice: LocalState
    bob: LocalState
    field: NumberField
    degenerate: bool = False


@dataclass
class WitnessVerdict:
    expectation: float
    sigma: float
    bounds_real: tuple[float, float]
    bounds_complex: tuple[float, float]
    r_entangled: bool
    c_entangled: bool
    significance: float


# closed-form solution set for DiagObservable: each entry is
# (alice label, bob label, coefficient picker, sign)
_REAL_SOLUTIONS = (
    ("H", "H", "lz", +1), ("H", "V", "lz", -1), ("V", "H", "lz", -1), ("V", "V", "lz", +1),
    ("D", "D", "lx", +1), ("D", "A", "lx", -1), ("A", "D", "lx", -1), ("A", "A", "lx", +1),
)
_COMPLEX_EXTRA = (
    ("R", "R", "ly", +1), ("R", "L", "ly", -1), ("L", "R", "ly", -1), ("L", "L", "ly", +1),
)


def analytic_spectrum(obs: DiagObservable, field: NumberField) -> list[SeparabilityEigenpair]:
    """Closed-form separability eigenpairs of a Pauli-diagonal observable.

    The real field yields the eight polarization products over
    {H, V, D, A}; the complex field adds the four circular products.
    """
    table = _REAL_SOLUTIONS if field is NumberField.REAL else _REAL_SOLUTIONS + _COMPLEX_EXTRA
    pairs = []
    for la, lb, coeff, sign in table:
        value = sign * getattr(obs, coeff)
        pairs.append(
            SeparabilityEigenpair(
                value=float(value),
                alice=LocalState(POLARIZATION_BLOCH[la].copy(), la),
                bob=LocalState(POLARIZATION_BLOCH[lb].copy(), lb),
                field=field,
            )
        )
    return pairs


def ordinary_spectrum(obs: DiagObservable) -> list[tuple[float, np.ndarray]]:
    """Ordinary eigendecomposition: the four Bell states with their eigenvalues."""
    s = 1.0 / np.sqrt(2.0)
    # kets in the (|11>, |10>, |01>, |00>) product basis
    bell = [
        np.array([s, 0, 0, s]),    # (|HH> + |VV>)/sqrt2
        np.array([s, 0, 0, -s]),   # (|HH> - |VV>)/sqrt2
        np.array([0, s, s, 0]),    # (|HV> + |VH>)/sqrt2
        np.array([0, s, -s, 0]),   # (|HV> - |VH>)/sqrt2
    ]
    values = [
        obs.lz + obs.lx - obs.ly,
        obs.lz - obs.lx + obs.ly,
        -obs.lz + obs.lx + obs.ly,
        -obs.lz - obs.lx - obs.ly,
    ]
    return [(float(v), np.outer(k, k.conj())) for v, k in zip(values, bell)]


def _reduced_a(tensor: np.ndarray, a: np.ndarray) -> np.ndarray:
    return np.einsum("i,ikjl,j->kl", a.conj(), tensor, a)


def _reduced_b(tensor: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("k,ikjl,l->ij", b.conj(), tensor, b)


def _eig_residual(tensor, a, b, g):
    ra = _reduced_a(tensor, a) @ b - g * b
    rb = _reduced_b(tensor, b) @ a - g * a
    return np.concatenate([ra, rb])


def _perp(v: np.ndarray) -> np.ndarray:
    p = np.array([-np.conj(v[1]), np.conj(v[0])])
    return p / np.linalg.norm(p)


def _polish(tensor, a, b, g, real_field, steps=10):
    # Gauss-Newton refinement of a near-solution of the coupled equations;
    # needed because the alternating map converges slowly for nearly
    # degenerate observables.
    for _ in range(steps):
        ap, bp = _perp(a), _perp(b)
        if real_field:
            def res_vec(t):
                aa = a + t[0] * ap
                bb = b + t[1] * bp
                aa = aa / np.linalg.norm(aa)
                bb = bb / np.linalg.norm(bb)
                return _eig_residual(tensor, aa, bb, g + t[2])
            t0 = np.zeros(3)
        else:
            def res_vec(t):
                aa = a + (t[0] + 1j * t[1]) * ap
                bb = b + (t[2] + 1j * t[3]) * bp
                aa = aa / np.linalg.norm(aa)
                bb = bb / np.linalg.norm(bb)
                r = _eig_residual(tensor, aa, bb, g + t[4])
                return np.concatenate([r.real, r.imag])
            t0 = np.zeros(5)
        r0 = res_vec(t0)
        h = 1e-7
        jac = np.empty((r0.size, t0.size))
        for j in range(t0.size):
            tj = t0.copy()
            tj[j] = h
            jac[:, j] = (res_vec(tj) - r0) / h
        dt, *_ = np.linalg.lstsq(jac, -r0, rcond=None)
        if real_field:
            a = a + dt[0] * ap
            b = b + dt[1] * bp
            g = g + dt[2]
        else:
            a = a + (dt[0] + 1j * dt[1]) * ap
            b = b + (dt[2] + 1j * dt[3]) * bp
            g = g + dt[4]
        a = a / np.linalg.norm(a)
        b = b / np.linalg.norm(b)
        if np.linalg.norm(_eig_residual(tensor, a, b, g)) < 1e-13:
            break
    return a, b, g


def numeric_separability_eigs(
    obs: np.ndarray,
    field: NumberField,
    n_starts: int = 64,
    seed: int = 0,
    max_iters: int = 500,
    res_tol: float = 1e-10,
) -> list[SeparabilityEigenpair]:
    """Multistart alternating solver for the separability eigenvalue equations.

    From each random product start and for every eigenvector branch of the
    2x2 reduced operators, ``|b>`` is replaced by an eigenvector of L_a and
    ``|a>`` by one of L_b until both equations hold to ``res_tol`` (scaled
    by the observable norm).  Real-field iterates stay in real arithmetic
    throughout.  A vanishing reduced operator makes every unit vector an
    eigenvector; the iterate is kept and the converged pair flagged
    degenerate.  Fixed points are deduplicated and returned sorted by
    value; no completeness claim is made for general observables.
    """
    obs = np.asarray(obs, dtype=float)
    if obs.shape != (4, 4):
        raise ValueError(f"observable must be 4x4, got {obs.shape}")
    if np.abs(obs - obs.T).max() > 1e-12 * (np.abs(obs).max() + 1.0):
        raise ValueError("observable must be symmetric")
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    real_field = field is NumberField.REAL
    tensor = obs.reshape(2, 2, 2, 2)
    scale = np.linalg.norm(obs) + 1.0
    deg_tol = 1e-12 * scale

    found: list[tuple[float, np.ndarray, np.ndarray, bool]] = []
    nonconverged = 0
    for s in range(n_starts):
        rng = np.random.default_rng(seed + s)
        if real_field:
            a0 = rng.normal(size=2)
            b0 = rng.normal(size=2)
        else:
            a0 = rng.normal(size=2) + 1j * rng.normal(size=2)
            b0 = rng.normal(size=2) + 1j * rng.normal(size=2)
        a0 = a0 / np.linalg.norm(a0)
        b0 = b0 / np.linalg.norm(b0)
        for pa in (0, 1):
            for pb in (0, 1):
                a, b = a0.copy(), b0.copy()
                degenerate = converged = False
                for it in range(max_iters):
                    la = _reduced_a(tensor, a)
                    deg_b = np.linalg.norm(la) < deg_tol
                    if not deg_b:
                        b = np.linalg.eigh(la)[1][:, pb]
                    lb = _reduced_b(tensor, b)
                    deg_a = np.linalg.norm(lb) < deg_tol
                    if not deg_a:
                        a = np.linalg.eigh(lb)[1][:, pa]
                    ab = np.kron(a, b)
                    g = float(np.real(np.vdot(ab, obs @ ab)))
                    res = np.linalg.norm(_eig_residual(tensor, a, b, g))
                    if res < res_tol * scale:
                        degenerate = deg_a or deg_b
                        converged = True
                        break
                    if it >= 30 and it % 30 == 0 and res < 1e-3 * scale:
                        a, b, g = _polish(tensor, a, b, g, real_field)
                        if real_field:
                            a, b = np.real(a), np.real(b)
                            a = a / np.linalg.norm(a)
                            b = b / np.linalg.norm(b)
                        res = np.linalg.norm(_eig_residual(tensor, a, b, g))
                        if res < res_tol * scale:
                            converged = True
                            break
                if not converged:
                    nonconverged += 1
                    continue
                found.append((g, a, b, degenerate))

    if nonconverged:
        warnings.warn(
            f"{nonconverged} of {4 * n_starts} solver tracks did not converge "
            f"within {max_iters} iterations",
            RuntimeWarning,
            stacklevel=2,
        )

    unique: list[tuple[float, np.ndarray, np.ndarray, bool]] = []
    for g, a, b, deg in found:
        duplicate = False
        for g2, a2, b2, deg2 in unique:
            if abs(g - g2) >= 1e-7 * scale:
                continue
            if deg and deg2:
                duplicate = True
                break
            if abs(np.vdot(a, a2)) > 1 - 1e-7 and abs(np.vdot(b, b2)) > 1 - 1e-7:
                duplicate = True
                break
        if not duplicate:
            unique.append((g, a, b, deg))
    unique.sort(key=lambda t: t[0])

    return [
        SeparabilityEigenpair(
            value=g,
            alice=LocalState(bloch_of_ket(a)),
            bob=LocalState(bloch_of_ket(b)),
            field=field,
            degenerate=deg,
        )
        for g, a, b, deg in unique
    ]


def bounds(
    obs: DiagObservable | np.ndarray,
    field: NumberField,
    n_starts: int = 64,
    seed: int = 0,
) -> tuple[float, float]:
    """Minimal and maximal separability eigenvalue for the given field.

    Pauli-diagonal observables use the closed form: +-max{|lz|, |lx|} over
    the reals, extended by |ly| over the complex numbers.  General
    symmetric matrices fall back to the numeric solver.
    """
    if isinstance(obs, DiagObservable):
        if field is NumberField.REAL:
            m = max(abs(obs.lz), abs(obs.lx))
        else:
            m = max(abs(obs.lz), abs(obs.lx), abs(obs.ly))
        return (-m + 0.0, m)
    pairs = numeric_separability_eigs(obs, field, n_starts=n_starts, seed=seed)
    if not pairs:
        raise RuntimeError("separability solver returned no converged fixed points")
    values = [p.value for p in pairs]
    return (min(values), max(values))


def evaluate_witness(
    g: np.ndarray,
    obs: DiagObservable,
    sigma_gamma: np.ndarray | None = None,
    k: float = 5.0,
) -> WitnessVerdict:
    """Witness verdict for a correlation matrix under a diagonal observable.

    The expectation is ``lz g[z,z] + lx g[x,x] + ly g[y,y]``; its standard
    deviation is propagated quadratically from ``sigma_gamma`` when given.
    A bound counts as violated only when exceeded by more than ``k``
    standard deviations.
    """
    if k <= 0:
        raise ValueError("significance threshold k must be positive")
    g = check_correlation(g)
    expectation = float(
        obs.lz * g[IDX_Z, IDX_Z] + obs.lx * g[IDX_X, IDX_X] + obs.ly * g[IDX_Y, IDX_Y]
    )
    sigma = 0.0
    if sigma_gamma is not None:
        sg = np.asarray(sigma_gamma, float)
        sigma = float(
            np.sqrt(
                (obs.lz * sg[IDX_Z, IDX_Z]) ** 2
                + (obs.lx * sg[IDX_X, IDX_X]) ** 2
                + (obs.ly * sg[IDX_Y, IDX_Y]) ** 2
            )
        )
    b_real = bounds(obs, NumberField.REAL)
    b_complex = bounds(obs, NumberField.COMPLEX)

    def violated(lo: float, hi: float) -> bool:
        return expectation < lo - k * sigma or expectation > hi + k * sigma

    r_ent = violated(*b_real)
    c_ent = violated(*b_complex)

    # distance to the nearest violated bound, in units of sigma
    distances = [
        abs(expectation - edge)
        for lo, hi in (b_real, b_complex)
        for edge, out in ((lo, expectation < lo), (hi, expectation > hi))
        if out
    ]
    if not distances:
        significance = 0.0
    elif sigma > 0.0:
        significance = min(distances) / sigma
    else:
        significance = float("inf")

    return WitnessVerdict(
        expectation=expectation,
        sigma=sigma,
        bounds_real=b_real,
        bounds_complex=b_complex,
        r_entangled=r_ent,
        c_entangled=c_ent,
        significance=significance,
    )


SIGMA_YY = DiagObservable(lz=0.0, lx=0.0, ly=1.0)
