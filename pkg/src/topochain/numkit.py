"""Dense linear-algebra kernels shared by every physics module.

Deterministic by construction: no global RNG, no adaptive stepping, and a fixed
phase convention for eigenvectors so repeated calls on identical input return
identical bits.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

HERMITICITY_TOL = 1e-10
RESIDUAL_TOL = 1e-9


class NonHermitianError(ValueError):
    pass


class EigDecomposition(NamedTuple):
    eigenvalues: np.ndarray   # real, ascending
    eigenvectors: np.ndarray  # columns, orthonormal, canonical phase


def assert_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> None:
    dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if dev > tol * scale:
        raise NonHermitianError(f"matrix deviates from Hermiticity by {dev:.3e}")


def _canonical_phases(vecs: np.ndarray) -> np.ndarray:
    # rotate each column so its largest-magnitude entry is real positive;
    # ties break at the lowest index via argmax on a rounded magnitude key
    out = vecs.copy()
    mags = np.abs(out)
    for j in range(out.shape[1]):
        i = int(np.argmax(np.round(mags[:, j], 12)))
        pivot = out[i, j]
        if abs(pivot) > 0.0:
            out[:, j] *= np.conj(pivot) / abs(pivot)
    return out


def herm_eig(a: np.ndarray, check: bool = True) -> EigDecomposition:
    """Full eigensystem of a Hermitian matrix, ascending, canonical phases."""
    a = np.asarray(a, dtype=complex)
    if check:
        assert_hermitian(a)
    vals, vecs = np.linalg.eigh(a)
    return EigDecomposition(vals, _canonical_phases(vecs))


def eig_residual(a: np.ndarray, dec: EigDecomposition) -> float:
    """max_i ||A v_i - lambda_i v_i|| (absolute, caller scales by ||A||)."""
    r = a @ dec.eigenvectors - dec.eigenvectors * dec.eigenvalues
    return float(np.max(np.linalg.norm(r, axis=0)))


def evolve_unitary(h: np.ndarray, psi: np.ndarray, dt: float) -> np.ndarray:
    """psi -> exp(-i H dt) psi via the eigendecomposition of H."""
    vals, vecs = herm_eig(h)
    return vecs @ (np.exp(-1j * vals * dt) * (vecs.conj().T @ psi))


def propagator(h: np.ndarray, dt: float) -> np.ndarray:
    """Dense exp(-i H dt) for a Hermitian H."""
    vals, vecs = herm_eig(h)
    return (vecs * np.exp(-1j * vals * dt)) @ vecs.conj().T


def rk4_superop_step(
    rhs: Callable[[np.ndarray], np.ndarray], rho: np.ndarray, dt: float
) -> np.ndarray:
    """One classical RK4 step of d(rho)/dt = rhs(rho)."""
    k1 = rhs(rho)
    k2 = rhs(rho + 0.5 * dt * k1)
    k3 = rhs(rho + 0.5 * dt * k2)
    k4 = rhs(rho + dt * k3)
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def default_rk4_dt(h_norm: float, total_time: float) -> float:
    """Conservative step: min(1e-3/||H||, T/1e4)."""
    caps = [total_time / 1e4]
    if h_norm > 0.0:
        caps.append(1e-3 / h_norm)
    return min(caps)
