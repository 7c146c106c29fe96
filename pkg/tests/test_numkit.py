"""Eigensolver contracts, unitarity, and RK4 accuracy."""

import numpy as np
import pytest

from topochain import numkit
from conftest import random_hermitian


def test_herm_eig_residual_and_ordering(rng):
    for n in (1, 2, 5, 16, 33, 66):
        a = random_hermitian(rng, n)
        dec = numkit.herm_eig(a)
        assert numkit.eig_residual(a, dec) <= numkit.RESIDUAL_TOL * max(
            1.0, np.linalg.norm(a, 2))
        assert np.all(np.diff(dec.eigenvalues) >= -1e-12)
        gram = dec.eigenvectors.conj().T @ dec.eigenvectors
        assert np.max(np.abs(gram - np.eye(n))) < 1e-12


def test_herm_eig_deterministic_phases(rng):
    a = random_hermitian(rng, 12)
    d1 = numkit.herm_eig(a)
    d2 = numkit.herm_eig(a.copy())
    # bit-identical on identical input, including eigenvector phases
    assert np.array_equal(d1.eigenvectors, d2.eigenvectors)


def test_non_hermitian_rejected(rng):
    a = random_hermitian(rng, 4)
    a[0, 1] += 1e-3
    with pytest.raises(numkit.NonHermitianError):
        numkit.herm_eig(a)
    numkit.herm_eig(a, check=False)  # explicit opt-out stays available


def test_evolve_unitary_norm_and_energy(rng):
    h = random_hermitian(rng, 10)
    psi = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    psi /= np.linalg.norm(psi)
    out = numkit.evolve_unitary(h, psi, 0.37)
    assert abs(np.linalg.norm(out) - 1.0) < 1e-12
    # energy is conserved under evolution by a constant H
    e0 = np.vdot(psi, h @ psi).real
    e1 = np.vdot(out, h @ out).real
    assert abs(e0 - e1) < 1e-10


def test_propagator_matches_evolve(rng):
    h = random_hermitian(rng, 7)
    psi = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    u = numkit.propagator(h, 0.5)
    assert np.max(np.abs(u.conj().T @ u - np.eye(7))) < 1e-12
    assert np.allclose(u @ psi, numkit.evolve_unitary(h, psi, 0.5), atol=1e-12)


def test_rk4_superop_step_order():
    # d rho/dt = -i[H, rho] with H = sigma_z has the exact solution
    # rho_01(t) = rho_01(0) * exp(-2i t); RK4 local error ~ dt^5
    h = np.diag([1.0, -1.0]).astype(complex)
    rhs = lambda r: -1j * (h @ r - r @ h)
    rho = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    errs = []
    for dt in (0.1, 0.05):
        out = numkit.rk4_superop_step(rhs, rho, dt)
        exact = rho.copy()
        exact[0, 1] *= np.exp(-2j * dt)
        exact[1, 0] *= np.exp(2j * dt)
        errs.append(np.max(np.abs(out - exact)))
    assert errs[0] < 1e-5
    # halving dt shrinks the one-step error ~2^5
    assert errs[0] / errs[1] == pytest.approx(32.0, rel=0.2)


def test_default_rk4_dt_caps():
    assert numkit.default_rk4_dt(100.0, 1.0) == pytest.approx(1e-5)
    assert numkit.default_rk4_dt(0.0, 2.0) == pytest.approx(2e-4)
