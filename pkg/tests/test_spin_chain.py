"""Single-excitation chain Hamiltonian: structure, bands, gap, symmetry."""

import numpy as np
import pytest

from topochain import spin_chain
from topochain.spin_chain import ChainParams, dot_params
from topochain.units import energy_from_mhz


def test_index_convention_small_chain():
    # N=2 chain written out by hand: site-major, spin-up first.
    p = ChainParams(t_z=1.0, delta0=0.5, h_z=0.3, phi=0.0, n_cells=2)
    h = spin_chain.build_open_hamiltonian(p)
    assert h.shape == (4, 4)
    assert h[0, 0] == pytest.approx(0.3)    # up on site 1
    assert h[1, 1] == pytest.approx(-0.3)   # down on site 1
    assert h[0, 2] == pytest.approx(1.0)    # up hop
    assert h[1, 3] == pytest.approx(-1.0)   # down hop
    flip = -1j * 0.5
    assert h[0, 3] == pytest.approx(flip)   # up_1 -> dn_2 carries +flip
    assert h[2, 1] == pytest.approx(-flip)  # up_2 -> dn_1 carries -flip
    assert np.max(np.abs(h - h.conj().T)) == 0.0


def test_hermitian_any_phase(rng):
    for _ in range(5):
        p = ChainParams(t_z=rng.uniform(-2, 2), delta0=rng.uniform(0, 2),
                        h_z=rng.uniform(-3, 3), phi=rng.uniform(0, 2 * np.pi),
                        n_cells=int(rng.integers(2, 12)))
        h = spin_chain.build_open_hamiltonian(p)
        assert np.max(np.abs(h - h.conj().T)) < 1e-14


def test_bloch_matches_band_formula():
    p = dot_params("A")
    for k in np.linspace(-np.pi, np.pi, 17):
        em, ep = spin_chain.band_energies(p, k)
        dz = p.h_z + 2.0 * p.t_z * np.cos(k)
        dx = 2.0 * p.delta0 * np.sin(k)
        e = np.hypot(dz, dx)
        assert em == pytest.approx(-e, abs=1e-12)
        assert ep == pytest.approx(e, abs=1e-12)
        hk = spin_chain.build_bloch(p, k)
        vals = np.linalg.eigvalsh(hk)
        assert vals[0] == pytest.approx(-e, abs=1e-12)


def test_minimum_gap_dot_a_frozen():
    # 2*min_k E_+ at (t_z, d0, h_z) = (1, 0.99, 0.3); the band minimum sits
    # near k = pi where E = |h - 2t| would vanish at h = 2t
    gap = spin_chain.minimum_gap(dot_params("A"))
    assert gap == pytest.approx(3.4, abs=1e-9)


def test_gap_closes_on_critical_lines():
    for hsign in (+1.0, -1.0):
        p = ChainParams(t_z=0.7, delta0=0.99, h_z=hsign * 1.4, phi=0.0,
                        n_cells=4)
        assert spin_chain.minimum_gap(p) < 1e-9


def test_gap_positive_off_critical():
    p = ChainParams(t_z=1.0, delta0=0.99, h_z=1.9, phi=0.0, n_cells=4)
    assert spin_chain.minimum_gap(p) > 0.05


def test_chiral_symmetry_at_zero_phase():
    p = dot_params("A")
    assert spin_chain.chiral_symmetry_residual(p) < 1e-12
    # the momentum-space identity is only stated at phi = 0
    with pytest.raises(spin_chain.UnsupportedParameterError):
        spin_chain.chiral_symmetry_residual(p.with_(phi=0.4))
    with pytest.raises(spin_chain.UnsupportedParameterError):
        spin_chain.build_bloch(p.with_(phi=0.4), 0.1)


def test_chiral_operator_squares_to_identity():
    s = spin_chain.chiral_operator(5)
    assert np.allclose(s @ s, np.eye(10), atol=1e-15)
    assert np.max(np.abs(s - s.conj().T)) < 1e-15


def test_dot_params_table():
    a = dot_params("A")
    assert (a.t_z, a.delta0, a.h_z, a.n_cells) == (1.0, 0.99, 0.3, 16)
    b = dot_params("B")
    assert (b.t_z, b.delta0, b.h_z) == (-1.0, -0.99, 0.3)
    c = dot_params("C")
    assert (c.t_z, c.delta0, c.h_z) == (-1.0, -0.99, 0.0)
    d = dot_params("D")
    assert (d.t_z, d.delta0, d.h_z) == (1.0, 0.99, 0.0)
    with pytest.raises(ValueError):
        dot_params("E")


def test_params_validation():
    with pytest.raises(ValueError):
        ChainParams(n_cells=0)
    with pytest.raises(ValueError):
        ChainParams(t_z=float("nan"))
    p = dot_params("A")
    q = p.with_(h_z=0.0)
    assert q.h_z == 0.0 and q.t_z == p.t_z


def test_site_populations_and_spinor():
    psi = np.zeros(8, dtype=complex)
    psi[2] = 1.0  # site 2, spin up
    pops = spin_chain.site_populations(psi)
    assert pops.shape == (4,)
    assert pops[1] == pytest.approx(1.0)
    up = spin_chain.spinor("+")
    dn = spin_chain.spinor("-")
    assert abs(np.vdot(up, dn)) < 1e-15
    y = spin_chain.SIGMA_Y
    assert np.vdot(up, y @ up).real == pytest.approx(1.0)
    assert np.vdot(dn, y @ dn).real == pytest.approx(-1.0)


def test_lab_unit_round_trip():
    # 4 MHz == 1 t0 by definition of the hopping scale
    assert energy_from_mhz(4.0) == pytest.approx(1.0)
    assert energy_from_mhz(13.6) == pytest.approx(3.4)
