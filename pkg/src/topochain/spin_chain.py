"""Spin-1/2 tight-binding chain with spin-orbit-like cross hopping.

Single-excitation sector of

    H = sum_l t_z (c+_{l,up} c_{l+1,up} - c+_{l,dn} c_{l+1,dn}) + H.c.
      + sum_l h_z (n_{l,up} - n_{l,dn})
      - sum_l i D0 e^{-i phi} (c+_{l,up} c_{l+1,dn} - c+_{l+1,up} c_{l,dn}) + H.c.

on an open chain of N cells.  Basis ordering is site-major, spin-minor:
index 2(l-1) + s with s = 0 for up, 1 for down, l = 1..N.

At phi = 0 the Bloch matrix is
    h(k) = [h_z + 2 t_z cos k] sigma_z + 2 D0 sin k sigma_x,
with bands E(k) = +-sqrt([h_z + 2 t_z cos k]^2 + [2 D0 sin k]^2) and chiral
symmetry sigma_y h(k) sigma_y = -h(k).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

DEFAULT_K_SAMPLES = 1024
ZERO_MODE_THRESHOLD = 1e-4  # in units of t0


class UnsupportedParameterError(ValueError):
    """Momentum-space forms are only stated for phi = 0."""


@dataclass(frozen=True)
class ChainParams:
    """Chain couplings in units of t0; phi in radians; n_cells = N."""

    t_z: float = 1.0
    delta0: float = 0.99
    h_z: float = 0.3
    phi: float = 0.0
    n_cells: int = 16

    def __post_init__(self) -> None:
        for name in ("t_z", "delta0", "h_z", "phi"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.n_cells < 1:
            raise ValueError("n_cells must be >= 1")

    def with_(self, **kw) -> "ChainParams":
        return replace(self, **kw)


def dot_params(dot: str, base: ChainParams | None = None) -> ChainParams:
    """Parameter points of the braiding protocol.

    A: (+t_z, +D0, h_z); B: (-t_z, -D0, h_z); C: (-t_z, -D0, 0); D: (+t_z, +D0, 0).
    Magnitudes come from `base` (default: the canonical operating point).
    """
    p = base if base is not None else ChainParams()
    t, d, h = abs(p.t_z), abs(p.delta0), p.h_z
    table = {
        "A": (t, d, h),
        "B": (-t, -d, h),
        "C": (-t, -d, 0.0),
        "D": (t, d, 0.0),
    }
    if dot not in table:
        raise ValueError(f"unknown dot {dot!r}")
    tz, d0, hz = table[dot]
    return p.with_(t_z=tz, delta0=d0, h_z=hz)


def _spin_index(site: int, spin: int, n: int) -> int:
    # site is 1-based, spin 0 = up / 1 = down
    return 2 * (site - 1) + spin


def build_open_hamiltonian(p: ChainParams) -> np.ndarray:
    """2N x 2N single-excitation matrix of H on the open chain."""
    if p.n_cells < 2:
        raise ValueError("open-chain build requires n_cells >= 2")
    n = p.n_cells
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    flip = -1j * p.delta0 * np.exp(-1j * p.phi)
    for l in range(1, n + 1):
        up = _spin_index(l, 0, n)
        dn = _spin_index(l, 1, n)
        h[up, up] += p.h_z
        h[dn, dn] -= p.h_z
    for l in range(1, n):
        up, dn = _spin_index(l, 0, n), _spin_index(l, 1, n)
        up1, dn1 = _spin_index(l + 1, 0, n), _spin_index(l + 1, 1, n)
        h[up, up1] += p.t_z
        h[dn, dn1] -= p.t_z
        # -i D0 e^{-i phi} (c+_{l,up} c_{l+1,dn} - c+_{l+1,up} c_{l,dn})
        h[up, dn1] += flip
        h[up1, dn] -= flip
    h += h.conj().T - np.diag(np.diag(h))  # add H.c. without doubling diagonal
    return h


def build_bloch(p: ChainParams, k: float) -> np.ndarray:
    """h(k) = [h_z + 2 t_z cos k] sigma_z + 2 D0 sin k sigma_x (phi = 0 only)."""
    if p.phi != 0.0:
        raise UnsupportedParameterError("momentum-space form requires phi = 0")
    return (p.h_z + 2.0 * p.t_z * np.cos(k)) * SIGMA_Z + (
        2.0 * p.delta0 * np.sin(k)
    ) * SIGMA_X


def band_energies(p: ChainParams, k: float) -> tuple[float, float]:
    """(E_minus, E_plus) at momentum k."""
    if p.phi != 0.0:
        raise UnsupportedParameterError("momentum-space form requires phi = 0")
    e = np.hypot(p.h_z + 2.0 * p.t_z * np.cos(k), 2.0 * p.delta0 * np.sin(k))
    return (-float(e), float(e))


def _band_plus(p: ChainParams, k: float) -> float:
    return np.hypot(p.h_z + 2.0 * p.t_z * np.cos(k), 2.0 * p.delta0 * np.sin(k))


def _golden_min(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    g = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return min(fc, fd)


def minimum_gap(p: ChainParams, k_samples: int = DEFAULT_K_SAMPLES) -> float:
    """2 min_k E_plus(k): grid scan on [-pi, pi) plus golden-section refinement."""
    if k_samples < 64:
        raise ValueError("k_samples must be >= 64")
    ks = np.linspace(-np.pi, np.pi, k_samples, endpoint=False)
    ek = np.hypot(p.h_z + 2.0 * p.t_z * np.cos(ks), 2.0 * p.delta0 * np.sin(ks))
    j = int(np.argmin(ek))
    dk = 2.0 * np.pi / k_samples
    best = _golden_min(lambda k: _band_plus(p, k), ks[j] - dk, ks[j] + dk)
    return 2.0 * min(best, float(ek[j]))


def chiral_symmetry_residual(p: ChainParams, k_samples: int = 128) -> float:
    """max_k || sigma_y h(k) sigma_y + h(k) || (spectral norm)."""
    if p.phi != 0.0:
        raise UnsupportedParameterError("chiral identity stated for phi = 0")
    worst = 0.0
    for k in np.linspace(-np.pi, np.pi, k_samples, endpoint=False):
        hk = build_bloch(p, k)
        r = SIGMA_Y @ hk @ SIGMA_Y + hk
        worst = max(worst, float(np.linalg.norm(r, 2)))
    return worst


def chiral_operator(n_cells: int) -> np.ndarray:
    """Block-diagonal sigma_y over sites; anticommutes with H at phi = 0."""
    return np.kron(np.eye(n_cells), SIGMA_Y)


def site_populations(state: np.ndarray) -> np.ndarray:
    """Per-site weight |up|^2 + |down|^2 of a 2N state vector."""
    a = np.abs(np.asarray(state).reshape(-1, 2)) ** 2
    return a.sum(axis=1)


def spinor(branch: str) -> np.ndarray:
    """phi_+ = (1, +i)/sqrt2 or phi_- = (1, -i)/sqrt2 (sigma_y eigenstates)."""
    if branch == "+":
        return np.array([1.0, 1.0j]) / np.sqrt(2.0)
    if branch == "-":
        return np.array([1.0, -1.0j]) / np.sqrt(2.0)
    raise ValueError("branch must be '+' or '-'")
