"""Winding number, zero-mode root analysis, and the dynamical chiral center.

Closed form: nu = +-(1/2)[sgn(2 t_z + h_z) + sgn(2 t_z - h_z)], sign tied to
sgn(t_z); undefined on gap-closing boundaries (any sgn argument zero) and at
t_z = 0.

Dynamical probe: a spin-up excitation at the middle site evolves under the open
chain; the running time average of <P_d> with P_d = sum_l l sigma_y^(l), scaled
by 2/T, converges to the winding number deep in either phase.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numkit
from .spin_chain import SIGMA_Y, ChainParams, build_open_hamiltonian, minimum_gap


@dataclass(frozen=True)
class PhaseDiagram:
    t_z_axis: np.ndarray
    h_z_axis: np.ndarray
    nu: np.ndarray  # float matrix; NaN marks undefined (boundary or t_z = 0)


@dataclass(frozen=True)
class ChiralCenterSeries:
    times: np.ndarray
    instantaneous_center: np.ndarray
    running_average: np.ndarray  # (2/t) integral_0^t <P_d>, -> winding number

    @property
    def nu_dynamical(self) -> float:
        return float(self.running_average[-1])


def winding_number(t_z: float, h_z: float) -> int | None:
    """Closed-form winding; None when the gap closes (sgn arg 0) or t_z = 0."""
    if t_z == 0.0:
        return None
    a, b = 2.0 * t_z + h_z, 2.0 * t_z - h_z
    if a == 0.0 or b == 0.0:
        return None
    nu = 0.5 * (np.sign(a) + np.sign(b))
    if t_z < 0.0:
        nu = -nu
    return int(round(nu))


def phase_diagram(t_z_grid, h_z_grid) -> PhaseDiagram:
    t_ax = np.asarray(t_z_grid, dtype=float)
    h_ax = np.asarray(h_z_grid, dtype=float)
    if t_ax.size == 0 or h_ax.size == 0:
        raise ValueError("grids must be non-empty")
    nu = np.full((t_ax.size, h_ax.size), np.nan)
    for i, t in enumerate(t_ax):
        for j, h in enumerate(h_ax):
            w = winding_number(t, h)
            if w is not None:
                nu[i, j] = w
    return PhaseDiagram(t_ax, h_ax, nu)


def zero_mode_roots(
    p: ChainParams, branch: str = "+"
) -> tuple[complex, complex, bool]:
    """Roots z = e^{ik} of the zero-energy condition for one spinor branch.

    Branch phi_+ solves h_z + t_z(z + 1/z) = -D0 (z - 1/z), i.e.
    (t_z + D0) z^2 + h_z z + (t_z - D0) = 0; branch phi_- swaps the sign of D0.
    exists_left means both roots lie inside the unit circle (Im k > 0).
    """
    d0 = p.delta0 if branch == "+" else -p.delta0
    a = p.t_z + d0
    b = p.h_z
    c = p.t_z - d0
    if a == 0.0:
        if b == 0.0:
            raise ValueError("degenerate zero-mode condition (t_z = delta0 = h_z = 0)")
        # reduced linear solve; the second root escaped to infinity
        z1 = complex(-c / b)
        z2 = complex(np.inf)
        return z1, z2, abs(z1) < 1.0
    disc = complex(b * b - 4.0 * a * c)
    sq = np.sqrt(disc)
    z1 = (-b + sq) / (2.0 * a)
    z2 = (-b - sq) / (2.0 * a)
    if abs(z1) > abs(z2):
        z1, z2 = z2, z1  # fast root first, slow (larger |z|) second
    exists_left = bool(abs(z1) < 1.0 and abs(z2) < 1.0)
    return complex(z1), complex(z2), exists_left


def displacement_operator(n_cells: int) -> np.ndarray:
    """P_d = sum_l l sigma_y^(l) on the 2N single-excitation space."""
    return np.kron(np.diag(np.arange(1, n_cells + 1, dtype=float)), SIGMA_Y)


def _running_average(times: np.ndarray, inst: np.ndarray) -> np.ndarray:
    # trapezoidal cumulative integral scaled by 2/t; the t -> 0 limit is 2<P_d>(0)
    dt = np.diff(times)
    cum = np.concatenate(([0.0], np.cumsum(0.5 * dt * (inst[1:] + inst[:-1]))))
    avg = np.empty_like(inst)
    avg[0] = 2.0 * inst[0]
    avg[1:] = 2.0 * cum[1:] / times[1:]
    return avg


def chiral_center_dynamics(
    p: ChainParams, duration: float, steps: int = 4000
) -> ChiralCenterSeries:
    """Evolve the mid-chain spin-up state and accumulate the chiral center."""
    if p.n_cells < 4:
        raise ValueError("need n_cells >= 4")
    if duration <= 0.0:
        raise ValueError("duration must be positive")
    n = p.n_cells
    h = build_open_hamiltonian(p)
    vals, vecs = numkit.herm_eig(h)
    psi0 = np.zeros(2 * n, dtype=complex)
    psi0[2 * (int(np.ceil(n / 2)) - 1)] = 1.0  # spin-up at site ceil(N/2)
    amps = vecs.conj().T @ psi0
    times = np.linspace(0.0, duration, steps + 1)
    # psi(t) for all grid times at once: columns are time points
    phases = np.exp(-1j * np.outer(vals, times))
    psis = vecs @ (phases * amps[:, None])
    pd = displacement_operator(n)
    inst = np.real(np.einsum("it,ij,jt->t", psis.conj(), pd, psis))
    return ChiralCenterSeries(times, inst, _running_average(times, inst))


def dynamical_winding_scan(
    points: list[tuple[float, float]],
    delta0: float = 0.99,
    n_cells: int = 16,
    duration: float = 200.0,
    steps: int = 20000,
) -> list[dict]:
    """Closed-form vs dynamical nu at (t_z, h_z) points; rows for CSV/tests.

    The chiral-center estimator measures the rotation sense of the Bloch
    vector, which flips with the sign of t_z; the closed form resolves the
    same ambiguity with an explicit branch factor -1 for t_z < 0.  The
    reported dynamical value carries that identical factor so both columns
    share one convention (they coincide for t_z > 0, the only regime the
    edge-state protocols operate in).
    """
    rows = []
    for t_z, h_z in points:
        p = ChainParams(t_z=t_z, delta0=delta0, h_z=h_z, n_cells=n_cells)
        nu = winding_number(t_z, h_z)
        series = chiral_center_dynamics(p, duration, steps)
        branch = -1.0 if t_z < 0.0 else 1.0
        rows.append(
            {
                "t_z": t_z,
                "h_z": h_z,
                "gap": minimum_gap(p),
                "nu_closed_form": nu,
                "nu_dynamical": branch * series.nu_dynamical,
            }
        )
    return rows
