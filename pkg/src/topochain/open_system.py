"""Lindblad evolution over the vacuum + single-excitation manifold.

Basis layout: index 0 is the shared vacuum |G>, site l contributes index
2l-1 (qubit excited, |0e>_l) and index 2l (photon present, |1g>_l).  This is
the bare basis the collapse operators are defined in.  The coherent part is
the rotating-frame chain, which lives in the site-local polariton basis
(|0e> +- |1g>)/sqrt(2); the fixed block transform between the two frames is
applied to operators once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numkit
from .spin_chain import ChainParams, build_open_hamiltonian
from .topology import displacement_operator
from .units import rate_from_khz, time_from_ns, time_from_us, us_from_time

DEFAULT_GAMMA = rate_from_khz(5.0)
DEFAULT_DT = time_from_ns(0.5)
DEFAULT_DURATION = time_from_us(1.5)
STIFFNESS_BOUND = 0.05     # dt * ||H|| must stay below this
TRACE_STEP_TOL = 1e-6      # recorded drift beyond this aborts the run


class TraceDriftError(RuntimeError):
    """Integration lost trace normalization; the step size is too large."""


# site-local map polariton -> bare: rows (0e, 1g), columns (up, down)
_BLOCK = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


@dataclass(frozen=True)
class LindbladConfig:
    gamma: float = DEFAULT_GAMMA
    duration: float = DEFAULT_DURATION
    dt: float = DEFAULT_DT
    hamiltonian_mode: str = "effective"
    record_stride: int = 10

    def __post_init__(self):
        if self.gamma < 0.0:
            raise ValueError("gamma must be nonnegative")
        if self.duration <= 0.0 or self.dt <= 0.0:
            raise ValueError("duration and dt must be positive")
        if self.hamiltonian_mode not in ("effective", "full_drive"):
            raise ValueError("hamiltonian_mode must be effective or full_drive")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")

    def with_(self, **kw) -> "LindbladConfig":
        merged = {f: getattr(self, f) for f in
                  ("gamma", "duration", "dt", "hamiltonian_mode",
                   "record_stride")}
        merged.update(kw)
        return LindbladConfig(**merged)


@dataclass(frozen=True)
class ObservableSeries:
    times: np.ndarray              # recorded instants
    p1: np.ndarray
    p2: np.ndarray
    site_density: np.ndarray       # (samples, N) qubit+photon weight per site
    chiral_center: np.ndarray      # instantaneous Tr[rho P_d]
    trace_drift: np.ndarray        # |Tr rho - 1| diagnostics
    min_eigenvalue: np.ndarray     # positivity diagnostics
    final_state: np.ndarray        # density matrix at the last instant

    def to_csv(self) -> str:
        n = self.site_density.shape[1]
        header = ["time_us", "p1", "p2"]
        header += ["site_%d" % (l + 1) for l in range(n)]
        header.append("chiral_center")
        lines = [",".join(header)]
        for k in range(len(self.times)):
            row = [us_from_time(self.times[k]), self.p1[k], self.p2[k]]
            row += list(self.site_density[k])
            row.append(self.chiral_center[k])
            lines.append(",".join("%.9g" % v for v in row))
        return "\n".join(lines) + "\n"


def spin_block_transform(n: int) -> np.ndarray:
    """(2N+1)-dim polariton -> bare change of basis; vacuum untouched."""
    q = np.zeros((2 * n + 1, 2 * n + 1))
    q[0, 0] = 1.0
    for l in range(n):
        q[1 + 2 * l:3 + 2 * l, 1 + 2 * l:3 + 2 * l] = _BLOCK
    return q


def embed_spin_state(psi_spin: np.ndarray) -> np.ndarray:
    """Single-excitation chain vector (polariton basis) -> bare vector."""
    if psi_spin.ndim != 1 or psi_spin.size % 2:
        raise ValueError("expected a 2N chain vector")
    n = psi_spin.size // 2
    psi = np.zeros(2 * n + 1, dtype=complex)
    for l in range(n):
        up, dn = psi_spin[2 * l], psi_spin[2 * l + 1]
        psi[1 + 2 * l] = (up + dn) / np.sqrt(2.0)
        psi[2 + 2 * l] = (up - dn) / np.sqrt(2.0)
    return psi


def edge_initial_state(side: str, n: int) -> np.ndarray:
    """Single-site polariton superposition at the chosen chain end.

    Left is (up + i down)/sqrt2 on site 1, right is (up - i down)/sqrt2 on
    site N: the two spinors the analytic edge branches carry.
    """
    psi_spin = np.zeros(2 * n, dtype=complex)
    if side == "left":
        psi_spin[0] = 1.0 / np.sqrt(2.0)
        psi_spin[1] = 1j / np.sqrt(2.0)
    elif side == "right":
        psi_spin[2 * n - 2] = 1.0 / np.sqrt(2.0)
        psi_spin[2 * n - 1] = -1j / np.sqrt(2.0)
    else:
        raise ValueError("side must be left or right")
    return embed_spin_state(psi_spin)


def midchain_initial_state(n: int) -> np.ndarray:
    """Spin-up polariton on site ceil(N/2), bare-basis vector."""
    psi_spin = np.zeros(2 * n, dtype=complex)
    psi_spin[2 * (int(np.ceil(n / 2)) - 1)] = 1.0
    return embed_spin_state(psi_spin)


def pure_density(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


def effective_hamiltonian_bare(p: ChainParams) -> np.ndarray:
    """Rotating-frame chain embedded in the bare basis, vacuum decoupled."""
    n = p.n_cells
    q = spin_block_transform(n)
    h = np.zeros((2 * n + 1, 2 * n + 1), dtype=complex)
    h[1:, 1:] = build_open_hamiltonian(p)
    return q @ h @ q.T


def displacement_operator_bare(n: int) -> np.ndarray:
    """Site-weighted spin-y sum, written in the bare basis."""
    q = spin_block_transform(n)
    pd = np.zeros((2 * n + 1, 2 * n + 1), dtype=complex)
    pd[1:, 1:] = displacement_operator(n)
    return q @ pd @ q.T


def collapse_operators(n: int) -> list[np.ndarray]:
    """Photon loss, qubit loss, qubit dephasing for every site, in that order.

    a_l and sigma-minus_l drop the excitation into |G>; sigma-z_l is diagonal
    with +1 only on |0e>_l (every other basis state has qubit l in g).
    """
    if n < 1:
        raise ValueError("need n >= 1")
    d = 2 * n + 1
    ops = []
    for l in range(1, n + 1):
        a = np.zeros((d, d))
        a[0, 2 * l] = 1.0
        sm = np.zeros((d, d))
        sm[0, 2 * l - 1] = 1.0
        sz = -np.eye(d)
        sz[2 * l - 1, 2 * l - 1] = 1.0
        ops.extend([a, sm, sz])
    return ops


def _dephasing_kernel(n: int) -> np.ndarray:
    # K_ij = sum_l d_l[i] d_l[j] over the sigma-z diagonals d_l
    d = 2 * n + 1
    k = np.zeros((d, d))
    for l in range(1, n + 1):
        dl = -np.ones(d)
        dl[2 * l - 1] = 1.0
        k += np.outer(dl, dl)
    return k


def _make_rhs(n: int, gamma: float):
    """Dissipator with the 3N equal-rate channels in closed form.

    Both loss channels together drain every excited basis state into |G> at
    rate gamma; dephasing is a Hadamard mask. Equivalent to summing the
    collapse_operators Lindblad terms, at O(d^2) per evaluation.
    """
    d = 2 * n + 1
    p_exc = np.ones(d)
    p_exc[0] = 0.0
    kernel = _dephasing_kernel(n)

    def rhs(h: np.ndarray, rho: np.ndarray) -> np.ndarray:
        out = -1j * (h @ rho - rho @ h)
        if gamma > 0.0:
            out += gamma * (kernel * rho - n * rho)
            out -= gamma * 0.5 * (p_exc[:, None] * rho + rho * p_exc[None, :])
            out[0, 0] += gamma * np.sum(np.diag(rho)[1:])
        return out

    return rhs


def _validate_density(rho: np.ndarray) -> int:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    d = rho.shape[0]
    if d < 3 or d % 2 == 0:
        raise ValueError("expected dimension 2N+1 with N >= 1")
    if abs(np.trace(rho) - 1.0) > 1e-8:
        raise ValueError("initial trace must be 1")
    numkit.assert_hermitian(rho, tol=1e-8)
    return (d - 1) // 2


def lindblad_evolve(rho0: np.ndarray, cfg: LindbladConfig,
                    h_provider) -> ObservableSeries:
    """RK4 master-equation run with observables on the record stride.

    h_provider is a (2N+1)x(2N+1) bare-basis matrix, or a callable t -> matrix
    for the full_drive mode; the vacuum row/column must be zero (loss channels
    are the only way in).  Raises TraceDriftError when a recorded sample has
    drifted beyond 1e-6: that means dt does not resolve the dynamics.
    """
    n = _validate_density(rho0)
    if callable(h_provider):
        h_of_t = h_provider
    else:
        h_const = np.asarray(h_provider, dtype=complex)
        if h_const.shape != rho0.shape:
            raise ValueError("hamiltonian/state dimension mismatch")
        h_of_t = None
    h0 = h_of_t(0.0) if h_of_t is not None else h_const
    h_norm = float(np.linalg.norm(h0, 2))
    if cfg.dt * h_norm >= STIFFNESS_BOUND:
        raise ValueError(
            "dt*||H|| = %.3g exceeds %.2g; reduce dt"
            % (cfg.dt * h_norm, STIFFNESS_BOUND))

    steps = max(int(np.ceil(cfg.duration / cfg.dt)), 1)
    dt = cfg.duration / steps
    rhs = _make_rhs(n, cfg.gamma)
    pd = displacement_operator_bare(n)
    site_idx = [(1 + 2 * l, 2 + 2 * l) for l in range(n)]

    times, p1s, p2s, dens, chir, drift, mins = [], [], [], [], [], [], []

    def record(t: float, rho: np.ndarray) -> None:
        diag = np.real(np.diag(rho))
        site = np.array([diag[i] + diag[j] for i, j in site_idx])
        tr_err = abs(np.real(np.trace(rho)) - 1.0)
        if tr_err > TRACE_STEP_TOL:
            raise TraceDriftError(
                "trace drifted by %.2e at t = %.4g; reduce dt" % (tr_err, t))
        times.append(t)
        p1s.append(site[0])
        p2s.append(site[-1])
        dens.append(site)
        chir.append(float(np.real(np.sum(rho * pd.T))))
        drift.append(tr_err)
        mins.append(float(np.linalg.eigvalsh(rho)[0]))

    rho = np.array(rho0, dtype=complex)
    record(0.0, rho)
    for k in range(steps):
        t = k * dt
        if h_of_t is None:
            rho = numkit.rk4_superop_step(lambda r: rhs(h_const, r), rho, dt)
        else:
            h_a = h_of_t(t)
            h_b = h_of_t(t + 0.5 * dt)
            h_c = h_of_t(t + dt)
            k1 = rhs(h_a, rho)
            k2 = rhs(h_b, rho + 0.5 * dt * k1)
            k3 = rhs(h_b, rho + 0.5 * dt * k2)
            k4 = rhs(h_c, rho + dt * k3)
            rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (k + 1) % cfg.record_stride == 0 or k == steps - 1:
            record((k + 1) * dt, rho)

    return ObservableSeries(
        np.array(times), np.array(p1s), np.array(p2s), np.array(dens),
        np.array(chir), np.array(drift), np.array(mins), rho)


def edge_populations(rho: np.ndarray) -> tuple[float, float]:
    """Excitation weight on site 1 and on site N."""
    n = _validate_density(rho)
    diag = np.real(np.diag(rho))
    return (float(diag[1] + diag[2]),
            float(diag[2 * n - 1] + diag[2 * n]))


def chiral_center_under_decay(p: ChainParams, cfg: LindbladConfig,
                              duration: float) -> float:
    """Time-averaged Tr[rho P_d] from the mid-chain spin-up start.

    The closed-system running average of 2<P_d> converges to the winding
    number, so the half-value returned here sits at nu/2 and is pulled down
    by decay.
    """
    if p.n_cells < 4:
        raise ValueError("need n_cells >= 4")
    run_cfg = cfg.with_(duration=duration, record_stride=1)
    rho0 = pure_density(midchain_initial_state(p.n_cells))
    series = lindblad_evolve(rho0, run_cfg, effective_hamiltonian_bare(p))
    return float(np.trapezoid(series.chiral_center, series.times) / duration)


def gamma_sweep(p: ChainParams, gammas, tau: float,
                cfg: LindbladConfig | None = None) -> list[dict]:
    """Edge retention and chiral center per decay rate, rows sorted by gamma.

    P1 comes from the left-edge initial state and P2 from the right-edge one
    (each is the detected population in its own run); nu/2 from the mid-chain
    run.
    """
    base = cfg if cfg is not None else LindbladConfig()
    h = effective_hamiltonian_bare(p)
    rows = []
    for g in sorted(gammas):
        run_cfg = base.with_(gamma=float(g), duration=tau)
        left = lindblad_evolve(
            pure_density(edge_initial_state("left", p.n_cells)), run_cfg, h)
        right = lindblad_evolve(
            pure_density(edge_initial_state("right", p.n_cells)), run_cfg, h)
        rows.append({
            "gamma": float(g),
            "gamma_khz": float(g) / rate_from_khz(1.0),
            "p1": float(left.p1[-1]),
            "p2": float(right.p2[-1]),
            "nu_half": chiral_center_under_decay(p, run_cfg, tau),
        })
    return rows
