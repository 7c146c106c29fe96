"""Order-dependent parameter protocols acting on the zero-mode pair.

Two elementary operations move the chain between the four operating points
(see edge_modes):

    O1: flip the signs of t_z and d0, then ramp h_z down to zero.
    O2: flip the signs of t_z and d0 at constant h_z.

Sign flips are parametrized as simultaneous scaling t_z(s) = t_z cos(pi s),
d0(s) = d0 cos(pi s); the cosine already has zero slope at the endpoints.
The ramp_shape option shapes the h_z ramp inside O1 (cosine default).

Any such flip at h_z != 0 drags the chain through the trivial wedge
|h_z| > 2|t_z| where the bulk gap closes and the zero-mode pair does not
exist; at h_z = 0 the path only touches the isolated critical point, where
H(s) is proportional to a fixed matrix and the pair is never lost.  Two
propagation modes handle this differently:

    evolve_through   honest piecewise-constant unitary propagation.  The
                     wedge passage excites bulk states, so the outcome is
                     duration dependent; step counts are refined until
                     doubling them moves the final fidelity by < 1e-4.

    evolve_tracking  idealized adiabatic bookkeeping.  Inside topological,
                     gapped stretches the state is projected onto the
                     instantaneous two-dimensional near-zero subspace and
                     renormalized.  A traversal of the trivial wedge
                     interior exchanges the branch labels of the tracked
                     pair (phi_plus <-> phi_minus, i.e. left <-> right),
                     implemented by the mirror operation below; touching
                     only the critical point leaves the labels unchanged.
                     The outcome is independent of ramp speed.

The mirror operation, site reflection tensored with sigma_z, commutes with
the chain Hamiltonian everywhere at zero spin-flip phase and maps each edge
zero mode exactly onto its partner on the opposite edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numkit import evolve_unitary, herm_eig
from .spin_chain import (ChainParams, build_open_hamiltonian, dot_params,
                         minimum_gap)
from .topology import winding_number
from .edge_modes import analytic_edge_states, sigma_y_expectation
from .units import mhz_from_energy, ns_from_time, time_from_us

DEFAULT_DURATION = time_from_us(3.0)
GAP_FLOOR = 0.2          # units of t0; below this the pair is not tracked
EDGE_SITES = 4           # outermost sites counted as "the edge"
STEP_DOUBLING_TOL = 1e-4
MIN_STEPS_PER_OP = 100


class TrackingLossError(RuntimeError):
    """Tracked near-zero subspace is not two-dimensional where it should be."""

    def __init__(self, message: str, step_index: int):
        super().__init__(message)
        self.step_index = step_index


def _cosine_warp(u: float) -> float:
    return 0.5 * (1.0 - np.cos(np.pi * u))


@dataclass(frozen=True)
class ProtocolOp:
    """One elementary operation as a continuous map s in [0,1] -> ChainParams."""

    name: str                # "O1" | "O2"
    start: ChainParams
    duration: float
    ramp_shape: str = "cosine"

    def params_at(self, s: float) -> ChainParams:
        if not 0.0 <= s <= 1.0:
            raise ValueError("path coordinate %g outside [0, 1]" % s)
        t, d, h = self.start.t_z, self.start.delta0, self.start.h_z
        if self.name == "O2":
            c = np.cos(np.pi * s)
            return self.start.with_(t_z=t * c, delta0=d * c)
        if s <= 0.5:
            c = np.cos(np.pi * 2.0 * s)
            return self.start.with_(t_z=t * c, delta0=d * c)
        u = 2.0 * s - 1.0
        f = _cosine_warp(u) if self.ramp_shape == "cosine" else u
        return self.start.with_(t_z=-t, delta0=-d, h_z=h * (1.0 - f))

    def end_params(self) -> ChainParams:
        return self.params_at(1.0)


@dataclass(frozen=True)
class ProtocolSchedule:
    ops: tuple
    total_duration: float
    steps: int               # per op
    ramp_shape: str


def make_protocol(order, durations, ramp_shape: str = "cosine",
                  start: ChainParams = None,
                  steps: int = 1200) -> ProtocolSchedule:
    """Chain the requested operations into a schedule starting from `start`.

    `durations` is one time per op, or a scalar applied to every op.  An
    empty order gives an empty schedule (evolution through it is identity).
    """
    order = list(order)
    if np.isscalar(durations):
        durations = [float(durations)] * len(order)
    durations = [float(x) for x in durations]
    if len(durations) != len(order):
        raise ValueError("need one duration per op")
    if any(x <= 0 for x in durations):
        raise ValueError("durations must be positive")
    if steps < MIN_STEPS_PER_OP:
        raise ValueError("at least %d steps per op" % MIN_STEPS_PER_OP)
    if ramp_shape not in ("cosine", "linear"):
        raise ValueError("unknown ramp shape %r" % (ramp_shape,))
    p = dot_params("A") if start is None else start
    ops = []
    for name, dur in zip(order, durations):
        if name not in ("O1", "O2"):
            raise ValueError("unknown operation %r" % (name,))
        op = ProtocolOp(name, p, dur, ramp_shape)
        ops.append(op)
        p = op.end_params()
    return ProtocolSchedule(tuple(ops), float(sum(durations)), steps, ramp_shape)


def _propagate(schedule: ProtocolSchedule, psi: np.ndarray,
               steps: int) -> np.ndarray:
    for op in schedule.ops:
        dt = op.duration / steps
        for j in range(steps):
            pm = op.params_at((j + 0.5) / steps)
            psi = evolve_unitary(build_open_hamiltonian(pm), psi, dt)
    return psi


def evolve_through(schedule: ProtocolSchedule, initial: np.ndarray,
                   tol: float = STEP_DOUBLING_TOL,
                   max_doublings: int = 6) -> np.ndarray:
    """Honest unitary propagation, refined until step doubling is idle.

    Midpoint piecewise-constant propagators along the path; the per-op step
    count starts at schedule.steps and doubles until the final-state
    fidelity moves by less than `tol`.
    """
    if abs(np.linalg.norm(initial) - 1.0) > 1e-8:
        raise ValueError("initial state must be normalized")
    if not schedule.ops:
        return initial.copy()
    steps = schedule.steps
    psi = _propagate(schedule, initial, steps)
    for _ in range(max_doublings):
        steps *= 2
        nxt = _propagate(schedule, initial, steps)
        if abs(abs(np.vdot(psi, nxt)) ** 2 - 1.0) < tol:
            return nxt
        psi = nxt
    raise RuntimeError("no step-doubling convergence at %d steps per op" % steps)


def mirror_operator(n_cells: int) -> np.ndarray:
    """Site reflection tensored with sigma_z; exchanges the edge pair."""
    return np.kron(np.eye(n_cells)[::-1], np.diag([1.0, -1.0]))


def evolve_tracking(schedule: ProtocolSchedule, initial: np.ndarray,
                    gap_floor: float = GAP_FLOOR) -> np.ndarray:
    """Adiabatic idealization: project onto the tracked near-zero pair.

    At every step inside a topological, gapped stretch the state is
    projected onto the two smallest-|E| eigenvectors and renormalized;
    exactly two eigenvalues must sit below a quarter of the bulk gap there,
    otherwise TrackingLossError reports the step.  Through gapless or
    trivial windows the state is carried unitarily, and if the window
    contained trivial-phase points the branch labels are exchanged on exit
    (mirror operation).  The final state is therefore reproducible at any
    ramp speed.
    """
    psi = np.array(initial, dtype=complex)
    mirror = mirror_operator(schedule.ops[0].start.n_cells) if schedule.ops else None
    in_bad = False
    saw_trivial = False
    step_index = 0
    for op in schedule.ops:
        dt = op.duration / schedule.steps
        for j in range(schedule.steps):
            pm = op.params_at((j + 0.5) / schedule.steps)
            w = winding_number(pm.t_z, pm.h_z)
            gap = minimum_gap(pm) if w in (1, -1) else 0.0
            vals, vecs = herm_eig(build_open_hamiltonian(pm), check=False)
            if gap >= gap_floor:
                if in_bad:
                    if saw_trivial:
                        psi = mirror @ psi
                    in_bad = False
                    saw_trivial = False
                n_zero = int(np.sum(np.abs(vals) < 0.25 * gap))
                if n_zero != 2:
                    raise TrackingLossError(
                        "near-zero subspace is %d-dimensional at step %d"
                        % (n_zero, step_index), step_index)
                pair = vecs[:, np.argsort(np.abs(vals))[:2]]
                psi = pair @ (pair.conj().T @ psi)
                nrm = np.linalg.norm(psi)
                if nrm < 1e-12:
                    raise TrackingLossError(
                        "state orthogonal to tracked pair at step %d"
                        % step_index, step_index)
                psi = psi / nrm
            else:
                in_bad = True
                if w == 0:
                    saw_trivial = True
                psi = vecs @ (np.exp(-1j * vals * dt) * (vecs.conj().T @ psi))
            step_index += 1
    return psi


@dataclass(frozen=True)
class FinalStateReport:
    edge_side: str               # "left" | "right" | "delocalized"
    edge_population: float       # weight on the 4 outermost sites of that side
    sigma_y_expectation: float
    fidelity_to_expected: float
    expected_label: str


def _infer_dot(p: ChainParams) -> str:
    if p.h_z == 0.0:
        return "D" if p.t_z > 0 else "C"
    return "A" if p.t_z > 0 else "B"


def classify_final(state: np.ndarray, p_final: ChainParams) -> FinalStateReport:
    """Edge populations, sigma_y character, and fidelity to the closed forms."""
    pops = np.sum(np.abs(state.reshape(-1, 2)) ** 2, axis=1)
    pop_left = float(np.sum(pops[:EDGE_SITES]))
    pop_right = float(np.sum(pops[-EDGE_SITES:]))
    if pop_left > 0.5:
        side = "left"
    elif pop_right > 0.5:
        side = "right"
    else:
        side = "delocalized"
    sy = sigma_y_expectation(state)
    dot = _infer_dot(p_final)
    left, right = analytic_edge_states(dot, p_final)
    fid_left = abs(np.vdot(left.state(), state)) ** 2
    fid_right = abs(np.vdot(right.state(), state)) ** 2
    if side == "left" or (side == "delocalized" and fid_left >= fid_right):
        expected, fid, pop = left, fid_left, pop_left
    else:
        expected, fid, pop = right, fid_right, pop_right
    label = "%s:%s:phi%s" % (expected.dot, expected.side,
                             "+" if expected.spinor_branch == "+" else "-")
    return FinalStateReport(side, pop, sy, float(fid), label)


def _run_both_orders(p_initial: ChainParams, total_duration: float, mode: str,
                     ramp_shape: str, steps: int,
                     order: tuple = ("O1", "O2")):
    left, _ = analytic_edge_states(_infer_dot(p_initial), p_initial)
    psi0 = left.state()
    finals = {}
    p_end = p_initial
    per_op = total_duration / max(len(order), 1)
    for key, seq in (("red", tuple(order)), ("blue", tuple(reversed(order)))):
        sched = make_protocol(seq, per_op, ramp_shape,
                              start=p_initial, steps=steps)
        if mode == "tracking":
            finals[key] = evolve_tracking(sched, psi0)
        elif mode == "unitary":
            finals[key] = evolve_through(sched, psi0)
        else:
            raise ValueError("unknown mode %r" % (mode,))
        if sched.ops:
            p_end = sched.ops[-1].end_params()
    return finals, p_end


def compare_orders(p_initial: ChainParams, total_duration: float = DEFAULT_DURATION,
                   mode: str = "tracking", ramp_shape: str = "cosine",
                   steps: int = 1200, order: tuple = ("O1", "O2")):
    """Run both operation orders on the left zero mode and compare outcomes.

    Red order is `order` as given, blue is its reverse; each op gets an equal
    share of the total duration.  Returns (report_red, report_blue,
    distinguishability) with distinguishability = 1 - |<final_red|final_blue>|^2.
    """
    finals, p_end = _run_both_orders(p_initial, total_duration, mode,
                                     ramp_shape, steps, order)
    report_red = classify_final(finals["red"], p_end)
    report_blue = classify_final(finals["blue"], p_end)
    disting = 1.0 - abs(np.vdot(finals["red"], finals["blue"])) ** 2
    return report_red, report_blue, float(disting)


def _side_populations(state: np.ndarray) -> tuple:
    pops = np.sum(np.abs(state.reshape(-1, 2)) ** 2, axis=1)
    return float(np.sum(pops[:EDGE_SITES])), float(np.sum(pops[-EDGE_SITES:]))


def convergence_scan(p_initial: ChainParams, durations_us=(1.0, 3.0, 10.0),
                     ramp_shape: str = "cosine", steps: int = 1200) -> list:
    """Unitary-mode order comparison across protocol durations.

    Returns one row per duration with the mutual distinguishability and the
    edge populations of both finals; distinguishability grows with the
    duration as the diabatic wedge passage softens.
    """
    rows = []
    for t_us in durations_us:
        finals, _ = _run_both_orders(p_initial, time_from_us(t_us),
                                     "unitary", ramp_shape, steps)
        disting = 1.0 - abs(np.vdot(finals["red"], finals["blue"])) ** 2
        red_l, red_r = _side_populations(finals["red"])
        blue_l, blue_r = _side_populations(finals["blue"])
        rows.append({
            "duration_us": float(t_us),
            "distinguishability": float(disting),
            "red_left": red_l,
            "red_right": red_r,
            "blue_left": blue_l,
            "blue_right": blue_r,
        })
    return rows


def adiabaticity_report(p: ChainParams, total_duration: float) -> dict:
    """Computed bulk gap at the operating point and the protocol time ratio.

    tau is 1 over the gap in ordinary-frequency convention.  The gap is
    always computed from the band structure, never assumed.
    """
    gap = minimum_gap(p)
    gap_mhz = mhz_from_energy(gap)
    tau_ns = 1e3 / gap_mhz
    t_ns = ns_from_time(total_duration)
    return {
        "gap_t0": gap,
        "gap_mhz": gap_mhz,
        "tau_ns": tau_ns,
        "duration_ns": t_ns,
        "adiabaticity_ratio": t_ns / tau_ns,
    }
