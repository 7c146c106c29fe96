"""Closed-form edge states at the protocol operating points and numeric cross-checks.

Zero-energy edge solutions of the open chain factorize into a scalar site
profile times a fixed spinor.  With the spin-flip phase at zero the spinors
are the sigma_y eigenvectors

    phi_plus  = (1,  i)/sqrt(2)   (left edge)
    phi_minus = (1, -i)/sqrt(2)   (right edge)

and the left profile obeys the three-term recurrence

    (t_z + d0) f(x+1) + h_z f(x) + (t_z - d0) f(x-1) = 0,  f(0) = 0,

solved by f(x) = (z1^x - z2^x)/(z1 - z2) with z1, z2 the roots of the
characteristic quadratic (see topology.zero_mode_roots); the division keeps
the profile finite in the double-root limit, where it becomes x * z^x.

The four operating points use the printed dimensionless constants

    A (+t, +d, h):  a0 = (t-d)/(t+d), b0 = h/(t+d), c0 = b0^2 - 4 a0,
                    roots (-b0 +- sqrt(c0))/2.
    B (-t, -d, h):  a1 = 1/a0, b1 = h/(t-d) referred to positive
                    magnitudes, c1 = b1^2 - 4 a1, roots
                    (b1 +- sqrt(c1))/(2 a1).  The variant without the
                    1/a1 factor gives the reciprocal roots, which grow
                    with x and belong to the opposite boundary convention,
                    so B states are also validated against diagonalization.
    C (-t, -d, 0):  f(x) = sin(pi x / 2) exp(-a2 x / 2),
                    a2 = ln(1/a0), normalization N2 = sqrt(2 sinh a2).
    D (+t, +d, 0):  identical profiles to C.

Right states are the mirror image x -> N - x + 1 with spinor phi_minus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spin_chain import ChainParams, chiral_operator
from .topology import zero_mode_roots

PHI_PLUS = np.array([1.0, 1.0j]) / np.sqrt(2.0)
PHI_MINUS = np.array([1.0, -1.0j]) / np.sqrt(2.0)

# double-root tolerance for switching to the confluent x * z^x profile
CONFLUENT_TOL = 1e-12


class TopologicalPhaseAbsentError(ValueError):
    """Raised when the requested zero-mode pair does not exist in the spectrum."""


def _bracket_profile(z1: complex, z2: complex, n_cells: int) -> np.ndarray:
    x = np.arange(1, n_cells + 1)
    if abs(z1 - z2) < CONFLUENT_TOL:
        prof = x * z1 ** x
    else:
        prof = (z1 ** x - z2 ** x) / (z1 - z2)
    return np.asarray(np.real_if_close(prof, tol=1000))


@dataclass(frozen=True)
class AnalyticEdgeState:
    """Closed-form edge state: a site profile tensored with a fixed spinor.

    a, b, c are the printed dimensionless constants of the operating point
    (referred to positive parameter magnitudes); c is the discriminant of
    the governing quadratic, identically -4*a0 at the h_z = 0 points.
    normalization is the overall constant multiplying the bracket profile.
    """

    side: str                 # "left" | "right"
    spinor_branch: str        # "+" | "-"
    dot: str                  # "A" | "B" | "C" | "D"
    a: float
    b: float
    c: float
    n_cells: int
    normalization: float

    def profile(self) -> np.ndarray:
        """Site profile f(x), x = 1..N, including normalization, before mirroring."""
        if self.dot == "A":
            sq = np.sqrt(complex(self.c))
            prof = _bracket_profile((-self.b + sq) / 2.0, (-self.b - sq) / 2.0,
                                    self.n_cells)
        elif self.dot == "B":
            sq = np.sqrt(complex(self.c))
            prof = _bracket_profile((self.b + sq) / (2.0 * self.a),
                                    (self.b - sq) / (2.0 * self.a), self.n_cells)
        else:
            x = np.arange(1, self.n_cells + 1)
            prof = np.sin(0.5 * np.pi * x) * np.exp(-0.5 * self.a * x)
        return self.normalization * prof

    def state(self) -> np.ndarray:
        """Normalized 2N-component state vector, site-major spin-minor."""
        prof = self.profile()
        if self.side == "right":
            return np.kron(prof[::-1], PHI_MINUS)
        return np.kron(prof, PHI_PLUS)


def _check_dot(dot: str, p: ChainParams) -> None:
    if dot not in ("A", "B", "C", "D"):
        raise ValueError("unknown operating point %r" % (dot,))
    sign = 1.0 if dot in ("A", "D") else -1.0
    if sign * p.t_z <= 0 or sign * p.delta0 <= 0:
        raise ValueError("parameter signs inconsistent with point %s" % dot)
    if dot in ("C", "D") and p.h_z != 0.0:
        raise ValueError("point %s requires h_z = 0, got %g" % (dot, p.h_z))


def analytic_edge_states(dot: str, p: ChainParams) -> tuple:
    """Closed-form (left, right) edge states at one of the operating points.

    Left carries phi_plus on the direct profile, right carries phi_minus on
    the x -> N - x + 1 mirrored profile.  Normalization constants at A and B
    can only be solved numerically; at C and D the analytic N2 already
    normalizes the profile up to an exponentially small truncation error.
    """
    _check_dot(dot, p)
    if not zero_mode_roots(p, "+")[2]:
        raise TopologicalPhaseAbsentError(
            "no normalizable edge solution at t_z=%g, delta0=%g, h_z=%g"
            % (p.t_z, p.delta0, p.h_z))
    t, d = abs(p.t_z), abs(p.delta0)
    a0 = (t - d) / (t + d)
    if dot == "A":
        a = a0
        b = p.h_z / (t + d)
        c = b * b - 4.0 * a
    elif dot == "B":
        a = 1.0 / a0
        b = p.h_z / (t - d)
        c = b * b - 4.0 * a
    else:
        a = float(np.log(1.0 / a0))   # a2
        b = 0.0
        c = -4.0 * a0

    probe = AnalyticEdgeState("left", "+", dot, a, b, c, p.n_cells, 1.0)
    if dot in ("C", "D"):
        norm = float(np.sqrt(2.0 * np.sinh(a)))
    else:
        norm = 1.0 / float(np.linalg.norm(probe.profile()))
    left = AnalyticEdgeState("left", "+", dot, a, b, c, p.n_cells, norm)
    right = AnalyticEdgeState("right", "-", dot, a, b, c, p.n_cells, norm)
    return left, right


@dataclass(frozen=True)
class NumericZeroModes:
    left_state: np.ndarray
    right_state: np.ndarray
    energies: tuple


def numeric_zero_modes(h: np.ndarray, threshold: float = 1e-4) -> NumericZeroModes:
    """Extract the zero-mode pair from a chain Hamiltonian by diagonalization.

    The two sub-threshold eigenvectors span a numerically degenerate plane;
    raw eigenvector directions inside it are arbitrary.  A 2x2 rotation
    maximizes the weight on the left half of the chain for the first state,
    the orthogonal partner is the right state.  Global phases are fixed so
    the site-1 up amplitude (left) and site-N up amplitude (right) come out
    real and positive.
    """
    vals, vecs = np.linalg.eigh(h)
    low = np.where(np.abs(vals) < threshold)[0]
    if len(low) != 2:
        raise TopologicalPhaseAbsentError(
            "expected 2 eigenvalues below %g, found %d" % (threshold, len(low)))
    pair = vecs[:, low]
    n_cells = h.shape[0] // 2
    half = np.zeros(2 * n_cells)
    half[: n_cells] = 1.0        # left-half site weights, both spin rows
    m = pair.conj().T @ (half[:, None] * pair)
    w, rot = np.linalg.eigh(m)   # ascending, so column 1 maximizes left weight
    left = pair @ rot[:, 1]
    right = pair @ rot[:, 0]

    def _fix(v, idx):
        ph = v[idx]
        if abs(ph) > 1e-12:
            v = v * (abs(ph) / ph)
        return v

    left = _fix(left, 0)
    right = _fix(right, 2 * (n_cells - 1))
    e_left = float(np.real(left.conj() @ h @ left))
    e_right = float(np.real(right.conj() @ h @ right))
    return NumericZeroModes(left, right, (e_left, e_right))


def edge_overlap(analytic: AnalyticEdgeState, numeric: np.ndarray) -> float:
    """Squared overlap between a closed-form state and a numeric vector."""
    psi = analytic.state()
    if psi.shape != numeric.shape:
        raise ValueError("dimension mismatch: %s vs %s" % (psi.shape, numeric.shape))
    return float(abs(np.vdot(psi, numeric)) ** 2)


def sigma_y_expectation(state: np.ndarray) -> float:
    n_cells = state.shape[0] // 2
    return float(np.real(np.vdot(state, chiral_operator(n_cells) @ state)))
