"""Desk-scale laboratory for a driven superconducting-circuit spin chain.

The chain carries spin-orbit-like hopping, an on-site field, and a phase-
tunable spin-flip coupling in its single-excitation sector; this package
computes its bands, winding number, zero-energy edge modes, order-dependent
exchange protocols, microwave drive synthesis for a circuit realization, and
Lindblad dynamics of the detection sequence.
"""

from .braiding import (FinalStateReport, ProtocolOp, ProtocolSchedule,
                       TrackingLossError, adiabaticity_report, compare_orders,
                       convergence_scan, evolve_through, evolve_tracking,
                       make_protocol, mirror_operator)
from .circuit_map import (CircuitParams, DrivePlan, DriveTone,
                          RwaValidityReport, SynthesisMismatchError,
                          default_circuit, dressed_energies, drive_plan_json,
                          full_drive_hamiltonian, hopping_gaps,
                          rwa_cross_validation, rwa_effective_hamiltonian,
                          rwa_validity, synthesize_drives)
from .edge_modes import (AnalyticEdgeState, NumericZeroModes,
                         TopologicalPhaseAbsentError, analytic_edge_states,
                         edge_overlap, numeric_zero_modes,
                         sigma_y_expectation)
from .open_system import (LindbladConfig, ObservableSeries, TraceDriftError,
                          chiral_center_under_decay, collapse_operators,
                          edge_initial_state, edge_populations,
                          effective_hamiltonian_bare, gamma_sweep,
                          lindblad_evolve, midchain_initial_state,
                          pure_density)
from .spin_chain import (ChainParams, build_bloch, build_open_hamiltonian,
                         band_energies, dot_params, minimum_gap,
                         site_populations)
from .topology import (ChiralCenterSeries, PhaseDiagram,
                       chiral_center_dynamics, dynamical_winding_scan,
                       phase_diagram, winding_number, zero_mode_roots)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
