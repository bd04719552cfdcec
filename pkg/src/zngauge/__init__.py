"""Exact simulator and gate-schedule compiler for Z_N lattice gauge theory.

Desk-scale reference implementation: dense state vectors on small 2d
lattices with staggered fermions, clock-model links, and ancilla
registers, plus the stator-based gate schedules that realize one
Trotter step and the optical-lattice design utilities.
"""

from .lattice import (LatticeGeometry, Register, RegisterLayout, StateVector,
                      ancilla_restoration_fidelity, born_sample,
                      build_global_singlet, build_layout, lift_physical,
                      project_ancillas)
from .algebra import (Couplings, LinkAlgebra, gauss_expectations,
                      gauss_law_operator, make_link_algebra,
                      random_gauge_invariant_physical, term_matrix,
                      total_hamiltonian)
from .stators import (GATE_VOCABULARY, GateOp, collision_calibration,
                      eta_couplings, gate_matrix, plaquette_stator_sequence,
                      stator_entangler, z3_collision_entangler)
from .schedule import (Schedule, TrotterResult, compile_step, dump_schedule,
                       execute, gauge_away_phases, parse_schedule,
                       schedule_physical_map, solve_vertex_potential,
                       spurious_phase_field, total_fermion_number,
                       trotter_evolve)
from .oracle import (ExactEvolver, diamond_surrogate_distance, exact_evolve,
                     phase_aligned_distance, spectral_norm, steps_required,
                     trotter_bound)
from .optical import (polarization_vectors, shaping_schedule, v_mat,
                      v_mat_minima, wave_vectors)
from .config import SimulationConfig, config_from_dict, load_config, save_config
from .drivers import (flux_sector_probabilities, measure_configuration,
                      run_quench, run_verification_suite)
