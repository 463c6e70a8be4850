"""Dispersion engineering and single-excitation dynamics for long-range-hopping waveguides."""

from .dispersion import (
    DispersionSummary,
    DispersionTarget,
    HoppingSet,
    TaylorSeries,
    group_velocity,
    linear_window,
    omega_of_k,
    solve_chiral_linear,
    solve_polynomial_target,
    solve_symmetric_linear,
    solve_target,
    summarize,
    taylor_coefficients,
)
from .emitter import (
    EmitterPair,
    analytic_b1,
    analytic_b2,
    lorentzian_reflection,
    mirror_cavity_kappa,
    peak_absorption,
    profile_absorb,
    profile_emit,
    rabi_prediction,
)
from .estimator import DispersionDesigner
from .evolution import (
    EvolutionConfig,
    StepSizeError,
    Trajectory,
    directional_split,
    evolve_static,
    evolve_timedep,
    propagating_fidelity,
)
from .lattice import (
    AtomSpec,
    CouplingProfile,
    ExcitationState,
    WaveguideSpec,
    build_hamiltonian,
    gaussian_packet,
    translate_state,
)

__version__ = "0.1.0"
