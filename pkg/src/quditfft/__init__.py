"""Qudit Fourier-transform decomposition and its Rydberg ion-trap realization.

Layers, bottom up:

  register    mixed-radix amplitude indexing, digit strings, register states
  gates       the Fourier/phase gate factorization of the N-point transform
  wavepacket  Rydberg level bands and the dual radial wave-packet basis
  pulses      area-parametrized drive pulses and band-leakage integrators
  iontrap     the five-pulse conditional phase gate on a two-ion phonon bus
  cli         JSON-reporting command-line front end over all of the above
"""
from .constants import DEFAULT_MAX_AMPS, EPS_STATE, EPS_UNITARY, MAX_AMPS_ENV
from .errors import ConfigurationError, ContractError
from .gates import (
    EquivalenceReport,
    GateDescriptor,
    GateSequence,
    accumulated_phase_turns,
    apply_fourier_gate,
    apply_phase_gate,
    apply_sequence,
    build_fft_sequence,
    direct_dft,
    fourier_gate_matrix,
    phase_gate_table,
    verify_fft_equivalence,
)
from .iontrap import (
    FidelityReport,
    JointIonState,
    PulseStep,
    TrapParams,
    apply_aux_pulse,
    apply_packet_swap,
    apply_sideband_pulse,
    aux_cycle_phase,
    build_phase_gate_schedule,
    build_run_steps,
    execute_schedule,
    free_evolve_joint,
    hybrid_phase_targets,
    run_phase_gate,
    solve_aux_detuning,
    verify_hybrid_gate,
)
from .pulses import (
    AtomState,
    PulseProfile,
    RabiCouplings,
    collective_rabi,
    integrate_full,
    integrate_two_level,
    resonant_pulse_map,
    selectivity_error,
    selectivity_sweep,
)
from .register import (
    DitString,
    QuditState,
    RegisterShape,
    basis_state,
    dit_reversal_permutation,
    dit_reverse,
    encode_dits,
    measure_register,
)
from .wavepacket import (
    AmplitudeVector,
    RydbergSpectrum,
    change_basis,
    dispersion_fidelity,
    free_evolve,
    level_offsets,
    offset_to_digit,
    wavepacket_basis_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "AmplitudeVector",
    "AtomState",
    "ConfigurationError",
    "ContractError",
    "DEFAULT_MAX_AMPS",
    "DitString",
    "EPS_STATE",
    "EPS_UNITARY",
    "EquivalenceReport",
    "FidelityReport",
    "GateDescriptor",
    "GateSequence",
    "JointIonState",
    "MAX_AMPS_ENV",
    "PulseProfile",
    "PulseStep",
    "QuditState",
    "RabiCouplings",
    "RegisterShape",
    "RydbergSpectrum",
    "TrapParams",
    "accumulated_phase_turns",
    "apply_aux_pulse",
    "apply_fourier_gate",
    "apply_packet_swap",
    "apply_phase_gate",
    "apply_sequence",
    "apply_sideband_pulse",
    "aux_cycle_phase",
    "basis_state",
    "build_fft_sequence",
    "build_phase_gate_schedule",
    "build_run_steps",
    "change_basis",
    "collective_rabi",
    "direct_dft",
    "dispersion_fidelity",
    "dit_reversal_permutation",
    "dit_reverse",
    "encode_dits",
    "execute_schedule",
    "fourier_gate_matrix",
    "free_evolve",
    "free_evolve_joint",
    "hybrid_phase_targets",
    "integrate_full",
    "integrate_two_level",
    "level_offsets",
    "measure_register",
    "offset_to_digit",
    "phase_gate_table",
    "resonant_pulse_map",
    "run_phase_gate",
    "selectivity_error",
    "selectivity_sweep",
    "solve_aux_detuning",
    "verify_fft_equivalence",
    "verify_hybrid_gate",
    "wavepacket_basis_matrix",
]
