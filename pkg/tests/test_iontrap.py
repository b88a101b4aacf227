import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from quditfft import (
    ContractError,
    JointIonState,
    PulseStep,
    RegisterShape,
    RydbergSpectrum,
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
    level_offsets,
    run_phase_gate,
    solve_aux_detuning,
    verify_hybrid_gate,
)


def uniform_hybrid_state(d):
    """Equal superposition over every (level, packet) pair, trap empty."""
    amps = np.zeros((d + 1, d + 2, 2), dtype=np.complex128)
    amps[:d, :d, 0] = 1.0 / d
    return JointIonState(d, amps)


def test_trap_params_validation():
    with pytest.raises(ValueError):
        TrapParams(nu_x=-1.0)
    with pytest.raises(ValueError):
        TrapParams(q_ions=1)
    with pytest.warns(UserWarning):
        TrapParams(eta=0.5)


def test_hybrid_basis_state_layout():
    state = JointIonState.hybrid_basis(3, 2, 1)
    assert state.amps.shape == (4, 5, 2)
    assert state.amps[2, 1, 0] == 1.0
    assert_allclose(state.norm(), 1.0)
    assert state.trap_excited_population() == 0.0
    assert state.aux_population() == 0.0
    assert state.ground_populations() == (0.0, 0.0)
    block = state.hybrid_block()
    assert block.shape == (3, 3)
    assert block[2, 1] == 1.0
    with pytest.raises(ValueError):
        JointIonState.hybrid_basis(3, 3, 0)
    with pytest.raises(ValueError):
        JointIonState(3, np.zeros((4, 4, 2)))


def test_free_evolve_joint_control_levels_and_negative_dt():
    d = 3
    spectrum = RydbergSpectrum(2, d)
    state = JointIonState.hybrid_basis(d, 1, 0)
    dt = 7.3
    out = free_evolve_joint(state, spectrum, dt)
    assert out.t == dt
    # forward then backward restores the state exactly
    back = free_evolve_joint(out, spectrum, -dt)
    assert_allclose(back.amps, state.amps, atol=1e-13)
    assert back.t == 0.0


def test_free_evolve_joint_cycles_target_packets():
    d = 4
    spectrum = RydbergSpectrum(2, d)
    slot_time = spectrum.t_kepler / d
    for k in range(d):
        state = JointIonState.hybrid_basis(d, 0, k)
        out = free_evolve_joint(state, spectrum, slot_time)
        # the packet hops one slot per T_K/d
        assert_allclose(abs(out.amps[0, (k + 1) % d, 0]), 1.0, atol=1e-12)


def test_packet_swap_exchanges_core_and_ground_on_target():
    d = 3
    state = JointIonState.hybrid_basis(d, 1, 0)
    out = apply_packet_swap(state, "m")
    # pi area: |slot 0> -> i |ground>
    assert_allclose(out.amps[1, d, 0], 1j, atol=1e-15)
    assert_allclose(out.amps[1, 0, 0], 0.0, atol=1e-15)
    # and back, for a net -1 on the pair
    back = apply_packet_swap(out, "m")
    assert_allclose(back.amps[1, 0, 0], -1.0, atol=1e-15)
    # other slots are untouched
    other = apply_packet_swap(JointIonState.hybrid_basis(d, 1, 2), "m")
    assert_allclose(other.amps[1, 2, 0], 1.0, atol=1e-15)
    with pytest.raises(ValueError):
        apply_packet_swap(state, "x")


def test_packet_swap_on_control_addresses_uniform_band_combination():
    d = 4
    amps = np.zeros((d + 1, d + 2, 2), dtype=np.complex128)
    amps[:d, 0, 0] = 1.0 / math.sqrt(d)  # the control ion's core packet
    state = JointIonState(d, amps)
    out = apply_packet_swap(state, "l")
    assert_allclose(out.amps[d, 0, 0], 1j, atol=1e-15)
    assert_allclose(out.amps[:d, 0, 0], 0.0, atol=1e-15)
    # a combination orthogonal to the core packet is a spectator
    amps = np.zeros((d + 1, d + 2, 2), dtype=np.complex128)
    amps[0, 0, 0] = 1.0 / math.sqrt(2.0)
    amps[1, 0, 0] = -1.0 / math.sqrt(2.0)
    state = JointIonState(d, amps)
    out = apply_packet_swap(state, "l")
    assert_allclose(out.amps, state.amps, atol=1e-15)


def test_sideband_moves_level_population_onto_phonon():
    d = 3
    state = JointIonState.hybrid_basis(d, 1, 2)
    out = apply_sideband_pulse(state, 1)
    # pi area with the opposite rotation sense: |level 1, 0> -> -i |ground, 1>
    assert_allclose(out.amps[d, 2, 1], -1j, atol=1e-15)
    back = apply_sideband_pulse(out, 1)
    assert_allclose(back.amps[1, 2, 0], -1.0, atol=1e-15)
    # other control levels do not couple
    spectator = apply_sideband_pulse(state, 0)
    assert_allclose(spectator.amps, state.amps, atol=1e-15)
    with pytest.raises(ValueError):
        apply_sideband_pulse(state, 3)


def test_sideband_rejects_population_beyond_phonon_cap():
    d = 3
    amps = np.zeros((d + 1, d + 2, 2), dtype=np.complex128)
    amps[1, 0, 1] = 1.0  # level 1 with the trap already excited
    state = JointIonState(d, amps)
    with pytest.raises(ContractError):
        apply_sideband_pulse(state, 1)
    # other levels may still be addressed
    apply_sideband_pulse(state, 0)


def test_aux_cycle_phase_and_solver_examples():
    omega = 50.0
    assert_allclose(solve_aux_detuning(math.pi, omega), 0.0, atol=1e-12)
    assert_allclose(solve_aux_detuning(1.5 * math.pi, omega), omega / 2.0)
    assert_allclose(abs(solve_aux_detuning(0.0, omega)), omega)
    for mult in (1, 2, 3):
        for i in range(16):
            phi = 2.0 * math.pi * i / 16.0
            det = solve_aux_detuning(phi, omega, mult)
            assert abs(det) <= omega + 1e-9
            got = aux_cycle_phase(det, omega, mult)
            assert_allclose(
                (got - phi + math.pi) % (2.0 * math.pi) - math.pi, 0.0, atol=1e-10
            )
    with pytest.raises(ValueError):
        solve_aux_detuning(1.0, -5.0)
    with pytest.raises(ValueError):
        solve_aux_detuning(1.0, omega, 0)


def test_aux_pulse_imprints_dialed_phase():
    d = 3
    omega = 50.0
    for phi in (0.3, 2.0, 4.5):
        det = solve_aux_detuning(phi, omega)
        amps = np.zeros((d + 1, d + 2, 2), dtype=np.complex128)
        amps[0, d, 1] = 1.0  # |target ground, 1 phonon>
        out = apply_aux_pulse(JointIonState(d, amps), det, omega)
        amp = out.amps[0, d, 1]
        assert_allclose(abs(amp), 1.0, atol=1e-12)
        assert_allclose(
            (np.angle(amp) - phi + math.pi) % (2.0 * math.pi) - math.pi, 0.0, atol=1e-10
        )


def test_aux_pulse_contracts():
    d = 3
    amps = np.zeros((d + 1, d + 2, 2), dtype=np.complex128)
    amps[0, d + 1, 1] = 1.0  # aux excited with a phonon: outside the model
    with pytest.raises(ContractError):
        apply_aux_pulse(JointIonState(d, amps), 0.0, 50.0)
    good = np.zeros((d + 1, d + 2, 2), dtype=np.complex128)
    good[0, d, 1] = 1.0
    with pytest.raises(ValueError):
        apply_aux_pulse(JointIonState(d, good), 60.0, 50.0)
    with pytest.raises(ValueError):
        apply_aux_pulse(JointIonState(d, good), 0.0, 50.0, multiplicity=0)


def test_pulse_step_validation():
    with pytest.raises(ValueError):
        PulseStep("bogus", "m", 0.0)
    with pytest.raises(ValueError):
        PulseStep("sideband", "l", 0.0)  # needs target_level
    with pytest.raises(ValueError):
        PulseStep("aux", "l", 0.0)  # aux drive lives on the target ion
    PulseStep("sideband", "l", 0.0, target_level=1)


def test_execute_schedule_rejects_backward_steps():
    d = 3
    spectrum = RydbergSpectrum(2, d)
    params = TrapParams()
    state = free_evolve_joint(JointIonState.hybrid_basis(d, 0, 0), spectrum, 5.0)
    steps = [PulseStep("packet_swap", "m", 1.0)]
    with pytest.raises(ValueError):
        execute_schedule(state, steps, params, spectrum)


def test_build_run_steps_alignment_and_order():
    d = 4
    spectrum = RydbergSpectrum(2, d)
    params = TrapParams()
    slot_time = spectrum.t_kepler / d
    for k in range(d):
        steps = build_run_steps(1, k, 0.7, d, params, spectrum, t_min=3.0)
        assert [s.kind for s in steps] == [
            "packet_swap", "sideband", "aux", "sideband", "packet_swap",
        ]
        times = [s.time for s in steps]
        assert times == sorted(times)
        assert times[0] >= 3.0
        # the first swap fires when packet k reaches the inner turning point
        phase_in_period = times[0] % spectrum.t_kepler
        assert_allclose(phase_in_period, ((-k) % d) * slot_time, atol=1e-9)
        # default run spans two Kepler periods, sidebands a full period apart
        assert_allclose(times[4] - times[0], 2.0 * spectrum.t_kepler)
        assert_allclose(times[3] - times[1], spectrum.t_kepler)
        assert_allclose(times[2], 0.5 * (times[1] + times[3]))


def test_build_run_steps_warnings():
    d = 3
    spectrum = RydbergSpectrum(2, d)
    params = TrapParams()
    with pytest.warns(UserWarning):
        build_run_steps(0, 0, 0.5, d, params, spectrum, kepler_periods=1.5)
    # an auxiliary drive slower than the sideband gap cannot be instantaneous
    slow = TrapParams(omega_ge=1e-4)
    with pytest.warns(UserWarning):
        build_run_steps(0, 0, 0.5, d, slow, spectrum)
    with pytest.raises(ValueError):
        build_run_steps(0, 0, 0.5, d, params, spectrum, kepler_periods=0.5)
    with pytest.raises(ValueError):
        build_run_steps(3, 0, 0.5, d, params, spectrum)


def test_single_run_branch_bookkeeping():
    # one run on (j, k) = (1, 2): that branch gets the dialed phase, branches
    # sharing only j or only k pick up -1 from their completed pulse pair,
    # untouched branches stay put
    d = 3
    spectrum = RydbergSpectrum(2, d)
    params = TrapParams()
    phi = 1.2345
    out = run_phase_gate(uniform_hybrid_state(d), 1, 2, phi, params, spectrum)
    out = free_evolve_joint(out, spectrum, -out.t)
    block = out.hybrid_block() * d
    expected = np.ones((d, d), dtype=np.complex128)
    expected[1, :] = -1.0
    expected[:, 2] = -1.0
    expected[1, 2] = np.exp(1j * phi)
    assert_allclose(block, expected, atol=1e-12)
    # no population left on the trap, the aux level, or either ground state
    assert out.trap_excited_population() < 1e-28
    assert out.aux_population() < 1e-28
    assert_allclose(out.ground_populations(), (0.0, 0.0), atol=1e-28)


def test_single_run_preserves_branch_moduli():
    d = 3
    spectrum = RydbergSpectrum(2, d)
    params = TrapParams()
    rng = np.random.default_rng(8)
    amps = np.zeros((d + 1, d + 2, 2), dtype=np.complex128)
    raw = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    amps[:d, :d, 0] = raw / np.linalg.norm(raw)
    state = JointIonState(d, amps)
    out = run_phase_gate(state, 0, 1, 2.2, params, spectrum)
    out = free_evolve_joint(out, spectrum, -out.t)
    assert_allclose(np.abs(out.hybrid_block()), np.abs(amps[:d, :d, 0]), atol=1e-10)


def test_hybrid_phase_targets_values():
    d = 3
    table = hybrid_phase_targets(d, 1)
    offsets = level_offsets(d)
    assert_allclose(table, -2.0 * math.pi * np.outer(offsets, offsets) / d**2)
    assert table.shape == (d, d)
    assert_allclose(hybrid_phase_targets(d, 2), table / d)
    with pytest.raises(ValueError):
        hybrid_phase_targets(d, 0)


@pytest.mark.parametrize("d", [2, 3])
def test_composed_gate_reaches_unit_fidelity(d):
    shape = RegisterShape(d, 2)
    report = verify_hybrid_gate(shape, 0, 1, TrapParams(), RydbergSpectrum(2, d))
    assert report.fidelity > 1.0 - 1e-9
    assert report.trap_residual_max < 1e-10
    assert report.max_branch_phase_error < 1e-9
    assert report.d == d
    assert report.to_dict()["fidelity"] == report.fidelity


def test_composed_gate_single_period_runs():
    # with one-period runs the park-window deficits only cancel across the
    # composed d*d runs, not run by run; the composition must still be exact
    d = 3
    report = verify_hybrid_gate(
        RegisterShape(d, 2), 0, 1, TrapParams(), RydbergSpectrum(2, d), kepler_periods=1
    )
    assert report.fidelity > 1.0 - 1e-9


def test_composed_gate_wider_span():
    d = 3
    report = verify_hybrid_gate(
        RegisterShape(d, 3), 0, 2, TrapParams(), RydbergSpectrum(2, d)
    )
    assert report.fidelity > 1.0 - 1e-9


def test_composed_gate_degrades_under_dispersion():
    # frozen regression: quadratic dispersion with t_rev = 20 T_K wrecks the
    # packet timing; the exact value pins the revival-truncation code path
    d = 4
    kepler = RydbergSpectrum(2, d)
    spectrum = RydbergSpectrum(
        2, d, t_rev=20.0 * kepler.t_kepler, truncation="revival"
    )
    report = verify_hybrid_gate(RegisterShape(d, 2), 0, 1, TrapParams(), spectrum)
    assert report.fidelity < 0.9
    assert_allclose(report.fidelity, 0.1734298583303604, rtol=1e-7)
    assert report.truncation == "revival"


def test_build_phase_gate_schedule_covers_all_runs():
    d = 3
    spectrum = RydbergSpectrum(2, d)
    steps = build_phase_gate_schedule(0, 1, RegisterShape(d, 2), TrapParams(), spectrum)
    assert len(steps) == 5 * d * d
    times = [s.time for s in steps]
    assert times == sorted(times)
    with pytest.raises(ValueError):
        build_phase_gate_schedule(1, 1, RegisterShape(d, 2), TrapParams(), spectrum)
    with pytest.raises(ValueError):
        build_phase_gate_schedule(0, 1, RegisterShape(4, 2), TrapParams(), spectrum)


def test_verify_hybrid_gate_validates_indices():
    d = 3
    spectrum = RydbergSpectrum(2, d)
    with pytest.raises(ValueError):
        verify_hybrid_gate(RegisterShape(d, 2), 0, 2, TrapParams(), spectrum)
    with pytest.raises(ValueError):
        verify_hybrid_gate(RegisterShape(4, 2), 0, 1, TrapParams(), spectrum)
