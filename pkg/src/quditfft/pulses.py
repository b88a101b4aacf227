"""Laser pulses driving the ground <-> Rydberg-band transition.

The control primitive is a pulse of fixed area: the drive strength is
kappa(t) = area * envelope(t) with the envelope normalized to unit time
integral, so ``area`` is the total Rabi angle regardless of shape or
duration. Equivalently kappa = f(t) * collective_rabi with the profile f
scaled to make the product integrate to the requested area; a resonant
pi-area pulse swaps the ground state with the radially localized core packet
(slot 0).

The idealized protocol treats {ground, core packet} as a closed two-level
system, everything else frozen. In reality the band disperses while the
pulse is on: the packet drifts through the turning point and its amplitude
spreads over the other slots, degrading the transfer. The full-band
integrator here quantifies that leakage against the frozen two-level model,
with the pulse centered on the packet's core passage the way the protocol
schedules it.

Couplings are stated per level. The collective Rabi frequency of the core
packet is (1/sqrt(d)) * sum_j omega_gj, the coherent enhancement of driving
d levels at once; individual level weights enter the full model as
omega_gj / collective.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import EPS_STATE
from .errors import ConfigurationError, ContractError
from .wavepacket import (
    WAVEPACKET,
    AmplitudeVector,
    RydbergSpectrum,
    wavepacket_basis_matrix,
)

PULSE_SHAPES = ("square", "gaussian")

# Fixed-step RK4 resolution: target steps per phase cycle, hard floor per
# pulse, and the coarseness below which results are rejected outright.
STEPS_PER_CYCLE = 200
MIN_STEPS = 100
REJECT_STEPS_PER_CYCLE = 20


@dataclass(frozen=True)
class PulseProfile:
    """One laser pulse: duration, total area, envelope shape, carrier detuning.

    The envelope integrates to 1 over [0, duration], so the time integral of
    kappa(t) = area * envelope(t) is exactly ``area``. The gaussian envelope
    is centered at duration/2 with sigma = duration/6 and renormalized after
    truncation to the pulse window.
    """

    duration: float
    area: float
    shape: str = "square"
    center_detuning: float = 0.0

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ValueError(f"pulse duration must be positive, got {self.duration}")
        if self.shape not in PULSE_SHAPES:
            raise ValueError(f"shape must be one of {PULSE_SHAPES}, got {self.shape!r}")

    def envelope(self, t: np.ndarray | float) -> np.ndarray | float:
        """Normalized envelope at time t (pulse-local, 0 outside [0, duration])."""
        t = np.asarray(t, dtype=np.float64)
        if self.shape == "square":
            inside = (t >= 0.0) & (t <= self.duration)
            return np.where(inside, 1.0 / self.duration, 0.0)
        sigma = self.duration / 6.0
        mid = self.duration / 2.0
        # Mass of the truncated gaussian over the window, for exact unit area.
        mass = math.erf(mid / (sigma * math.sqrt(2.0)))
        gauss = np.exp(-0.5 * ((t - mid) / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))
        inside = (t >= 0.0) & (t <= self.duration)
        return np.where(inside, gauss / mass, 0.0)

    def rabi(self, t: np.ndarray | float) -> np.ndarray | float:
        """kappa(t) = area * envelope(t)."""
        return self.area * self.envelope(t)

    def is_selective(self, t_kepler: float, d: int) -> bool:
        """Whether the pulse is short enough to address the core packet cleanly.

        The packet advances d * duration / t_kepler slots while the pulse is
        on; this returns True when that drift stays under one slot, i.e.
        duration < t_kepler / d.
        """
        if t_kepler <= 0:
            raise ValueError(f"t_kepler must be positive, got {t_kepler}")
        return self.duration < t_kepler / d


@dataclass(frozen=True)
class RabiCouplings:
    """Per-level drive couplings omega_gj, indexed by digit like the spectrum.

    ``omega_tilde_0`` is the collective core-packet coupling
    (1/sqrt(d)) * sum_j omega_gj; it is computed when omitted and checked
    against the levels when supplied.
    """

    omega_gj: np.ndarray
    omega_tilde_0: float | None = None

    def __post_init__(self) -> None:
        omega = np.asarray(self.omega_gj, dtype=np.float64)
        if omega.ndim != 1 or omega.shape[0] < 2:
            raise ValueError(f"omega_gj must be 1-D with d >= 2 entries, got shape {omega.shape}")
        object.__setattr__(self, "omega_gj", omega)
        collective = float(omega.sum() / math.sqrt(omega.shape[0]))
        if collective == 0.0:
            raise ValueError("couplings sum to zero; the core packet would not couple at all")
        if self.omega_tilde_0 is None:
            object.__setattr__(self, "omega_tilde_0", collective)
        elif abs(self.omega_tilde_0 - collective) > 1e-12 * max(1.0, abs(collective)):
            raise ValueError(
                f"omega_tilde_0={self.omega_tilde_0} inconsistent with levels (expected {collective})"
            )

    @classmethod
    def uniform(cls, d: int, omega: float = 1.0) -> "RabiCouplings":
        return cls(np.full(d, omega))

    @property
    def d(self) -> int:
        return self.omega_gj.shape[0]

    def level_weights(self) -> np.ndarray:
        """omega_gj / omega_tilde_0, the per-level weights in the full model."""
        return self.omega_gj / self.omega_tilde_0


def collective_rabi(omega_gj: np.ndarray) -> float:
    """(1/sqrt(d)) * sum_j omega_gj for a raw coupling array (d >= 1)."""
    omega = np.asarray(omega_gj, dtype=np.float64)
    if omega.ndim != 1 or omega.shape[0] < 1:
        raise ValueError(f"omega_gj must be 1-D and nonempty, got shape {omega.shape}")
    return float(omega.sum() / math.sqrt(omega.shape[0]))


@dataclass(frozen=True)
class AtomState:
    """Ground amplitude plus the band in the wave-packet basis."""

    b_g: complex
    wp: AmplitudeVector

    def __post_init__(self) -> None:
        if self.wp.basis != WAVEPACKET:
            raise ValueError(f"AtomState carries the band in the {WAVEPACKET!r} basis, got {self.wp.basis!r}")
        object.__setattr__(self, "b_g", complex(self.b_g))

    @classmethod
    def core_packet(cls, d: int) -> "AtomState":
        """All population in packet slot 0, none in the ground state."""
        packet = np.zeros(d, dtype=np.complex128)
        packet[0] = 1.0
        return cls(0.0, AmplitudeVector(WAVEPACKET, packet))

    @classmethod
    def ground(cls, d: int) -> "AtomState":
        """All population in the ground state, empty band."""
        return cls(1.0, AmplitudeVector(WAVEPACKET, np.zeros(d, dtype=np.complex128)))

    @property
    def d(self) -> int:
        return self.wp.d

    def norm(self) -> float:
        return float(math.sqrt(abs(self.b_g) ** 2 + np.sum(np.abs(self.wp.amps) ** 2)))

    def require_normalized(self, tol: float = EPS_STATE) -> None:
        n = self.norm()
        if abs(n - 1.0) > tol:
            raise ContractError(f"atom state norm {n} deviates from 1 by more than {tol}")


def resonant_pulse_map(area: float) -> np.ndarray:
    """Closed-form two-level map for a resonant pulse, ordered (ground, core).

    [[cos(area/2),   i sin(area/2)],
     [i sin(area/2), cos(area/2)  ]]

    Exact for any envelope because only the accumulated area enters on
    resonance.
    """
    half = area / 2.0
    c, s = math.cos(half), math.sin(half)
    return np.array([[c, 1j * s], [1j * s, c]], dtype=np.complex128)


def _rk4(deriv, y0: np.ndarray, duration: float, n_steps: int) -> np.ndarray:
    h = duration / n_steps
    y = y0.astype(np.complex128, copy=True)
    for i in range(n_steps):
        # Sample times as exact fractions of the duration: accumulating i*h + h
        # can overshoot the window by one ulp, which would zero the endpoint
        # evaluation of a hard-edged envelope and wreck the step.
        t0 = duration * (i / n_steps)
        t_mid = duration * ((i + 0.5) / n_steps)
        t1 = duration * ((i + 1) / n_steps)
        k1 = deriv(t0, y)
        k2 = deriv(t_mid, y + 0.5 * h * k1)
        k3 = deriv(t_mid, y + 0.5 * h * k2)
        k4 = deriv(t1, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def _phase_cycles(pulse: PulseProfile, extra_freqs: np.ndarray | None = None) -> float:
    """Rough count of oscillation cycles the integrator must resolve."""
    freqs = [abs(pulse.center_detuning)]
    if extra_freqs is not None and extra_freqs.size:
        freqs.append(float(np.max(np.abs(extra_freqs))))
    cycles = pulse.duration * max(freqs) / (2.0 * math.pi) + abs(pulse.area) / (2.0 * math.pi)
    return max(cycles, 1.0)


def _resolve_steps(pulse: PulseProfile, n_steps: int | None, extra_freqs: np.ndarray | None = None) -> int:
    cycles = _phase_cycles(pulse, extra_freqs)
    if n_steps is None:
        return max(MIN_STEPS, math.ceil(STEPS_PER_CYCLE * cycles))
    if n_steps < REJECT_STEPS_PER_CYCLE * cycles:
        raise ConfigurationError(
            f"n_steps={n_steps} resolves fewer than {REJECT_STEPS_PER_CYCLE} steps per phase "
            f"cycle ({cycles:.1f} cycles in this pulse); results would be untrustworthy"
        )
    return n_steps


def _integrate_pair(
    b_g: complex,
    b_core: complex,
    pulse: PulseProfile,
    n_steps: int | None = None,
) -> tuple[complex, complex]:
    """RK4 propagation of the driven (ground, core) pair through one pulse.

    Rotating-frame equations at carrier detuning D:

        d b_g / dt   = (i/2) kappa(t) exp(-i D t) b_core
        d b_core /dt = (i/2) kappa(t) exp(+i D t) b_g
    """
    steps = _resolve_steps(pulse, n_steps)
    detuning = pulse.center_detuning

    def deriv(t: float, y: np.ndarray) -> np.ndarray:
        k = pulse.rabi(t)
        return np.array(
            [
                0.5j * k * np.exp(-1j * detuning * t) * y[1],
                0.5j * k * np.exp(+1j * detuning * t) * y[0],
            ],
            dtype=np.complex128,
        )

    y = _rk4(deriv, np.array([b_g, b_core], dtype=np.complex128), pulse.duration, steps)
    return complex(y[0]), complex(y[1])


def integrate_two_level(
    state: AtomState,
    pulse: PulseProfile,
    couplings: RabiCouplings,
    n_steps: int | None = None,
) -> AtomState:
    """Propagate the {ground, core packet} pair through one pulse, rest frozen.

    The drive product f(t) * collective equals area * envelope(t), so the
    couplings fix the physical scale while the pulse area fixes the rotation
    angle; choosing duration = area / collective makes the square drive sit
    at the collective Rabi frequency exactly. Fixed-step RK4 with the default
    step count resolving STEPS_PER_CYCLE steps per phase cycle (floor
    MIN_STEPS); explicit step counts below REJECT_STEPS_PER_CYCLE per cycle
    raise ConfigurationError. On resonance the result matches
    :func:`resonant_pulse_map` to integrator accuracy.
    """
    if couplings.d != state.d:
        raise ValueError(f"couplings have d={couplings.d} but state has d={state.d}")
    g, core = _integrate_pair(state.b_g, state.wp.amps[0], pulse, n_steps=n_steps)
    amps = state.wp.amps.copy()
    amps[0] = core
    return AtomState(g, AmplitudeVector(WAVEPACKET, amps, state.wp.t0))


def integrate_full(
    state: AtomState,
    pulse: PulseProfile,
    couplings: RabiCouplings,
    spectrum: RydbergSpectrum,
    n_steps: int | None = None,
) -> AtomState:
    """Propagate ground plus the full d-level band through one pulse.

    The band keeps dispersing while the drive is on. In the energy basis:

        d e_j / dt = -i dw_j e_j + (i/2) kappa(t) w_j exp(+i D t) b_g
        d b_g / dt =               (i/2) kappa(t) exp(-i D t) sum_j w_j e_j

    with dw_j the spectrum's frequency offsets and w_j the level weights.
    Reduces to :func:`integrate_two_level` when the offsets vanish and the
    couplings are uniform.
    """
    if couplings.d != spectrum.d:
        raise ValueError(f"couplings have d={couplings.d} but spectrum has d={spectrum.d}")
    if state.d != spectrum.d:
        raise ValueError(f"state has d={state.d} but spectrum has d={spectrum.d}")
    offsets = spectrum.frequency_offsets()
    steps = _resolve_steps(pulse, n_steps, extra_freqs=offsets)
    weights = couplings.level_weights()
    detuning = pulse.center_detuning
    d = spectrum.d
    u = wavepacket_basis_matrix(d)

    def deriv(t: float, y: np.ndarray) -> np.ndarray:
        band, b_g = y[:d], y[d]
        k = pulse.rabi(t)
        out = np.empty_like(y)
        out[:d] = -1j * offsets * band + 0.5j * k * weights * np.exp(+1j * detuning * t) * b_g
        out[d] = 0.5j * k * np.exp(-1j * detuning * t) * np.dot(weights, band)
        return out

    y0 = np.concatenate([u @ state.wp.amps, [state.b_g]])
    y = _rk4(deriv, y0, pulse.duration, steps)
    return AtomState(y[d], AmplitudeVector(WAVEPACKET, u.conj().T @ y[:d], state.wp.t0))


def selectivity_error(
    spectrum: RydbergSpectrum,
    pulse: PulseProfile,
    couplings: RabiCouplings,
    n_steps: int | None = None,
) -> float:
    """Leakage of a core-packet pulse relative to the frozen two-level model.

    The pulse is timed the way the protocol schedules it: the addressed
    packet crosses the inner turning point at the temporal center of the
    pulse, so the initial state is the core packet free-evolved backward by
    half the duration. The full-band model then runs through the pulse and
    the result is compared against the impulsive ideal, where the whole
    two-level map fires at the center and the band is otherwise frozen:

        leakage = 1 - |<ideal|full>|^2 .

    Warns when the pulse is too long to be selective in the first place.
    """
    if not pulse.is_selective(spectrum.t_kepler, spectrum.d):
        warnings.warn(
            f"pulse duration {pulse.duration:.3g} is not selective for t_kepler="
            f"{spectrum.t_kepler:.3g}, d={spectrum.d}; leakage will be large",
            stacklevel=2,
        )
    d = spectrum.d
    u = wavepacket_basis_matrix(d)
    core_band = u[:, 0].copy()
    half_phases = np.exp(1j * spectrum.frequency_offsets() * (pulse.duration / 2.0))

    start = AtomState(0.0, AmplitudeVector(WAVEPACKET, u.conj().T @ (half_phases * core_band)))
    full = integrate_full(start, pulse, couplings, spectrum, n_steps=n_steps)

    if pulse.center_detuning == 0.0:
        g_ideal, core_ideal = resonant_pulse_map(pulse.area) @ np.array([0.0, 1.0])
    else:
        two = integrate_two_level(AtomState.core_packet(d), pulse, couplings, n_steps=n_steps)
        g_ideal, core_ideal = two.b_g, two.wp.amps[0]
    ideal_band = np.conj(half_phases) * core_band * core_ideal

    full_band = u @ full.wp.amps
    overlap = np.conj(g_ideal) * full.b_g + np.vdot(ideal_band, full_band)
    return float(1.0 - abs(overlap) ** 2)


def selectivity_sweep(
    spectrum: RydbergSpectrum,
    couplings: RabiCouplings,
    durations: np.ndarray,
    area: float = math.pi,
    shape: str = "square",
    n_steps: int | None = None,
) -> np.ndarray:
    """Leakage for each pulse duration, all other settings shared."""
    durations = np.asarray(durations, dtype=np.float64)
    flat = durations.ravel()
    out = np.empty(flat.shape, dtype=np.float64)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for i, t in enumerate(flat):
            out[i] = selectivity_error(
                spectrum, PulseProfile(float(t), area, shape=shape), couplings, n_steps=n_steps
            )
    return out.reshape(durations.shape)
