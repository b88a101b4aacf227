"""Rydberg level manifolds and their dual radial wave-packet basis.

A band of d circular-orbit levels around principal quantum number n̄ encodes
one qudit. Levels are labelled by the signed offset j = n - n̄ drawn from the
symmetric window {-d/2+1, ..., d/2} (even d) or {-(d-1)/2, ..., (d-1)/2}
(odd d); the bijection digit = j mod d bridges signed offsets to the base-d
digits used by the gate layer.

The dual basis consists of radially localized wave packets

    |k>_τ = (1/√d) Σ_j exp(-i 2π j k / d) |j>_ν ,

so expanding an unchanged physical state in the τ basis applies the d-point
Fourier kernel to its energy amplitudes: the single-qudit Fourier gate is a
relabelling, not an evolution. Packet k reaches the inner turning point after
k/d of a Kepler period.

Free evolution uses the Taylor expansion of the level frequencies around n̄,

    ω_j - ω_0 = 2π [ j/T_K  -  j²/(2 T_rev)  +  j³/(6 T_sr) ],

truncatable after the linear (Kepler), quadratic (revival), or cubic
(super-revival) term. T_K = 2π n̄³ in atomic units; T_rev and T_sr are free
input parameters.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .constants import EPS_STATE
from .errors import ContractError

ENERGY = "energy"
WAVEPACKET = "wavepacket"

KEPLER = "kepler"
REVIVAL = "revival"
SUPER_REVIVAL = "super-revival"
TRUNCATIONS = (KEPLER, REVIVAL, SUPER_REVIVAL)


def level_offsets(d: int) -> np.ndarray:
    """Signed level offsets j, indexed by digit = j mod d.

    Even d covers {-d/2+1, ..., d/2}; odd d covers {-(d-1)/2, ..., (d-1)/2}.
    """
    if d < 2:
        raise ValueError(f"need at least two levels, got d={d}")
    digits = np.arange(d)
    return np.where(digits <= d // 2, digits, digits - d)


def offset_to_digit(j: int, d: int) -> int:
    """Inverse of :func:`level_offsets` on its range."""
    offsets = level_offsets(d)
    digit = j % d
    if offsets[digit] != j:
        raise ValueError(f"offset {j} outside the symmetric window for d={d}")
    return digit


@dataclass(frozen=True)
class RydbergSpectrum:
    """Taylor model of d circular-level frequencies around n̄.

    ``t_rev`` and ``t_sr`` are required only when the truncation includes the
    corresponding term. n̄ must be an integer unless ``allow_noninteger_nbar``
    is set (the Kepler period 2π n̄³ is the only place n̄ enters).
    """

    n_bar: float
    d: int
    t_rev: float | None = None
    t_sr: float | None = None
    truncation: str = KEPLER
    allow_noninteger_nbar: bool = False

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ValueError(f"need at least two levels, got d={self.d}")
        if self.n_bar <= 0:
            raise ValueError(f"mean principal quantum number must be positive, got {self.n_bar}")
        if not self.allow_noninteger_nbar and self.n_bar != int(self.n_bar):
            raise ValueError(
                f"n_bar={self.n_bar} is not an integer; pass allow_noninteger_nbar=True to permit it"
            )
        if self.truncation not in TRUNCATIONS:
            raise ValueError(f"truncation must be one of {TRUNCATIONS}, got {self.truncation!r}")
        if self.truncation in (REVIVAL, SUPER_REVIVAL):
            if self.t_rev is None or self.t_rev <= 0:
                raise ValueError("revival truncation requires a positive t_rev")
        if self.truncation == SUPER_REVIVAL:
            if self.t_sr is None or self.t_sr <= 0:
                raise ValueError("super-revival truncation requires a positive t_sr")

    @property
    def t_kepler(self) -> float:
        """Kepler orbital period 2π n̄³ (atomic units)."""
        return 2.0 * np.pi * self.n_bar**3

    def frequency_offsets(self, truncation: str | None = None) -> np.ndarray:
        """ω_j - ω_0 for each level, indexed by digit, honoring the truncation."""
        trunc = self.truncation if truncation is None else truncation
        if trunc not in TRUNCATIONS:
            raise ValueError(f"truncation must be one of {TRUNCATIONS}, got {trunc!r}")
        j = level_offsets(self.d).astype(np.float64)
        omega = j / self.t_kepler
        if trunc in (REVIVAL, SUPER_REVIVAL):
            if self.t_rev is None or self.t_rev <= 0:
                raise ValueError("revival term requested but t_rev is not set")
            omega = omega - j**2 / (2.0 * self.t_rev)
        if trunc == SUPER_REVIVAL:
            if self.t_sr is None or self.t_sr <= 0:
                raise ValueError("super-revival term requested but t_sr is not set")
            omega = omega + j**3 / (6.0 * self.t_sr)
        return 2.0 * np.pi * omega


def wavepacket_basis_matrix(d: int) -> np.ndarray:
    """Unitary U with U[j, k] = exp(-i 2π j k / d)/√d: column k is packet k in level amplitudes."""
    prods = np.outer(np.arange(d), np.arange(d)) % d
    return np.exp(-2j * np.pi * prods / d) / np.sqrt(d)


@dataclass(frozen=True)
class AmplitudeVector:
    """d amplitudes of one atom in either the energy or the wave-packet basis.

    Carries the reference time ``t0`` at which the amplitudes are stated. Not
    forced to unit norm (a register atom may share weight with other levels);
    use :meth:`require_normalized` where a closed state is expected.
    """

    basis: str
    amps: np.ndarray
    t0: float = 0.0

    def __post_init__(self) -> None:
        if self.basis not in (ENERGY, WAVEPACKET):
            raise ValueError(f"basis must be {ENERGY!r} or {WAVEPACKET!r}, got {self.basis!r}")
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.ndim != 1 or amps.shape[0] < 2:
            raise ValueError(f"amplitude vector must be 1-D with d >= 2, got shape {amps.shape}")
        object.__setattr__(self, "amps", amps)

    @property
    def d(self) -> int:
        return self.amps.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def require_normalized(self, tol: float = EPS_STATE) -> None:
        n = self.norm()
        if abs(n - 1.0) > tol:
            raise ContractError(f"vector norm {n} deviates from 1 by more than {tol}")


def change_basis(v: AmplitudeVector, to: str) -> AmplitudeVector:
    """Re-express the same physical state in the other basis.

    This function owns the sign convention of the duality: with U the packet
    matrix, energy amplitudes e and packet amplitudes b satisfy e = U b, so
    energy -> wavepacket applies U† and the reverse applies U. Both directions
    are exact inverses of each other.
    """
    if to not in (ENERGY, WAVEPACKET):
        raise ValueError(f"basis must be {ENERGY!r} or {WAVEPACKET!r}, got {to!r}")
    if v.basis == to:
        return v
    u = wavepacket_basis_matrix(v.d)
    if to == WAVEPACKET:
        amps = u.conj().T @ v.amps
    else:
        amps = u @ v.amps
    return AmplitudeVector(to, amps, v.t0)


def free_evolve(v: AmplitudeVector, spectrum: RydbergSpectrum, dt: float) -> AmplitudeVector:
    """Evolve freely for dt >= 0: energy amplitudes pick up exp(-i (ω_j - ω_0) dt).

    In the wave-packet basis with the Kepler-only spectrum this reduces to the
    cyclic shift b_k(m T_K / d) = b_{k-m}(0): the packets hop around the orbit.
    """
    if dt < 0:
        raise ValueError(f"free evolution requires dt >= 0, got {dt}")
    if v.d != spectrum.d:
        raise ValueError(f"vector has d={v.d} but spectrum has d={spectrum.d}")
    phases = np.exp(-1j * spectrum.frequency_offsets() * dt)
    if v.basis == ENERGY:
        return AmplitudeVector(ENERGY, v.amps * phases, v.t0 + dt)
    u = wavepacket_basis_matrix(v.d)
    amps = u.conj().T @ (phases * (u @ v.amps))
    return AmplitudeVector(WAVEPACKET, amps, v.t0 + dt)


def dispersion_fidelity(v: AmplitudeVector, spectrum: RydbergSpectrum, dt: float) -> float:
    """Overlap |<ψ_kepler(dt)|ψ_revival(dt)>|² between truncations of the same spectrum.

    Quantifies how much the quadratic (revival) term distorts the ideal packet
    cycling over dt. Equals 1 at dt = 0 and again at dt = 2 t_rev, where the
    quadratic phases rephase completely; at dt = t_rev the residual phase is
    exp(iπ j) per level (a half-period-shifted revival), so only states
    supported on even offsets score 1 there.
    """
    if spectrum.t_rev is None:
        raise ValueError("dispersion fidelity requires t_rev on the spectrum")
    kepler = replace(spectrum, truncation=KEPLER)
    revival = replace(spectrum, truncation=REVIVAL)
    a = free_evolve(v, kepler, dt)
    b = free_evolve(v, revival, dt)
    overlap = np.vdot(a.amps, b.amps)
    norm2 = a.norm() * b.norm()
    if norm2 == 0.0:
        raise ValueError("cannot compute fidelity of a zero vector")
    return float(abs(overlap) ** 2 / norm2**2)
