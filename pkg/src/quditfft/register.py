"""Dense qudit registers and base-d index arithmetic.

A register of q qudits with d levels each holds N = d**q complex amplitudes.
Amplitude index a corresponds to the digit string |a_{q-1}, ..., a_1, a_0>
with a = sum_m a_m d**m, i.e. digit m is the coefficient of d**m and digit 0
is the least significant.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .constants import DEFAULT_MAX_AMPS, EPS_STATE, MAX_AMPS_ENV
from .errors import ContractError


def _amplitude_cap() -> int:
    raw = os.environ.get(MAX_AMPS_ENV)
    if raw is None:
        return DEFAULT_MAX_AMPS
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"{MAX_AMPS_ENV} must be an integer, got {raw!r}") from exc
    if cap < 2:
        raise ValueError(f"{MAX_AMPS_ENV} must be at least 2, got {cap}")
    return cap


@dataclass(frozen=True)
class RegisterShape:
    """Geometry of a register: q qudits of dimension d.

    The dense amplitude count d**q is capped (default 2**20) to keep memory
    bounded; the cap can be raised explicitly via ``max_amps`` or globally via
    the QUDITFFT_MAX_AMPS environment variable.
    """

    d: int
    q: int
    max_amps: int | None = None

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ValueError(f"qudit dimension must be >= 2, got d={self.d}")
        if self.q < 1:
            raise ValueError(f"register needs at least one qudit, got q={self.q}")
        cap = self.max_amps if self.max_amps is not None else _amplitude_cap()
        if self.d**self.q > cap:
            raise ValueError(
                f"register of {self.d}**{self.q} = {self.d ** self.q} amplitudes "
                f"exceeds the cap of {cap} (raise {MAX_AMPS_ENV} to override)"
            )

    @property
    def n_amps(self) -> int:
        return self.d**self.q


@dataclass(frozen=True)
class DitString:
    """A base-d digit string, most significant digit first."""

    digits: tuple[int, ...]
    d: int

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ValueError(f"digit base must be >= 2, got {self.d}")
        if not self.digits:
            raise ValueError("digit string must be non-empty")
        for x in self.digits:
            if not 0 <= x < self.d:
                raise ValueError(f"digit {x} out of range for base {self.d}")

    @property
    def q(self) -> int:
        return len(self.digits)

    def value(self) -> int:
        """Integer value, digit m weighting d**m (last digit least significant)."""
        v = 0
        for x in self.digits:
            v = v * self.d + x
        return v

    def digit(self, m: int) -> int:
        """Digit at significance m (m=0 is least significant)."""
        if not 0 <= m < self.q:
            raise ValueError(f"digit index {m} out of range for q={self.q}")
        return self.digits[self.q - 1 - m]


def encode_dits(a: int, shape: RegisterShape) -> DitString:
    """Base-d digits of amplitude index ``a``, most significant first."""
    if not 0 <= a < shape.n_amps:
        raise ValueError(f"index {a} out of range for {shape.n_amps} amplitudes")
    digits = []
    rest = a
    for _ in range(shape.q):
        digits.append(rest % shape.d)
        rest //= shape.d
    return DitString(tuple(reversed(digits)), shape.d)


def dit_reverse(s: DitString) -> DitString:
    """Reverse the digit order. An involution."""
    return DitString(tuple(reversed(s.digits)), s.d)


def dit_reversal_permutation(shape: RegisterShape) -> np.ndarray:
    """Index permutation P with P[c] = value of the digit-reversed string of c."""
    d, q, n = shape.d, shape.q, shape.n_amps
    idx = np.arange(n)
    perm = np.zeros(n, dtype=np.int64)
    for m in range(q):
        digit = (idx // d**m) % d
        perm += digit * d ** (q - 1 - m)
    return perm


@dataclass
class QuditState:
    """Dense statevector over a qudit register.

    The amplitude array is not forced to unit norm on construction (linear maps
    are applied to arbitrary vectors); use :meth:`require_normalized` where a
    physical state is expected.
    """

    shape: RegisterShape
    amps: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.shape != (self.shape.n_amps,):
            raise ValueError(
                f"amplitude array has shape {amps.shape}, expected ({self.shape.n_amps},)"
            )
        self.amps = amps

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def require_normalized(self, tol: float = EPS_STATE) -> None:
        n = self.norm()
        if abs(n - 1.0) > tol:
            raise ContractError(f"state norm {n} deviates from 1 by more than {tol}")


def basis_state(a: int, shape: RegisterShape) -> QuditState:
    """Computational basis state |a> as a dense statevector."""
    if not 0 <= a < shape.n_amps:
        raise ValueError(f"basis index {a} out of range for {shape.n_amps} amplitudes")
    amps = np.zeros(shape.n_amps, dtype=np.complex128)
    amps[a] = 1.0
    return QuditState(shape, amps)


def measure_register(state: QuditState, rng_seed: int) -> DitString:
    """Sample one digit string from |amplitude|^2. Deterministic for a given seed."""
    state.require_normalized()
    probs = state.probabilities()
    probs = probs / probs.sum()
    rng = np.random.default_rng(rng_seed)
    outcome = int(rng.choice(state.shape.n_amps, p=probs))
    return encode_dits(outcome, state.shape)
