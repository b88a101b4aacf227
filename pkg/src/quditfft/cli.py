"""Command-line front end for the simulator.

Five modes, one per layer of the stack plus a combined run:

  verify-qft   gate sequence vs the reference N-point transform
  wavepacket   dual-basis unitarity, packet cycling, dispersion overlap
  pulse        two-level pulse accuracy and full-band leakage sweep
  iontrap      composed conditional-phase gate fidelity
  full         all of the above

Settings come from built-in defaults, overlaid by an optional JSON config
file, overlaid by command-line flags. The report is JSON with sorted keys and
no timestamps, so identical inputs produce byte-identical output.

Exit status: 0 when every check in the chosen mode passed, 1 when a check
failed, 2 for unusable arguments or configuration.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import ConfigurationError, ContractError
from .gates import verify_fft_equivalence
from .iontrap import TrapParams, verify_hybrid_gate
from .pulses import (
    AtomState,
    PulseProfile,
    RabiCouplings,
    integrate_two_level,
    resonant_pulse_map,
    selectivity_sweep,
)
from .register import RegisterShape
from .wavepacket import (
    ENERGY,
    TRUNCATIONS,
    WAVEPACKET,
    AmplitudeVector,
    RydbergSpectrum,
    change_basis,
    dispersion_fidelity,
    free_evolve,
    wavepacket_basis_matrix,
)

MODES = ("verify-qft", "wavepacket", "pulse", "iontrap", "full")

REPORT_SCHEMA = 1


@dataclass
class RunConfig:
    """Fully resolved settings for one CLI invocation."""

    mode: str = "verify-qft"
    d: int = 3
    q: int = 2
    seed: int = 1234
    tolerance: float = 1e-10
    n_samples: int = 256
    n_bar: float = 5.0
    truncation: str = "kepler"
    t_rev_ratio: float | None = None
    t_sr_ratio: float | None = None
    pulse_duration_ratio: float = 0.05
    pulse_area: float = math.pi
    pulse_shape: str = "square"
    control_index: int = 0
    target_index: int = 1
    multiplicity: int = 1
    kepler_periods: float = 2.0
    omega_ge: float = 50.0
    eta: float = 0.1
    nu_x: float = 1.0
    omega_e: float = 100.0

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.d < 2:
            raise ConfigurationError(f"d must be at least 2, got {self.d}")
        if self.q < 1:
            raise ConfigurationError(f"q must be at least 1, got {self.q}")
        if self.truncation not in TRUNCATIONS:
            raise ConfigurationError(
                f"truncation must be one of {TRUNCATIONS}, got {self.truncation!r}"
            )
        if self.pulse_duration_ratio <= 0:
            raise ConfigurationError(
                f"pulse duration ratio must be positive, got {self.pulse_duration_ratio}"
            )


def _config_from_sources(args: argparse.Namespace) -> RunConfig:
    """Defaults, then JSON config file, then explicit flags."""
    values: dict = {}
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                loaded = json.load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigurationError("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = sorted(set(loaded) - known)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
        values.update(loaded)

    flag_map = {
        "mode": args.mode,
        "d": args.d,
        "q": args.q,
        "seed": args.seed,
        "truncation": args.spectrum_truncation,
        "pulse_duration_ratio": args.pulse_duration,
    }
    for key, val in flag_map.items():
        if val is not None:
            values[key] = val

    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigurationError(f"bad config value: {exc}") from exc
    cfg.validate()
    return cfg


def _spectrum_from(cfg: RunConfig) -> RydbergSpectrum:
    t_kepler = 2.0 * math.pi * cfg.n_bar**3
    t_rev = cfg.t_rev_ratio * t_kepler if cfg.t_rev_ratio is not None else None
    t_sr = cfg.t_sr_ratio * t_kepler if cfg.t_sr_ratio is not None else None
    return RydbergSpectrum(
        n_bar=cfg.n_bar,
        d=cfg.d,
        t_rev=t_rev,
        t_sr=t_sr,
        truncation=cfg.truncation,
        allow_noninteger_nbar=True,
    )


def _run_verify_qft(cfg: RunConfig) -> tuple[dict, bool, list[dict]]:
    shape = RegisterShape(cfg.d, cfg.q)
    report = verify_fft_equivalence(
        shape, tol=cfg.tolerance, seed=cfg.seed, n_samples=cfg.n_samples
    )
    rows = [report.to_dict()]
    return report.to_dict(), report.passed, rows


def _run_wavepacket(cfg: RunConfig) -> tuple[dict, bool, list[dict]]:
    d = cfg.d
    u = wavepacket_basis_matrix(d)
    unitarity_err = float(np.abs(u.conj().T @ u - np.eye(d)).max())

    kepler = RydbergSpectrum(cfg.n_bar, d, allow_noninteger_nbar=True)
    slot_time = kepler.t_kepler / d
    rng = np.random.default_rng(cfg.seed)
    amps = rng.normal(size=d) + 1j * rng.normal(size=d)
    packet = AmplitudeVector(WAVEPACKET, amps / np.linalg.norm(amps))
    cycling_err = 0.0
    for steps in range(2 * d + 1):
        evolved = free_evolve(packet, kepler, steps * slot_time)
        expected = np.roll(packet.amps, steps)
        cycling_err = max(cycling_err, float(np.abs(evolved.amps - expected).max()))

    results = {
        "d": d,
        "unitarity_err": unitarity_err,
        "cycling_err": cycling_err,
    }
    rows: list[dict] = []
    if cfg.t_rev_ratio is not None:
        spectrum = _spectrum_from(cfg)
        core = np.zeros(d, dtype=np.complex128)
        core[0] = 1.0
        state = AmplitudeVector(WAVEPACKET, core)
        sweep = {}
        for frac in (0.0, 0.1, 0.25, 0.5, 1.0, 2.0):
            dt = frac * spectrum.t_rev
            fid = dispersion_fidelity(state, spectrum, dt)
            sweep[f"{frac:g}"] = fid
            rows.append({"dt_over_t_rev": frac, "dispersion_fidelity": fid})
        results["dispersion_fidelity_vs_t_rev"] = sweep
    else:
        rows.append({"unitarity_err": unitarity_err, "cycling_err": cycling_err})

    passed = unitarity_err < 1e-12 and cycling_err < 1e-12
    return results, passed, rows


def _run_pulse(cfg: RunConfig) -> tuple[dict, bool, list[dict]]:
    spectrum = RydbergSpectrum(cfg.n_bar, cfg.d, allow_noninteger_nbar=True)
    couplings = RabiCouplings.uniform(cfg.d)

    pulse = PulseProfile(1.0, math.pi, shape=cfg.pulse_shape)
    evolved = integrate_two_level(AtomState.ground(cfg.d), pulse, couplings)
    got = np.array([evolved.b_g, evolved.wp.amps[0]])
    want = resonant_pulse_map(math.pi) @ np.array([1.0, 0.0])
    two_level_err = float(np.abs(got - want).max())

    durations = np.geomspace(
        spectrum.t_kepler, spectrum.t_kepler / (4.0 * cfg.d), num=8
    )
    leakage = selectivity_sweep(
        spectrum, couplings, durations, area=cfg.pulse_area, shape=cfg.pulse_shape
    )
    monotone = bool(np.all(np.diff(leakage) < 0))

    chosen = float(cfg.pulse_duration_ratio * spectrum.t_kepler)
    chosen_leak = float(
        selectivity_sweep(spectrum, couplings, np.array([chosen]), area=cfg.pulse_area,
                          shape=cfg.pulse_shape)[0]
    )

    rows = [
        {"duration_over_t_kepler": float(t / spectrum.t_kepler), "leakage": float(v)}
        for t, v in zip(durations, leakage)
    ]
    results = {
        "two_level_pi_error": two_level_err,
        "leakage_sweep": {
            "duration_over_t_kepler": [float(t / spectrum.t_kepler) for t in durations],
            "leakage": [float(v) for v in leakage],
            "monotone_decreasing": monotone,
        },
        "chosen_duration_ratio": cfg.pulse_duration_ratio,
        "chosen_leakage": chosen_leak,
    }
    passed = two_level_err < 1e-8 and monotone
    return results, passed, rows


def _run_iontrap(cfg: RunConfig) -> tuple[dict, bool, list[dict]]:
    q = max(cfg.q, cfg.target_index + 1)
    shape = RegisterShape(cfg.d, q)
    params = TrapParams(
        nu_x=cfg.nu_x, eta=cfg.eta, omega_e=cfg.omega_e, omega_ge=cfg.omega_ge
    )
    spectrum = _spectrum_from(cfg)
    report = verify_hybrid_gate(
        shape,
        cfg.control_index,
        cfg.target_index,
        params,
        spectrum,
        multiplicity=cfg.multiplicity,
        kepler_periods=cfg.kepler_periods,
    )
    passed = report.fidelity > 1.0 - 1e-9 and report.trap_residual_max < 1e-10
    rows = [
        {
            "branch": i,
            "phase_error": err,
        }
        for i, err in enumerate(report.per_branch_phase_error)
    ]
    return report.to_dict(), passed, rows


def _run_full(cfg: RunConfig) -> tuple[dict, bool, list[dict]]:
    results: dict = {}
    rows: list[dict] = []
    passed = True
    for name, runner in (
        ("verify_qft", _run_verify_qft),
        ("wavepacket", _run_wavepacket),
        ("pulse", _run_pulse),
        ("iontrap", _run_iontrap),
    ):
        sub_results, sub_passed, sub_rows = runner(cfg)
        results[name] = {"results": sub_results, "passed": sub_passed}
        passed = passed and sub_passed
        for row in sub_rows:
            rows.append({"section": name, **row})
    return results, passed, rows


_RUNNERS = {
    "verify-qft": _run_verify_qft,
    "wavepacket": _run_wavepacket,
    "pulse": _run_pulse,
    "iontrap": _run_iontrap,
    "full": _run_full,
}


def _jsonable(obj):
    """Recursively coerce numpy scalars/arrays so json.dumps stays deterministic."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def render_report(cfg: RunConfig, results: dict, passed: bool) -> str:
    report = {
        "schema": REPORT_SCHEMA,
        "mode": cfg.mode,
        "config": _jsonable(asdict(cfg)),
        "results": _jsonable(results),
        "passed": bool(passed),
    }
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _write_csv(path: str, rows: list[dict]) -> None:
    fieldnames: list[str] = []
    for row in rows:
        for key in row:
            if key not in fieldnames:
                fieldnames.append(key)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, restval="")
        writer.writeheader()
        for row in rows:
            writer.writerow(_jsonable(row))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quditfft",
        description="Simulate the qudit Fourier-transform decomposition and its ion-trap realization.",
    )
    parser.add_argument("--mode", choices=MODES, default=None, help="what to run (default verify-qft)")
    parser.add_argument("--config", default=None, help="JSON file with RunConfig keys")
    parser.add_argument("--d", type=int, default=None, help="levels per qudit")
    parser.add_argument("--q", type=int, default=None, help="number of qudits")
    parser.add_argument("--seed", type=int, default=None, help="seed for sampled verification inputs")
    parser.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    parser.add_argument(
        "--spectrum-truncation",
        choices=TRUNCATIONS,
        default=None,
        help="how many Taylor terms of the level spectrum to keep",
    )
    parser.add_argument(
        "--pulse-duration",
        type=float,
        default=None,
        help="pulse duration as a fraction of the Kepler period",
    )
    parser.add_argument("--csv", default=None, help="also write per-point results as CSV here")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_sources(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        results, passed, rows = _RUNNERS[cfg.mode](cfg)
    except (ConfigurationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ContractError as exc:
        print(f"contract violated: {exc}", file=sys.stderr)
        return 1

    text = render_report(cfg, results, passed)
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.csv is not None:
        _write_csv(args.csv, rows)
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
