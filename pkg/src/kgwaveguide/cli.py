"""Configuration, orchestration and output contracts for all run modes.

Config files are TOML; unknown keys are rejected and validation reports
every error, not just the first.  Outputs per run: manifest.json (config
echo, horizon, summary, scattering report when applicable), series.csv
with a fixed column order, optional binary field snapshots, and rendered
figures next to the CSV.
"""

from __future__ import annotations

import argparse
import json
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import CSV_COLUMNS
from .exponents import build_report
from .grid import FieldState, make_grid, read_snapshot, write_snapshot
from .profiles import classify_shifts, decompose, pythagorean_audit
from .report import render_profile_figure, render_series_figures
from .scattering import cauchy_check, extract_scattering_state
from .stepper import BlowUpError, StepperConfig, evolve

MODES = ("simulate", "linear", "exponents", "profiles")
FORMAT_VERSION = 1
HORIZON_MARGIN = 2.0

_SCHEMA = {
    "": {"mode", "seed", "out"},
    "grid": {"d", "L", "Nx", "Ny"},
    "stepper": {"alpha", "dt", "T", "dealias"},
    "diagnostics": {"cadence", "exterior_center", "exterior_radius"},
    "data": {"noise_amplitude", "bumps"},
    "data.bumps": {"amplitude", "width", "center", "velocity", "torus_mode"},
    "scattering": {"sample_times"},
    "output": {"snapshot_times"},
    "exponents": {"batch"},
    "profiles": {"snapshots", "k_max", "eps_stop", "window_radius", "alpha"},
}


@dataclass
class Bump:
    amplitude: float = 0.01
    width: float = 2.0
    center: list = field(default_factory=lambda: [0.0])
    velocity: bool = False
    torus_mode: int = 0


@dataclass
class RunConfig:
    mode: str = "simulate"
    seed: int = 0
    out: str = "run_out"
    d: int = 1
    L: float = 64.0
    Nx: int = 1024
    Ny: int = 16
    alpha: float = 5.0
    dt: float = 1e-3
    T: float = 20.0
    dealias: bool = False
    cadence: int = 10
    exterior_center: list | None = None
    exterior_radius: float | None = None
    noise_amplitude: float = 0.0
    bumps: list[Bump] = field(default_factory=list)
    scattering_sample_times: list[float] = field(default_factory=list)
    snapshot_times: list[float] = field(default_factory=list)
    exponents_batch: str | None = None
    profiles_snapshots: list[str] = field(default_factory=list)
    profiles_k_max: int = 3
    profiles_eps_stop: float = 1e-6
    profiles_window_radius: int = 8
    profiles_alpha: float = 2.0

    def echo(self) -> dict:
        d = {
            "mode": self.mode, "seed": self.seed, "out": self.out,
            "grid": {"d": self.d, "L": self.L, "Nx": self.Nx, "Ny": self.Ny},
            "stepper": {"alpha": self.alpha, "dt": self.dt, "T": self.T,
                        "dealias": self.dealias},
            "diagnostics": {"cadence": self.cadence,
                            "exterior_center": self.exterior_center,
                            "exterior_radius": self.exterior_radius},
            "data": {"noise_amplitude": self.noise_amplitude,
                     "bumps": [vars(b) for b in self.bumps]},
            "scattering": {"sample_times": self.scattering_sample_times},
            "output": {"snapshot_times": self.snapshot_times},
        }
        if self.exponents_batch is not None:
            d["exponents"] = {"batch": self.exponents_batch}
        if self.profiles_snapshots:
            d["profiles"] = {
                "snapshots": self.profiles_snapshots,
                "k_max": self.profiles_k_max,
                "eps_stop": self.profiles_eps_stop,
                "window_radius": self.profiles_window_radius,
                "alpha": self.profiles_alpha,
            }
        return d


class ConfigError(ValueError):
    """Carries the full list of validation problems."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


def _check_keys(section: str, table: dict, errors: list) -> None:
    allowed = _SCHEMA[section]
    for key in table:
        if key not in allowed:
            where = section or "top level"
            errors.append(f"unknown key '{key}' in {where}")


def parse_config(text: str) -> RunConfig:
    """Parse and validate a TOML config; raises ConfigError listing every
    problem found."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"TOML syntax: {exc}"]) from exc

    errors: list[str] = []
    cfg = RunConfig()
    top = {k: v for k, v in raw.items() if not isinstance(v, dict)}
    _check_keys("", top, errors)
    cfg.mode = raw.get("mode", cfg.mode)
    if cfg.mode not in MODES:
        errors.append(f"mode '{cfg.mode}' not one of {MODES}")
    cfg.seed = int(raw.get("seed", cfg.seed))
    cfg.out = str(raw.get("out", cfg.out))

    for section in raw:
        if isinstance(raw[section], dict) and section not in _SCHEMA:
            errors.append(f"unknown section '{section}'")

    g = raw.get("grid", {})
    _check_keys("grid", g, errors)
    cfg.d = int(g.get("d", cfg.d))
    cfg.L = float(g.get("L", cfg.L))
    cfg.Nx = int(g.get("Nx", cfg.Nx))
    cfg.Ny = int(g.get("Ny", cfg.Ny))
    try:
        make_grid(cfg.d, cfg.L, cfg.Nx, cfg.Ny)
    except ValueError as exc:
        errors.append(f"grid: {exc}")

    s = raw.get("stepper", {})
    _check_keys("stepper", s, errors)
    cfg.alpha = float(s.get("alpha", cfg.alpha))
    cfg.dt = float(s.get("dt", cfg.dt))
    cfg.T = float(s.get("T", cfg.T))
    cfg.dealias = bool(s.get("dealias", cfg.dealias))
    if cfg.alpha <= 0:
        errors.append("stepper: alpha must be positive")
    if cfg.dt <= 0:
        errors.append("stepper: dt must be positive")
    if cfg.T < 0:
        errors.append("stepper: T must be nonnegative")
    if cfg.T > 0 and cfg.dt > cfg.T:
        errors.append("stepper: dt must not exceed T")

    dg = raw.get("diagnostics", {})
    _check_keys("diagnostics", dg, errors)
    cfg.cadence = int(dg.get("cadence", cfg.cadence))
    if cfg.cadence < 1:
        errors.append("diagnostics: cadence must be >= 1")
    if "exterior_center" in dg:
        cfg.exterior_center = [float(c) for c in dg["exterior_center"]]
        if len(cfg.exterior_center) != cfg.d:
            errors.append("diagnostics: exterior_center must have d components")
    if "exterior_radius" in dg:
        cfg.exterior_radius = float(dg["exterior_radius"])
        if cfg.exterior_radius <= 0:
            errors.append("diagnostics: exterior_radius must be positive")
    if (cfg.exterior_center is None) != (cfg.exterior_radius is None):
        errors.append("diagnostics: exterior_center and exterior_radius "
                      "must be given together")

    data = raw.get("data", {})
    _check_keys("data", data, errors)
    cfg.noise_amplitude = float(data.get("noise_amplitude", 0.0))
    for i, b in enumerate(data.get("bumps", [])):
        _check_keys("data.bumps", b, errors)
        bump = Bump(amplitude=float(b.get("amplitude", 0.01)),
                    width=float(b.get("width", 2.0)),
                    center=[float(c) for c in b.get("center", [0.0] )],
                    velocity=bool(b.get("velocity", False)),
                    torus_mode=int(b.get("torus_mode", 0)))
        if bump.width <= 0:
            errors.append(f"data.bumps[{i}]: width must be positive")
        if len(bump.center) != cfg.d:
            errors.append(f"data.bumps[{i}]: center must have d components")
        cfg.bumps.append(bump)

    sc = raw.get("scattering", {})
    _check_keys("scattering", sc, errors)
    cfg.scattering_sample_times = [float(t) for t in sc.get("sample_times", [])]

    out = raw.get("output", {})
    _check_keys("output", out, errors)
    cfg.snapshot_times = [float(t) for t in out.get("snapshot_times", [])]

    ex = raw.get("exponents", {})
    _check_keys("exponents", ex, errors)
    if "batch" in ex:
        cfg.exponents_batch = str(ex["batch"])
    if cfg.mode == "exponents" and cfg.exponents_batch is None:
        errors.append("exponents: batch file required for mode=exponents")

    pr = raw.get("profiles", {})
    _check_keys("profiles", pr, errors)
    cfg.profiles_snapshots = [str(p) for p in pr.get("snapshots", [])]
    cfg.profiles_k_max = int(pr.get("k_max", cfg.profiles_k_max))
    cfg.profiles_eps_stop = float(pr.get("eps_stop", cfg.profiles_eps_stop))
    cfg.profiles_window_radius = int(pr.get("window_radius", cfg.profiles_window_radius))
    cfg.profiles_alpha = float(pr.get("alpha", cfg.profiles_alpha))
    if cfg.mode == "profiles" and not cfg.profiles_snapshots:
        errors.append("profiles: snapshot list required for mode=profiles")

    if errors:
        raise ConfigError(errors)
    return cfg


def build_initial_state(grid, cfg: RunConfig) -> FieldState:
    """Sum of Gaussian bumps (optionally modulated on the torus) plus
    seeded noise; the seed fully determines the randomized part."""
    coords = grid.coordinate_grids()
    u = np.zeros(grid.shape)
    v = np.zeros(grid.shape)
    for b in cfg.bumps:
        r2 = np.zeros(grid.shape)
        for i in range(grid.d):
            r2 = r2 + (coords[i] - b.center[i]) ** 2
        bump = b.amplitude * np.exp(-r2 / (2.0 * b.width**2))
        if b.torus_mode:
            bump = bump * np.cos(b.torus_mode * coords[-1])
        else:
            bump = bump * np.ones_like(coords[-1])
        u += bump
        if b.velocity:
            # rightward transport approximation: v = -d(bump)/dx1
            v += bump * (coords[0] - b.center[0]) / b.width**2
    if cfg.noise_amplitude > 0:
        rng = np.random.default_rng(cfg.seed)
        u = u + cfg.noise_amplitude * rng.standard_normal(grid.shape)
    return FieldState(u, v, 0.0)


def wraparound_horizon(cfg: RunConfig) -> float:
    """Honest-approximation horizon: L - r0 - margin, with r0 the initial
    support radius (3 widths past the farthest bump center)."""
    if not cfg.bumps:
        return max(cfg.L - HORIZON_MARGIN, 0.0)
    r0 = max(max(abs(c) for c in b.center) + 3.0 * b.width for b in cfg.bumps)
    return max(cfg.L - r0 - HORIZON_MARGIN, 0.0)


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def write_series_csv(series, path: Path) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for i in range(len(series)):
        lines.append(",".join(_fmt(v) for v in series.row(i)))
    path.write_text("\n".join(lines) + "\n")


def _run_simulation(cfg: RunConfig, outdir: Path) -> dict:
    grid = make_grid(cfg.d, cfg.L, cfg.Nx, cfg.Ny)
    state = build_initial_state(grid, cfg)
    stepper_cfg = StepperConfig(alpha=cfg.alpha, dt=cfg.dt, T=cfg.T,
                                dealias=cfg.dealias)
    exterior = None
    if cfg.exterior_center is not None:
        exterior = (cfg.exterior_center, cfg.exterior_radius)
    snapshot_times = sorted(set(cfg.snapshot_times) | set(cfg.scattering_sample_times))
    record = evolve(grid, state, stepper_cfg, cadence=cfg.cadence,
                    snapshot_times=snapshot_times, exterior=exterior,
                    track_scattering=(cfg.mode == "simulate"),
                    linear_only=(cfg.mode == "linear"))

    write_series_csv(record.series, outdir / "series.csv")
    render_series_figures(record.series, outdir)
    for ts in cfg.snapshot_times:
        if ts in record.snapshots:
            write_snapshot(grid, record.snapshots[ts], outdir / f"snapshot_t{ts:g}")

    summary = {
        "final_time": record.final_state.t,
        "energy_initial": record.series.energy[0],
        "energy_final": record.series.energy[-1],
        "energy_drift_rel": (abs(record.series.energy[-1] - record.series.energy[0])
                             / record.series.energy[0]
                             if record.series.energy[0] > 0 else 0.0),
        "strichartz_total": record.series.strichartz_accum[-1],
        "morawetz_total": record.series.morawetz_accum[-1],
    }
    manifest: dict = {"summary": summary}
    if cfg.mode == "simulate" and len(record.vstates) >= 2:
        report = cauchy_check(record)
        fplus, extraction = extract_scattering_state(record)
        manifest["scattering_report"] = report.to_dict()
        manifest["scattering_residuals"] = extraction.to_dict()
        write_snapshot(grid, fplus, outdir / "scattering_state")
    return manifest


def _run_exponents(cfg: RunConfig, outdir: Path) -> dict:
    batch = Path(cfg.exponents_batch)
    reports = []
    for lineno, line in enumerate(batch.read_text().splitlines(), start=1):
        line = line.split("#")[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 4:
            raise ValueError(f"{batch}:{lineno}: expected 'd alpha q r', got {line!r}")
        d = int(parts[0])
        reports.append(build_report(d, parts[1], parts[2], parts[3]).to_dict())
    text = "\n".join(json.dumps(r) for r in reports) + "\n"
    (outdir / "exponent_reports.jsonl").write_text(text)
    return {"exponent_reports": len(reports)}


def _run_profiles(cfg: RunConfig, outdir: Path) -> dict:
    states, grid = [], None
    for stem in cfg.profiles_snapshots:
        g, s = read_snapshot(stem)
        if grid is None:
            grid = g
        elif g.shape != grid.shape or g.L != grid.L:
            raise ValueError(f"snapshot {stem} does not match the first grid")
        states.append(s)
    dec = decompose(grid, states, cfg.profiles_k_max, cfg.profiles_eps_stop,
                    window_radius=cfg.profiles_window_radius,
                    alpha=cfg.profiles_alpha)
    delta_h, delta_p = pythagorean_audit(grid, states, dec, cfg.profiles_alpha)
    for j, (shifts, psi) in enumerate(dec.profiles):
        write_snapshot(grid, psi, outdir / f"profile_{j}")
    render_profile_figure(dec, outdir)
    ledger = {
        "profiles": [
            {"shifts": [list(s) for s in shifts],
             "shift_class": classify_shifts(shifts)}
            for shifts, _ in dec.profiles
        ],
        "remainder_h_norms": dec.remainder_h_norms,
        "remainder_lq_norms": dec.remainder_lq_norms,
        "remainder_lpot_norms": dec.remainder_lpot_norms,
        "pythagorean_residual_h": delta_h,
        "pythagorean_residual_lp": delta_p,
    }
    (outdir / "profile_ledger.json").write_text(json.dumps(ledger, indent=2) + "\n")
    return {"profile_ledger": ledger}


def run(cfg: RunConfig, outdir=None) -> int:
    """Execute one run; writes all artifacts under the output directory.

    Returns a process exit status (nonzero on blow-up guard or I/O failure).
    """
    outdir = Path(outdir if outdir is not None else cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format_version": FORMAT_VERSION,
        "package_version": __version__,
        "config": cfg.echo(),
        "horizon": wraparound_horizon(cfg),
    }
    try:
        if cfg.mode in ("simulate", "linear"):
            manifest.update(_run_simulation(cfg, outdir))
        elif cfg.mode == "exponents":
            manifest.update(_run_exponents(cfg, outdir))
        elif cfg.mode == "profiles":
            manifest.update(_run_profiles(cfg, outdir))
    except (BlowUpError, OSError, ValueError) as exc:
        manifest["error"] = str(exc)
        (outdir / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        print(f"error: {exc}", file=sys.stderr)
        return 1
    (outdir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return 0


def _run_one_sweep_entry(args) -> int:
    config_path, outdir, mode, seed = args
    cfg = load_config(config_path, mode=mode, seed=seed)
    return run(cfg, outdir)


def load_config(path, mode=None, seed=None, out=None) -> RunConfig:
    cfg = parse_config(Path(path).read_text())
    if mode is not None:
        if mode not in MODES:
            raise ConfigError([f"mode '{mode}' not one of {MODES}"])
        cfg.mode = mode
    if seed is not None:
        cfg.seed = seed
    if out is not None:
        cfg.out = str(out)
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kgwg",
        description="Klein-Gordon waveguide simulator and verification harness")
    parser.add_argument("--config", required=True, help="TOML config file")
    parser.add_argument("--mode", choices=MODES, help="override config mode")
    parser.add_argument("--out", help="override output directory")
    parser.add_argument("--seed", type=int, help="override RNG seed")
    parser.add_argument("--sweep", help="file listing config paths, one per "
                        "line; each runs in its own subdirectory of --out")
    args = parser.parse_args(argv)

    try:
        if args.sweep:
            base = Path(args.out or "sweep_out")
            paths = [p.strip() for p in Path(args.sweep).read_text().splitlines()
                     if p.strip()]
            jobs = [(p, base / Path(p).stem, args.mode, args.seed) for p in paths]
            with ProcessPoolExecutor() as pool:
                statuses = list(pool.map(_run_one_sweep_entry, jobs))
            return max(statuses, default=0)
        cfg = load_config(args.config, mode=args.mode, seed=args.seed,
                          out=args.out)
        return run(cfg)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
