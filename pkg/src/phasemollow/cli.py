"""Command-line front end.

    phasemollow spectrum --model stochastic --omega 200 --kappa 100 --D 10 --phi 0 --out f.csv
    phasemollow absorb   --omega 400 --kappa 100 --D 40 --phi pi/6 --out a.csv
    phasemollow sweep    --omega 200 --kappa 100 --D 40 --phi-count 33 --out s.csv
    phasemollow validate --ntraj 2000 --seed 1
    phasemollow rates    --omega 200 --kappa 100 --D 10 --phi pi/2

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 I/O or runtime error.
Values from ``--config`` (``key = value`` lines under ``[model]``, ``[grid]``
and ``[run]`` sections) are overridden by flags on the command line.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import re
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from .io import write_spectrum_csv, write_sweep_csv
from .model import (
    ModelParams,
    RegimeWarning,
    SqueezedParams,
    build_csf_generator,
    build_isv_generator,
    build_stochastic_generator,
    dressed_rates,
    quadrature_rates,
)
from .spectra import (
    FrequencyGrid,
    absorption_spectrum,
    figure_grid,
    fluorescence_numeric,
    generator_grid,
    phase_sweep,
)
from .stochastic import OUConfig, max_stable_dt

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

STOCHASTIC_KEYS = ("kappa", "D", "phi")
SQUEEZED_KEYS = ("N", "M", "Phi")
VALIDATE_DEFAULTS = dict(omega=40.0, kappa=20.0, D=2.0, phi=0.0, ntraj=2000, seed=1, t_max=20.0)

_ANGLE = re.compile(r"^\s*([+-]?)\s*(\d*\.?\d*(?:[eE][+-]?\d+)?)?\s*\*?\s*pi\s*(?:/\s*(\d*\.?\d+))?\s*$")


class UsageError(Exception):
    pass


def parse_angle(text) -> float:
    """Radians, or a multiple/fraction of pi such as ``pi/6``, ``-pi``, ``2pi/3``."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _ANGLE.match(str(text))
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        factor = float(m.group(2)) if m.group(2) else 1.0
        denom = float(m.group(3)) if m.group(3) else 1.0
        return sign * factor * math.pi / denom
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"malformed angle {text!r}") from None


def _number(text, name) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise UsageError(f"malformed number for --{name}: {text!r}") from None
    if not math.isfinite(value):
        raise UsageError(f"--{name} must be finite")
    return value


@dataclass
class GridSpec:
    lo: float | None = None
    hi: float | None = None
    count: int = 4001
    refine_center: bool = True


@dataclass
class RunConfig:
    command: str
    model: str = "stochastic"
    params: ModelParams | None = None
    squeezed: SqueezedParams | None = None
    omega: float = 0.0
    grid: GridSpec = field(default_factory=GridSpec)
    out: str | None = None
    seed: int = 0
    ntraj: int = 1
    dt: float | None = None
    t_max: float = 20.0
    threads: int = 1
    gamma_scale: float = 1.0
    phi_count: int = 33
    kind: str = "fluorescence"

    def generator(self):
        if self.model == "stochastic":
            return build_stochastic_generator(self.params)
        if self.model == "csf":
            s = self.squeezed
            return build_csf_generator(1.0, self.omega, s.n_photon, _signed_m(s))
        return build_isv_generator(1.0, self.omega, self.squeezed)

    def snapshot(self) -> dict:
        if self.params is not None:
            p = self.params
            return dict(model=self.model, omega=p.omega, kappa=p.kappa, D=p.d_strength, phi=p.phi)
        s = self.squeezed
        return dict(model=self.model, omega=self.omega, N=s.n_photon, M=s.m_mag, Phi=s.big_phi)


def _signed_m(s: SqueezedParams) -> float:
    # classically squeezed field: real correlation, Phi=pi -> +|M|, Phi=0 -> -|M|
    return -s.m_mag * math.cos(s.big_phi)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phasemollow", description=__doc__.split("\n\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file with [model], [grid], [run] sections")
    common.add_argument("--model", choices=("stochastic", "csf", "isv"))
    common.add_argument("--omega", help="coherent Rabi frequency (units of gamma)")
    common.add_argument("--gamma", help="rescale the output frequency axis by gamma")
    common.add_argument("--kappa", help="stochastic field bandwidth")
    common.add_argument("--D", dest="D", help="stochastic field strength")
    common.add_argument("--phi", help="relative phase, radians or e.g. pi/6")
    common.add_argument("--N", dest="N", help="reservoir photon number")
    common.add_argument("--M", dest="M", help="reservoir correlation |M| (isv default: sqrt(N(N+1)))")
    common.add_argument("--Phi", dest="Phi", help="squeezing phase, radians or e.g. pi")
    common.add_argument("--grid-min", dest="grid_min")
    common.add_argument("--grid-max", dest="grid_max")
    common.add_argument("--grid-count", dest="grid_count")
    common.add_argument("--no-refine-center", dest="refine_center", action="store_const", const=False)
    common.add_argument("--out", help="output path")
    common.add_argument("--seed")
    common.add_argument("--ntraj")
    common.add_argument("--dt")
    common.add_argument("--t-max", dest="t_max")
    common.add_argument("--threads")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="resonance fluorescence spectrum CSV")
    sub.add_parser("absorb", parents=[common], help="probe absorption spectrum CSV")
    sweep = sub.add_parser("sweep", parents=[common], help="spectra against phase, matrix CSV")
    sweep.add_argument("--phi-count", dest="phi_count")
    sweep.add_argument("--kind", choices=("fluorescence", "absorption"))
    sub.add_parser("validate", parents=[common], help="compare with stochastic trajectories")
    sub.add_parser("rates", parents=[common], help="print decay rates and shifted Rabi frequency")
    return parser


def _read_config(path) -> dict:
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keys such as D, N, Phi are case sensitive
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise UsageError(f"malformed config {path}: {exc}") from None
    values = {}
    for section in cp.sections():
        for key, val in cp.items(section):
            values[key.replace("-", "_")] = val
    return values


def parse_cli(argv) -> RunConfig:
    """Parse arguments into a :class:`RunConfig`; raises SystemExit(2) on usage errors."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return _to_config(ns)
    except (UsageError, ValueError) as exc:
        parser.error(str(exc))


def _to_config(ns) -> RunConfig:
    raw = _read_config(ns.config) if ns.config else {}
    raw.update({k: v for k, v in vars(ns).items() if v is not None and k not in ("config", "command")})
    cmd = ns.command
    defaults = VALIDATE_DEFAULTS if cmd == "validate" else {}

    def get(key, default=None):
        return raw.get(key, defaults.get(key, default))

    model = get("model", "stochastic")
    given_stoch = [k for k in STOCHASTIC_KEYS if k in raw]
    given_sq = [k for k in SQUEEZED_KEYS if k in raw]
    if model == "stochastic" and given_sq:
        raise UsageError(f"conflicting model blocks: --{', --'.join(given_sq)} given for the stochastic model")
    if model in ("csf", "isv") and given_stoch:
        raise UsageError(f"conflicting model blocks: --{', --'.join(given_stoch)} given for the {model} model")
    if model != "stochastic" and cmd in ("sweep", "validate", "rates"):
        raise UsageError(f"'{cmd}' requires the stochastic model")
    if get("omega") is None:
        raise UsageError("--omega is required")

    cfg = RunConfig(command=cmd, model=model)
    cfg.omega = _number(get("omega"), "omega")
    if model == "stochastic":
        cfg.params = ModelParams(
            omega=cfg.omega,
            kappa=_number(get("kappa", 0.0), "kappa"),
            d_strength=_number(get("D", 0.0), "D"),
            phi=parse_angle(get("phi", 0.0)),
        )
    else:
        if get("N") is None:
            raise UsageError(f"--N is required for the {model} model")
        n = _number(get("N"), "N")
        big_phi = parse_angle(get("Phi", 0.0))
        if get("M") is None:
            m = math.sqrt(n * (n + 1)) if model == "isv" else n
        else:
            m = _number(get("M"), "M")
        cfg.squeezed = SqueezedParams(n, m, big_phi)
        if model == "csf" and cfg.squeezed.kind != "csf":
            raise UsageError(f"|M|={m} exceeds N={n}: not a classically squeezed field")

    grid = GridSpec()
    if get("grid_min") is not None or get("grid_max") is not None:
        if get("grid_min") is None or get("grid_max") is None:
            raise UsageError("--grid-min and --grid-max must be given together")
        grid.lo, grid.hi = _number(get("grid_min"), "grid-min"), _number(get("grid_max"), "grid-max")
        if not grid.lo < grid.hi:
            raise UsageError(f"--grid-min {grid.lo} must be below --grid-max {grid.hi}")
    if get("grid_count") is not None:
        grid.count = int(_number(get("grid_count"), "grid-count"))
    if grid.count < 2:
        raise UsageError(f"--grid-count must be at least 2, got {grid.count}")
    refine = get("refine_center", True)
    grid.refine_center = refine if isinstance(refine, bool) else str(refine).lower() in ("1", "true", "yes", "on")
    cfg.grid = grid

    cfg.out = get("out")
    cfg.seed = int(_number(get("seed", 0), "seed"))
    cfg.ntraj = int(_number(get("ntraj", 1), "ntraj"))
    cfg.threads = max(1, int(_number(get("threads", 1), "threads")))
    cfg.t_max = _number(get("t_max", 20.0), "t-max")
    cfg.gamma_scale = _number(get("gamma", 1.0), "gamma")
    if get("dt") is not None:
        cfg.dt = _number(get("dt"), "dt")
    if cmd == "sweep":
        cfg.phi_count = int(_number(get("phi_count", 33), "phi-count"))
        if cfg.phi_count < 2:
            raise UsageError(f"--phi-count must be at least 2, got {cfg.phi_count}")
        cfg.kind = get("kind", "fluorescence")
    if cmd == "validate" and cfg.ntraj < 1:
        raise UsageError("--ntraj must be at least 1")
    return cfg


def make_grid(cfg: RunConfig, g=None) -> FrequencyGrid:
    spec = cfg.grid
    if spec.lo is not None:
        grid = FrequencyGrid.linspace(spec.lo, spec.hi, spec.count)
        if spec.refine_center and spec.lo < 0 < spec.hi:
            width = 8.0 * _central_width(g if g is not None else cfg.generator())
            grid = grid.refined(0.0, width, 801)
        return grid
    g = g if g is not None else cfg.generator()
    if not spec.refine_center:
        half = 1.6 * max(cfg.omega, 8.0)
        return FrequencyGrid.linspace(-half, half, spec.count)
    return generator_grid(g, count=spec.count)


def _central_width(g) -> float:
    ev = g.eigenvalues()
    real = ev[np.abs(ev.imag) <= 1e-9]
    return float(-(real if real.size else ev).real.max())


def sweep_grid(cfg: RunConfig) -> FrequencyGrid:
    """Common grid for every phase: widest shift, narrowest features refined."""
    if cfg.grid.lo is not None:
        return make_grid(cfg, build_stochastic_generator(cfg.params.replace(phi=0.0)))
    ends = [dressed_rates(cfg.params.replace(phi=phi)) for phi in (0.0, math.pi / 2)]
    wp = max(r.omega_prime for r in ends)
    grid = FrequencyGrid.linspace(-1.6 * max(wp, 8.0), 1.6 * max(wp, 8.0), cfg.grid.count)
    if cfg.grid.refine_center:
        grid = grid.refined(0.0, 8 * max(r.gamma_par for r in ends), 801)
        for r in ends:
            if r.omega_prime > 0:
                for c in (-r.omega_prime, r.omega_prime):
                    grid = grid.refined(c, 8 * r.gamma_perp, 401)
    return grid


def _write(fn, *args, **kwargs):
    try:
        fn(*args, **kwargs)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def run_spectrum(cfg: RunConfig, kind: str = "fluorescence"):
    g = cfg.generator()
    grid = make_grid(cfg, g)
    fn = fluorescence_numeric if kind == "fluorescence" else absorption_spectrum
    series = fn(g, grid, model=cfg.model, params=cfg.snapshot())
    code = EXIT_OK
    if cfg.out:
        code = _write(write_spectrum_csv, cfg.out, series.omega, series.values, cfg.gamma_scale)
    else:
        print(f"{kind} spectrum: {len(grid)} points; use --out to write CSV")
    return series, code


def run_absorb(cfg: RunConfig):
    return run_spectrum(cfg, "absorption")


def run_sweep(cfg: RunConfig, phi_count: int | None = None):
    phis = np.linspace(0.0, math.pi / 2, phi_count or cfg.phi_count)
    grid = sweep_grid(cfg)
    matrix = phase_sweep(cfg.params, phis, grid, cfg.kind)
    code = EXIT_OK
    if cfg.out:
        code = _write(write_sweep_csv, cfg.out, phis, grid.points, matrix, cfg.gamma_scale)
    else:
        print(f"{cfg.kind} sweep: {len(phis)} phases x {len(grid)} frequencies; use --out to write CSV")
    return (phis, grid, matrix), code


def run_rates(cfg: RunConfig) -> dict:
    p = cfg.params
    q = quadrature_rates(p)
    r = dressed_rates(p)
    return {"gamma_x": q.gamma_x, "gamma_y": q.gamma_y, "gamma_z": q.gamma_z,
            "Gamma_par": r.gamma_par, "Gamma_perp": r.gamma_perp, "Omega_prime": r.omega_prime}


def run_validate(cfg: RunConfig):
    from .validate import validation_checks

    p = cfg.params
    dt = cfg.dt if cfg.dt is not None else max_stable_dt(p)
    ou = OUConfig(dt=dt, n_steps=max(1, int(round(cfg.t_max / dt))), seed=cfg.seed, n_traj=cfg.ntraj)
    regime = p.regime_ok()
    checks = validation_checks(p, ou, threads=cfg.threads)
    lines = []
    if not regime:
        lines.append(f"WARNING regime: omega/sqrt(D*kappa)={p.omega / math.sqrt(p.d_strength * p.kappa or 1):.3g}, "
                     f"kappa/gamma={p.kappa:.3g}; effective master equation not expected to hold")
    lines += [c.line() for c in checks]
    summary = {"params": cfg.snapshot(), "n_traj": cfg.ntraj, "seed": cfg.seed, "dt": dt,
               "regime_ok": regime, "checks": [c.as_dict() for c in checks],
               "all_passed": all(c.passed for c in checks)}
    return lines, summary


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    cfg = parse_cli(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            if cfg.command in ("spectrum", "absorb"):
                _, code = run_spectrum(cfg, "fluorescence" if cfg.command == "spectrum" else "absorption")
                return code
            if cfg.command == "sweep":
                _, code = run_sweep(cfg)
                return code
            if cfg.command == "rates":
                rates = run_rates(cfg)
                text = "\n".join(f"{k:<12}{v:.12g}" for k, v in rates.items())
                print(text)
                if cfg.out:
                    lines = ["rate,value"] + [f"{k},{v:.17g}" for k, v in rates.items()]
                    return _write(_write_text, cfg.out, "\n".join(lines) + "\n")
                return EXIT_OK
        lines, summary = run_validate(cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # runtime failure inside the numerics
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO
    print("\n".join(lines))
    if cfg.out:
        code = _write(_write_text, cfg.out, json.dumps(summary, indent=2) + "\n")
        if code:
            return code
    else:
        print(json.dumps({"all_passed": summary["all_passed"]}))
    return EXIT_OK if summary["all_passed"] else EXIT_FAIL


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def run_manifest(manifest_path, out_dir) -> list[tuple[str, int]]:
    """Run every pinned command of a reference manifest, writing into ``out_dir``.

    The manifest is a JSON list of ``{"output": name, "argv": [...]}`` entries;
    ``--out`` is appended for each.  Returns ``(output, exit_code)`` pairs.
    """
    from pathlib import Path

    entries = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = []
    for entry in entries:
        target = out_dir / entry["output"]
        results.append((entry["output"], main(list(entry["argv"]) + ["--out", str(target)])))
    return results
