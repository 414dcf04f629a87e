"""Command line: ``floatdecay {kernel,simulate,validate,compat,energy} [options] [key=value ...]``.

Configuration files hold one ``key=value`` pair per line with ``#``
comments; inline ``key=value`` arguments override the file.  Every
subcommand writes CSV files into ``--out`` (17 significant digits).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import exterior_field, kernel, solid_motion
from .solid_motion import ConfigurationError, PhysicalParams

logger = logging.getLogger(__name__)

MODES = ("nonlinear", "linear", "both")
KERNEL_HEADER = ("t", "F0", "F_phys", "tail_flag")
_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


class ConfigError(ValueError):
    """Malformed or invalid configuration."""


@dataclass(frozen=True)
class RunConfig:
    rho: float = 1000.0
    rho_m: float = 500.0
    h0: float = 15.0
    R: float = 10.0
    H: float = 10.0
    g: float = 9.81
    delta0: float | None = None
    delta1: float = 0.0
    T: float = 40.0
    tol: float = 1e-8
    mode: str = "nonlinear"
    exterior_head: bool = True
    override: bool = False
    # kernel quadrature
    c_bromwich: float = 1.0
    omega_max: float = 4000.0
    kernel_t_max: float = 200.0
    kernel_dt: float = 0.025
    # convolution
    dt_conv: float = solid_motion.DT_CONV
    window: int = solid_motion.CONV_WINDOW
    # exterior oracle grid
    dr: float = exterior_field.DEFAULT_DR
    cfl: float = exterior_field.DEFAULT_CFL

    @property
    def physical(self) -> PhysicalParams:
        return PhysicalParams(self.rho, self.rho_m, self.h0, self.R, self.H, self.g)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_BOOL_KEYS = {"exterior_head", "override"}
_INT_KEYS = {"window"}


def _convert(key: str, raw: str):
    if key in _BOOL_KEYS:
        low = raw.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if key == "mode":
        if raw not in MODES:
            raise ValueError(f"mode must be one of {', '.join(MODES)}")
        return raw
    if key in _INT_KEYS:
        return int(raw)
    value = float(raw)
    if not math.isfinite(value):
        raise ValueError(f"{raw!r} is not finite")
    return value


def _parse_pairs(lines, source: str) -> dict:
    values, seen = {}, {}
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{source} line {lineno}: expected key=value, got {text!r}")
        key, raw = (part.strip() for part in text.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"{source} line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"{source} line {lineno}: duplicate key {key!r} (first set on line {seen[key]})")
        try:
            values[key] = _convert(key, raw)
        except ValueError as exc:
            raise ConfigError(f"{source} line {lineno}: bad value for {key}: {exc}") from None
        seen[key] = lineno
    return values


def validate(cfg: RunConfig, require_delta0: bool = True) -> RunConfig:
    """Check physical invariants and numeric settings; return ``cfg``."""
    try:
        cfg.physical
    except ConfigurationError as exc:
        raise ConfigError(f"invalid physical parameters: {exc}") from None
    if require_delta0 and cfg.delta0 is None:
        raise ConfigError("delta0 missing")
    for name in ("T", "tol", "c_bromwich", "omega_max", "kernel_t_max", "kernel_dt", "dt_conv", "dr", "cfl"):
        if not getattr(cfg, name) > 0:
            raise ConfigError(f"{name} must be positive")
    if cfg.window < 1:
        raise ConfigError("window must be at least 1")
    if cfg.cfl > exterior_field.CFL_MAX:
        raise ConfigError(f"cfl must not exceed {exterior_field.CFL_MAX}")
    return cfg


def parse_config(text: str, overrides=(), require_delta0: bool = True) -> RunConfig:
    """Parse ``key=value`` text, apply ``overrides`` (same syntax), validate."""
    values = _parse_pairs(text.splitlines(), "config")
    values.update(_parse_pairs(overrides, "override"))
    return validate(RunConfig(**values), require_delta0)


def format_config(cfg: RunConfig) -> str:
    """Text that :func:`parse_config` maps back to ``cfg``."""
    lines = []
    for name in _FIELDS:
        value = getattr(cfg, name)
        if value is None:
            continue
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{name}={value}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    return "" if math.isnan(x) else f"{x:.17g}"


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def write_trace(path: Path, trace: solid_motion.SimTrace) -> None:
    write_csv(path, solid_motion.TRACE_COLUMNS, trace.rows())


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def kernel_table(cfg: RunConfig) -> kernel.KernelTable:
    """Dimensionless kernel table for the quadrature settings in ``cfg``."""
    if cfg.omega_max == 4000.0:
        return kernel.default_table(cfg.kernel_t_max, cfg.kernel_dt, cfg.c_bromwich)
    n = int(round(cfg.kernel_t_max / cfg.kernel_dt))
    params = kernel.KernelParams(c_bromwich=cfg.c_bromwich, omega_max=cfg.omega_max)
    return kernel.invert_bromwich(params, cfg.kernel_dt * np.arange(n + 1))


def _check_admissible(cfg: RunConfig, table) -> None:
    p = cfg.physical
    dc = solid_motion.derived_constants(p)
    adm = solid_motion.admissibility(p, dc, table.rescaled(dc.R, dc.v0), cfg.delta0)
    if not adm.admissible and not cfg.override:
        raise ConfigError(f"delta0={cfg.delta0} is not admissible (margins: h_w {adm.margin_hw:.6g} m, "
                          f"h_e {adm.margin_he:.6g} m); set override=true to run anyway")


def _simulate(cfg: RunConfig, mode: str, table):
    return solid_motion.simulate(cfg.physical, cfg.delta0, cfg.T, cfg.tol, mode, table=table,
                                 dt_conv=cfg.dt_conv, window=cfg.window, override=cfg.override,
                                 exterior_head=cfg.exterior_head)


def _cosimulate(cfg: RunConfig, mode: str):
    p = cfg.physical
    dt = cfg.cfl * cfg.dr / math.sqrt(p.g * p.h0)
    return exterior_field.cosimulate(p, cfg.delta0, cfg.T, dt, dr=cfg.dr, mode=mode,
                                     exterior_head=cfg.exterior_head, override=cfg.override)


def _single_mode(cfg: RunConfig, command: str) -> str:
    if cfg.mode == "both":
        raise ConfigError(f"mode=both is only available for simulate, not {command}")
    return cfg.mode


def cmd_kernel(cfg: RunConfig, out: Path) -> None:
    table = kernel_table(cfg)
    p = cfg.physical
    tau = p.R / math.sqrt(p.g * p.h0)
    t = table.times
    rows = zip(t, table(t), table(t / tau), table.tail_mask().astype(int))
    write_csv(out / "kernel.csv", KERNEL_HEADER, rows)
    print(f"kernel: {len(t)} samples, t_tail={table.t_tail:.6g}, integral={table.integral():.8f}")


def cmd_simulate(cfg: RunConfig, out: Path) -> None:
    table = kernel_table(cfg)
    _check_admissible(cfg, table)
    modes = ("nonlinear", "linear") if cfg.mode == "both" else (cfg.mode,)
    traces = {}
    for mode in modes:
        traces[mode] = _simulate(cfg, mode, table)
        write_trace(out / f"simulate_{mode}.csv", traces[mode])
        print(f"simulate {mode}: {len(traces[mode])} steps, delta(T)={traces[mode].delta[-1]:.6g}")
    if len(traces) == 2 and cfg.delta0 != 0:
        a, b = traces["nonlinear"], traces["linear"]
        t = np.union1d(a.t, b.t)
        gap = float(np.max(np.abs(a.interpolate(t) - b.interpolate(t)))) / abs(cfg.delta0)
        print(f"nonlinear vs linear: max |difference| / delta0 = {gap:.6g}")


def cmd_validate(cfg: RunConfig, out: Path) -> None:
    mode = _single_mode(cfg, "validate")
    table = kernel_table(cfg)
    _check_admissible(cfg, table)
    conv = _simulate(cfg, mode, table)
    oracle, _ = _cosimulate(cfg, mode)
    write_trace(out / "validate_convolution.csv", conv)
    write_trace(out / "validate_oracle.csv", oracle)
    scale = abs(cfg.delta0) or 1.0
    gap = float(np.max(np.abs(conv.interpolate(oracle.t) - oracle.delta))) / scale
    e_scale = 0.5 * solid_motion.derived_constants(cfg.physical).c_hydro * cfg.delta0 ** 2 or 1.0
    drift = float(np.max(np.abs(oracle.E_tot - oracle.E_tot[0]))) / e_scale
    print(f"validate: L-inf discrepancy / delta0 = {gap:.6g}, energy drift / (c delta0^2 / 2) = {drift:.6g}")


def cmd_energy(cfg: RunConfig, out: Path) -> None:
    mode = _single_mode(cfg, "energy")
    _check_admissible(cfg, kernel_table(cfg))
    trace, _ = _cosimulate(cfg, mode)
    write_trace(out / "energy.csv", trace)
    e_scale = 0.5 * solid_motion.derived_constants(cfg.physical).c_hydro * cfg.delta0 ** 2 or 1.0
    drift = float(np.max(np.abs(trace.E_tot - trace.E_tot[0]))) / e_scale
    print(f"energy: E_tot(0)={trace.E_tot[0]:.10g} J, max drift / (c delta0^2 / 2) = {drift:.6g}")


def compat_report(cfg: RunConfig) -> str:
    p = cfg.physical
    dc = solid_motion.derived_constants(p)
    r0, r1 = solid_motion.compatibility_check(p, dc, cfg.delta0, cfg.delta1)

    def status(r):
        return "satisfied" if r == 0.0 else f"residual = {r:.17g}"

    return f"order 0: {status(r0)}, order 1: {status(r1)}"


def cmd_compat(cfg: RunConfig, out: Path) -> None:
    p = cfg.physical
    dc = solid_motion.derived_constants(p)
    r0, r1 = solid_motion.compatibility_check(p, dc, cfg.delta0, cfg.delta1)
    write_csv(out / "compat.csv", ("order", "residual"), [(0, r0), (1, r1)])
    print(compat_report(cfg))


COMMANDS = {
    "kernel": cmd_kernel,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
    "compat": cmd_compat,
    "energy": cmd_energy,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="floatdecay", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("overrides", nargs="*", metavar="key=value", help="configuration overrides")
    parser.add_argument("--config", type=Path, help="key=value configuration file")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    parser.add_argument("--mode", choices=MODES, help="shorthand for mode=...")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_intermixed_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        text = args.config.read_text() if args.config else ""
        overrides = list(args.overrides)
        if args.mode:
            overrides.insert(0, f"mode={args.mode}")
        cfg = parse_config(text, overrides, require_delta0=args.command != "kernel")
        args.out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, args.out)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
