"""Command-line front end: ``graze-cont <command> --config <path> [--out <path>]``.

Configuration files are flat ``key = value`` lines with ``#`` comments.
Every command writes UTF-8 CSV with 17 significant digits, so identical
configurations give byte-identical files.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure
(partial output is kept).
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

from . import selftest as _selftest
from .continuation import (GRAZE, GRAZE2, PD, SN, BranchPoint, ContinuationConfig,
                           branch_from_impact, continue_branch, detect_all_codim1,
                           detect_secondary_grazing, detect_secondary_on_branch,
                           detect_codim1, grazing_curve, grazing_points, polish,
                           seed_by_simulation, trace_both_ways)
from .errors import GrazeContError, StepFailed
from .maps import LOOP_RULES, CrossingSolverConfig
from .oscillator import ModelParams, z_graz
from .points import wrap_phase
from .vivid import NORMS, NewtonConfig

log = logging.getLogger("grazecont")

COMMANDS = ("graze", "seed", "branch", "codim2", "selftest")
BRANCH_HEADER = "step,y_imp,z_imp,amp,omega,l1_re,l1_im,l2_re,l2_im,stable,virtual"
BIF_HEADER = "kind,omega,amp,y_imp,z_imp"
GRAZE_HEADER = "omega,a_graz,z_graz"
CURVE_KINDS = (PD, SN, GRAZE, GRAZE2)


class ConfigError(ValueError):
    """Malformed or invalid configuration."""


@dataclass(frozen=True)
class RunConfig:
    # model
    zeta: float = 0.02
    eps: float = 0.9
    omega: float = 0.81
    amp: float = 0.355
    # method
    p_loops: int = 2
    dy_imp: float = 1e-4
    newton_tol: float = 1e-10
    newton_max_iter: int = 20
    newton_norm: str = "max"
    time_tol: float = 1e-12
    bif_tol: float = 1e-8
    loop_rule: str = "period"
    # run
    command: str = ""
    output_path: str = ""
    omega_min: float = 0.75
    omega_max: float = 1.05
    domega: float = 1e-3
    n_steps: int = 100
    seed_y_imp: float | None = None
    seed_z_imp: float | None = None
    transient_steps: int = 600
    sim_steps: int = 40
    # codim2 seeds, one regime per curve kind
    kinds: str = "PD,SN,GRAZE,GRAZE2"
    pd_omega: float = 0.81
    pd_amp: float = 0.355
    sn_omega: float = 0.799
    sn_amp: float = 0.368
    graze2_omega: float = 0.81
    graze2_amp: float = 0.355
    graze2_dy: float = 0.02

    def params(self, omega=None, amp=None) -> ModelParams:
        try:
            return ModelParams(self.zeta, self.eps,
                               self.omega if omega is None else omega,
                               self.amp if amp is None else amp)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def continuation(self) -> ContinuationConfig:
        return ContinuationConfig(
            newton=NewtonConfig(tol=self.newton_tol, max_iter=self.newton_max_iter,
                                norm=self.newton_norm),
            crossing=CrossingSolverConfig(time_tol=self.time_tol, loop_rule=self.loop_rule),
            bif_tol=self.bif_tol,
        )

    def curve_kinds(self):
        kinds = [k.strip().upper() for k in self.kinds.split(",") if k.strip()]
        bad = [k for k in kinds if k not in CURVE_KINDS]
        if bad:
            raise ConfigError(f"unknown curve kind(s) {bad}; expected {CURVE_KINDS}")
        return kinds


_INT_KEYS = {"p_loops", "newton_max_iter", "n_steps", "transient_steps", "sim_steps"}
_STR_KEYS = {"command", "output_path", "loop_rule", "kinds", "newton_norm"}


def _parse_number(key, text):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{key}: {text!r} is not a number") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: value must be finite")
    if key in _INT_KEYS:
        if value != int(value):
            raise ConfigError(f"{key}: expected an integer, got {text!r}")
        return int(value)
    return value


def parse_config(text: str) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value if key in _STR_KEYS else _parse_number(key, value)
    cfg = RunConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    cfg.params()
    for key in ("omega_min", "omega_max", "domega", "newton_tol", "time_tol", "bif_tol",
                "graze2_dy"):
        if getattr(cfg, key) <= 0:
            raise ConfigError(f"{key} must be positive")
    if cfg.omega_min > cfg.omega_max:
        raise ConfigError("omega_min must not exceed omega_max")
    if cfg.dy_imp == 0:
        raise ConfigError("dy_imp must be nonzero")
    for key in ("p_loops", "newton_max_iter"):
        if getattr(cfg, key) < 1:
            raise ConfigError(f"{key} must be >= 1")
    if cfg.n_steps < 0:
        raise ConfigError("n_steps must be >= 0")
    if cfg.newton_norm not in NORMS:
        raise ConfigError(f"newton_norm must be one of {NORMS}")
    if cfg.loop_rule not in LOOP_RULES:
        raise ConfigError(f"loop_rule must be one of {LOOP_RULES}")
    if (cfg.seed_y_imp is None) != (cfg.seed_z_imp is None):
        raise ConfigError("seed_y_imp and seed_z_imp must be given together")
    if cfg.command and cfg.command not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}")
    cfg.curve_kinds()


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


# -- CSV formatting -------------------------------------------------------------

def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    return f"{float(value):.17g}"


def branch_row(step: int, bp: BranchPoint) -> str:
    if bp.lambda1 is None:
        mult = [None] * 4
    else:
        mult = [bp.lambda1.real, bp.lambda1.imag, bp.lambda2.real, bp.lambda2.imag]
    cells = [step, bp.y_imp, wrap_phase(bp.z_imp), bp.amp, bp.omega, *mult,
             bp.stable, bp.virtual]
    return ",".join(fmt(c) for c in cells)


def bif_row(bp) -> str:
    return ",".join([bp.kind] + [fmt(v) for v in (bp.omega, bp.amp, bp.y_imp,
                                                    wrap_phase(bp.z_imp))])


def write_csv(path: Path, header: str, rows):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(row + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc.strerror}") from None
    log.info("wrote %s", path)


def sidecar(path: Path, suffix: str) -> Path:
    return path.with_name(f"{path.stem}_{suffix}{path.suffix or '.csv'}")


# -- commands -------------------------------------------------------------------

def cmd_graze(cfg: RunConfig, out: Path) -> int:
    rows = [",".join(fmt(v) for v in (w, a, z_graz(w, cfg.zeta)))
            for w, a in grazing_curve(cfg.omega_min, cfg.omega_max, cfg.n_steps, cfg.zeta)]
    write_csv(out, GRAZE_HEADER, rows)
    return 0


def _seed(cfg: RunConfig, params: ModelParams, ccfg: ContinuationConfig) -> BranchPoint:
    if cfg.seed_y_imp is not None:
        return polish(cfg.seed_y_imp, cfg.seed_z_imp, params.amp, params, cfg.p_loops, ccfg)
    imp = seed_by_simulation(params, cfg.p_loops, cfg.sim_steps, cfg.transient_steps,
                             crossing=ccfg.crossing)
    return branch_from_impact(imp, params, cfg.p_loops, ccfg)


def cmd_seed(cfg: RunConfig, out: Path) -> int:
    ccfg = cfg.continuation()
    bp = _seed(cfg, cfg.params(), ccfg)
    write_csv(out, BRANCH_HEADER, [branch_row(0, bp)])
    return 0


def cmd_branch(cfg: RunConfig, out: Path) -> int:
    ccfg = cfg.continuation()
    params = cfg.params()
    seed = _seed(cfg, params, ccfg)
    status = 0
    try:
        branch = continue_branch(seed, cfg.dy_imp, cfg.n_steps, params, cfg.p_loops, ccfg)
    except StepFailed as exc:
        log.error("%s", exc)
        branch, status = exc.partial, 2
    write_csv(out, BRANCH_HEADER, [branch_row(i, bp) for i, bp in enumerate(branch)])
    bifs = []
    for kind in (PD, SN):
        try:
            bifs.extend(detect_all_codim1(branch, kind, params, cfg.p_loops, ccfg))
        except GrazeContError as exc:
            log.error("refining %s failed: %s", kind, exc)
            status = 2
    bifs.sort(key=lambda b: -math.copysign(1.0, cfg.dy_imp) * b.y_imp)
    write_csv(sidecar(out, "bif"), BIF_HEADER, [bif_row(b) for b in bifs])
    return status


def _towards_grazing(cfg, params, ccfg):
    seed = _seed(cfg, params, ccfg)
    dy = -abs(cfg.dy_imp)
    n = max(1, int(seed.y_imp / abs(cfg.dy_imp)) - 1)
    return continue_branch(seed, dy, n, params, cfg.p_loops, ccfg)


def _curve_start(kind, cfg: RunConfig, ccfg):
    if kind in (PD, SN):
        om, amp = (cfg.pd_omega, cfg.pd_amp) if kind == PD else (cfg.sn_omega, cfg.sn_amp)
        params = cfg.params(om, amp)
        branch = _towards_grazing(cfg, params, ccfg)
        return detect_codim1(branch, kind, params, cfg.p_loops, ccfg), params
    params = cfg.params(cfg.graze2_omega, cfg.graze2_amp)
    seed = _seed(cfg, params, ccfg)
    g0 = detect_secondary_grazing(seed, params, cfg.p_loops, ccfg)
    sign = 1.0 if g0 < 0 else -1.0
    branch = continue_branch(
        seed, sign * cfg.graze2_dy, 10_000, params, cfg.p_loops, ccfg,
        until=lambda bp: sign * detect_secondary_grazing(bp, params, cfg.p_loops, ccfg) >= 0)
    return detect_secondary_on_branch(branch, params, cfg.p_loops, ccfg), params


def cmd_codim2(cfg: RunConfig, out: Path) -> int:
    ccfg = cfg.continuation()
    status = 0
    for kind in cfg.curve_kinds():
        path = sidecar(out, kind.lower())
        if kind == GRAZE:
            pts = grazing_points(cfg.omega_min, cfg.omega_max, cfg.n_steps, cfg.zeta)
            write_csv(path, BIF_HEADER, [bif_row(b) for b in pts])
            continue
        try:
            start, params = _curve_start(kind, cfg, ccfg)
            pts, reasons = trace_both_ways(start, kind, cfg.domega, params, cfg.p_loops,
                                           ccfg, cfg.omega_min, cfg.omega_max)
        except GrazeContError as exc:
            log.error("%s curve failed: %s", kind, exc)
            status = 2
            pts, reasons = [], ("failed", "failed")
        log.info("%s curve: %d points, low end %s, high end %s",
                 kind, len(pts), *reasons)
        if pts:
            pts[0] = _annotate(pts[0], reasons[0])
            pts[-1] = _annotate(pts[-1], reasons[1])
        write_csv(path, BIF_HEADER, [bif_row(b) for b in pts])
        write_csv(sidecar(path, "stop"), "end,omega,stop_reason",
                  [f"low,{fmt(pts[0].omega) if pts else ''},{reasons[0]}",
                   f"high,{fmt(pts[-1].omega) if pts else ''},{reasons[1]}"])
    return status


def _annotate(bp, reason):
    return replace(bp, note=bp.note or reason)


def cmd_selftest(cfg: RunConfig, out: Path | None) -> int:
    results = _selftest.run_all(cfg)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}")
    if out is not None:
        write_csv(out, "check,passed,detail",
                  [f"{r.name},{fmt(r.passed)},{r.detail.replace(',', ';')}" for r in results])
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("failed: " + " ".join(failed), file=sys.stderr)
        return 2
    return 0


HANDLERS = {"graze": cmd_graze, "seed": cmd_seed, "branch": cmd_branch,
            "codim2": cmd_codim2, "selftest": cmd_selftest}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="graze-cont",
                     description="Continuation of maximal periodic orbits of an impact "
                                 "oscillator through grazing.")
    parser.add_argument("command", choices=COMMANDS + ("run",),
                        help="what to compute ('run' takes it from the config)")
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--out", help="output CSV (overrides output_path)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.config is None and args.command != "selftest":
            raise ConfigError("--config is required for this command")
        command = args.command
        if command == "run":
            if not cfg.command:
                raise ConfigError("'run' needs a command key in the config")
            command = cfg.command
        out = args.out or cfg.output_path or None
        if out is None and command != "selftest":
            out = f"{command}.csv"
        return HANDLERS[command](cfg, Path(out) if out else None)
    except ConfigError as exc:
        print(f"graze-cont: {exc}", file=sys.stderr)
        return 1
    except GrazeContError as exc:
        print(f"graze-cont: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
