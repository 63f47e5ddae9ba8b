"""Command-line front end: ``qlin {gen,bounds,emit,solve,compare,oracle,check}``.

Exit status is 0 on success, 1 when compare/check raise expectation flags,
2 on bad input. Numbers are printed with 12 significant digits.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

from qlin.bnb import MilpConfig, solve_milp
from qlin.bounds import FIXED, FROBENIUS, GRID, BoundOptions, BoundSet, compute_bound_set
from qlin.errors import QlinError
from qlin.formats import FORMATS, MPS, emit_model
from qlin.instance import GeneratorConfig, generate_random, read_instance, save_instance
from qlin.models import VARIANTS, Cuts, add_cuts, build_model, lp_relaxation, theta_cuts
from qlin.oracle import (CompareOptions, compare_relaxations, enumerate_optimum, fmt, report_csv, run_checks,
                         workers_from_env)
from qlin.simplex import OPTIMAL, SimplexOptions, solve_arrays

COMMANDS = ("gen", "bounds", "emit", "solve", "compare", "oracle", "check")
CUT_NAMES = ("none", "base", "cond", "theta")
EXIT_OK, EXIT_FLAGGED, EXIT_INPUT = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    out: str | None = None
    variant: str = "bp-bar"
    cuts: str = "none"
    fmt: str = MPS
    conditional: bool = True
    enhanced: bool = False
    theta_mode: str = FROBENIUS
    eps: float = 1e-3
    theta: float | None = None
    seed: int = 0
    timing: bool = False
    relax: bool = False
    node_log: str | None = None
    gap: float = 1e-6
    feas_tol: float = 1e-7
    opt_tol: float = 1e-9
    # generator
    n: int = 6
    density: float = 0.5
    coeff_range: int = 10
    cardinality: int | None = None
    quad: bool = False
    side_rows: int = 0

    def validate(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.command != "gen" and not self.inputs:
            raise ValueError(f"{self.command} needs --in")
        for name in ("gap", "feas_tol", "opt_tol", "eps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"--{name.replace('_', '-')} must be positive")
        if self.theta_mode == FIXED and self.theta is None:
            raise ValueError("--theta-mode fixed needs --theta")

    def bound_options(self) -> BoundOptions:
        return BoundOptions(conditional=self.conditional, enhanced=self.enhanced, theta_mode=self.theta_mode,
                            theta=self.theta, eps=self.eps)

    def milp_config(self) -> MilpConfig:
        simplex = SimplexOptions(feas_tol=self.feas_tol, opt_tol=self.opt_tol)
        return MilpConfig(gap=self.gap, simplex=simplex)

    def cut_family(self) -> Cuts:
        return theta_cuts() if self.cuts == "theta" else Cuts(self.cuts)


def _vector(v) -> str:
    return "NA" if v is None else " ".join(fmt(a) for a in v)


def _emit(text: str, out: str | None, stdout: TextIO):
    if out:
        Path(out).write_text(text)
    else:
        stdout.write(text)


def _cmd_gen(cfg: RunConfig, stdout: TextIO) -> int:
    gen = GeneratorConfig(n=cfg.n, density=cfg.density, coeff_range=cfg.coeff_range, cardinality=cfg.cardinality,
                          with_quad_constraint=cfg.quad, seed=cfg.seed, side_rows=cfg.side_rows)
    _emit(save_instance(generate_random(gen)), cfg.out, stdout)
    return EXIT_OK


def _bounds_text(bs: BoundSet) -> str:
    lines = [f"theta {fmt(bs.theta)}"]
    forced = " ".join(f"x{i + 1}={v}" for i, v in sorted(bs.forced.items()))
    lines.append(f"forced {forced or 'none'}")
    for name in BoundSet.VECTOR_FIELDS:
        val = getattr(bs, name)
        if val is not None:
            lines.append(f"{name} {_vector(val)}")
    return "\n".join(lines) + "\n"


def _cmd_bounds(cfg: RunConfig, stdout: TextIO) -> int:
    inst = read_instance(cfg.inputs[0])
    _emit(_bounds_text(compute_bound_set(inst, cfg.bound_options())), cfg.out, stdout)
    return EXIT_OK


def _model(cfg: RunConfig):
    inst = read_instance(cfg.inputs[0])
    bs = compute_bound_set(inst, cfg.bound_options())
    return add_cuts(build_model(inst, bs, cfg.variant), inst, bs, cfg.cut_family())


def _cmd_emit(cfg: RunConfig, stdout: TextIO) -> int:
    _emit(emit_model(_model(cfg), cfg.fmt), cfg.out, stdout)
    return EXIT_OK


def _cmd_solve(cfg: RunConfig, stdout: TextIO) -> int:
    model = _model(cfg)
    mcfg = cfg.milp_config()
    if cfg.relax:
        lp = solve_arrays(*lp_relaxation(model).dense_arrays(), options=mcfg.simplex)
        lines = [f"status {lp.status.lower()}"]
        if lp.status == OPTIMAL:
            lines.append(f"objective {fmt(lp.objective + float(model.constant))}")
            lines.append("x " + " ".join(fmt(lp.x[j]) for j in model.x_indices))
        _emit("\n".join(lines) + "\n", cfg.out, stdout)
        return EXIT_OK
    if cfg.node_log:
        with open(cfg.node_log, "w") as log:
            sol = solve_milp(model, mcfg, log)
    else:
        sol = solve_milp(model, mcfg)
    lines = [f"status {sol.status.lower()}"]
    if sol.objective is not None:
        lines.append(f"objective {fmt(sol.objective)}")
        lines.append("x (" + ",".join(str(v) for v in sol.x) + ")")
    lines.append(f"root_bound {fmt(sol.root_bound)}")
    lines.append(f"best_bound {fmt(sol.best_bound)}")
    lines.append(f"nodes {sol.nodes}")
    _emit("\n".join(lines) + "\n", cfg.out, stdout)
    return EXIT_OK


def _cmd_compare(cfg: RunConfig, stdout: TextIO, stderr: TextIO) -> int:
    opts = CompareOptions(bounds=cfg.bound_options(), timing=cfg.timing, workers=workers_from_env(1),
                          milp=cfg.milp_config())
    reports = []
    for path in cfg.inputs:
        inst = read_instance(path)
        reports.append(compare_relaxations(inst, opts, instance_id=Path(path).stem))
    _emit(report_csv(reports), cfg.out, stdout)
    flags = [f"{r.instance_id}: {f}" for r in reports for f in r.flags]
    for f in flags:
        stderr.write(f"flag {f}\n")
    return EXIT_FLAGGED if flags else EXIT_OK


def _cmd_oracle(cfg: RunConfig, stdout: TextIO) -> int:
    res = enumerate_optimum(read_instance(cfg.inputs[0]))
    if res.status != OPTIMAL:
        lines = ["infeasible"]
    else:
        lines = [f"optimal {fmt(res.objective)}"]
        lines += ["argmin (" + ",".join(str(v) for v in x) + ")" for x in res.argmins]
    lines.append(f"feasible_points {res.feasible_count}")
    _emit("\n".join(lines) + "\n", cfg.out, stdout)
    return EXIT_OK


def _cmd_check(cfg: RunConfig, stdout: TextIO) -> int:
    flags = []
    for path in cfg.inputs:
        inst = read_instance(path)
        flags += [f"{Path(path).stem}: {f}" for f in run_checks(inst, cfg.bound_options(), cfg.milp_config())]
    text = "".join(f"flag {f}\n" for f in flags) or "ok\n"
    _emit(text, cfg.out, stdout)
    return EXIT_FLAGGED if flags else EXIT_OK


def run(cfg: RunConfig, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    """Execute one command; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg.validate()
        if cfg.command == "gen":
            return _cmd_gen(cfg, stdout)
        if cfg.command == "bounds":
            return _cmd_bounds(cfg, stdout)
        if cfg.command == "emit":
            return _cmd_emit(cfg, stdout)
        if cfg.command == "solve":
            return _cmd_solve(cfg, stdout)
        if cfg.command == "compare":
            return _cmd_compare(cfg, stdout, stderr)
        if cfg.command == "oracle":
            return _cmd_oracle(cfg, stdout)
        return _cmd_check(cfg, stdout)
    except (QlinError, ValueError, OSError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="inputs", action="append", default=[], metavar="PATH",
                        help="instance JSON (repeatable for compare/check)")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--seed", type=int, default=0)

    bnd = argparse.ArgumentParser(add_help=False)
    bnd.add_argument("--conditional", action=argparse.BooleanOptionalAction, default=True,
                     help="compute conditional bounds (default on)")
    bnd.add_argument("--enhanced", action="store_true", help="compute gamma/w over the enhanced region")
    bnd.add_argument("--theta-mode", choices=(FROBENIUS, GRID, FIXED), default=FROBENIUS)
    bnd.add_argument("--theta", type=float, help="multiplier for --theta-mode fixed")
    bnd.add_argument("--eps", type=float, default=1e-3, help="lower clamp for theta")

    mdl = argparse.ArgumentParser(add_help=False)
    mdl.add_argument("--variant", choices=[v.value for v in VARIANTS], default="bp-bar")
    mdl.add_argument("--cuts", choices=CUT_NAMES, default="none")

    tol = argparse.ArgumentParser(add_help=False)
    tol.add_argument("--gap", type=float, default=1e-6, help="relative optimality gap")
    tol.add_argument("--feas-tol", type=float, default=1e-7)
    tol.add_argument("--opt-tol", type=float, default=1e-9)

    parser = argparse.ArgumentParser(prog="qlin",
                                     description="Linearize, solve and cross-check zero-one quadratic programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", parents=[common], help="write a random instance")
    gen.add_argument("--n", type=int, default=6)
    gen.add_argument("--density", type=float, default=0.5)
    gen.add_argument("--coeff-range", type=int, default=10)
    gen.add_argument("--cardinality", type=int)
    gen.add_argument("--quad", action="store_true", help="include a quadratic constraint")
    gen.add_argument("--side-rows", type=int, default=0)

    sub.add_parser("bounds", parents=[common, bnd], help="print the bound parameters")
    emit = sub.add_parser("emit", parents=[common, bnd, mdl], help="write a model as MPS or LP text")
    emit.add_argument("--format", dest="fmt", choices=FORMATS, default=MPS)
    solve = sub.add_parser("solve", parents=[common, bnd, mdl, tol], help="solve a model")
    solve.add_argument("--relax", action="store_true", help="solve the LP relaxation only")
    solve.add_argument("--node-log", help="write one line per branch-and-bound node")
    compare = sub.add_parser("compare", parents=[common, bnd, tol], help="CSV of bounds for every variant")
    compare.add_argument("--timing", action="store_true", help="fill the millis column")
    sub.add_parser("oracle", parents=[common], help="brute-force optimum")
    sub.add_parser("check", parents=[common, bnd, tol], help="run every invariant check")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    known = set(RunConfig.__dataclass_fields__)
    return RunConfig(**{k: v for k, v in vars(ns).items() if k in known})


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
