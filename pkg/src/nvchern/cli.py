"""Command-line front end: ``nvchern <command> [flags]``.

Radii and offsets on the command line are normalized by the hyperfine
constant (H_r/A_par, H_0/A_par); A_par itself is given in ordinary Hz.
Exit codes: 0 success, 1 computation failure, 2 bad flags or out-of-domain
input.

Defaults can be put in a ``key = value`` file passed with ``--config`` or
named by the ``NVCHERN_CONFIG`` environment variable; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, fields

from .dynamics import DegenerateInitError, InitPolicy, PropagationSettings, landau_zener_scan, run_nv_sweep
from .models import DomainError, NormalizedPoint, NVModel, project_to_three_qubit, sweep_from_normalized
from .phasemap import (
    AxisSpec,
    export_csv,
    export_json,
    export_svg_heatmap,
    fmt_float,
    radial_projection,
    sweep_grid,
    to_csv,
)
from .topology import (
    DegeneracyError,
    chern_dynamic,
    chern_fhs_nv,
    curvature_from_trace,
    integrate_chern,
    monopole_count_nv,
)

CONFIG_ENV = "NVCHERN_CONFIG"


@dataclass
class RunConfig:
    a_par_hz: float = 2.2e6
    alpha: float = 2.0
    dt_s: float = 1e-9
    n_theta: int = 181
    init: str = "ground"
    jobs: int = 1

    def validate(self):
        for name in ("a_par_hz", "alpha", "dt_s", "n_theta", "jobs"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.init not in ("ground", "electron-zero"):
            raise ValueError(f"init must be 'ground' or 'electron-zero', got {self.init!r}")

    @property
    def a_par(self) -> float:
        return 2 * math.pi * self.a_par_hz

    @property
    def settings(self) -> PropagationSettings:
        return PropagationSettings(dt=self.dt_s, n_theta=self.n_theta)

    @property
    def init_policy(self) -> InitPolicy:
        return InitPolicy(self.init)


def read_config(path) -> dict:
    """Parse a ``key = value`` file; ``#`` starts a comment."""
    types = {f.name: f.type for f in fields(RunConfig)}
    casts = {"float": float, "int": int, "str": str}
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = casts[types[key]](value)
    return out


def build_config(args) -> RunConfig:
    cfg = RunConfig()
    path = args.config or os.environ.get(CONFIG_ENV)
    if path:
        for key, value in read_config(path).items():
            setattr(cfg, key, value)
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(cfg, f.name, value)
    cfg.validate()
    return cfg


def _sectors(text: str) -> tuple[int, ...]:
    try:
        labels = tuple(int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"sectors must be a comma list drawn from -1,0,1, got {text!r}") from None
    if not labels or any(m not in (-1, 0, 1) for m in labels):
        raise argparse.ArgumentTypeError(f"sectors must be drawn from -1,0,1, got {text!r}")
    return labels


def _floats(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _axis(text: str) -> AxisSpec:
    try:
        return AxisSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common(p: argparse.ArgumentParser, alpha=True):
    p.add_argument("--config", help=f"key = value config file (default: ${CONFIG_ENV})")
    p.add_argument("--a-par-hz", dest="a_par_hz", type=float, help="hyperfine constant A_par/2pi in Hz (default 2.2e6)")
    if alpha:
        p.add_argument("--alpha", type=float, help="adiabaticity parameter omega1*T_ramp/2pi (default 2)")
    p.add_argument("--dt", dest="dt_s", type=float, help="propagation time step in seconds (default 1e-9)")
    p.add_argument("--ntheta", dest="n_theta", type=int, help="number of theta records on [0, pi] (default 181)")
    p.add_argument("--init", choices=["ground", "electron-zero"], help="initial state policy (default ground)")


def _point(p: argparse.ArgumentParser):
    p.add_argument("--hr", type=float, required=True, help="normalized sphere radius H_r/A_par (dimensionless)")
    p.add_argument("--h0", type=float, required=True, help="normalized sphere offset H_0/A_par (dimensionless)")
    p.add_argument("--sectors", type=_sectors, default=(-1, 0, 1), help="nuclear sectors m to include (default -1,0,1)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nvchern", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("berry", help="Berry curvature trace and dynamic Chern number at one point")
    _point(p)
    _common(p)
    p.add_argument("--out", help="curvature CSV path (default: CSV on stdout, summary on stderr)")

    p = sub.add_parser("chern", help="Chern number at one point by a chosen method")
    _point(p)
    _common(p)
    p.add_argument("--method", choices=["dynamic", "fhs", "count"], default="dynamic")
    p.add_argument("--json", dest="json_out", help="write the result as JSON to this path")

    p = sub.add_parser("phase-diagram", help="Chern map over a 2-D normalized grid")
    p.add_argument("--system", choices=["nv", "3q"], default="nv")
    p.add_argument("--x", type=_axis, required=True, help="x axis start:stop:count (nv: H_0/A_par, 3q: g/H_r')")
    p.add_argument("--y", type=_axis, required=True, help="y axis start:stop:count (nv: H_r/A_par, 3q: H_0'/H_r')")
    p.add_argument("--method", choices=["dynamic", "fhs", "count"], default="count")
    _common(p)
    p.add_argument("--jobs", type=int, help="parallel worker processes (default 1)")
    p.add_argument("--out", help="grid CSV path (default stdout)")
    p.add_argument("--svg", help="also write an SVG heatmap here")
    p.add_argument("--json", dest="json_out", help="also write JSON here")
    p.add_argument("--width", type=int, default=640, help="SVG width in px")
    p.add_argument("--height", type=int, default=480, help="SVG height in px")

    p = sub.add_parser("lz", help="Landau-Zener ground-state survival versus alpha")
    _point(p)
    _common(p, alpha=False)
    p.add_argument("--alphas", type=_floats, required=True, help="comma list of adiabaticity parameters")
    p.add_argument("--out", help="CSV path (default stdout)")

    p = sub.add_parser("project", help="map an NV point (H_r/A_par, H_0/A_par) to three-qubit (g', H_0')")
    p.add_argument("--hr", type=float, default=1.0, help="normalized radius H_r/A_par (dimensionless)")
    p.add_argument("--h0", type=float, required=True, help="normalized offset H_0/A_par in [-0.5, 1.5]")

    p = sub.add_parser("radial", help="dynamic NV Chern numbers along radial cuts in three-qubit coordinates")
    p.add_argument("--h0-list", dest="h0_list", type=_floats, default=[0, 0.23, 0.45, 0.68, 0.91],
                   help="normalized offsets H_0/A_par, one curve each")
    p.add_argument("--hr", type=_axis, default=AxisSpec(0.22, 2.2, 20), help="radius axis start:stop:count (H_r/A_par)")
    _common(p)
    p.add_argument("--jobs", type=int, help="parallel worker processes (default 1)")
    p.add_argument("--out", help="CSV path (default stdout)")
    return parser


def _emit(text: str, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_berry(args, cfg: RunConfig) -> int:
    model = NVModel(a_par=cfg.a_par, sector_labels=args.sectors)
    sweep = sweep_from_normalized(NormalizedPoint(args.hr, args.h0), cfg.alpha, cfg.a_par)
    trace = run_nv_sweep(model, sweep, cfg.init_policy, cfg.settings)
    curv = curvature_from_trace(trace)
    res = integrate_chern(curv)
    extra = {}
    for m in (-1, 0, 1):
        name = f"sy_m{m:+d}" if m else "sy_m0"
        extra[name] = trace.sy[trace.labels.index(m)] if m in trace.labels else [math.nan] * len(curv.theta_grid)
    text = to_csv(curv, extra)
    summary = f"C = {fmt_float(res.value)} (dynamic, alpha={fmt_float(cfg.alpha)})"
    if args.out:
        _emit(text, args.out)
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)
    return 0


def cmd_chern(args, cfg: RunConfig) -> int:
    point = NormalizedPoint(args.hr, args.h0)
    model = NVModel(a_par=cfg.a_par, sector_labels=args.sectors)
    if args.method == "count":
        res = monopole_count_nv(point, model.sector_labels)
    elif args.method == "fhs":
        res = chern_fhs_nv(point, model)
    else:
        res = chern_dynamic(point, cfg.alpha, model, cfg.settings, cfg.init_policy)
    method = {"count": "monopole-count"}.get(args.method, args.method)
    doc = {
        "value": res.value,
        "method": method,
        "h_r_tilde": args.hr,
        "h0_tilde": args.h0,
        "alpha": cfg.alpha if method == "dynamic" else None,
        "min_gap": None if math.isnan(res.min_gap) else res.min_gap,
        "refinement_delta": None if math.isnan(res.refinement_delta) else res.refinement_delta,
        "boundary": res.boundary,
    }
    print(f"C = {fmt_float(res.value)} ({method})")
    text = json.dumps(doc, sort_keys=True)
    if args.json_out:
        _emit(text + "\n", args.json_out)
    else:
        print(text)
    return 0


def cmd_phase_diagram(args, cfg: RunConfig) -> int:
    system = "nv" if args.system == "nv" else "three-qubit"
    method = {"count": "monopole-count"}.get(args.method, args.method)
    grid = sweep_grid(
        system, args.x, args.y, method, cfg.alpha, cfg.settings, cfg.jobs, cfg.a_par, cfg.init_policy
    )
    if args.out:
        export_csv(grid, args.out)
    else:
        sys.stdout.write(to_csv(grid))
    if args.svg:
        export_svg_heatmap(grid, args.svg, args.width, args.height)
    if args.json_out:
        export_json(grid, args.json_out)
    n_err = sum(f.startswith("error") for f in grid.flags)
    if n_err:
        print(f"{n_err} cell(s) failed; see the flag column", file=sys.stderr)
    return 0


def cmd_lz(args, cfg: RunConfig) -> int:
    model = NVModel(a_par=cfg.a_par, sector_labels=args.sectors)
    pts = landau_zener_scan(NormalizedPoint(args.hr, args.h0), args.alphas, model, cfg.init_policy, cfg.settings)
    lines = ["alpha,ground_pop,sz_final"]
    lines += [f"{fmt_float(p.alpha)},{fmt_float(p.ground_pop)},{fmt_float(p.sz_final)}" for p in pts]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_project(args, cfg) -> int:
    p = project_to_three_qubit(NormalizedPoint(args.hr, args.h0))
    print(f"{fmt_float(p.g_tilde_prime)},{fmt_float(p.h0_tilde_prime)}")
    return 0


def cmd_radial(args, cfg: RunConfig) -> int:
    for h0 in args.h0_list:
        s = 1.0 - abs(1.0 - 2.0 * h0)
        if 1.0 - s * s < 0:
            raise DomainError(f"normalized offset {h0!r} is outside [-0.5, 1.5]")
    curves = radial_projection(args.h0_list, args.hr, cfg.alpha, cfg.settings, cfg.jobs, cfg.a_par, cfg.init_policy)
    lines = ["h0_tilde,h_r_tilde,g_tilde_prime,h0_tilde_prime,chern"]
    for c in curves:
        for hr, g, h, v in zip(c.h_r_tilde, c.g_tilde_prime, c.h0_tilde_prime, c.chern):
            lines.append(",".join(fmt_float(x) for x in (c.h0_tilde, hr, g, h, v)))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


COMMANDS = {
    "berry": cmd_berry,
    "chern": cmd_chern,
    "phase-diagram": cmd_phase_diagram,
    "lz": cmd_lz,
    "project": cmd_project,
    "radial": cmd_radial,
}


_VALUE_FLAGS = ("--x", "--y", "--hr", "--h0", "--h0-list")


def _attach_negative_values(argv: list[str]) -> list[str]:
    # argparse treats "-2.25:2.25:45" as an option; glue it to its flag instead.
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv=None) -> int:
    parser = make_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_attach_negative_values(argv))
    try:
        cfg = build_config(args) if hasattr(args, "config") else None
    except (OSError, ValueError) as exc:
        print(f"nvchern: config error: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args, cfg)
    except DomainError as exc:
        print(f"nvchern: domain error: {exc}", file=sys.stderr)
        return 2
    except (DegenerateInitError, DegeneracyError, ValueError, OSError, ArithmeticError) as exc:
        print(f"nvchern: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
