"""Parameter-grid sweeps and their CSV / JSON / SVG exports.

Cells are independent, so grids are farmed out to a process pool and
reassembled by index. Output order is row-major with the y axis outer, and
floats are written as their shortest round-trip decimal, which makes two runs
with the same inputs byte-identical whatever the worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .dynamics import InitPolicy, PropagationSettings
from .models import A_PAR, DomainError, NormalizedPoint, NVModel, ThreeQubitModel, project_to_three_qubit
from .topology import (
    ChernResult,
    chern_dynamic,
    chern_dynamic_three_qubit,
    chern_fhs_nv,
    chern_fhs_three_qubit,
    monopole_count_nv,
    monopole_count_three_qubit,
)

SYSTEMS = ("nv", "three-qubit")
METHODS = ("dynamic", "fhs", "monopole-count")
AXIS_LABELS = {
    "nv": ("h0_tilde", "h_r_tilde"),
    "three-qubit": ("g_tilde_prime", "h0_tilde_prime"),
}


@dataclass(frozen=True)
class AxisSpec:
    start: float
    stop: float
    count: int
    label: str = ""

    def __post_init__(self):
        if not self.start < self.stop:
            raise ValueError(f"axis start {self.start!r} must be below stop {self.stop!r}")
        if self.count < 2:
            raise ValueError(f"axis needs at least two points, got {self.count!r}")

    @classmethod
    def parse(cls, text: str, label: str = "") -> AxisSpec:
        """Parse ``start:stop:count``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"axis spec must look like start:stop:count, got {text!r}")
        return cls(float(parts[0]), float(parts[1]), int(parts[2]), label)

    @property
    def points(self) -> np.ndarray:
        k = np.arange(self.count)
        return self.start + k * (self.stop - self.start) / (self.count - 1)


@dataclass
class PhaseGrid:
    """Chern values on an x-by-y grid; ``values[ix, iy]``."""

    system: str
    method: str
    x_axis: AxisSpec
    y_axis: AxisSpec
    values: np.ndarray
    min_gap: np.ndarray
    flags: list
    alpha: float | None = None
    settings: PropagationSettings = field(default_factory=PropagationSettings)

    def cells(self):
        """Yield ``(x, y, value, min_gap, flag)`` row-major, y outer."""
        xs, ys = self.x_axis.points, self.y_axis.points
        for iy, y in enumerate(ys):
            for ix, x in enumerate(xs):
                yield x, y, self.values[ix, iy], self.min_gap[ix, iy], self.flags[iy * len(xs) + ix]


@dataclass
class Curve:
    """One-dimensional cut: Chern value against the varying parameter."""

    x: np.ndarray
    chern: np.ndarray
    flags: list
    x_label: str = "x"
    fixed: tuple = ()
    method: str = "dynamic"
    alpha: float | None = None


@dataclass
class ProjectionCurve:
    h0_tilde: float
    h_r_tilde: np.ndarray
    g_tilde_prime: np.ndarray
    h0_tilde_prime: np.ndarray
    chern: np.ndarray
    flags: list


def fmt_float(x) -> str:
    """Shortest round-trip decimal; integral values lose the trailing ``.0``."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    r = repr(x)
    return r[:-2] if r.endswith(".0") else r


def _check_method(system: str, method: str):
    if system not in SYSTEMS:
        raise ValueError(f"unknown system {system!r}; expected one of {SYSTEMS}")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def compute_cell(system: str, method: str, x: float, y: float, alpha: float, settings, a_par: float, init) -> ChernResult:
    """Chern value at one grid point; (x, y) follow the system's axis labels."""
    if system == "nv":
        point = NormalizedPoint(h_r_tilde=y, h_0_tilde=x)
        model = NVModel(a_par=a_par)
        if method == "monopole-count":
            return monopole_count_nv(point)
        if method == "fhs":
            return chern_fhs_nv(point, model)
        return chern_dynamic(point, alpha, model, settings, init)
    model = ThreeQubitModel.from_normalized(x, y, a_par)
    if method == "monopole-count":
        return monopole_count_three_qubit(model)
    if method == "fhs":
        return chern_fhs_three_qubit(model)
    return chern_dynamic_three_qubit(model, alpha, settings)


def _cell_task(args):
    system, method, x, y, alpha, settings, a_par, init = args
    try:
        res = compute_cell(system, method, x, y, alpha, settings, a_par, init)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return math.nan, math.nan, f"error: {exc}"
    flag = "boundary" if res.boundary else ""
    return float(res.value), float(res.min_gap), flag


def _run_tasks(tasks: list, jobs: int | None):
    jobs = jobs or 1
    if jobs <= 1 or len(tasks) <= 1:
        return [_cell_task(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_cell_task, tasks, chunksize=chunk))


def sweep_grid(
    system: str,
    x: AxisSpec,
    y: AxisSpec,
    method: str = "monopole-count",
    alpha: float = 2.0,
    settings: PropagationSettings | None = None,
    jobs: int | None = 1,
    a_par: float = A_PAR,
    init: InitPolicy = InitPolicy.GROUND_STATE,
) -> PhaseGrid:
    """Evaluate a Chern map over two normalized axes.

    For ``nv`` the x axis is the offset H0/A and y the radius Hr/A; for
    ``three-qubit`` x is g/Hr' and y is H0'/Hr'. Failed cells become NaN with
    the error text in their flag.
    """
    _check_method(system, method)
    settings = settings or PropagationSettings()
    xl, yl = AXIS_LABELS[system]
    x = AxisSpec(x.start, x.stop, x.count, x.label or xl)
    y = AxisSpec(y.start, y.stop, y.count, y.label or yl)
    xs, ys = x.points, y.points
    tasks = [
        (system, method, float(xv), float(yv), alpha, settings, a_par, init) for yv in ys for xv in xs
    ]
    results = _run_tasks(tasks, jobs)
    nx, ny = len(xs), len(ys)
    values = np.full((nx, ny), math.nan)
    gaps = np.full((nx, ny), math.nan)
    flags = []
    for k, (val, gap, flag) in enumerate(results):
        iy, ix = divmod(k, nx)
        values[ix, iy] = val
        gaps[ix, iy] = gap
        flags.append(flag)
    return PhaseGrid(
        system=system,
        method=method,
        x_axis=x,
        y_axis=y,
        values=values,
        min_gap=gaps,
        flags=flags,
        alpha=alpha if method == "dynamic" else None,
        settings=settings,
    )


def transition_cut(
    system: str,
    fixed: tuple[str, float],
    varying: AxisSpec,
    method: str = "dynamic",
    alpha: float = 2.0,
    settings: PropagationSettings | None = None,
    jobs: int | None = 1,
    a_par: float = A_PAR,
    init: InitPolicy = InitPolicy.GROUND_STATE,
) -> Curve:
    """Chern value along one axis with the other held at ``fixed = (name, value)``."""
    _check_method(system, method)
    settings = settings or PropagationSettings()
    xl, yl = AXIS_LABELS[system]
    name, value = fixed
    if name not in (xl, yl):
        raise ValueError(f"fixed axis must be {xl!r} or {yl!r}, got {name!r}")
    pts = varying.points
    if name == xl:
        pairs = [(float(value), float(p)) for p in pts]
        vary_label = yl
    else:
        pairs = [(float(p), float(value)) for p in pts]
        vary_label = xl
    tasks = [(system, method, xv, yv, alpha, settings, a_par, init) for xv, yv in pairs]
    results = _run_tasks(tasks, jobs)
    return Curve(
        x=pts,
        chern=np.array([r[0] for r in results]),
        flags=[r[2] for r in results],
        x_label=vary_label,
        fixed=(name, float(value)),
        method=method,
        alpha=alpha if method == "dynamic" else None,
    )


def radial_projection(
    h0_tildes: Sequence[float],
    hr_range: AxisSpec,
    alpha: float = 2.0,
    settings: PropagationSettings | None = None,
    jobs: int | None = 1,
    a_par: float = A_PAR,
    init: InitPolicy = InitPolicy.GROUND_STATE,
) -> list[ProjectionCurve]:
    """NV dynamic Chern values along radial cuts, in three-qubit coordinates."""
    settings = settings or PropagationSettings()
    hrs = hr_range.points
    curves = []
    for h0 in h0_tildes:
        cut = transition_cut("nv", ("h0_tilde", h0), hr_range, "dynamic", alpha, settings, jobs, a_par, init)
        gs, hs, flags = [], [], list(cut.flags)
        for k, hr in enumerate(hrs):
            try:
                p = project_to_three_qubit(NormalizedPoint(float(hr), float(h0)))
                gs.append(p.g_tilde_prime)
                hs.append(p.h0_tilde_prime)
            except DomainError as exc:
                gs.append(math.nan)
                hs.append(math.nan)
                flags[k] = f"error: {exc}"
        curves.append(
            ProjectionCurve(
                h0_tilde=float(h0),
                h_r_tilde=hrs,
                g_tilde_prime=np.array(gs),
                h0_tilde_prime=np.array(hs),
                chern=cut.chern,
                flags=flags,
            )
        )
    return curves


# ---------------------------------------------------------------- exporters


def _rows(obj) -> tuple[list[str], list[list[str]]]:
    from .topology import CurvatureTrace

    if isinstance(obj, PhaseGrid):
        header = [obj.x_axis.label, obj.y_axis.label, "chern", "method", "min_gap", "flag"]
        rows = [
            [fmt_float(x), fmt_float(y), fmt_float(v), obj.method, fmt_float(g), flag]
            for x, y, v, g, flag in obj.cells()
        ]
        return header, rows
    if isinstance(obj, Curve):
        return ["x", "chern"], [[fmt_float(x), fmt_float(c)] for x, c in zip(obj.x, obj.chern)]
    if isinstance(obj, ProjectionCurve):
        return ["g_tilde_prime", "h0_tilde_prime", "chern"], [
            [fmt_float(g), fmt_float(h), fmt_float(c)]
            for g, h, c in zip(obj.g_tilde_prime, obj.h0_tilde_prime, obj.chern)
        ]
    if isinstance(obj, CurvatureTrace):
        return ["theta_rad", "sigma_y_sum", "f_phi"], [
            [fmt_float(t), fmt_float(s), fmt_float(f)] for t, s, f in zip(obj.theta_grid, obj.sigma_y_sum, obj.f_phi)
        ]
    raise TypeError(f"cannot export {type(obj).__name__} as CSV")


def to_csv(obj, extra_columns: dict | None = None) -> str:
    """CSV text for a grid, cut, projection curve or curvature trace.

    ``extra_columns`` maps header names to per-row values appended on the right.
    """
    header, rows = _rows(obj)
    if extra_columns:
        header = header + list(extra_columns)
        cols = [[fmt_float(v) for v in vals] for vals in extra_columns.values()]
        rows = [row + [c[i] for c in cols] for i, row in enumerate(rows)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _write(path, text: str):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {os.fspath(path)!r}: {exc.strerror or exc}") from exc


def export_csv(obj, path, extra_columns: dict | None = None):
    _write(path, to_csv(obj, extra_columns))


def read_grid_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _metadata(obj) -> dict:
    meta = {"tool": "nvchern", "version": __version__}
    settings = getattr(obj, "settings", None) or PropagationSettings()
    meta.update(
        method=getattr(obj, "method", "dynamic"),
        alpha=getattr(obj, "alpha", None),
        dt=settings.dt,
        n_theta=settings.n_theta,
        scheme=settings.scheme,
    )
    if isinstance(obj, PhaseGrid):
        meta["system"] = obj.system
    return meta


def to_json(obj, **meta) -> str:
    header, rows = _rows(obj)
    doc = {"metadata": {**_metadata(obj), **meta}, "columns": header, "rows": rows}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def export_json(obj, path, **meta):
    _write(path, to_json(obj, **meta))


# Discrete ramp for C = 0, 1, 2, 3 (rounded, clamped); NaN cells are grey.
_RAMP = ("#2c3e91", "#2a9d8f", "#e9c46a", "#e76f51")
_NAN_COLOR = "#9e9e9e"


def svg_heatmap(grid: PhaseGrid, width: int = 640, height: int = 480) -> str:
    """Self-contained SVG heatmap of a phase grid."""
    margin_l, margin_b, margin_t, margin_r = 70, 50, 20, 90
    pw, ph = width - margin_l - margin_r, height - margin_t - margin_b
    xs, ys = grid.x_axis.points, grid.y_axis.points
    nx, ny = len(xs), len(ys)
    cw, ch = pw / nx, ph / ny
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for iy in range(ny):
        for ix in range(nx):
            v = grid.values[ix, iy]
            color = _NAN_COLOR if not np.isfinite(v) else _RAMP[int(min(3, max(0, round(v))))]
            x0 = margin_l + ix * cw
            y0 = margin_t + (ny - 1 - iy) * ch
            out.append(
                f'<rect x="{x0:.3f}" y="{y0:.3f}" width="{cw:.3f}" height="{ch:.3f}" fill="{color}">'
                f"<title>{fmt_float(xs[ix])}, {fmt_float(ys[iy])}: {fmt_float(v)}</title></rect>"
            )
    ticks = 5
    for k in range(ticks):
        fx = k / (ticks - 1)
        xv = grid.x_axis.start + fx * (grid.x_axis.stop - grid.x_axis.start)
        yv = grid.y_axis.start + fx * (grid.y_axis.stop - grid.y_axis.start)
        px = margin_l + fx * pw
        py = margin_t + (1 - fx) * ph
        out.append(f'<text x="{px:.1f}" y="{margin_t + ph + 16}" text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<text x="{margin_l - 6}" y="{py + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
    out.append(
        f'<text x="{margin_l + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{grid.x_axis.label}</text>'
    )
    out.append(
        f'<text x="16" y="{margin_t + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {margin_t + ph / 2:.1f})">{grid.y_axis.label}</text>'
    )
    lx = width - margin_r + 15
    for c, color in enumerate(_RAMP):
        ly = margin_t + 10 + c * 22
        out.append(f'<rect x="{lx}" y="{ly}" width="16" height="16" fill="{color}"/>')
        out.append(f'<text x="{lx + 22}" y="{ly + 12}">C = {c}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export_svg_heatmap(grid: PhaseGrid, path, width: int = 640, height: int = 480):
    _write(path, svg_heatmap(grid, width, height))
