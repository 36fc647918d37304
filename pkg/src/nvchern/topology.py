"""Berry curvature, Chern numbers and the two independent topology oracles.

Dynamic route
    ``F(theta) = SIGN * H_r * sin(theta) * S_y(theta) / (2 v_theta)`` from a
    sweep trace, integrated over theta with the trapezoid rule.
Monopole count
    Number of ground-state degeneracy points strictly inside the sweep
    sphere (closed form for NV, gap scan along the z axis for three qubits).
Lattice gauge (Fukui-Hatsugai-Suzuki)
    Plaquette phases of filled-band link variables on a (theta, phi) grid.

All three are oriented so that one monopole enclosed by a north-to-south
sweep counts as +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dynamics import InitPolicy, PropagationSettings, SweepTrace, run_nv_sweep, run_three_qubit_sweep
from .models import (
    NormalizedPoint,
    NVModel,
    ThreeQubitModel,
    centered_sweep,
    nv_sector_hamiltonian,
    sweep_from_normalized,
    three_qubit_family,
)

# Fixed once by the single-monopole benchmark (C = +1 for a centred sphere).
SIGN = 1.0

BOUNDARY_TOL = 1e-6


class DegeneracyError(ValueError):
    """The filled band touches the next band somewhere on the grid."""


@dataclass
class CurvatureTrace:
    theta_grid: np.ndarray
    f_phi: np.ndarray
    sigma_y_sum: np.ndarray
    aggregation: str = "sum"


@dataclass
class ChernResult:
    value: float
    method: str
    min_gap: float = math.nan
    refinement_delta: float = math.nan
    boundary: bool = False
    error: str = ""
    extra: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)


def curvature_from_trace(trace: SweepTrace, sweep=None) -> CurvatureTrace:
    """Berry curvature F_phi(theta) from the summed sigma_y deviation."""
    sweep = sweep or trace.sweep
    if sweep is not trace.sweep and sweep != trace.sweep:
        raise ValueError("sweep does not match the one that produced the trace")
    theta = np.asarray(trace.theta_grid)
    if theta.shape[-1] != trace.sy.shape[-1]:
        raise ValueError("theta grid and sigma_y records have different lengths")
    s_y = trace.sy_sum
    f = SIGN * sweep.omega1 * np.sin(theta) * s_y / (2.0 * sweep.v_theta)
    f[0] = 0.0
    f[-1] = 0.0
    return CurvatureTrace(theta_grid=theta, f_phi=f, sigma_y_sum=s_y)


def integrate_chern(c: CurvatureTrace) -> ChernResult:
    """Trapezoid integral of F_phi over [0, pi]."""
    theta, f = c.theta_grid, c.f_phi
    if len(theta) < 3:
        raise ValueError("need at least three theta samples")
    full = float(np.trapezoid(f, theta))
    coarse = float(np.trapezoid(f[::2], theta[::2])) if len(theta) % 2 == 1 else math.nan
    return ChernResult(value=full, method="dynamic", refinement_delta=abs(full - coarse))


def chern_from_trace(trace: SweepTrace) -> ChernResult:
    res = integrate_chern(curvature_from_trace(trace))
    res.min_gap = trace.min_gap
    res.extra["norm_drift"] = trace.norm_drift
    return res


def chern_dynamic(
    point: NormalizedPoint,
    alpha: float,
    model: NVModel | None = None,
    settings: PropagationSettings | None = None,
    init: InitPolicy = InitPolicy.GROUND_STATE,
) -> ChernResult:
    """Chern number of the NV system measured through the sweep protocol."""
    model = model or NVModel()
    sweep = sweep_from_normalized(point, alpha, model.a_par)
    res = chern_from_trace(run_nv_sweep(model, sweep, init, settings))
    res.boundary = monopole_count_nv(point).boundary
    return res


def chern_dynamic_three_qubit(
    model: ThreeQubitModel, alpha: float, settings: PropagationSettings | None = None
) -> ChernResult:
    sweep = centered_sweep(model.h_r_prime, alpha)
    res = chern_from_trace(run_three_qubit_sweep(model, sweep, settings))
    res.boundary = monopole_count_three_qubit(model).boundary
    return res


def monopole_count_nv(point: NormalizedPoint, labels=(-1, 0, 1)) -> ChernResult:
    """Count sectors whose degeneracy point at z = -m lies inside the sphere."""
    r, z0 = point.h_r_tilde, point.h_0_tilde
    dists = [abs(z0 + m) for m in labels]
    count = sum(d < r for d in dists)
    boundary = any(abs(d - r) < BOUNDARY_TOL for d in dists)
    return ChernResult(value=count, method="monopole-count", boundary=boundary)


def _ground_charge(family, hz: float) -> float:
    # Total sigma_z of the ground state; conserved on the z axis, so it jumps
    # by twice the number of flipped spins across a crossing.
    w, v = np.linalg.eigh(family(np.array([0.0, 0.0, hz])))
    g = v[:, 0]
    dim = len(g)
    n = int(round(math.log2(dim)))
    mag = 0.0
    for i in range(dim):
        ones = bin(i).count("1")  # bit value 1 -> sigma_z = -1
        mag += abs(g[i]) ** 2 * (n - 2 * ones)
    return mag


def three_qubit_degeneracies(model: ThreeQubitModel, n_grid: int = 2001):
    """Locate ground-level crossings of the chain along the field's z axis.

    Returns ``(roots, charges, min_gap)``; each root carries the number of
    monopoles it hosts, read off from the jump in ground-state magnetisation.
    """
    family = three_qubit_family(model)
    scale = max(model.h_r_prime, abs(model.h0_prime), math.sqrt(2) * model.g)
    zs = np.linspace(-3 * scale, 3 * scale, n_grid)
    hs = family(np.stack([np.zeros_like(zs), np.zeros_like(zs), zs], axis=-1))
    ev = np.linalg.eigvalsh(hs)
    gaps = ev[:, 1] - ev[:, 0]
    step = zs[1] - zs[0]

    def gap_at(z):
        e = np.linalg.eigvalsh(family(np.array([0.0, 0.0, z])))
        return e[1] - e[0]

    roots, charges = [], []
    for i in range(1, n_grid - 1):
        if not (gaps[i] <= gaps[i - 1] and gaps[i] < gaps[i + 1]):
            continue
        # Bisection on the slope sign of the V-shaped gap.
        lo, hi = zs[i - 1], zs[i + 1]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            eps = 1e-4 * (hi - lo)
            if gap_at(mid + eps) > gap_at(mid - eps):
                hi = mid
            else:
                lo = mid
            if hi - lo < 1e-15 * scale:
                break
        z = 0.5 * (lo + hi)
        if gap_at(z) > 1e-10 * scale:
            continue
        jump = abs(_ground_charge(family, z + step) - _ground_charge(family, z - step))
        roots.append(z)
        charges.append(int(round(jump / 2)))
    return roots, charges, float(np.min(gaps))


def monopole_count_three_qubit(model: ThreeQubitModel) -> ChernResult:
    """Number of ground-state degeneracy points enclosed by the radius-H_r' sphere."""
    roots, charges, min_gap = three_qubit_degeneracies(model)
    r = model.h_r_prime
    count = sum(q for z, q in zip(roots, charges) if abs(z) < r)
    boundary = any(abs(abs(z) - r) < BOUNDARY_TOL * r for z in roots)
    return ChernResult(
        value=count,
        method="monopole-count",
        min_gap=min_gap,
        boundary=boundary,
        extra={"roots": [z / r for z in roots], "charges": charges},
    )


def sphere_grid(n_theta: int, n_phi: int):
    """Cell-centred polar angles and periodic azimuths."""
    theta = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    phi = np.arange(n_phi) * 2 * math.pi / n_phi
    return theta, phi


def _link(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Normalised det of the overlap between filled-band frames a and b."""
    ov = np.conj(np.swapaxes(a, -1, -2)) @ b
    d = np.linalg.det(ov) if ov.shape[-1] > 1 else ov[..., 0, 0]
    return d / np.abs(d)


def chern_fhs(
    h_family: Callable,
    n_filled: int = 1,
    grid: tuple[int, int] = (60, 120),
    orientation: float = 1.0,
) -> ChernResult:
    """Lattice-gauge Chern number of the lowest ``n_filled`` bands on a sphere.

    ``h_family(theta, phi)`` receives broadcastable angle arrays and returns
    stacked Hermitian matrices of shape ``theta.shape + (n, n)``. The polar
    caps are closed by the Wilson loops around the first and last rings.
    """
    n_theta, n_phi = grid
    theta, phi = sphere_grid(n_theta, n_phi)
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    hs = np.asarray(h_family(th, ph))
    w, v = np.linalg.eigh(hs)
    gaps = w[..., n_filled] - w[..., n_filled - 1]
    scale = float(np.max(np.abs(w)))
    min_gap = float(np.min(gaps))
    if min_gap < 1e-9 * scale:
        raise DegeneracyError(f"degeneracy on sweep sphere (min gap {min_gap:.3e})")
    frames = v[..., :n_filled]

    u_phi = _link(frames, np.roll(frames, -1, axis=1))  # (i, j) -> (i, j+1)
    u_th = _link(frames[:-1], frames[1:])  # (i, j) -> (i+1, j)
    # Plaquette loop: (i,j)->(i+1,j)->(i+1,j+1)->(i,j+1)->(i,j)
    plaq = u_th * u_phi[1:] * np.conj(np.roll(u_th, -1, axis=1)) * np.conj(u_phi[:-1])
    flux = np.angle(plaq)
    north = np.angle(np.prod(u_phi[0]))  # ring loop around the north cap
    south = -np.angle(np.prod(u_phi[-1]))
    total = float(np.sum(flux)) + float(north) + float(south)
    value = -orientation * total / (2 * math.pi)
    nearest = round(value)
    if abs(value - nearest) > 1e-6:
        raise DegeneracyError(f"lattice Chern number {value:.8f} is not an integer; refine the grid")
    return ChernResult(value=value, method="fhs", min_gap=min_gap, extra={"nearest_integer": int(nearest)})


def _sphere_field(radius: float, offset: float, theta, phi) -> np.ndarray:
    return np.stack(
        [
            radius * np.sin(theta) * np.cos(phi),
            radius * np.sin(theta) * np.sin(phi),
            radius * np.cos(theta) + offset,
        ],
        axis=-1,
    )


def qubit_family(radius: float = 1.0, offset: float = 0.0):
    """Single qubit ``1/2 H.sigma`` on a sphere of given radius and z offset."""
    model = NVModel(a_par=1.0, sector_labels=(0,))

    def family(theta, phi):
        return nv_sector_hamiltonian(model, 0, _sphere_field(radius, offset, theta, phi))

    return family


def chern_fhs_nv(
    point: NormalizedPoint, model: NVModel | None = None, grid: tuple[int, int] = (60, 120)
) -> ChernResult:
    """Lattice Chern number of the NV ground manifold, summed over sectors."""
    model = model or NVModel()
    r, z0 = point.h_r_tilde * model.a_par, point.h_0_tilde * model.a_par
    total, min_gap = 0.0, math.inf
    for m in model.sector_labels:

        def family(theta, phi, m=m):
            return nv_sector_hamiltonian(model, m, _sphere_field(r, z0, theta, phi))

        res = chern_fhs(family, 1, grid)
        total += res.value
        min_gap = min(min_gap, res.min_gap)
    return ChernResult(
        value=total,
        method="fhs",
        min_gap=min_gap,
        boundary=monopole_count_nv(point, model.sector_labels).boundary,
    )


def chern_fhs_three_qubit(model: ThreeQubitModel, grid: tuple[int, int] = (60, 120)) -> ChernResult:
    """Lattice Chern number of the chain's ground band on the radius-H_r' sphere.

    The chain Hamiltonian carries an overall minus sign, so its ground band
    is the field-aligned state; the orientation flips accordingly.
    """
    fam = three_qubit_family(model)
    r = model.h_r_prime

    def family(theta, phi):
        return fam(_sphere_field(r, 0.0, theta, phi))

    res = chern_fhs(family, 1, grid, orientation=-1.0)
    res.boundary = monopole_count_three_qubit(model).boundary
    return res
