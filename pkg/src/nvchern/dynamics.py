"""Time-ordered propagation of the sweep protocol.

The propagator over ``[0, t_final]`` is a product of exact unitary factors
``exp(-i dt' H_eff)`` evaluated step by step. Two rules are available:

``"magnus4"`` (default)
    Fourth-order commutator-free Magnus rule: two exponentials per step of
    linear combinations of H at the two Gauss-Legendre nodes.
``"midpoint"``
    One exponential per step with H sampled at the step midpoint.

Records on the theta grid come from a single continuous propagation; the
step count is rounded up so that every record time falls on a step boundary.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .linalg import SX, SY, SZ, ValidationError, check_normalized, eigh, embed, expect, unitary_from_eigh
from .models import (
    LarmorSweep,
    NormalizedPoint,
    NVModel,
    ThreeQubitModel,
    larmor_vector,
    nv_sector_hamiltonian,
    sweep_from_normalized,
    three_qubit_family,
)


class DegenerateInitError(ValueError):
    """The initial Hamiltonian has no unique ground state."""


class InitPolicy(enum.Enum):
    GROUND_STATE = "ground"
    ELECTRON_ZERO = "electron-zero"


@dataclass(frozen=True)
class PropagationSettings:
    dt: float = 1e-9
    n_theta: int = 181
    scheme: str = "magnus4"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if self.n_theta < 3:
            raise ValueError(f"n_theta must be at least 3, got {self.n_theta!r}")
        if self.scheme not in ("magnus4", "midpoint"):
            raise ValueError(f"unknown propagation scheme {self.scheme!r}")


@dataclass
class Propagation:
    state: np.ndarray
    times: np.ndarray
    states: np.ndarray
    n_steps: int
    dt: float


@dataclass
class SweepTrace:
    """Bloch components per channel on an evenly spaced theta grid.

    ``sx``, ``sy``, ``sz`` have shape ``(n_channels, n_theta)``.
    """

    theta_grid: np.ndarray
    labels: list
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    weights: np.ndarray
    sweep: LarmorSweep
    norm_drift: float = 0.0
    min_gap: float = math.inf
    meta: dict = field(default_factory=dict)

    def channel(self, label) -> np.ndarray:
        """Bloch vectors of one channel, shape ``(n_theta, 3)``."""
        k = self.labels.index(label)
        return np.stack([self.sx[k], self.sy[k], self.sz[k]], axis=-1)

    @property
    def sy_sum(self) -> np.ndarray:
        return self.weights @ self.sy


_SQ3 = math.sqrt(3.0)
_GAUSS_NODES = (0.5 - _SQ3 / 6, 0.5 + _SQ3 / 6)
_CF4_A, _CF4_B = (3 + 2 * _SQ3) / 12, (3 - 2 * _SQ3) / 12


def step_count(t_final: float, dt: float, multiple: int = 1) -> int:
    n = max(1, math.ceil(t_final / dt * (1 - 1e-12)))
    return multiple * math.ceil(n / multiple)


def step_unitaries(h_of_t: Callable, t_starts: np.ndarray, dt: float, scheme: str) -> np.ndarray:
    """One unitary per step starting at each of ``t_starts`` (stacked)."""
    if scheme == "midpoint":
        return unitary_from_eigh(eigh(h_of_t(t_starts + 0.5 * dt)), dt)
    h1 = np.asarray(h_of_t(t_starts + _GAUSS_NODES[0] * dt))
    h2 = np.asarray(h_of_t(t_starts + _GAUSS_NODES[1] * dt))
    first = unitary_from_eigh(eigh(_CF4_A * h1 + _CF4_B * h2), dt)
    second = unitary_from_eigh(eigh(_CF4_B * h1 + _CF4_A * h2), dt)
    return second @ first


def _ordered_product(us: np.ndarray) -> np.ndarray:
    """Time-ordered product of ``us[..., k, :, :]`` over k (later factors left)."""
    out = us[..., 0, :, :]
    for k in range(1, us.shape[-3]):
        out = us[..., k, :, :] @ out
    return out


def propagate(
    h_of_t: Callable,
    psi0,
    t_final: float,
    settings: PropagationSettings | None = None,
    n_record: int = 0,
) -> Propagation:
    """Propagate ``psi0`` under ``H(t)`` from 0 to ``t_final``.

    ``h_of_t`` must accept a 1-D array of times and return stacked
    Hermitian matrices of shape ``(len(t), n, n)``. With ``n_record >= 2`` the
    states at ``n_record`` evenly spaced times (both endpoints included) are
    returned as well.
    """
    settings = settings or PropagationSettings()
    psi0 = check_normalized(psi0)
    if not t_final > 0:
        raise ValueError(f"t_final must be positive, got {t_final!r}")
    segments = max(1, n_record - 1)
    n = step_count(t_final, settings.dt, segments)
    dt = t_final / n
    per_seg = n // segments

    probe = np.asarray(h_of_t(np.array([0.5 * dt])))
    if probe.shape[-1] != psi0.shape[-1]:
        raise ValidationError(f"dimension mismatch: state has {psi0.shape[-1]}, Hamiltonian has {probe.shape[-1]}")

    t_starts = np.arange(n) * dt
    us = step_unitaries(h_of_t, t_starts, dt, settings.scheme)
    dim = psi0.shape[-1]
    seg_us = _ordered_product(us.reshape(segments, per_seg, dim, dim))

    states = np.empty((segments + 1, dim), dtype=complex)
    states[0] = psi0
    psi = psi0
    for k in range(segments):
        psi = seg_us[k] @ psi
        states[k + 1] = psi
    times = np.linspace(0.0, t_final, segments + 1)
    if n_record < 2:
        states, times = states[[0, -1]], times[[0, -1]]
    return Propagation(state=psi, times=times, states=states, n_steps=n, dt=dt)


def _bloch(states: np.ndarray, ops=(SX, SY, SZ)) -> tuple[np.ndarray, ...]:
    return tuple(np.asarray(expect(states, op)) for op in ops)


def _ground(h0: np.ndarray, scale: float, what: str) -> tuple[np.ndarray, float]:
    dec = eigh(h0)
    gap = float(dec.gap(1))
    if gap < 1e-9 * scale:
        raise DegenerateInitError(
            f"{what}: initial Hamiltonian is degenerate (gap {gap:.3e} rad/s); "
            "perturb the offset so the sweep does not start on a degeneracy point"
        )
    return dec.ground_state(), gap


def _sweep_field(sweep: LarmorSweep):
    def hvec(t):
        return larmor_vector(sweep, np.clip(t, 0.0, sweep.t_ramp))

    return hvec


def run_nv_sweep(
    model: NVModel,
    sweep: LarmorSweep,
    init: InitPolicy = InitPolicy.GROUND_STATE,
    settings: PropagationSettings | None = None,
    t_stop: float | None = None,
) -> SweepTrace:
    """Sweep each nuclear sector independently and record Bloch components.

    The full 6x6 Hamiltonian is block diagonal in the nuclear projection, so
    propagating the 2x2 sectors separately is exact. With ``t_stop`` the
    propagation is terminated early on the same step grid as the full sweep
    and only the terminal Bloch vectors are meaningful.
    """
    settings = settings or PropagationSettings()
    hvec = _sweep_field(sweep)
    theta = np.linspace(0.0, math.pi, settings.n_theta)
    sx, sy, sz = [], [], []
    drift, min_gap = 0.0, math.inf
    for m in model.sector_labels:

        def h_of_t(t, m=m):
            return nv_sector_hamiltonian(model, m, hvec(t))

        h0 = h_of_t(np.array([0.0]))[0]
        if init is InitPolicy.GROUND_STATE:
            psi0, gap = _ground(h0, sweep.omega1, f"sector m={m:+d}")
            min_gap = min(min_gap, gap)
        else:
            psi0 = np.array([1.0, 0.0], dtype=complex)
        prop = _propagate_sweep(h_of_t, psi0, sweep, settings, t_stop)
        drift = max(drift, float(np.max(np.abs(np.linalg.norm(prop.states, axis=-1) - 1.0))))
        bx, by, bz = _bloch(prop.states)
        sx.append(bx)
        sy.append(by)
        sz.append(bz)
    return SweepTrace(
        theta_grid=theta,
        labels=list(model.sector_labels),
        sx=np.array(sx),
        sy=np.array(sy),
        sz=np.array(sz),
        weights=np.array(model.sector_weights, dtype=float),
        sweep=sweep,
        norm_drift=drift,
        min_gap=min_gap,
        meta={"system": "nv", "init": init.value, "dt": settings.dt, "scheme": settings.scheme},
    )


def _propagate_sweep(h_of_t, psi0, sweep, settings, t_stop):
    if t_stop is None:
        return propagate(h_of_t, psi0, sweep.t_ramp, settings, n_record=settings.n_theta)
    # Reuse the full-sweep step grid so early termination is a true prefix.
    segments = settings.n_theta - 1
    n_full = step_count(sweep.t_ramp, settings.dt, segments)
    dt = sweep.t_ramp / n_full
    k = int(round(t_stop / dt))
    if not 1 <= k <= n_full:
        raise ValueError(f"t_stop {t_stop!r} is outside the sweep")
    sub = PropagationSettings(dt=dt, n_theta=settings.n_theta, scheme=settings.scheme)
    return propagate(h_of_t, psi0, k * dt, sub)


def run_three_qubit_sweep(
    model: ThreeQubitModel,
    sweep: LarmorSweep,
    settings: PropagationSettings | None = None,
) -> SweepTrace:
    """Sweep the common field over all three qubits from the 8x8 ground state."""
    settings = settings or PropagationSettings()
    family = three_qubit_family(model)
    hvec = _sweep_field(sweep)

    def h_of_t(t):
        return family(hvec(t))

    psi0, gap = _ground(h_of_t(np.array([0.0]))[0], sweep.omega1, "three-qubit chain")
    prop = propagate(h_of_t, psi0, sweep.t_ramp, settings, n_record=settings.n_theta)
    ops = [[embed(s, i, 3) for s in (SX, SY, SZ)] for i in range(3)]
    comps = np.array([_bloch(prop.states, row) for row in ops])
    return SweepTrace(
        theta_grid=np.linspace(0.0, math.pi, settings.n_theta),
        labels=[1, 2, 3],
        sx=comps[:, 0],
        sy=comps[:, 1],
        sz=comps[:, 2],
        weights=np.ones(3),
        sweep=sweep,
        norm_drift=float(np.max(np.abs(np.linalg.norm(prop.states, axis=-1) - 1.0))),
        min_gap=gap,
        meta={"system": "three-qubit", "dt": settings.dt, "scheme": settings.scheme},
    )


@dataclass
class LandauZenerPoint:
    alpha: float
    ground_pop: float
    sz_final: float
    sector_pops: np.ndarray
    sector_sz: np.ndarray


def landau_zener_scan(
    point: NormalizedPoint,
    alphas: Sequence[float],
    model: NVModel | None = None,
    init: InitPolicy = InitPolicy.GROUND_STATE,
    settings: PropagationSettings | None = None,
) -> list[LandauZenerPoint]:
    """Terminal ground-state survival and sigma_z after full sweeps.

    ``ground_pop`` is the sector-averaged overlap with the instantaneous ground
    state of H(t_ramp); ``sz_final`` is the sector-averaged terminal sigma_z.
    """
    model = model or NVModel()
    settings = settings or PropagationSettings()
    out = []
    for alpha in alphas:
        if not alpha > 0:
            raise ValueError(f"alpha must be positive, got {alpha!r}")
        sweep = sweep_from_normalized(point, alpha, model.a_par)
        hvec = _sweep_field(sweep)
        pops, szs = [], []
        for m in model.sector_labels:

            def h_of_t(t, m=m):
                return nv_sector_hamiltonian(model, m, hvec(t))

            if init is InitPolicy.GROUND_STATE:
                psi0, _ = _ground(h_of_t(np.array([0.0]))[0], sweep.omega1, f"sector m={m:+d}")
            else:
                psi0 = np.array([1.0, 0.0], dtype=complex)
            final = propagate(h_of_t, psi0, sweep.t_ramp, settings).state
            g_end = eigh(h_of_t(np.array([sweep.t_ramp]))[0]).ground_state()
            pops.append(abs(np.vdot(g_end, final)) ** 2)
            szs.append(expect(final, SZ))
        out.append(
            LandauZenerPoint(
                alpha=float(alpha),
                ground_pop=float(np.mean(pops)),
                sz_final=float(np.mean(szs)),
                sector_pops=np.array(pops),
                sector_sz=np.array(szs),
            )
        )
    return out
