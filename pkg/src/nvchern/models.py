"""Hamiltonians and sweep parametrisations.

Units: every field component and coupling is an angular frequency (rad/s),
times are seconds, and hbar = 1. The NV hyperfine constant is quoted as an
ordinary frequency, so ``A_PAR = 2*pi*2.2e6``.

The NV electron-nuclear Hamiltonian

    H = 1/2 A_par sz (x) Iz + 1/2 (Hx sx + Hy sy + Hz sz) (x) 1_3

is block diagonal in the nuclear projection m, and block m is the qubit
Hamiltonian ``1/2 [(Hz + m A_par) sz + Hx sx + Hy sy]`` with its level
crossing at ``Hz = -m A_par``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .linalg import SX, SY, SZ, embed, kron, spin_ops

A_PAR_HZ = 2.2e6
A_PAR = 2 * math.pi * A_PAR_HZ

NUCLEAR_LABELS = (1, 0, -1)  # ordering of spin1_z = diag(+1, 0, -1)


class DomainError(ValueError):
    """Raised when a parameter lies outside the domain of a mapping."""


@dataclass(frozen=True)
class LarmorSweep:
    """North-to-south meridian sweep of the control field.

    H(t) = (omega1 sin th, 0, delta1 cos th + delta2) with th = pi t / t_ramp.
    """

    omega1: float
    delta1: float
    delta2: float
    t_ramp: float
    phi0: float = 0.0

    def __post_init__(self):
        if not self.omega1 > 0:
            raise ValueError(f"omega1 must be positive, got {self.omega1!r}")
        if not self.t_ramp > 0:
            raise ValueError(f"t_ramp must be positive, got {self.t_ramp!r}")
        if not math.isclose(self.omega1, self.delta1, rel_tol=1e-12):
            raise ValueError(f"sweep requires omega1 == delta1, got {self.omega1!r} and {self.delta1!r}")

    @property
    def v_theta(self) -> float:
        """Polar angular speed d(theta)/dt in rad/s."""
        return math.pi / self.t_ramp

    @property
    def radius(self) -> float:
        return self.omega1

    @property
    def alpha(self) -> float:
        return alpha_of(self)


@dataclass(frozen=True)
class NVModel:
    """NV electron spin coupled to the 14N nuclear spin through A_par.

    ``sector_labels`` selects which nuclear projections are simulated and
    ``sector_weights`` weights their sigma_y signals when summed into a
    Berry curvature. Restricting the labels to ``(0,)`` gives the bare
    single-monopole qubit.
    """

    a_par: float = A_PAR
    sector_labels: tuple[int, ...] = (-1, 0, 1)
    sector_weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.a_par > 0:
            raise ValueError(f"a_par must be positive, got {self.a_par!r}")
        labels = tuple(int(m) for m in self.sector_labels)
        if not labels or any(m not in (-1, 0, 1) for m in labels):
            raise ValueError(f"sector labels must be drawn from (-1, 0, 1), got {self.sector_labels!r}")
        object.__setattr__(self, "sector_labels", labels)
        weights = self.sector_weights
        weights = (1.0,) * len(labels) if weights is None else tuple(float(w) for w in weights)
        if len(weights) != len(labels):
            raise ValueError("sector_weights must match sector_labels in length")
        if any(w < 0 for w in weights):
            raise ValueError("sector weights must be non-negative")
        object.__setattr__(self, "sector_weights", weights)


@dataclass(frozen=True)
class ThreeQubitModel:
    """Open XY chain of three qubits in a common field plus fixed offsets."""

    g: float
    h0_prime: float
    h_r_prime: float = A_PAR

    def __post_init__(self):
        if not self.h_r_prime > 0:
            raise ValueError(f"h_r_prime must be positive, got {self.h_r_prime!r}")
        if self.g < 0:
            raise ValueError(f"coupling g must be non-negative, got {self.g!r}")

    @classmethod
    def from_normalized(cls, g_tilde: float, h0_tilde: float, h_r_prime: float = A_PAR) -> ThreeQubitModel:
        return cls(g=g_tilde * h_r_prime, h0_prime=h0_tilde * h_r_prime, h_r_prime=h_r_prime)

    @property
    def g_tilde(self) -> float:
        return self.g / self.h_r_prime

    @property
    def h0_tilde(self) -> float:
        return self.h0_prime / self.h_r_prime

    @property
    def offsets(self) -> tuple[float, float, float]:
        """Per-qubit z offsets added to the common field."""
        return (self.h0_prime, 0.5 * self.h0_prime, 0.0)


@dataclass(frozen=True)
class NormalizedPoint:
    """Sphere radius and offset in units of A_par."""

    h_r_tilde: float
    h_0_tilde: float

    def __post_init__(self):
        if not self.h_r_tilde > 0:
            raise ValueError(f"normalized radius must be positive, got {self.h_r_tilde!r}")


@dataclass(frozen=True)
class ProjectedPoint:
    g_tilde_prime: float
    h0_tilde_prime: float


def _check_time(sweep: LarmorSweep, t):
    t = np.asarray(t, dtype=float)
    slack = 1e-12 * sweep.t_ramp
    if np.any(t < -slack) or np.any(t > sweep.t_ramp + slack):
        raise ValueError(f"time outside the sweep window [0, {sweep.t_ramp!r}]")
    return np.clip(t, 0.0, sweep.t_ramp)


def theta_of_t(sweep: LarmorSweep, t):
    """Polar angle pi t / t_ramp; accepts scalars or arrays."""
    t = _check_time(sweep, t)
    th = math.pi * t / sweep.t_ramp
    return float(th) if th.ndim == 0 else th


def larmor_vector(sweep: LarmorSweep, t) -> np.ndarray:
    """Control field (Hx, Hy, Hz) at time(s) t, shape ``(..., 3)``."""
    th = np.asarray(theta_of_t(sweep, t))
    s = np.sin(th)
    return np.stack(
        [
            sweep.omega1 * s * math.cos(sweep.phi0),
            sweep.omega1 * s * math.sin(sweep.phi0),
            sweep.delta1 * np.cos(th) + sweep.delta2,
        ],
        axis=-1,
    )


def alpha_of(sweep: LarmorSweep) -> float:
    """Adiabaticity parameter omega1 * t_ramp / (2 pi)."""
    return sweep.omega1 * sweep.t_ramp / (2 * math.pi)


def ramp_time_for_alpha(alpha: float, omega1: float) -> float:
    if not alpha > 0 or not omega1 > 0:
        raise ValueError(f"alpha and omega1 must be positive, got {alpha!r}, {omega1!r}")
    return 2 * math.pi * alpha / omega1


def sweep_from_normalized(p: NormalizedPoint, alpha: float, a_par: float = A_PAR) -> LarmorSweep:
    """Bind a normalized (radius, offset) point to concrete sweep parameters."""
    omega1 = p.h_r_tilde * a_par
    return LarmorSweep(
        omega1=omega1,
        delta1=omega1,
        delta2=p.h_0_tilde * a_par,
        t_ramp=ramp_time_for_alpha(alpha, omega1),
    )


def centered_sweep(radius: float, alpha: float) -> LarmorSweep:
    """Sweep of the given radius centred on the origin (three-qubit protocol)."""
    return LarmorSweep(omega1=radius, delta1=radius, delta2=0.0, t_ramp=ramp_time_for_alpha(alpha, radius))


def _field_dot_sigma(hvec) -> np.ndarray:
    h = np.asarray(hvec, dtype=float)
    return h[..., 0, None, None] * SX + h[..., 1, None, None] * SY + h[..., 2, None, None] * SZ


def nv_sector_hamiltonian(model: NVModel, m: int, hvec) -> np.ndarray:
    """2x2 qubit Hamiltonian seen in nuclear sector ``m``.

    ``hvec`` may be a stack of fields with shape ``(..., 3)``.
    """
    if m not in (-1, 0, 1):
        raise ValueError(f"nuclear projection must be -1, 0 or 1, got {m!r}")
    h = np.array(hvec, dtype=float)
    if not np.all(np.isfinite(h)):
        raise ValueError("field vector must be finite")
    h[..., 2] += m * model.a_par
    return 0.5 * _field_dot_sigma(h)


def nv_full_hamiltonian(model: NVModel, hvec) -> np.ndarray:
    """6x6 electron (x) nuclear Hamiltonian, electron index outermost."""
    h = np.asarray(hvec, dtype=float)
    if h.shape != (3,) or not np.all(np.isfinite(h)):
        raise ValueError("field vector must be a finite 3-vector")
    hyperfine = 0.5 * model.a_par * kron(SZ, spin_ops("spin1_z"))
    control = 0.5 * kron(_field_dot_sigma(h), spin_ops("identity3"))
    return hyperfine + control


def nv_sector_block(h_full: np.ndarray, m: int) -> np.ndarray:
    """Extract the 2x2 block of a 6x6 NV operator for nuclear projection m."""
    k = NUCLEAR_LABELS.index(m)
    idx = [k, 3 + k]
    return h_full[np.ix_(idx, idx)]


def three_qubit_hamiltonian(model: ThreeQubitModel, hvec) -> np.ndarray:
    """8x8 Hamiltonian of the XY-coupled chain in a common field.

    H = -1/2 [ sum_i H.s_i + H0' s1z + H0'/2 s2z
               - g (s1x s2x + s1y s2y) - g (s2x s3x + s2y s3y) ]
    """
    h = np.asarray(hvec, dtype=float)
    if h.shape != (3,) or not np.all(np.isfinite(h)):
        raise ValueError("field vector must be a finite 3-vector")
    return _three_qubit_static(model) + _three_qubit_field(h)


# Single-site Pauli operators on the 3-qubit register, indexed [site][x/y/z].
_CHAIN_OPS = np.array([[embed(s, i, 3) for s in (SX, SY, SZ)] for i in range(3)])
_CHAIN_FIELD = _CHAIN_OPS.sum(axis=0)  # sum_i sigma_i^(x,y,z)
_CHAIN_XY = sum(_CHAIN_OPS[i, k] @ _CHAIN_OPS[i + 1, k] for i in (0, 1) for k in (0, 1))


def _three_qubit_static(model: ThreeQubitModel) -> np.ndarray:
    off = model.h0_prime * _CHAIN_OPS[0, 2] + 0.5 * model.h0_prime * _CHAIN_OPS[1, 2]
    return -0.5 * (off - model.g * _CHAIN_XY)


def _three_qubit_field(hvec) -> np.ndarray:
    h = np.asarray(hvec, dtype=float)
    return -0.5 * np.einsum("...k,kij->...ij", h, _CHAIN_FIELD)


def three_qubit_family(model: ThreeQubitModel):
    """Vectorised ``hvec -> H`` for the three-qubit model."""
    static = _three_qubit_static(model)

    def family(hvec):
        return static + _three_qubit_field(hvec)

    return family


def project_to_three_qubit(p: NormalizedPoint) -> ProjectedPoint:
    """Map an NV (radius, offset) point onto three-qubit (g', H0') coordinates."""
    s = 1.0 - abs(1.0 - 2.0 * p.h_0_tilde)
    radicand = 1.0 - s * s
    if radicand < 0:
        raise DomainError(
            f"normalized offset {p.h_0_tilde!r} is outside [-0.5, 1.5]: radicand 1 - s^2 = {radicand:.6g} < 0"
        )
    return ProjectedPoint(
        g_tilde_prime=math.sqrt(radicand) / (2.0 * p.h_r_tilde),
        h0_tilde_prime=s / p.h_r_tilde,
    )


def with_labels(model: NVModel, labels) -> NVModel:
    return replace(model, sector_labels=tuple(labels), sector_weights=None)
