"""Small dense complex linear algebra used by the simulators.

Everything here works in natural units (hbar = 1), so a Hamiltonian entry is
an angular frequency in rad/s and a propagator is ``exp(-i dt H)``.

Matrix exponentials are computed from the Hermitian eigendecomposition rather
than a series, which is exact to machine precision at the dimensions we use
(2, 6 and 8). All functions accept stacked inputs of shape ``(..., n, n)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-10
NORM_TOL = 1e-10


class ValidationError(ValueError):
    """Raised when an operator or state violates its contract."""


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[..., :, 0]

    def gap(self, n_filled: int = 1) -> np.ndarray:
        """Gap between level ``n_filled - 1`` and level ``n_filled``."""
        return self.eigenvalues[..., n_filled] - self.eigenvalues[..., n_filled - 1]


_SPIN_OPS = {
    "pauli_x": np.array([[0, 1], [1, 0]], dtype=complex),
    "pauli_y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "pauli_z": np.array([[1, 0], [0, -1]], dtype=complex),
    "identity2": np.eye(2, dtype=complex),
    "spin1_z": np.diag([1.0, 0.0, -1.0]).astype(complex),
    "identity3": np.eye(3, dtype=complex),
}


def spin_ops(kind: str) -> np.ndarray:
    """Return a fresh copy of a named constant operator.

    ``kind`` is one of ``pauli_x``, ``pauli_y``, ``pauli_z``, ``identity2``,
    ``spin1_z`` (diag(+1, 0, -1)) or ``identity3``. The qubit basis is ordered
    so that the first state has sigma_z = +1.
    """
    try:
        return _SPIN_OPS[kind].copy()
    except KeyError:
        raise ValueError(f"unknown operator {kind!r}; expected one of {sorted(_SPIN_OPS)}") from None


SX = spin_ops("pauli_x")
SY = spin_ops("pauli_y")
SZ = spin_ops("pauli_z")
I2 = spin_ops("identity2")


def hermitian_residual(h: np.ndarray) -> float:
    """Largest entry of ``|H - H^dagger|`` over all stacked matrices."""
    h = np.asarray(h)
    if h.size == 0:
        return 0.0
    return float(np.max(np.abs(h - np.conj(np.swapaxes(h, -1, -2)))))


def check_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim < 2 or h.shape[-1] != h.shape[-2]:
        raise ValidationError(f"expected square matrices, got shape {h.shape}")
    # Scale the tolerance with the operator norm so rad/s-sized entries validate.
    scale = max(1.0, float(np.max(np.abs(h))) if h.size else 1.0)
    resid = hermitian_residual(h)
    if resid > tol * scale:
        raise ValidationError(f"operator is not Hermitian: max |H - H^dagger| = {resid:.3e}")
    return h


def eigh(h: np.ndarray) -> EigenDecomposition:
    """Hermitian eigendecomposition with ascending eigenvalues."""
    h = check_hermitian(h)
    w, v = np.linalg.eigh(h)
    return EigenDecomposition(w, v)


def unitary_from_eigh(dec: EigenDecomposition, dt: float) -> np.ndarray:
    phases = np.exp(-1j * dec.eigenvalues * dt)
    v = dec.eigenvectors
    return (v * phases[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def propagator_step(h: np.ndarray, dt: float) -> np.ndarray:
    """Exact ``exp(-i dt H)`` for one (or a stack of) Hermitian generators."""
    if not dt > 0:
        raise ValidationError(f"time step must be positive, got {dt!r}")
    return unitary_from_eigh(eigh(h), dt)


def kron(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of operators, left to right."""
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def embed(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Place a single-qubit operator on ``site`` of an ``n_sites`` register."""
    factors = [I2] * n_sites
    factors[site] = op
    return kron(*factors)


def expect(psi: np.ndarray, a: np.ndarray) -> float | np.ndarray:
    """Real expectation value ``<psi|A|psi>``.

    ``psi`` may be a stack of states with shape ``(..., n)``; the result then
    has shape ``psi.shape[:-1]``.
    """
    psi = np.asarray(psi, dtype=complex)
    a = np.asarray(a, dtype=complex)
    if psi.shape[-1] != a.shape[-1]:
        raise ValidationError(f"dimension mismatch: state has {psi.shape[-1]}, operator has {a.shape[-1]}")
    val = np.einsum("...i,ij,...j->...", np.conj(psi), a, psi)
    if np.max(np.abs(val.imag), initial=0.0) > 1e-10 * max(1.0, float(np.max(np.abs(a)))):
        raise ValidationError("expectation value has a non-negligible imaginary part; is A Hermitian?")
    val = val.real
    return float(val) if val.ndim == 0 else val


def normalize(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return psi / np.linalg.norm(psi)


def check_normalized(psi: np.ndarray, tol: float = NORM_TOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    drift = abs(np.linalg.norm(psi) - 1.0)
    if drift > tol:
        raise ValidationError(f"state is not normalized (|norm - 1| = {drift:.3e})")
    return psi
