"""Chern numbers of swept spin systems from nonadiabatic Bloch dynamics.

Simulates the meridian-sweep protocol on the NV electron-nuclear spin
system and on a three-qubit XY chain, turns the sigma_y deviation into a
Berry curvature and Chern number, and checks the result against monopole
counting and a lattice-gauge computation.
"""

__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    InitPolicy,
    PropagationSettings,
    SweepTrace,
    landau_zener_scan,
    propagate,
    run_nv_sweep,
    run_three_qubit_sweep,
)
from .linalg import eigh, expect, kron, propagator_step, spin_ops  # noqa: E402
from .models import (  # noqa: E402
    A_PAR,
    LarmorSweep,
    NormalizedPoint,
    NVModel,
    ProjectedPoint,
    ThreeQubitModel,
    alpha_of,
    larmor_vector,
    nv_full_hamiltonian,
    nv_sector_hamiltonian,
    project_to_three_qubit,
    ramp_time_for_alpha,
    sweep_from_normalized,
    theta_of_t,
    three_qubit_hamiltonian,
)
from .topology import (  # noqa: E402
    ChernResult,
    CurvatureTrace,
    chern_dynamic,
    chern_dynamic_three_qubit,
    chern_fhs,
    chern_fhs_nv,
    chern_fhs_three_qubit,
    curvature_from_trace,
    integrate_chern,
    monopole_count_nv,
    monopole_count_three_qubit,
)
