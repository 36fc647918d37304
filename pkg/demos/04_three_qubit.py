"""
A three-qubit chain with the same phase diagram
===============================================

Three XY-coupled qubits with offsets H0', H0'/2, 0 host three monopoles on
the z axis. Coupling pushes the outer two apart, offsets push them down.
The NV phase diagram maps onto this one through a simple projection.
"""

import math

from nvchern import NormalizedPoint, ThreeQubitModel
from nvchern.models import project_to_three_qubit
from nvchern.topology import chern_dynamic_three_qubit, chern_fhs_three_qubit, monopole_count_three_qubit

for g, h0 in [(0.0, 0.5), (0.5, 0.0), (1.0, 0.0), (0.01, 1.5), (0.01, 2.5)]:
    model = ThreeQubitModel.from_normalized(g, h0)
    res = monopole_count_three_qubit(model)
    roots = ", ".join(f"{z:+.3f}" for z in res.extra["roots"])
    print(f"g' = {g:4.2f}  H0' = {h0:4.2f}  roots at [{roots}]  count = {res.value}  "
          f"lattice C = {chern_fhs_three_qubit(model).value:+.3f}")

print("outer monopoles leave the sphere at g' = 1/sqrt(2) =", round(1 / math.sqrt(2), 4))

model = ThreeQubitModel.from_normalized(0.5, 0.0)
for alpha in (2, 4, 8):
    print(f"dynamic C at g' = 0.5, alpha = {alpha}: {chern_dynamic_three_qubit(model, alpha).value:.3f}")

# NV points along a radial cut, expressed as chain parameters
for hr in (0.5, 1.0, 2.0):
    p = project_to_three_qubit(NormalizedPoint(hr, 0.23))
    print(f"NV (H_r = {hr}, H0 = 0.23) -> g' = {p.g_tilde_prime:.3f}, H0' = {p.h0_tilde_prime:.3f}")
