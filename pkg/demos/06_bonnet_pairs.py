"""Bonnet pairs from an isothermic surface.

Starts from the cylinder, builds its Christoffel dual and the two mates F1,
F2. They share metric and mean curvature but have different Hopf
differentials. The quaternionic Lax pair reproduces both mates.
"""

import numpy as np

from surface_forge import bonnetpair as bp
from surface_forge.quatgeo import ComplexGrid, estimate_fundamental_data

g = ComplexGrid.centered(41, 41, 1e-2, 0.3 + 0.2j)
R = bp.cylinder_fixture(g)
print("isothermic residual:", bp.isothermic_residual4(R).total)
F1, F2 = bp.bonnet_pair_from_isothermic(R, order=8)
a, b = estimate_fundamental_data(F1, order=8), estimate_fundamental_data(F2, order=8)
m = 4
cut = lambda x: np.abs(x)[m:-m, m:-m]
print("metric difference  :", np.max(cut(np.exp(a.u) - np.exp(b.u))))
print("H difference       :", np.max(cut(a.H - b.H)))
print("||Q1|-|Q2||        :", np.max(cut(np.abs(a.Q) - np.abs(b.Q))))
print("min |Q1 - Q2|      :", np.min(cut(a.Q - b.Q)))
dec = bp.decompose_hopf(a.Q, b.Q)
print("holomorphy of h    :", bp.holomorphy_residual(dec.h, g, 8))

sp = bp.sym_pair_immersion(bp.pair_frame(a, method="exact", order=8))
print("Lax mates vs F1, F2:", bp.rigid_distance(sp.F1.F, F1.F), bp.rigid_distance(sp.F2.F, F2.F))
