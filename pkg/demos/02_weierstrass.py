"""Spinor (Weierstrass) representation.

Integrates the Enneper spinors s1=1, s2=z and compares with the closed form,
then checks the Dirac equation for the round-sphere spinors with potential
p = 1/(1+|z|^2).
"""

import numpy as np

from surface_forge import weierstrass as ws
from surface_forge.quatgeo import ComplexGrid

g = ComplexGrid.centered(41, 41, 0.05)
z = g.z
sp = ws.SpinorPair.from_functions(lambda z: np.ones_like(z), lambda z: z, g)
s = ws.weierstrass_integrate(sp)
w = z - np.conj(z) ** 3 / 3
print("Enneper mesh error   :", np.max(np.abs(s.F[..., 0] + 1j * s.F[..., 1] - w)))
print("metric error         :", np.max(np.abs(ws.metric_from_spinors(sp) - (1 + np.abs(z) ** 2) ** 2)))
print("Dirac residual (p=0) :", ws.dirac_residual(sp, 0.0).max)

g = ComplexGrid.centered(41, 41, 0.02, 0.2 + 0.1j)
z = g.z
d = 1 + np.abs(z) ** 2
sp = ws.SpinorPair(np.sqrt(2) / d, np.sqrt(2) * np.conj(z) / d, g)
p = 1 / d
print("sphere Dirac residual:", ws.dirac_residual(sp, p, order=8).max)
print("H from potential     :", np.max(np.abs(ws.mean_curvature_from_potential(p, np.log(ws.metric_from_spinors(sp))) - 1)))
