"""Hazzidakis equation, Painleve VI and one-parameter Bonnet families.

Type C: H = 2/t solves the equation, and the resulting surfaces are flat.
Type B: the first integral is conserved and the Painleve VI map round-trips.
B_V: the Hopf differential has winding number J at the critical point.
"""

import numpy as np

from surface_forge import bonnetfam as bf
from surface_forge.quatgeo import ComplexGrid, estimate_fundamental_data, gauss_curvature

sol = bf.integrate_hazzidakis("C", 1.0, 2.0, -2.0, 4.0, (0.5, 5.0))
tq = np.linspace(0.5, 5.0, 401)
print("type C, max |H - 2/t|:", np.max(np.abs(sol.evaluate(tq)[0] - 2 / tq)))
chart = ComplexGrid.centered(41, 41, 1e-2, center=1.5)
for T in (0.0, 0.3, 0.6):
    fd = estimate_fundamental_data(bf.build_bonnet_surface("C", sol, T, chart), order=8)
    print(f"  T={T}: max |K| = {np.max(np.abs(gauss_curvature(fd.u, fd.Q, fd.H))[4:-4, 4:-4]):.2e}")

sol = bf.integrate_hazzidakis("B", 1.0, 0.5, -1.0, 0.7, (0.3, 2.0), rtol=1e-12)
xc = bf.to_x_coordinates(sol)
print("type B, theta^2 =", sol.theta2, " drift:",
      np.max(np.abs(bf.first_integral(xc.x, xc.H, xc.Hx, xc.Hxx) - sol.theta2)))
X = bf.to_x_coordinates(sol, np.linspace(0.4, 1.9, 5))
th = np.sqrt(sol.theta2)
y, y1, y2 = bf.H_to_y_jet(X.x, X.H, X.Hx, X.Hxx, th)
print("  PVI residual:", np.max(bf.pvi_residual(y, y1, y2, X.x, th)),
      " round trip:", np.max(np.abs(bf.y_to_H(y, y1, X.x, th) - X.H)))

chart = ComplexGrid.centered(41, 41, 0.02)
for J in (1, 2):
    s = bf.bv_series_solve(J, 0.3, -1.0)
    Q = estimate_fundamental_data(bf.build_bonnet_surface(s.htype, s, 0.0, chart), order=8).Q
    print(f"B_V J={J}: winding", [bf.winding_number(Q[bf.square_loop(chart.center, r)]) for r in (3, 6, 10)])
