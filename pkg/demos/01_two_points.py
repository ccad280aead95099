"""
Two points in spin dimension one
================================

Two operators with Bloch radii tau, tau2 are spacelike separated on an angular
window between two critical angles.  Inside the window the Lagrangian vanishes;
outside, the product xy has two distinct real eigenvalues.
"""

import numpy as np

from causalfermion.action import classify, critical_angles, lagrangian, product_spectrum
from causalfermion.operators import BlochCoords, f2_from_bloch

tau = 2.0
lo, hi = critical_angles(tau, tau)
print(f"tau = {tau}: spacelike for theta in [{np.degrees(lo):.2f}, {np.degrees(hi):.2f}] deg")

x = f2_from_bloch(BlochCoords(tau, [0, 0, 1]))
print(f"{'theta':>8} {'class':>10} {'lagrangian':>12}  eigenvalues of xy")
for deg in (0, 20, 40, 60, 90, 150, 180):
    th = np.radians(deg)
    y = f2_from_bloch(BlochCoords(tau, [np.sin(th), 0, np.cos(th)]))
    eig = product_spectrum(x, y).eigenvalues
    print(f"{deg:8d} {classify(x, y).value:>10} {lagrangian(x, y):12.6f}  {np.round(eig, 4)}")

# The window shrinks as tau -> 1: two projectors are spacelike only when antipodal.
for t in (1.0, 1.1, 1.5, 3.0, 10.0):
    lo, hi = critical_angles(t, t)
    print(f"tau = {t:5.1f}: window width {np.degrees(hi - lo):7.2f} deg")
