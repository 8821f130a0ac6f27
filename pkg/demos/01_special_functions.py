"""
Special functions behind the wave families
==========================================

The zero-order Bessel family needs J0 (and J1 for its derivative), the
Kummer family needs the terminating series M(-n, 1, x), and the
Schrödinger reference spectrum is read off the zeros of Ai and Ai'.
"""

import numpy as np

from probwave.specfun import airy, bessel_j0, bessel_j1, find_root, kummer_m

# J0 switches from its power series to the Hankel expansion at |x| = 12.
# Both sides agree to round-off across the switch.
x = np.array([11.99, 12.0, 12.01, 30.0])
print("J0:", bessel_j0(x))
print("J1:", bessel_j1(x))

# The first zero of J0 sets the width of the central lobe of a Bessel
# volume profile: the density first vanishes at |q - q0| = 2.4048/omega.
j01 = find_root(bessel_j0, 2.0, 3.0)
print(f"first J0 zero: {j01:.15f}")

# M(-n, 1, x) is a degree-n polynomial. For n = 2 it is 1 - 2x + x^2/2,
# so the second Kummer eigenfunction has two half-line nodes.
for n in range(4):
    print(f"M(-{n}, 1, 2.0) = {kummer_m(n, 2.0):+.6f}")

# Ai and Ai' from their Maclaurin series. Their zeros give the even and odd
# levels of -psi'' + |x| psi = E psi.
z_even = -find_root(lambda v: airy(v)[1], -1.5, -0.5)
z_odd = -find_root(lambda v: airy(v)[0], -3.0, -2.0)
print(f"Schrodinger E0 = {z_even:.10f}, E1 = {z_odd:.10f}")
