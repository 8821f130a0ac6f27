"""Fixed-step RK4 integrators compiled with numba.

Both kernels fill ``psi`` and ``dpsi`` in place starting from index
``i0`` (values before ``i0`` are supplied by the caller) and return the
index of the first non-finite sample, or -1 when the whole trajectory
stayed finite.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _radial_rhs(y, p, dp, g0, g1):
    # y p'' + p' + (g0 + g1 y) p = 0
    return -(dp + (g0 + g1 * y) * p) / y


@njit(cache=True, nogil=True)
def rk4_radial(y0, h, g0, g1, psi, dpsi, i0):
    n = psi.shape[0]
    for i in range(i0, n - 1):
        y = y0 + i * h
        p = psi[i]
        d = dpsi[i]
        k1p = d
        k1d = _radial_rhs(y, p, d, g0, g1)
        k2p = d + 0.5 * h * k1d
        k2d = _radial_rhs(y + 0.5 * h, p + 0.5 * h * k1p, k2p, g0, g1)
        k3p = d + 0.5 * h * k2d
        k3d = _radial_rhs(y + 0.5 * h, p + 0.5 * h * k2p, k3p, g0, g1)
        k4p = d + h * k3d
        k4d = _radial_rhs(y + h, p + h * k3p, k4p, g0, g1)
        psi[i + 1] = p + h * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
        dpsi[i + 1] = d + h * (k1d + 2.0 * k2d + 2.0 * k3d + k4d) / 6.0
        if not (np.isfinite(psi[i + 1]) and np.isfinite(dpsi[i + 1])):
            return i + 1
    return -1


@njit(cache=True, nogil=True)
def rk4_linear(h, slope, e, beta_s, psi, dpsi):
    # -beta_s p'' + slope * y p = e p  on y >= 0
    n = psi.shape[0]
    for i in range(n - 1):
        y = i * h
        p = psi[i]
        d = dpsi[i]
        k1p = d
        k1d = (slope * y - e) * p / beta_s
        k2p = d + 0.5 * h * k1d
        k2d = (slope * (y + 0.5 * h) - e) * (p + 0.5 * h * k1p) / beta_s
        k3p = d + 0.5 * h * k2d
        k3d = (slope * (y + 0.5 * h) - e) * (p + 0.5 * h * k2p) / beta_s
        k4p = d + h * k3d
        k4d = (slope * (y + h) - e) * (p + h * k3p) / beta_s
        psi[i + 1] = p + h * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
        dpsi[i + 1] = d + h * (k1d + 2.0 * k2d + 2.0 * k3d + k4d) / 6.0
        if not (np.isfinite(psi[i + 1]) and np.isfinite(dpsi[i + 1])):
            return i + 1
    return -1
