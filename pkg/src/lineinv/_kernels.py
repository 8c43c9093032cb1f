"""RK4 propagation kernels for psi'' = (V - k^2) psi.

Two implementations of the same fixed-step integrator live here: a numba
``@njit`` version that loops over wavenumbers in parallel, and a pure numpy
version that vectorises over wavenumbers and loops over steps in Python.
The numba path is used when numba imports cleanly and the environment
variable ``LINEINV_DISABLE_NUMBA`` is unset (or ``0``).

Steps are described in integration order: ``h[i]`` is the signed step,
``vs[i]``, ``vm[i]``, ``ve[i]`` are the potential at the start, midpoint and
end of step ``i`` (one-sided limits at cell edges).
"""
import os
import warnings

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
    warnings.filterwarnings("ignore", message=".*TBB.*", category=numba.NumbaWarning)
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("LINEINV_DISABLE_NUMBA", "0") in ("", "0")


def backend():
    return "numba" if USE_NUMBA else "numpy"


def set_threads(n):
    """Set the numba thread count; a no-op on the numpy path."""
    if USE_NUMBA and n:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


# -- numpy reference path ---------------------------------------------------

def rk4_endpoint_numpy(h, vs, vm, ve, k2, p0, d0):
    p = np.array(p0, dtype=np.complex128)
    d = np.array(d0, dtype=np.complex128)
    k2 = np.asarray(k2, dtype=np.complex128)
    for i in range(h.shape[0]):
        p, d = _step_numpy(h[i], vs[i], vm[i], ve[i], k2, p, d)
    return p, d


def rk4_profile_numpy(h, vs, vm, ve, k2, p0, d0):
    n = h.shape[0]
    k2 = np.asarray(k2, dtype=np.complex128)
    psi = np.empty((k2.shape[0], n + 1), dtype=np.complex128)
    dpsi = np.empty_like(psi)
    p = np.array(p0, dtype=np.complex128)
    d = np.array(d0, dtype=np.complex128)
    psi[:, 0] = p
    dpsi[:, 0] = d
    for i in range(n):
        p, d = _step_numpy(h[i], vs[i], vm[i], ve[i], k2, p, d)
        psi[:, i + 1] = p
        dpsi[:, i + 1] = d
    return psi, dpsi


def _step_numpy(h, v0, v1, v2, k2, p, d):
    a0 = v0 - k2
    a1 = v1 - k2
    a2 = v2 - k2
    hh = 0.5 * h
    k1p = d
    k1d = a0 * p
    k2p = d + hh * k1d
    k2d = a1 * (p + hh * k1p)
    k3p = d + hh * k2d
    k3d = a1 * (p + hh * k2p)
    k4p = d + h * k3d
    k4d = a2 * (p + h * k3p)
    p = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    d = d + (h / 6.0) * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
    return p, d


# -- numba path ---------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True, fastmath=False)
    def _step_scalar(h, v0, v1, v2, q, p, d):
        a0 = v0 - q
        a1 = v1 - q
        a2 = v2 - q
        hh = 0.5 * h
        k1p = d
        k1d = a0 * p
        k2p = d + hh * k1d
        k2d = a1 * (p + hh * k1p)
        k3p = d + hh * k2d
        k3d = a1 * (p + hh * k2p)
        k4p = d + h * k3d
        k4d = a2 * (p + h * k3p)
        p = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        d = d + (h / 6.0) * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
        return p, d

    @numba.njit(cache=True, parallel=True)
    def _rk4_endpoint_nb(h, vs, vm, ve, k2, p0, d0):
        nk = k2.shape[0]
        n = h.shape[0]
        pout = np.empty(nk, dtype=np.complex128)
        dout = np.empty(nk, dtype=np.complex128)
        for j in numba.prange(nk):
            p = p0[j]
            d = d0[j]
            q = k2[j]
            for i in range(n):
                p, d = _step_scalar(h[i], vs[i], vm[i], ve[i], q, p, d)
            pout[j] = p
            dout[j] = d
        return pout, dout

    @numba.njit(cache=True, parallel=True)
    def _rk4_profile_nb(h, vs, vm, ve, k2, p0, d0):
        nk = k2.shape[0]
        n = h.shape[0]
        psi = np.empty((nk, n + 1), dtype=np.complex128)
        dpsi = np.empty((nk, n + 1), dtype=np.complex128)
        for j in numba.prange(nk):
            p = p0[j]
            d = d0[j]
            q = k2[j]
            psi[j, 0] = p
            dpsi[j, 0] = d
            for i in range(n):
                p, d = _step_scalar(h[i], vs[i], vm[i], ve[i], q, p, d)
                psi[j, i + 1] = p
                dpsi[j, i + 1] = d
        return psi, dpsi

    def rk4_endpoint_numba(h, vs, vm, ve, k2, p0, d0):
        return _rk4_endpoint_nb(*_prep(h, vs, vm, ve, k2, p0, d0))

    def rk4_profile_numba(h, vs, vm, ve, k2, p0, d0):
        return _rk4_profile_nb(*_prep(h, vs, vm, ve, k2, p0, d0))

else:  # pragma: no cover
    rk4_endpoint_numba = rk4_endpoint_numpy
    rk4_profile_numba = rk4_profile_numpy


def _prep(h, vs, vm, ve, k2, p0, d0):
    f = np.ascontiguousarray
    return (
        f(h, dtype=np.float64),
        f(vs, dtype=np.float64),
        f(vm, dtype=np.float64),
        f(ve, dtype=np.float64),
        f(k2, dtype=np.complex128),
        f(p0, dtype=np.complex128),
        f(d0, dtype=np.complex128),
    )


def rk4_endpoint(h, vs, vm, ve, k2, p0, d0):
    """Propagate (psi, psi') through all steps; return the final values per k."""
    if USE_NUMBA:
        return rk4_endpoint_numba(h, vs, vm, ve, k2, p0, d0)
    return rk4_endpoint_numpy(h, vs, vm, ve, k2, p0, d0)


def rk4_profile(h, vs, vm, ve, k2, p0, d0):
    """Like :func:`rk4_endpoint` but keep every node; arrays of shape (nk, n+1)."""
    if USE_NUMBA:
        return rk4_profile_numba(h, vs, vm, ve, k2, p0, d0)
    return rk4_profile_numpy(h, vs, vm, ve, k2, p0, d0)
