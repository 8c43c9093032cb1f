"""Forward scattering: Jost solutions, T/L/R, bound states, zero energy.

Conventions: ``f_l(k, x) = exp(ikx)`` to the right of the support and
``f_r(k, x) = exp(-ikx)`` to its left. Left of the support
``f_l = A exp(ikx) + B exp(-ikx)`` with ``A = 1/T`` and ``B = L/T``; right of it
``f_r = A' exp(-ikx) + C exp(ikx)`` with ``A' = 1/T`` and ``C = R/T``.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._numerics import count_sign_changes, neville_at_zero, sign_change_roots
from .errors import (HasBoundStates, NotExceptional, ScanTooCoarse,
                     StepTooCoarse)
from .potentials import Mesh

ALIAS_LIMIT = 0.5


def as_mesh(V, step=None):
    if isinstance(V, Mesh):
        return V
    return V.mesh(step)


def check_step(mesh, k):
    """Raise StepTooCoarse if |sqrt(k^2 - V)| * h exceeds the aliasing limit."""
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    kmax2 = np.max(np.abs(k)) ** 2
    local = np.sqrt(kmax2 + mesh.max_abs_v())
    hmax = float(np.max(mesh.h))
    if local * hmax > ALIAS_LIMIT:
        raise StepTooCoarse(
            f"local wavenumber {local:.4g} times step {hmax:.4g} exceeds {ALIAS_LIMIT}")


def _edge_values(mesh, k):
    """Integrate both Jost solutions across the mesh; values at the far edge."""
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    check_step(mesh, k)
    a, b = mesh.a, mesh.b
    k2 = k * k
    el = np.exp(1j * k * b)
    pl, dl = _kernels.rk4_endpoint(*mesh.leftward(), k2, el, 1j * k * el)
    er = np.exp(-1j * k * a)
    pr, dr = _kernels.rk4_endpoint(*mesh.rightward(), k2, er, -1j * k * er)
    return k, pl, dl, pr, dr


def profiles(mesh, k):
    """Jost solutions and derivatives on every mesh node, shape (nk, n+1)."""
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    check_step(mesh, k)
    a, b = mesh.a, mesh.b
    k2 = k * k
    el = np.exp(1j * k * b)
    pl, dl = _kernels.rk4_profile(*mesh.leftward(), k2, el, 1j * k * el)
    er = np.exp(-1j * k * a)
    pr, dr = _kernels.rk4_profile(*mesh.rightward(), k2, er, -1j * k * er)
    return pl[:, ::-1], dl[:, ::-1], pr, dr


@dataclass(frozen=True)
class Coefficients:
    """Raw Jost coefficients at each k (k = 0 entries are not meaningful)."""

    k: np.ndarray
    inv_t: np.ndarray        # 1/T from f_l
    inv_t_right: np.ndarray  # 1/T from f_r (consistency check)
    l_over_t: np.ndarray
    r_over_t: np.ndarray
    two_ik_d: np.ndarray     # 2ik L/T, finite at k = 0


def coefficients(V, k, step=None):
    mesh = as_mesh(V, step)
    k, pl, dl, pr, dr = _edge_values(mesh, k)
    a, b = mesh.a, mesh.b
    ik = 1j * k
    with np.errstate(divide="ignore", invalid="ignore"):
        two_ik_a = np.exp(-ik * a) * (ik * pl + dl)
        two_ik_b = np.exp(ik * a) * (ik * pl - dl)
        two_ik_at = np.exp(ik * b) * (ik * pr - dr)
        two_ik_c = np.exp(-ik * b) * (ik * pr + dr)
        return Coefficients(k, two_ik_a / (2 * ik), two_ik_at / (2 * ik),
                            two_ik_b / (2 * ik), two_ik_c / (2 * ik), two_ik_b)


def inverse_transmission(V, k, step=None):
    """1/T(k) for any complex k != 0 (entire in k for compact support)."""
    return coefficients(V, k, step).inv_t


# -- Jost pair -----------------------------------------------------------------

@dataclass(frozen=True)
class JostPair:
    k: complex
    x: np.ndarray
    fl: np.ndarray
    fl_prime: np.ndarray
    fr: np.ndarray
    fr_prime: np.ndarray

    def wronskian(self):
        """W = fl fr' - fl' fr, equal to -2ik/T(k)."""
        return self.fl * self.fr_prime - self.fl_prime * self.fr

    def wronskian_spread(self):
        """max |W(x) - W(x0)| relative to max |W|."""
        w = self.wronskian()
        scale = max(float(np.max(np.abs(w))), np.finfo(float).tiny)
        return float(np.max(np.abs(w - w[0]))) / scale


def solve_jost(V, k, step=None):
    """Jost solutions on the mesh nodes covering the support of V."""
    mesh = as_mesh(V, step)
    if step is not None and not step > 0:
        raise ValueError("step must be positive")
    fl, flp, fr, frp = profiles(mesh, complex(k))
    return JostPair(complex(k), mesh.x, fl[0], flp[0], fr[0], frp[0])


# -- scattering coefficients ---------------------------------------------------

@dataclass(frozen=True)
class ScatteringCoefficients:
    kgrid: np.ndarray
    T: np.ndarray
    L: np.ndarray
    R: np.ndarray
    step: float = float("nan")

    def unitarity_residual(self):
        return np.abs(np.abs(self.T) ** 2 + np.abs(self.L) ** 2 - 1.0)

    def to_csv(self, check=False):
        buf = io.StringIO()
        head = "k,reT,imT,reL,imL,reR,imR"
        buf.write(head + (",unitarity" if check else "") + "\n")
        res = self.unitarity_residual()
        for i, k in enumerate(self.kgrid):
            row = [k, self.T[i].real, self.T[i].imag, self.L[i].real,
                   self.L[i].imag, self.R[i].real, self.R[i].imag]
            if check:
                row.append(res[i])
            buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
        return buf.getvalue()


def _tlr(V, kgrid, step):
    c = coefficients(V, kgrid, step)
    T = 1.0 / c.inv_t
    return T, c.l_over_t * T, c.r_over_t * T


def scattering_coefficients(V, kgrid, step=None, tol=1e-8, max_halvings=6):
    """T, L, R on a real grid.

    With ``step=None`` the mesh step starts at support/4096 and is halved
    until two successive transmission coefficients agree to ``tol``.
    """
    kgrid = np.asarray(kgrid, dtype=float)
    if kgrid.ndim != 1 or kgrid.size == 0 or np.any(kgrid <= 0) or np.any(np.diff(kgrid) <= 0):
        raise ValueError("kgrid must be positive and strictly ascending")
    if step is not None or isinstance(V, Mesh):
        T, L, R = _tlr(V, kgrid, step)
        return ScatteringCoefficients(kgrid, T, L, R, np.nan if step is None else step)
    h = V.default_step()
    T, L, R = _tlr(V, kgrid, h)
    for _ in range(max_halvings):
        h /= 2
        T2, L2, R2 = _tlr(V, kgrid, h)
        done = np.max(np.abs(T2 - T)) <= tol
        T, L, R = T2, L2, R2
        if done:
            break
    return ScatteringCoefficients(kgrid, T, L, R, h)


def ratio_D(V, k, step=None):
    """D(k) = L(k)/T(k); valid for complex k != 0."""
    return coefficients(V, k, step).l_over_t


# -- bound states ---------------------------------------------------------------

@dataclass(frozen=True)
class BoundStateData:
    kappas: np.ndarray
    gammas: np.ndarray

    @property
    def N(self):
        return int(self.kappas.size)

    def sign_rule_ok(self):
        N = self.N
        return all((-1) ** (N - j) * g > 0 for j, g in enumerate(self.gammas, start=1))


def _scan_grid(hi, n):
    return np.linspace(hi / (8 * n), hi, n)


def find_bound_states(V, kappa_max=None, step=None, n_scan=512, xtol=1e-12):
    """All zeros of 1/T(i kappa) on (0, kappa_max) plus dependency constants."""
    mesh = as_mesh(V, step)
    if kappa_max is None:
        kappa_max = 1.05 * np.sqrt(mesh.max_abs_v()) + 0.1
    f = lambda kap: float(inverse_transmission(mesh, 1j * np.asarray(kap)).real[0])

    def values(n):
        g = _scan_grid(kappa_max, n)
        return g, inverse_transmission(mesh, 1j * g).real

    g1, v1 = values(n_scan)
    g2, v2 = values(2 * n_scan)
    if count_sign_changes(v1) != count_sign_changes(v2):
        g1, v1 = g2, v2
        g2, v2 = values(4 * n_scan)
        if count_sign_changes(v1) != count_sign_changes(v2):
            raise ScanTooCoarse("bound-state sign changes not resolved after refinement")
    kappas = np.array(sign_change_roots(f, g2, v2, xtol=xtol))
    gammas = np.array([dependency_constant(mesh, kap) for kap in kappas])
    return BoundStateData(kappas, gammas)


def dependency_constant(V, kappa, step=None):
    """gamma = f_l(i kappa, x)/f_r(i kappa, x) for a bound state at i kappa.

    The ratio is fitted by least squares over all mesh nodes: a single
    evaluation point can sit on a node of an excited state.
    """
    mesh = as_mesh(V, step)
    fl, _, fr, _ = profiles(mesh, 1j * kappa)
    fl, fr = fl[0].real, fr[0].real
    return float(np.dot(fl, fr) / np.dot(fr, fr))


# -- zero energy -------------------------------------------------------------------

def transmission_at_zero(V, step=None, k0=None, levels=8):
    """T(0) by polynomial extrapolation of T(k) from k = k0 / 2**m."""
    mesh = as_mesh(V, step)
    if k0 is None:
        k0 = 0.05 / max(mesh.b - mesh.a, 1e-12)
    ks = k0 / 2.0 ** np.arange(levels)
    T = 1.0 / inverse_transmission(mesh, ks)
    est, _ = neville_at_zero(ks, T)
    return est


@dataclass(frozen=True)
class LogDerivative:
    """rho(x) = f_l'(0, x)/f_l(0, x) sampled on nodes; zero right of the nodes."""

    x: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    left_value: float
    left_slope: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.interp(x, self.x, self.rho)
        left = self.left_slope / (self.left_value + self.left_slope * (x - self.x[0]))
        out = np.where(x < self.x[0], left, np.where(x > self.x[-1], 0.0, inside))
        return out if out.ndim else float(out)


def zero_energy_solution(mesh):
    """f_l(0, x) and its derivative on the mesh nodes (direct k = 0 solve)."""
    one = np.ones(1, dtype=complex)
    p, d = _kernels.rk4_profile(*mesh.leftward(), np.zeros(1, complex), one, 0 * one)
    return p[0, ::-1].real, d[0, ::-1].real


def zero_energy_logderivative(V, step=None, threshold=1e-6):
    """rho = f_l'(0,x)/f_l(0,x) for an exceptional potential with no bound states."""
    mesh = as_mesh(V, step)
    t0 = transmission_at_zero(mesh)
    if abs(t0) < threshold:
        raise NotExceptional(f"|T(0)| = {abs(t0):.3g} below {threshold:g}: potential is generic")
    bs = find_bound_states(mesh)
    if bs.N > 0:
        raise HasBoundStates(f"potential has {bs.N} bound state(s) at {bs.kappas}")
    if hasattr(V, "zero_energy_profile"):
        x, u, up = V.zero_energy_profile()
    else:
        x = mesh.x
        u, up = zero_energy_solution(mesh)
    return LogDerivative(x, up / u, u, float(u[0]), float(up[0]))
