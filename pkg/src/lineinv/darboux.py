"""Bound-state surgery by Darboux transformations.

A :class:`DressedPotential` is a compactly supported base potential followed
by a sequence of Darboux steps (add a bound state, remove the top bound
state, or the zero-energy sign flip). Every step with seed log-derivative
``mu`` maps

    V  ->  2 (mu**2 - kappa**2) - V
    psi -> (psi' - mu psi) / n(k)

so the potential and all Jost solutions of every level are obtained from the
base Jost solutions by pointwise algebra; no ODE is re-integrated and no
numerical derivative is taken. Values live on a fixed node grid: the base
mesh, extended on both sides when additions create exponential tails.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import jost as _jost
from ._numerics import cumulative_from_left, simpson_sided
from .errors import (HasBoundStates, NonPositiveChi, NoSuchBoundState,
                     OrderingViolation)
from .potentials import Mesh, NormReport, Potential, SampledGrid

MU_TOL = 1e-8        # |mu -/+ kappa| required at the grid ends
SNAP_RTOL = 1e-9     # kappas closer than this (relative) are treated as equal


@dataclass(frozen=True)
class _Op:
    kind: str          # "add" | "remove" | "flip"
    kappa: float
    gamma_abs: float = float("nan")

    @property
    def sign(self):
        return {"add": 1.0, "remove": -1.0, "flip": 0.0}[self.kind]


@dataclass(frozen=True)
class DarbouxStep:
    """Seed data of one addition: chi > 0 and mu = chi'/chi on the grid."""

    kappa: float
    gamma_abs: float
    x: np.ndarray = field(repr=False)
    chi: np.ndarray = field(repr=False)
    mu: np.ndarray = field(repr=False)

    def check(self, tol=1e-6):
        if not np.all(self.chi > 0):
            raise NonPositiveChi("chi is not strictly positive on the grid")
        return (abs(self.mu[-1] - self.kappa) <= tol and
                abs(self.mu[0] + self.kappa) <= tol)


@dataclass(frozen=True)
class IdentityReport:
    n: int
    lhs: float
    rhs: float
    residual: float

    def tsv(self):
        return f"{self.n}\t{self.lhs:.17g}\t{self.rhs:.17g}\t{self.residual:.17g}"


# -- base Jost solutions on an extended grid ---------------------------------------

def _exterior(psi_e, dpsi_e, k, d):
    """Free solution continued a signed distance ``d`` from an edge value."""
    if k == 0:
        return psi_e + dpsi_e * d, dpsi_e * np.ones_like(d)
    ik = 1j * k
    al = (ik * psi_e + dpsi_e) / (2 * ik)
    be = (ik * psi_e - dpsi_e) / (2 * ik)
    ep = np.exp(ik * d)
    em = np.exp(-ik * d)
    return al * ep + be * em, ik * (al * ep - be * em)


class _Chain:
    def __init__(self, base, ops, step=None, ext=None):
        self.base = base
        self.ops = tuple(ops)
        self.mesh = base.mesh(step)
        self.step = step
        self._interior = {}
        self._cache = {}
        self._seed = {}
        adds = [op.kappa for op in self.ops if op.kind == "add"]
        if ext is not None:
            self._build_grid(*ext)
        elif not adds:
            self._build_grid(0.0, 1.0)
        else:
            kmin, kmax = min(adds), max(adds)
            width = 12.0 / kmin
            hext = min(float(np.max(self.mesh.h)) * 8, 1.0 / (200.0 * max(kmax, 1.0)))
            for _ in range(12):
                self._build_grid(width, hext)
                if self._tails_ok():
                    break
                width *= 1.6

    # grid ----------------------------------------------------------------
    def _build_grid(self, width, hext):
        m = self.mesh
        if width > 0:
            n = 2 * max(1, int(math.ceil(width / (2 * hext))))
            left = np.linspace(m.a - width, m.a, n + 1)[:-1]
            right = np.linspace(m.b, m.b + width, n + 1)[1:]
        else:
            left = right = np.empty(0)
        self.ext = (width, hext)
        self.x = np.concatenate((left, m.x, right))
        self.i0 = left.size
        self.i1 = left.size + m.x.size
        vp = np.zeros_like(self.x)
        vm = np.zeros_like(self.x)
        vp[self.i0:self.i1] = m.vplus
        vm[self.i0:self.i1] = m.vminus
        self._v0 = (vp, vm)
        self._cache.clear()
        self._seed.clear()

    def _tails_ok(self):
        for j, op in enumerate(self.ops, start=1):
            if op.kind == "add":
                mu = self.seed(j)["mu"]
                if abs(mu[-1] - op.kappa) > MU_TOL or abs(mu[0] + op.kappa) > MU_TOL:
                    return False
        return True

    # base ------------------------------------------------------------------
    def _base_jost(self, k):
        if k not in self._interior:
            if k == 0:
                u, up = _jost.zero_energy_solution(self.mesh)
                # f_r(0, x) from the left edge
                one = np.ones(1, complex)
                from . import _kernels
                pr, dr = _kernels.rk4_profile(*self.mesh.rightward(),
                                              np.zeros(1, complex), one, 0 * one)
                self._interior[k] = (u.astype(complex), up.astype(complex), pr[0], dr[0])
            else:
                fl, flp, fr, frp = _jost.profiles(self.mesh, k)
                self._interior[k] = (fl[0], flp[0], fr[0], frp[0])
        fl_i, flp_i, fr_i, frp_i = self._interior[k]
        x, i0, i1 = self.x, self.i0, self.i1
        a, b = self.mesh.a, self.mesh.b
        out = [np.empty(x.size, complex) for _ in range(4)]
        for arr, src in zip(out, (fl_i, flp_i, fr_i, frp_i)):
            arr[i0:i1] = src
        xl, xr = x[:i0], x[i1:]
        if k == 0:
            out[0][i1:], out[1][i1:] = 1.0, 0.0
            out[2][:i0], out[3][:i0] = 1.0, 0.0
        else:
            e = np.exp(1j * k * xr)
            out[0][i1:], out[1][i1:] = e, 1j * k * e
            e = np.exp(-1j * k * xl)
            out[2][:i0], out[3][:i0] = e, -1j * k * e
        out[0][:i0], out[1][:i0] = _exterior(fl_i[0], flp_i[0], k, xl - a)
        out[2][i1:], out[3][i1:] = _exterior(fr_i[-1], frp_i[-1], k, xr - b)
        return tuple(out)

    # levels ------------------------------------------------------------------
    def values(self, level):
        key = ("v", level)
        if key not in self._cache:
            if level == 0:
                self._cache[key] = self._v0
            else:
                vp, vm = self.values(level - 1)
                op = self.ops[level - 1]
                mu = self.seed(level)["mu"]
                w = 2.0 * (mu * mu - op.kappa ** 2)
                self._cache[key] = (w - vp, w - vm)
        return self._cache[key]

    def seed(self, level):
        if level in self._seed:
            return self._seed[level]
        op = self.ops[level - 1]
        if op.kind == "flip":
            fl, flp, _, _ = self.jost(level - 1, 0.0)
            u, up = fl.real, flp.real
            if not np.all(u > 0):
                raise HasBoundStates("f_l(0, x) changes sign: potential has bound states")
            s = {"mu": up / u, "u": u}
        else:
            fl, flp, fr, frp = self.jost(level - 1, 1j * op.kappa)
            fl, flp, fr, frp = fl.real, flp.real, fr.real, frp.real
            if op.kind == "add":
                chi = fl + op.gamma_abs * fr
                dchi = flp + op.gamma_abs * frp
                if not np.all(chi > 0):
                    raise NonPositiveChi(f"chi changes sign for kappa={op.kappa:g}")
                s = {"mu": dchi / chi, "chi": chi}
            else:
                # f_l is accurate right of the well, f_r left of it
                x = self.x
                inner = slice(self.i0, self.i1)
                g = float(np.dot(fl[inner], fr[inner]) / np.dot(fr[inner], fr[inner]))
                left = x < 0.5 * (self.mesh.a + self.mesh.b)
                fl = np.where(left, g * fr, fl)
                flp = np.where(left, g * frp, flp)
                fr, frp = fl / g, flp / g
                if not (np.all(fl > 0) or np.all(fl < 0)):
                    raise NoSuchBoundState(
                        f"kappa={op.kappa:g} is not the top bound state (wavefunction has nodes)")
                mu = flp / fl
                jl = cumulative_from_left(-x[::-1], fl[::-1] ** 2)[::-1]
                jl += fl[-1] ** 2 / (2 * op.kappa)
                jr = cumulative_from_left(x, fr ** 2) + fr[0] ** 2 / (2 * op.kappa)
                s = {"mu": mu, "phi_l": fl, "phi_r": fr, "j_plus": jl, "j_minus": jr}
        self._seed[level] = s
        return s

    def jost(self, level, k):
        k = complex(k)
        if k.imag == 0 and k.real == 0:
            k = 0.0
        key = ("j", level, k)
        if key in self._cache:
            return self._cache[key]
        if level == 0:
            res = self._base_jost(k)
        else:
            op = self.ops[level - 1]
            fl, flp, fr, frp = self.jost(level - 1, k)
            s = self.seed(level)
            mu = s["mu"]
            kap = op.kappa
            if op.kind == "remove" and abs(k - 1j * kap) <= SNAP_RTOL * max(1.0, kap):
                nl = 2 * kap * s["j_plus"] / s["phi_l"]
                nlp = -mu * nl - 2 * kap * s["phi_l"]
                nr = 2 * kap * s["j_minus"] / s["phi_r"]
                nrp = -mu * nr + 2 * kap * s["phi_r"]
                res = tuple(np.asarray(v, complex) for v in (nl, nlp, nr, nrp))
            elif op.kind == "flip" and k == 0:
                u = s["u"]
                nl = 1.0 / u
                nr = u[0] / u
                res = tuple(np.asarray(v, complex) for v in (nl, -mu * nl, nr, -mu * nr))
            else:
                sg = op.sign
                q = k * k + kap * kap
                dl = 1j * k - sg * kap
                dr = -1j * k + sg * kap
                gl = flp - mu * fl
                gr = frp - mu * fr
                res = (gl / dl, (-mu * gl - q * fl) / dl, gr / dr, (-mu * gr - q * fr) / dr)
        self._cache[key] = res
        return res


# -- the dressed potential -------------------------------------------------------------

class DressedPotential(Potential):
    """Level ``level`` of a Darboux chain, usable wherever a potential is."""

    form = "grid"

    def __init__(self, chain, level, bound_states):
        self._chain = chain
        self.level = level
        self.bound_states = tuple(bound_states)

    @classmethod
    def wrap(cls, V, step=None):
        if isinstance(V, DressedPotential):
            return V
        bs = _jost.find_bound_states(V, step=step)
        states = [(float(k), abs(float(g))) for k, g in zip(bs.kappas, bs.gammas)]
        chain = _Chain(V, (), step)
        chain.initial_states = tuple(states)
        return cls(chain, 0, states)

    @property
    def base(self):
        return self._chain.base

    @property
    def ops(self):
        return self._chain.ops[: self.level]

    @property
    def kappas(self):
        return np.array([k for k, _ in self.bound_states])

    @property
    def x(self):
        return self._chain.x

    @property
    def vplus(self):
        return self._chain.values(self.level)[0]

    @property
    def vminus(self):
        return self._chain.values(self.level)[1]

    @property
    def node_values(self):
        vp, vm = self._chain.values(self.level)
        return 0.5 * (vp + vm)

    @property
    def support(self):
        return float(self.x[0]), float(self.x[-1])

    @cached_property
    def parent(self):
        if self.level == 0:
            raise ValueError("level-0 potential has no parent")
        return DressedPotential(self._chain, self.level - 1, _replay(
            self._chain, self.level - 1))

    def edges(self):
        return self.x[::2]

    def sides(self, x):
        x = np.asarray(x, dtype=float)
        vp, vm = self.vplus, self.vminus
        g = self.x
        idx = np.searchsorted(g, x)
        exact = (idx < g.size) & (g[np.minimum(idx, g.size - 1)] == x)
        interp = np.interp(x, g, self.node_values, left=0.0, right=0.0)
        ii = np.minimum(idx, g.size - 1)
        plus = np.where(exact, vp[ii], interp)
        minus = np.where(exact, vm[ii], interp)
        plus = np.where(x >= g[-1], 0.0, plus)
        minus = np.where(x <= g[0], 0.0, minus)
        return plus, minus

    def default_step(self):
        return 2 * float(np.min(np.diff(self.x)))

    def mesh(self, step=None):
        """Coarsened node mesh of the whole grid (``step`` is ignored)."""
        return Mesh.from_nodes(self.x, self.vplus, self.vminus)

    def jost(self, k):
        """(f_l, f_l', f_r, f_r') on the grid nodes."""
        return self._chain.jost(self.level, k)

    def seed_mu(self, level=None):
        level = self.level if level is None else level
        return self._chain.seed(level)["mu"]

    def step_info(self, level=None):
        level = self.level if level is None else level
        op = self._chain.ops[level - 1]
        s = self._chain.seed(level)
        return DarbouxStep(op.kappa, op.gamma_abs, self.x, s.get("chi", s.get("u")), s["mu"])

    def zero_energy_profile(self):
        fl, flp, _, _ = self.jost(0.0)
        return self.x, fl.real, flp.real

    def norms(self):
        x, vp, vm = self.x, self.vplus, self.vminus
        l2 = math.sqrt(max(0.0, simpson_sided(x, vp * vp, vm * vm)))
        w = 1 + np.abs(x)
        l1 = simpson_sided(x, w * np.abs(vp), w * np.abs(vm))
        return NormReport(l2, float(l1), float(simpson_sided(x, vp, vm)))

    def to_grid(self, dx=None):
        """Resample on a uniform grid (linear interpolation of node values)."""
        x = self.x
        dx = float(np.min(np.diff(x))) if dx is None else float(dx)
        n = int(round((x[-1] - x[0]) / dx)) + 1
        xs = x[0] + dx * np.arange(n)
        return SampledGrid(x[0], dx, np.interp(xs, x, self.node_values))

    def to_dict(self):
        return self.to_grid().to_dict()


def _replay(chain, level):
    """Bound-state bookkeeping of ``chain`` up to ``level``."""
    states = list(chain.initial_states)
    for op in chain.ops[:level]:
        states = _apply_states(states, op)
    return states


def _apply_states(states, op):
    states = list(states)
    if op.kind == "add":
        states.append((op.kappa, op.gamma_abs))
    elif op.kind == "remove":
        states.pop()
    return states


def _extend(V, op, step=None):
    V = DressedPotential.wrap(V, step)
    chain = V._chain
    ops = chain.ops[: V.level] + (op,)
    new = _Chain(chain.base, ops, chain.step)
    new.initial_states = chain.initial_states
    states = _apply_states(V.bound_states, op)
    return DressedPotential(new, len(ops), states)


# -- operations ---------------------------------------------------------------------

def _snap_kappa(V, kappa):
    for op in V._chain.ops[: V.level]:
        if op.kind == "remove" and abs(op.kappa - kappa) <= SNAP_RTOL * max(1.0, kappa):
            return op.kappa
    return kappa


def add_bound_state(V, kappa, gamma_abs, step=None):
    """Add a bound state at i*kappa with |gamma| = gamma_abs.

    Returns the dressed potential and the :class:`DarbouxStep` used.
    """
    if not kappa > 0 or not gamma_abs > 0:
        raise ValueError("kappa and gamma_abs must be positive")
    V = DressedPotential.wrap(V, step)
    if V.bound_states and kappa <= max(k for k, _ in V.bound_states):
        raise OrderingViolation(
            f"kappa={kappa:g} must exceed the existing bound states {V.kappas}")
    kappa = _snap_kappa(V, float(kappa))
    W = _extend(V, _Op("add", kappa, float(gamma_abs)), step)
    info = W.step_info()
    info.check(tol=1e-6)
    return W, info


def remove_bound_state(V, j=None, step=None):
    """Remove the j-th bound state (1-based, ascending kappa; default: the top one).

    The top state is removed by one Darboux step seeded with its wavefunction.
    A lower state j is removed by stripping states N..j and re-adding
    j+1..N with unchanged |gamma|.
    """
    V = DressedPotential.wrap(V, step)
    N = len(V.bound_states)
    j = N if j is None else int(j)
    if N == 0 or not 1 <= j <= N:
        raise NoSuchBoundState(f"potential has {N} bound state(s); cannot remove #{j}")
    keep = list(V.bound_states[j:])
    W = V
    for kap, _ in reversed(V.bound_states[j - 1:]):
        last = W.ops[-1] if W.level else None
        if last is not None and last.kind == "add" and last.kappa == kap:
            W = W.parent
        else:
            W = _extend(W, _Op("remove", kap), step)
    for kap, g in keep:
        W, _ = add_bound_state(W, kap, g, step)
    return W


def identity_closed_form(kappa, n):
    """(-1)^(n+1) 2^(2n+2) kappa^(2n+1) n!/(2n+1)!!."""
    return (-1) ** (n + 1) * 4.0 ** (n + 1) * kappa ** (2 * n + 1) * float(_factor(n))


def _factor(n):
    dfact = 1
    for m in range(1, 2 * n + 2, 2):
        dfact *= m
    return Fraction(math.factorial(n), dfact)


def binomial_sum(n):
    """sum_p (-1)^p C(n,p)/(2p+1) as an exact fraction; equals 2^n n!/(2n+1)!!."""
    return sum(Fraction((-1) ** p * math.comb(n, p), 2 * p + 1) for p in range(n + 1))


def _on_grid(V, x):
    if isinstance(V, DressedPotential) and V.x.shape == x.shape and np.array_equal(V.x, x):
        return V.vplus, V.vminus
    return V.sides(x)


def moment_difference(Va, Vb, n, x=None):
    """Quadrature of (Va - Vb)(Va + Vb)^n over the node grid of ``Va``."""
    x = Va.x if x is None else x
    ap, am = _on_grid(Va, x)
    bp, bm = _on_grid(Vb, x)
    return float(simpson_sided(x, (ap - bp) * (ap + bp) ** n, (am - bm) * (am + bm) ** n))


def _Q(mu, kappa, n):
    return sum(math.comb(n, p) * (-kappa * kappa) ** (n - p) * mu ** (2 * p + 1) / (2 * p + 1)
               for p in range(n + 1))


def integral_identity(V_after, V_before, kappa, n):
    """Check the integral of (V_after - V_before)(V_after + V_before)^n.

    ``V_after`` must be a dressed potential obtained from ``V_before`` by one
    addition at ``kappa``. The tails beyond the grid are added in closed form
    from the seed log-derivative at the grid ends.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    x = V_after.x
    lhs = moment_difference(V_after, V_before, n, x)
    ap, am = _on_grid(V_after, x)
    bp, bm = _on_grid(V_before, x)
    mu_r = math.sqrt(max(0.0, kappa ** 2 + 0.5 * (am[-1] + bm[-1])))
    mu_l = -math.sqrt(max(0.0, kappa ** 2 + 0.5 * (ap[0] + bp[0])))
    c = -(2.0 ** (n + 1))
    lhs += c * (_Q(kappa, kappa, n) - _Q(mu_r, kappa, n))
    lhs += c * (_Q(mu_l, kappa, n) - _Q(-kappa, kappa, n))
    rhs = identity_closed_form(kappa, n)
    return IdentityReport(n, lhs, rhs, abs(lhs - rhs) / max(1.0, abs(rhs)))


def norm_shift_report(V0, VN, kappas):
    """(integral of VN - V0, integral of VN^2 - V0^2) over the grid of VN."""
    x = VN.x
    np_, nm = _on_grid(VN, x)
    zp, zm = _on_grid(V0, x)
    d1 = simpson_sided(x, np_ - zp, nm - zm)
    d2 = simpson_sided(x, np_ ** 2 - zp ** 2, nm ** 2 - zm ** 2)
    return float(d1), float(d2)


def norm_shift_expected(kappas):
    k = np.asarray(kappas, dtype=float)
    return -4.0 * k.sum(), 16.0 / 3.0 * np.sum(k ** 3)


def signflip_partner(V1, step=None):
    """The partner V2 = 2 rho^2 - V1 with the same T and opposite L and R.

    ``V1`` must be exceptional with no bound states.
    """
    _jost.zero_energy_logderivative(DressedPotential.wrap(V1, step))
    V1 = DressedPotential.wrap(V1, step)
    return _extend(V1, _Op("flip", 0.0), step)
