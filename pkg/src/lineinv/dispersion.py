"""The ratio data D(k) = L(k)/T(k) and what can be built from it alone.

Three data sources share one interface: the closed-form square well, any
compactly supported potential solved by the forward engine, and sampled
real-axis values. From D the module classifies the zero-energy behaviour,
counts sign changes of D on the positive imaginary axis, and constructs the
transmission coefficient of the bound-state-free potential by the
dispersion integral

    T0(k) = exp( (i / 2pi) * integral log(1 + |D(s)|^2) / (s - k - i0) ds ).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from . import jost as _jost
from ._numerics import adaptive_gk, count_sign_changes, neville_at_zero
from .errors import (AnalyticModelRequired, InconclusiveLimit, ParityMismatch,
                     PotentialFormatError, TailTooFat)
from .potentials import SquareWell, load_potential

TAIL_TOL = 1e-4


# -- entire helpers ----------------------------------------------------------------

def cos_sqrt(z):
    """cos(sqrt(z)), entire in z."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-3
    w = np.sqrt(np.where(small, 1.0, z))
    series = 1 - z / 2 + z * z / 24 - z ** 3 / 720
    return np.where(small, series, np.cos(w))


def sinc_sqrt(z):
    """sin(sqrt(z))/sqrt(z), entire in z."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-3
    w = np.sqrt(np.where(small, 1.0, z))
    series = 1 - z / 6 + z * z / 120 - z ** 3 / 5040
    return np.where(small, series, np.sin(w) / w)


# -- models --------------------------------------------------------------------------

class ReflectionRatio:
    """Base class. ``D(k)`` accepts real k; analytic models also complex k."""

    analytic = True
    source = ""

    def D(self, k):
        raise NotImplementedError

    def __call__(self, k):
        return self.D(k)

    def default_window(self):
        raise AnalyticModelRequired("no default kappa window for this model")


@dataclass(frozen=True)
class SquareWellModel(ReflectionRatio):
    """Closed-form data of the well of depth ``epsilon`` on [0, 1]."""

    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    @property
    def source(self):
        return f"squarewell:{self.epsilon!r}"

    def D(self, k):
        k = np.asarray(k, dtype=complex)
        eps = self.epsilon
        with np.errstate(divide="ignore", invalid="ignore"):
            return -eps * np.exp(1j * k) * sinc_sqrt(k * k + eps) / (2j * k)

    def zero_limit(self):
        """lim 2ikD(k) as k -> 0."""
        e = self.epsilon
        return -math.sqrt(e) * math.sin(math.sqrt(e))

    def inv_tau(self, k):
        """1/T(k) of the well, continued to the whole plane."""
        k = np.asarray(k, dtype=complex)
        z = k * k + self.epsilon
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.exp(1j * k) * (cos_sqrt(z) + (2 * k * k + self.epsilon)
                                     * sinc_sqrt(z) / (2j * k))

    def xis(self):
        """Bound-state kappas of the well."""
        return _square_well_xis(float(self.epsilon))

    def inv_tzero(self, k):
        return tzero_closed_form(self.epsilon, k, inverse=True)

    def default_window(self):
        return 0.0, 2.0 * math.sqrt(self.epsilon)

    def reference_potential(self):
        return SquareWell(self.epsilon)


@lru_cache(maxsize=64)
def _square_well_xis(eps):
    model = SquareWellModel(eps)
    f = lambda kap: float(model.inv_tau(1j * kap).real)
    out = []
    for kap in _jost.find_bound_states(SquareWell(eps)).kappas:
        # polish the ODE roots on the closed form
        d = 1e-6 * max(1.0, kap)
        lo, hi = kap - d, kap + d
        if f(lo) * f(hi) < 0:
            kap = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        out.append(float(kap))
    return tuple(out)


class FromPotential(ReflectionRatio):
    """Data of a compactly supported potential via the forward engine."""

    def __init__(self, V, step=None, source="potential"):
        self.V = V
        self.step = step
        self.source = source
        self._mesh = V.mesh(step)
        self._memo = {}
        self._xis = None

    def D(self, k):
        k = np.asarray(k, dtype=complex)
        flat = k.ravel()
        missing = [kk for kk in dict.fromkeys(flat.tolist()) if kk not in self._memo]
        if missing:
            c = _jost.coefficients(self._mesh, np.array(missing))
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = c.two_ik_d / (2j * c.k)
            self._memo.update(zip(missing, vals.tolist()))
        return np.array([self._memo[kk] for kk in flat.tolist()]).reshape(k.shape)

    def zero_limit(self):
        return None

    def xis(self):
        if self._xis is None:
            self._xis = tuple(float(x) for x in _jost.find_bound_states(self._mesh).kappas)
        return self._xis

    def inv_tzero(self, k):
        k = np.asarray(k, dtype=complex)
        out = _jost.inverse_transmission(self._mesh, k.ravel()).reshape(k.shape)
        for xi in self.xis():
            out = out * (k + 1j * xi) / (k - 1j * xi)
        return out

    def default_window(self):
        return 0.0, 2.0 * math.sqrt(max(self._mesh.max_abs_v(), 1e-12))

    def reference_potential(self):
        return self.V


@dataclass(frozen=True)
class Sampled(ReflectionRatio):
    """Real-axis samples at ascending positive k; D(-k) = conj D(k)."""

    k: np.ndarray
    values: np.ndarray = field(repr=False)
    source: str = "sampled"
    analytic = False

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if k.ndim != 1 or k.shape != v.shape or k.size < 2:
            raise PotentialFormatError("sampled D needs matching 1-D k and value arrays")
        if not (k[0] > 0 and np.all(np.diff(k) > 0)):
            raise PotentialFormatError("sampled k must be positive and strictly ascending")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "values", v)

    def D(self, k):
        k = np.asarray(k)
        if np.iscomplexobj(k) and np.any(np.imag(k) != 0):
            raise AnalyticModelRequired("sampled data cannot be continued off the real axis")
        k = np.real(k).astype(float)
        a = np.abs(k)
        re = np.interp(a, self.k, self.values.real, right=0.0)
        im = np.interp(a, self.k, self.values.imag, right=0.0)
        return np.where(k < 0, re - 1j * im, re + 1j * im)

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or [c.strip() for c in rows[0]] != ["k", "reD", "imD"]:
            raise PotentialFormatError("sampled D CSV must start with header k,reD,imD")
        try:
            arr = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
        except ValueError as exc:
            raise PotentialFormatError(f"non-numeric entry in {path}: {exc}") from None
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise PotentialFormatError("each row needs three columns")
        return cls(arr[:, 0], arr[:, 1] + 1j * arr[:, 2], source=f"csv:{path}")

    def to_csv(self):
        lines = ["k,reD,imD"]
        lines += [f"{k:.17g},{v.real:.17g},{v.imag:.17g}" for k, v in zip(self.k, self.values)]
        return "\n".join(lines) + "\n"


def parse_model(spec, step=None):
    """``squarewell:EPS`` (``pi^2`` accepted), ``potential:FILE`` or ``csv:FILE``."""
    kind, _, arg = spec.partition(":")
    if kind == "squarewell":
        return SquareWellModel(parse_epsilon(arg))
    if kind == "potential":
        return FromPotential(load_potential(arg), step, source=spec)
    if kind == "csv":
        return Sampled.from_csv(arg)
    raise PotentialFormatError(f"unknown model spec {spec!r}")


def parse_epsilon(text):
    t = text.strip().replace(" ", "")
    if t in ("pi^2", "pi**2"):
        return math.pi ** 2
    try:
        eps = float(t)
    except ValueError:
        raise PotentialFormatError(f"cannot parse epsilon {text!r}") from None
    if not eps > 0:
        raise PotentialFormatError("epsilon must be positive")
    return eps


# -- classification --------------------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    kind: str                 # "generic" | "exceptional"
    zero_limit: float
    parity: str | None = None  # "even" | "odd" for generic data

    @property
    def exceptional(self):
        return self.kind == "exceptional"


def classify(D, k0=0.1, levels=8, threshold=1e-6):
    """Decide generic/exceptional from lim 2ikD(k) along k -> 0+."""
    if isinstance(D, Sampled):
        ks = D.k[:levels][::-1]
    else:
        ks = k0 / 2.0 ** np.arange(levels)
    g = 2j * ks * D.D(ks)
    est, prev = neville_at_zero(ks, g)
    scale = float(np.max(np.abs(g)))
    if abs(est - prev) > 1e-4 * max(scale, 1e-300):
        raise InconclusiveLimit(
            f"extrapolants {est.real:.6g} and {prev.real:.6g} disagree")
    lim = float(est.real)
    if abs(lim) <= threshold * scale:
        return Classification("exceptional", lim)
    return Classification("generic", lim, "odd" if lim < 0 else "even")


def count_odd_zeros(D, window=None, n_scan=512):
    """Number of sign changes of kappa -> D(i kappa) on the window."""
    if not D.analytic:
        raise AnalyticModelRequired("zero counting needs data on the imaginary axis")
    lo, hi = D.default_window() if window is None else window
    f = lambda kap: D.D(1j * np.asarray(kap)).real

    def count(n):
        kap = np.linspace(lo, hi, n + 1)[1:]
        return count_sign_changes(f(kap))

    c1, c2 = count(n_scan), count(2 * n_scan)
    while c1 != c2 and n_scan < 2 ** 16:
        n_scan *= 2
        c1, c2 = c2, count(2 * n_scan)
    return c2


# -- transmission of the bound-state-free potential ---------------------------------------

def _F(D, s):
    with np.errstate(divide="ignore"):
        return np.logaddexp(0.0, 2.0 * np.log(np.abs(D.D(s))))


def truncation_radius(D, tail_tol=TAIL_TOL, ds=0.05, s_max=1e5):
    """Twice the last scanned s with |D(s)| >= tail_tol."""
    if isinstance(D, Sampled):
        if abs(D.values[-1]) >= tail_tol:
            raise TailTooFat(f"|D| = {abs(D.values[-1]):.3g} at the last sample")
        big = np.nonzero(np.abs(D.values) >= tail_tol)[0]
        return float(D.k[-1]) if big.size == 0 else float(min(2 * D.k[big[-1]], D.k[-1]))
    top = 32.0
    while True:
        s = np.arange(ds, top + ds / 2, ds)
        big = np.nonzero(np.abs(D.D(s)) >= tail_tol)[0]
        last = s[big[-1]] if big.size else ds
        if last < 0.75 * top:
            return 2.0 * float(last)
        top *= 2
        if top > s_max:
            raise TailTooFat(f"|D(s)| >= {tail_tol:g} beyond s = {s_max:g}")


@dataclass(frozen=True)
class TzeroResult:
    value: complex
    radius: float
    quad_error: float
    tail_error: float

    @property
    def error(self):
        return self.quad_error + self.tail_error


def tzero_integral(D, k, tol=1e-10, tail_tol=TAIL_TOL, full_output=False):
    """T0(k) for Im k >= 0 from real-axis data only.

    Array input returns an array of values (or a list of results with
    ``full_output``), one integral per point.
    """
    if np.ndim(k):
        out = [tzero_integral(D, kk, tol, tail_tol, full_output) for kk in np.ravel(k)]
        return out if full_output else np.reshape(np.array(out), np.shape(k))
    k = complex(k)
    if k.imag < 0:
        raise ValueError("tzero_integral needs Im k >= 0")
    if k.real < 0:
        r = tzero_integral(D, -k.conjugate(), tol, tail_tol, True)
        r = TzeroResult(r.value.conjugate(), r.radius, r.quad_error, r.tail_error)
        return r if full_output else r.value
    S = truncation_radius(D, tail_tol)
    if k == 0:
        f0 = float(_F(D, np.array([1e-8]))[0])
        r = TzeroResult(complex(math.exp(-0.5 * f0)), S, 0.0, 0.0)
        return r if full_output else r.value
    S = max(S, 2 * abs(k) + 1.0)
    edges = _panels(0.0, S)
    if k.imag > 0:
        g = lambda s: _F(D, s) * 2 * k / (s * s - k * k)
        val, err = adaptive_gk(g, _with_breaks(edges, [k.real]), abstol=tol)
    else:
        kr = k.real
        fk = float(_F(D, np.array([kr]))[0])
        G = lambda s: _F(D, s) * 2 * kr / (s + kr)
        pair = lambda t: (G(kr + t) - G(kr - t)) / t
        # symmetric pairs on |s - k| <= k/2, plain quadrature elsewhere
        v1, e1 = adaptive_gk(pair, _panels(0.0, kr / 2), abstol=tol / 3)
        off = lambda s: G(s) / (s - kr)
        v2, e2 = adaptive_gk(off, _panels(0.0, kr / 2), abstol=tol / 3)
        v3, e3 = adaptive_gk(off, _panels(1.5 * kr, S), abstol=tol / 3)
        val, err = v1 + v2 + v3 + 1j * math.pi * fk, e1 + e2 + e3
    tail = 2 * abs(k) * float(_F(D, np.array([S]))[0]) / (3 * S)
    T0 = np.exp(1j * val / (2 * math.pi))
    r = TzeroResult(complex(T0), S, float(err), tail)
    return r if full_output else r.value


def _panels(a, b, width=1.0):
    n = max(1, int(math.ceil((b - a) / width)))
    return np.linspace(a, b, n + 1)


def _with_breaks(edges, points):
    gap = 1e-8 * (edges[-1] - edges[0])
    pts = [p for p in points if np.min(np.abs(edges - p)) > gap]
    return np.unique(np.concatenate((edges, pts)))


def tzero_closed_form(epsilon, k, inverse=False):
    """T0 of the square well: tau divided by its Blaschke factors."""
    model = SquareWellModel(float(epsilon))
    k = np.asarray(k, dtype=complex)
    inv = model.inv_tau(k)
    for xi in model.xis():
        inv = inv * (k + 1j * xi) / (k - 1j * xi)
    return inv if inverse else 1.0 / inv


def inv_tzero(D, k):
    """1/T0 continued to the whole plane (analytic models only)."""
    if not D.analytic:
        raise AnalyticModelRequired("continuation of sampled data is not supported")
    return D.inv_tzero(k)


# -- reflection coefficients -------------------------------------------------------------

@dataclass(frozen=True)
class ReflectionData:
    k: np.ndarray
    T: np.ndarray
    L: np.ndarray
    T0: np.ndarray
    L0: tuple          # one array (generic) or two branches (exceptional)
    R0: tuple


def blaschke(k, kappas):
    k = np.asarray(k, dtype=complex)
    out = np.ones_like(k)
    for kap in kappas:
        out = out * (k + 1j * kap) / (k - 1j * kap)
    return out


def reflection_from_D(D, T0, kappas, k, classification=None):
    """Scattering coefficients for bound states at ``kappas`` given D and T0 on ``k``."""
    k = np.asarray(k, dtype=float)
    T0 = np.asarray(T0, dtype=complex)
    N = len(kappas)
    cl = classify(D) if classification is None else classification
    if not cl.exceptional and (N % 2 == 1) != (cl.parity == "odd"):
        raise ParityMismatch(f"{N} bound states contradict {cl.parity} parity of D")
    b = blaschke(k, kappas)
    d, dm = D.D(k), D.D(-k)
    if cl.exceptional:
        L0 = (d * T0, -d * T0)
        R0 = (-dm * T0, dm * T0)
    else:
        sg = (-1) ** N
        L0 = (sg * d * T0,)
        R0 = (-sg * dm * T0,)
    return ReflectionData(k, T0 * b, d * T0 * b, T0, L0, R0)
