"""Which potentials share a given ratio D, and how a norm bound picks one.

Every compactly supported potential with data D is obtained from the
bound-state-free potential V0 by adding bound states at a subset of the
resonances (zeros of 1/T0 on the negative imaginary axis). The admissible
subsets are screened by parity and by the sign rule on D(i kappa), and their
L2 norms form a ladder C_N^2 = C_0^2 + (16/3) sum kappa^3.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import darboux as _darboux
from . import jost as _jost
from ._numerics import count_sign_changes
from .dispersion import classify, count_odd_zeros, inv_tzero
from .errors import NegativeDiscriminant, ScanTooCoarse, WindowTooSmall
from .potentials import norms


@dataclass(frozen=True)
class ResonanceSet:
    betas: tuple
    source: str = ""

    def __len__(self):
        return len(self.betas)


@dataclass(frozen=True)
class Candidate:
    N: int
    kappas: tuple
    gammas: tuple
    c_n: float
    c0: float = float("nan")

    def sign_rule_ok(self):
        N = self.N
        return all((-1) ** (N - j) * g > 0 for j, g in enumerate(self.gammas, start=1))

    def to_dict(self):
        return {"N": self.N, "kappas": list(self.kappas), "gammas": list(self.gammas),
                "c_n": self.c_n}

    def tsv(self):
        ks = ";".join(f"{k:.17g}" for k in self.kappas)
        return f"{self.N}\t{ks}\t{self.c_n:.17g}"


def find_resonances(D, window=None, n_scan=2048, xtol=1e-12, max_scan=2 ** 16):
    """Zeros of beta -> 1/T0(-i beta) on the window, refined by brentq."""
    lo, hi = D.default_window() if window is None else window
    g = lambda b: inv_tzero(D, -1j * np.asarray(b, dtype=float)).real

    def scan(n):
        b = np.linspace(lo, hi, n + 1)[1:]
        return b, g(b)

    b1, v1 = scan(n_scan)
    b2, v2 = scan(2 * n_scan)
    n = 2 * n_scan
    while count_sign_changes(v1) != count_sign_changes(v2):
        if n >= max_scan:
            raise ScanTooCoarse(f"resonance count not stable at {n} scan points")
        b1, v1 = b2, v2
        n *= 2
        b2, v2 = scan(n)
    f = lambda b: float(g(b))
    s = np.sign(v2)
    betas = []
    for i in np.nonzero(s[:-1] * s[1:] < 0)[0]:
        beta = brentq(f, b2[i], b2[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)
        scale = max(abs(v2[i]), abs(v2[i + 1]))
        if abs(f(beta)) > 1e-8 * scale:
            raise ScanTooCoarse(f"bracket at beta={beta:.6g} is a pole, not a zero")
        betas.append(float(beta))
    if not betas:
        cl = classify(D)
        if cl.parity == "odd":
            raise WindowTooSmall(f"no resonance in ({lo:g}, {hi:g}] but N must be odd")
    return ResonanceSet(tuple(betas), getattr(D, "source", ""))


def allowed_N(classification, Z):
    top = Z + 1
    if classification.exceptional:
        return list(range(0, top + 1))
    start = 1 if classification.parity == "odd" else 0
    return list(range(start, top + 1, 2))


def ladder(c0, kappas):
    return math.sqrt(c0 * c0 + 16.0 / 3.0 * sum(k ** 3 for k in kappas))


def enumerate_candidates(D, resonances, allowed, c0):
    """All subsets of the resonances passing the sign rule, sorted by C_N."""
    betas = tuple(resonances.betas if isinstance(resonances, ResonanceSet) else resonances)
    d = {b: float(D.D(1j * b).real) for b in betas}
    out = []
    for N in allowed:
        for sub in itertools.combinations(betas, N):
            gam = tuple(d[b] for b in sub)
            cand = Candidate(N, sub, gam, ladder(c0, sub), c0)
            if cand.sign_rule_ok():
                out.append(cand)
    out.sort(key=lambda c: (c.c_n, c.N, c.kappas))
    return out


def c0_from_reference(V_ref, kappas=None):
    """||V0|| from a reference potential and its bound states."""
    if kappas is None:
        kappas = _jost.find_bound_states(V_ref).kappas
    disc = norms(V_ref).l2 ** 2 - 16.0 / 3.0 * float(np.sum(np.asarray(kappas) ** 3))
    if disc < 0:
        raise NegativeDiscriminant(f"||V||^2 - 16/3 sum kappa^3 = {disc:.6g} < 0")
    return math.sqrt(disc)


def model_c0(D):
    """C_0 for a model carrying its own reference potential."""
    return c0_from_reference(D.reference_potential(), D.xis())


@dataclass(frozen=True)
class Disambiguation:
    status: str                  # "unique" | "ambiguous" | "none"
    candidates: tuple
    bound: float

    @property
    def candidate(self):
        return self.candidates[0] if self.status == "unique" else None

    def to_json(self):
        return json.dumps({"status": self.status, "bound": self.bound,
                           "candidates": [c.to_dict() for c in self.candidates]},
                          indent=2)


def disambiguate(candidates, C, rtol=1e-9):
    """Candidates with C_N <= C; unique only if exactly one qualifies.

    ``rtol`` absorbs rounding in the ladder values, so a bound equal to a
    printed norm (e.g. C = 5 for the depth-5 well) still admits it.
    """
    ok = tuple(c for c in candidates if c.c_n <= C * (1 + rtol))
    status = {0: "none", 1: "unique"}.get(len(ok), "ambiguous")
    return Disambiguation(status, ok, float(C))


@dataclass(frozen=True)
class Verification:
    candidate: Candidate
    potential: object = field(repr=False)
    d_error: float
    norm: float
    norm_rel_error: float
    kappas_found: tuple

    def ok(self, d_tol=1e-4, norm_tol=1e-3):
        return self.d_error <= d_tol and self.norm_rel_error <= norm_tol


def build_candidate(candidate, V_ref, step=None):
    """Strip V_ref of its bound states, then add the candidate's."""
    W = _darboux.DressedPotential.wrap(V_ref, step)
    n_ref = len(W.bound_states)
    while W.bound_states:
        W = _darboux.remove_bound_state(W)
    if (n_ref - candidate.N) % 2:
        # D changes sign with the parity of N: use the other exceptional branch
        W = _darboux.signflip_partner(W)
    for kap, gam in zip(candidate.kappas, candidate.gammas):
        W, _ = _darboux.add_bound_state(W, kap, abs(gam))
    return W


def verify_candidate(candidate, D, V_ref, kgrid=None, step=None):
    """Construct the candidate and compare its forward data with D."""
    W = build_candidate(candidate, V_ref, step)
    k = np.linspace(0.25, 8.0, 32) if kgrid is None else np.asarray(kgrid, dtype=float)
    c = _jost.coefficients(W.mesh(), k)
    d_new = c.two_ik_d / (2j * k)
    err = float(np.max(np.abs(d_new - D.D(k))))
    nrm = W.norms().l2
    found = tuple(float(x) for x in _jost.find_bound_states(W.mesh()).kappas)
    return Verification(candidate, W, err, nrm, abs(nrm - candidate.c_n) / candidate.c_n, found)


@dataclass(frozen=True)
class Pipeline:
    classification: object
    Z: int
    resonances: ResonanceSet
    allowed: list
    c0: float
    candidates: list


def run_pipeline(D, c0=None, window=None):
    cl = classify(D)
    Z = count_odd_zeros(D, window)
    res = find_resonances(D, window)
    allowed = allowed_N(cl, Z)
    c0 = model_c0(D) if c0 is None else c0
    return Pipeline(cl, Z, res, allowed, c0, enumerate_candidates(D, res, allowed, c0))
