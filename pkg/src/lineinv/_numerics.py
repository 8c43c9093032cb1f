"""Small numerical helpers shared across modules."""
import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.optimize import brentq


def neville_at_zero(xs, ys):
    """Polynomial extrapolation to x = 0 through (xs, ys).

    Returns the last two diagonal entries of the Neville tableau, which serve
    as the estimate and a consistency check.
    """
    xs = np.asarray(xs, dtype=float)
    p = np.array(ys, dtype=complex)
    n = xs.size
    prev = p[0]
    for m in range(1, n):
        for i in range(n - m):
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i])
        if m == n - 2:
            prev = p[0]
    return p[0], prev


def simpson_sided(x, gplus, gminus=None):
    """Composite Simpson over node pairs using one-sided integrand values.

    Panel ``[x[2m], x[2m+2]]`` uses the right limit at its left end and the
    left limit at its right end, so jumps on even nodes are integrated exactly.
    """
    x = np.asarray(x, dtype=float)
    gplus = np.asarray(gplus)
    gminus = gplus if gminus is None else np.asarray(gminus)
    if (x.size - 1) % 2:
        raise ValueError("need an even number of intervals")
    h = x[1::2] - x[0:-1:2]
    return np.sum(h / 3.0 * (gplus[0:-1:2] + 4.0 * gplus[1::2] + gminus[2::2]))


def cumulative_from_left(x, g):
    """Running integral of a smooth g from x[0]; value 0 at x[0]."""
    out = np.zeros_like(np.asarray(g, dtype=float))
    out[1:] = cumulative_simpson(g, x=x)
    return out


def sign_change_roots(f, grid, values, xtol=1e-12):
    """Refine every sign change of ``values`` on ``grid`` with brentq."""
    roots = []
    s = np.sign(values)
    for i in np.nonzero(s[:-1] * s[1:] < 0)[0]:
        roots.append(brentq(f, grid[i], grid[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps))
    for i in np.nonzero(s == 0)[0]:
        roots.append(float(grid[i]))
    return sorted(roots)


def count_sign_changes(values):
    s = np.sign(values)
    return int(np.sum(s[:-1] * s[1:] < 0) + np.sum(s == 0))


# Gauss-Kronrod 7/15 nodes on [-1, 1] (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
NODES = np.concatenate((-_XGK[:-1], _XGK[::-1]))
WK = np.concatenate((_WGK[:-1], _WGK[::-1]))
WG = np.zeros(15)
WG[1:-1:2] = np.concatenate((_WG[:-1], _WG[::-1]))


def adaptive_gk(f, edges, abstol=1e-12, max_rounds=60, max_panels=200000):
    """Vectorised adaptive Gauss-Kronrod integration of ``f`` over panels.

    ``f`` maps a 1-D array of abscissae to values (real or complex). Each round
    evaluates all active panels in one call and bisects those whose Kronrod
    error exceeds their share of ``abstol``. Returns ``(integral, error)``.
    """
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    total_len = edges[-1] - edges[0]
    acc = 0.0
    err = 0.0
    for _ in range(max_rounds):
        c = 0.5 * (lo + hi)
        r = 0.5 * (hi - lo)
        s = c[:, None] + r[:, None] * NODES[None, :]
        vals = np.asarray(f(s.ravel())).reshape(s.shape)
        kron = r * (vals @ WK)
        gauss = r * (vals @ WG)
        e = np.abs(kron - gauss)
        ok = e <= abstol * (2 * r) / total_len
        acc = acc + kron[ok].sum()
        err += e[ok].sum()
        if ok.all():
            return acc, err
        lo, hi = lo[~ok], hi[~ok]
        c = 0.5 * (lo + hi)
        if 2 * lo.size > max_panels:
            break
        lo, hi = np.concatenate((lo, c)), np.concatenate((c, hi))
    # give up: accept what is left at its current accuracy
    c = 0.5 * (lo + hi)
    r = 0.5 * (hi - lo)
    s = c[:, None] + r[:, None] * NODES[None, :]
    vals = np.asarray(f(s.ravel())).reshape(s.shape)
    kron = r * (vals @ WK)
    gauss = r * (vals @ WG)
    return acc + kron.sum(), err + np.abs(kron - gauss).sum()
