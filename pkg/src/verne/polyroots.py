"""Real roots of small univariate polynomials, plus exact interpolation.

Coefficient arrays are ascending (``c[0] + c[1] x + ...``) throughout.

Isolation uses derivative subdivision.  The real critical points of ``p``
(found the same way from ``p'``) cut the line into intervals on which ``p``
is monotone.  Each interval holds at most one simple root, which is bracketed
and refined by a Newton/bisection hybrid.  Critical points where ``p``
vanishes are reported as multiple roots.  An exact-arithmetic Sturm
sequence certifies the result independently.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from ._jit import maybe_njit
from .errors import DuplicateNodes, IllConditioned, NonFinite, ZeroPolynomial

DEGREE_DROP_RTOL = 1e-11


class RealRoot(NamedTuple):
    value: float
    multiplicity: int


def effective_degree(coeffs, rtol: float = DEGREE_DROP_RTOL) -> int:
    c = np.abs(np.asarray(coeffs, dtype=float))
    top = c.max() if c.size else 0.0
    if top == 0.0:
        return -1
    nz = np.nonzero(c > rtol * top)[0]
    return int(nz[-1])


def trim(coeffs, rtol: float = DEGREE_DROP_RTOL) -> np.ndarray:
    c = np.asarray(coeffs, dtype=float)
    return c[: effective_degree(c, rtol) + 1]


def horner(coeffs, x):
    acc = 0.0 * x
    for ci in coeffs[::-1]:
        acc = acc * x + ci
    return acc


def derivative(coeffs) -> np.ndarray:
    c = np.asarray(coeffs, dtype=float)
    return c[1:] * np.arange(1, len(c))


def root_bound(coeffs) -> float:
    """Cauchy bound: every root satisfies ``|x| < 1 + max |c_i / c_n|``."""
    c = np.asarray(coeffs, dtype=float)
    return 1.0 + float(np.max(np.abs(c[:-1] / c[-1]))) if len(c) > 1 else 1.0


def _pow2(v: float) -> float:
    """Power of two near ``v``; scaling by it is exact."""
    return math.ldexp(1.0, math.frexp(v)[1])


@maybe_njit
def _hv(c, m, x):
    acc = 0.0
    for i in range(m, -1, -1):
        acc = acc * x + c[i]
    return acc


@maybe_njit
def _habs(c, m, x):
    acc = 0.0
    for i in range(m, -1, -1):
        acc = acc * x + abs(c[i])
    return acc


@maybe_njit
def _hd(c, m, x):
    """Derivative of the degree-``m`` polynomial at ``x``."""
    acc = 0.0
    for i in range(m, 0, -1):
        acc = acc * x + i * c[i]
    return acc


@maybe_njit
def _refine(c, m, a, b, fa, fb):
    """Root of the degree-``m`` polynomial ``c`` in the sign-changing bracket ``[a, b]``.

    Safeguarded Newton: a Newton step is taken only when it stays inside the
    bracket and at least halves the previous step, otherwise the bracket is
    bisected.  The bracket always shrinks, so the loop terminates.
    """
    eps = 2.220446049250313e-16
    if fa > 0:  # orient so that p(lo) < 0 < p(hi)
        lo, hi = b, a
    else:
        lo, hi = a, b
    x = 0.5 * (a + b)
    dx_old = abs(b - a)
    dx = dx_old
    f = _hv(c, m, x)
    df = _hd(c, m, x)
    for _ in range(300):
        if (((x - hi) * df - f) * ((x - lo) * df - f) > 0.0
                or abs(2.0 * f) > abs(dx_old * df)):
            dx_old = dx
            dx = 0.5 * (hi - lo)
            x = lo + dx
        else:
            dx_old = dx
            dx = f / df
            x -= dx
        if abs(dx) <= 2 * eps * max(1.0, abs(x)):
            return x
        f = _hv(c, m, x)
        if f == 0.0:
            return x
        df = _hd(c, m, x)
        if f < 0.0:
            lo = x
        else:
            hi = x
    return x


@maybe_njit
def _isolate(c, tol, vals, mult):
    """Real roots of ``c`` (degree ``n >= 1``, ``c[n] != 0``) into ``vals``/``mult``; returns the count.

    Works bottom-up through the derivative chain: the roots of the k-th
    derivative split the line into monotone pieces for the (k-1)-th.
    """
    n = len(c) - 1
    chain = np.zeros((n + 1, n + 1))
    chain[0, :] = c
    for k in range(1, n + 1):
        m = n - k
        top = 0.0
        for i in range(m + 1):
            chain[k, i] = (i + 1) * chain[k - 1, i + 1]
            top = max(top, abs(chain[k, i]))
        top = 2.0 ** np.ceil(np.log2(top))  # exact rescale
        for i in range(m + 1):
            chain[k, i] /= top
    pv = np.empty(n)
    pm = np.zeros(n, dtype=np.int64)
    cv = np.empty(n)
    cm = np.zeros(n, dtype=np.int64)
    pts = np.empty(n + 1)
    hit = np.zeros(n + 1, dtype=np.bool_)
    cnt = 0
    for k in range(n - 1, -1, -1):
        q = chain[k]
        m = n - k
        if m == 1:
            pv[0] = -q[0] / q[1]
            pm[0] = 1
            cnt = 1
            continue
        B = 0.0  # Fujiwara bound
        for i in range(1, m + 1):
            B = max(B, abs(q[m - i] / q[m]) ** (1.0 / i))
        B *= 2.0
        npt = 0
        pts[0] = -B
        hit[0] = False
        npt = 1
        out = 0
        for j in range(cnt):
            x = pv[j]
            if not (-B < x < B):
                continue
            pts[npt] = x
            h = abs(_hv(q, m, x)) <= tol * _habs(q, m, abs(x))
            hit[npt] = h
            npt += 1
            if h:
                cv[out] = x
                cm[out] = pm[j] + 1
                out += 1
        pts[npt] = B
        hit[npt] = False
        npt += 1
        for i in range(npt - 1):
            if hit[i] or hit[i + 1]:
                continue
            a, b = pts[i], pts[i + 1]
            fa, fb = _hv(q, m, a), _hv(q, m, b)
            if fa == 0.0 or fb == 0.0 or (fa > 0) == (fb > 0):
                continue
            cv[out] = _refine(q, m, a, b, fa, fb)
            cm[out] = 1
            out += 1
        order = np.argsort(cv[:out])
        for j in range(out):
            pv[j] = cv[order[j]]
            pm[j] = cm[order[j]]
        cnt = out
    for j in range(cnt):
        vals[j] = pv[j]
        mult[j] = pm[j]
    return cnt


def _exact_newton(c: list[float], x: float, steps: int = 2) -> float:
    """Newton steps with ``p(x)`` evaluated exactly; removes Horner rounding from the result."""
    fc = [Fraction(v) for v in c]
    for _ in range(steps):
        X = Fraction(x)
        fx, dfx = Fraction(0), Fraction(0)
        for v in reversed(fc):
            dfx = dfx * X + fx
            fx = fx * X + v
        if fx == 0 or dfx == 0:
            break
        x = float(X - fx / dfx)
    return x


def real_roots(coeffs, tol: float = 1e-14, exact_polish: bool = True) -> list[RealRoot]:
    """Sorted real roots with multiplicity estimates.

    A critical point counts as a multiple root when ``|p(x)|`` is below
    ``tol * sum |c_i| |x|^i``.  With ``exact_polish`` every simple root gets
    two Newton steps in rational arithmetic, so it is the correctly rounded
    root of the given float coefficients (up to one ulp).
    """
    c = np.asarray(coeffs, dtype=float)
    if not np.all(np.isfinite(c)):
        raise NonFinite("polynomial has non-finite coefficients")
    c = trim(c)
    if len(c) == 0:
        raise ZeroPolynomial("all coefficients vanish")
    if len(c) == 1:
        return []
    cl = c / _pow2(float(np.max(np.abs(c))))
    vals = np.empty(len(cl) - 1)
    mult = np.empty(len(cl) - 1, dtype=np.int64)
    k = _isolate(cl, tol, vals, mult)
    out = []
    for v, m in zip(vals[:k].tolist(), mult[:k].tolist()):
        if exact_polish and m == 1:
            v = _exact_newton(cl.tolist(), v)
        out.append(RealRoot(v, m))
    return out


def chebyshev_nodes(n: int, lo: float = -1.0, hi: float = 1.0) -> np.ndarray:
    k = np.arange(n)
    x = np.cos((2 * k + 1) * np.pi / (2 * n))[::-1]
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * x


def interpolate_coeffs(nodes, values, degree: int, max_cond: float = 1e12) -> np.ndarray:
    """Coefficients of the unique polynomial of degree <= ``degree`` through the samples."""
    x = np.asarray(nodes, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(x) < degree + 1:
        raise ValueError(f"need at least {degree + 1} nodes, got {len(x)}")
    if len(np.unique(x)) != len(x):
        raise DuplicateNodes("interpolation nodes must be distinct")
    V = np.vander(x, degree + 1, increasing=True)
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > max_cond:
        raise IllConditioned(cond)
    if len(x) == degree + 1:
        return np.linalg.solve(V, y)
    return np.linalg.lstsq(V, y, rcond=None)[0]


@lru_cache(maxsize=8)
def chebyshev_interpolator(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on [-1, 1] and the inverse Vandermonde matrix for degree ``n - 1``.

    Callers that interpolate many times on the same nodes apply the inverse
    instead of re-solving; the conditioning check runs once here.
    """
    x = chebyshev_nodes(n)
    V = np.vander(x, n, increasing=True)
    cond = np.linalg.cond(V)
    if cond > 1e12:
        raise IllConditioned(cond)
    return x, np.linalg.inv(V)


def expand_roots(roots) -> np.ndarray:
    """Ascending coefficients of ``prod (x - r)``, expanded exactly and rounded once."""
    c = [Fraction(1)]
    for r in roots:
        fr = Fraction(float(r))
        c = [Fraction(0)] + c
        for k in range(len(c) - 1):
            c[k] -= fr * c[k + 1]
    return np.array([float(v) for v in c])


# exact Sturm certification

def _frac_trim(p: list[Fraction]) -> list[Fraction]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _frac_rem(num: list[Fraction], den: list[Fraction]) -> list[Fraction]:
    r = list(num)
    dd = len(den) - 1
    lead = den[-1]
    while len(r) - 1 >= dd and r:
        q = r[-1] / lead
        shift = len(r) - 1 - dd
        for i, d in enumerate(den):
            r[shift + i] -= q * d
        r.pop()
        _frac_trim(r)
    return r


def sturm_sequence(coeffs) -> list[list[Fraction]]:
    """Exact Sturm chain of the float coefficients (taken as exact rationals)."""
    p0 = _frac_trim([Fraction(float(v)) for v in coeffs])
    if not p0:
        raise ZeroPolynomial("all coefficients vanish")
    p1 = _frac_trim([k * p0[k] for k in range(1, len(p0))])
    seq = [p0]
    if p1:
        seq.append(p1)
    while len(seq[-1]) > 1:
        r = _frac_rem(seq[-2], seq[-1])
        if not r:
            break
        scale = abs(r[-1])
        seq.append([-v / scale for v in r])
    return seq


def _eval_frac(p: list[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for v in reversed(p):
        acc = acc * x + v
    return acc


def _sign_changes(seq, x: Fraction) -> int:
    signs = [v > 0 for v in (_eval_frac(p, x) for p in seq) if v != 0]
    return sum(1 for s0, s1 in zip(signs, signs[1:]) if s0 != s1)


def sturm_count(seq, a: float, b: float) -> int:
    """Number of distinct real roots in ``(a, b]``."""
    return _sign_changes(seq, Fraction(a)) - _sign_changes(seq, Fraction(b))


class SturmCertificate(NamedTuple):
    expected: int
    found: int
    missed: int
    isolated: bool


def certify_roots(coeffs, roots) -> SturmCertificate:
    """Compare ``roots`` (values or RealRoot) with the exact Sturm count.

    ``isolated`` is true when every reported root sits alone in a window
    halfway to its neighbours, so no two roots were merged or duplicated.
    """
    c = trim(coeffs)
    seq = sturm_sequence(c)
    B = root_bound(c) if len(c) > 1 else 1.0
    vals = sorted(float(getattr(r, "value", r)) for r in roots)
    expected = sturm_count(seq, -B, B)
    isolated = True
    for i, v in enumerate(vals):
        lo = (vals[i - 1] + v) / 2 if i else -B
        hi = (v + vals[i + 1]) / 2 if i + 1 < len(vals) else B
        if sturm_count(seq, lo, hi) != 1:
            isolated = False
            break
    return SturmCertificate(expected, len(vals), expected - len(vals), isolated)
