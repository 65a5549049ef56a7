"""Root finding for extended-range polynomials.

The workhorse is a Jacobi-style Aberth-Ehrlich simultaneous iteration: all
roots are updated from the previous sweep's values, so sweeps are
deterministic and trivially parallel over roots.  The convergence criterion
is the scale-free Aberth correction rather than the residual, which for
degree 10^4 polynomials scales like e^{O(degree)} and means nothing on its
own.

Two phases.  The first runs entirely in extended-range double arithmetic and
settles the bulk of the roots.  The second re-verifies every root against the
polynomial's high-precision coefficient channel and re-iterates the failures:
sampled-root polynomials are relatively tiny (e^{-c sqrt(degree)}) in parts
of the plane, and points parked on double-rounding artifacts there pass the
double test but not the high-precision one.

Initial guesses come from the Newton polygon of the coefficient
log-magnitudes: the polygon's segment slopes predict root moduli the same way
the coefficient profile predicts the limiting radial law, and for heavily
annular root distributions this cuts the sweep count several-fold compared
with a single initialization circle.

For real-rooted polynomials there is a bisection path that certifies each
root through a sign change, and a dedicated factorization for derivatives of
two-point root multisets (their interior factors are classical orthogonal
polynomials, so the roots come from a perfectly conditioned symmetric
tridiagonal eigenproblem instead of coefficient arithmetic).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from . import highprec
from .numeric import XArray, horner_sign_real, horner_with_derivative
from .polynomial import Poly, derivative, strip_origin_zeros

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0  # irrational angular offset, breaks symmetry
LADDER_MAX_DEGREE = 90


class RootFindingError(RuntimeError):
    pass


class BracketCountError(RootFindingError):
    """Sign-change brackets do not account for every expected root."""


@dataclass(frozen=True)
class RootSet:
    """All zeroes of a (deflated) polynomial plus convergence bookkeeping.

    ``residual_log[k]`` is log|p(root_k)| minus the log of the largest
    monomial term at that point, a scale-free residual.
    """

    roots: np.ndarray
    residual_log: np.ndarray
    iterations_used: int
    converged: bool
    tol: float
    origin_zeros: int = 0


def default_root_tol(degree: int) -> float:
    return 1e-10 if degree <= 2000 else 1e-8


def _upper_hull(k: np.ndarray, y: np.ndarray) -> list[int]:
    """Indices of the upper convex hull of (k, y), k strictly increasing."""
    hull: list[int] = []
    for i in range(len(k)):
        while len(hull) >= 2:
            i1, i2 = hull[-2], hull[-1]
            # drop i2 if it lies on or below the chord i1 -> i
            if (y[i2] - y[i1]) * (k[i] - k[i1]) <= (y[i] - y[i1]) * (k[i2] - k[i1]):
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def initial_guesses(p: Poly) -> np.ndarray:
    """Starting points on circles whose radii follow the Newton polygon.

    On each polygon segment of width m the guesses are m equidistributed
    angles with a fixed irrational offset (plus a per-segment golden-ratio
    stagger) so that no guess coincides with a symmetry axis of the input.
    """
    if p.degree < 1:
        raise ValueError("degree must be at least 1")
    la = p.coeffs.log_abs()
    finite = np.isfinite(la)
    ks = np.nonzero(finite)[0]
    hull_idx = _upper_hull(ks.astype(np.float64), la[finite])
    verts = [(int(ks[i]), la[ks[i]]) for i in hull_idx]
    out = np.empty(p.degree, dtype=np.complex128)
    pos = 0
    first_radius = None
    for seg, ((k1, l1), (k2, l2)) in enumerate(zip(verts[:-1], verts[1:])):
        m = k2 - k1
        slope = (l2 - l1) / m
        radius = math.exp(-slope)
        if first_radius is None:
            first_radius = radius
        ang = 2.0 * np.pi * ((np.arange(m) + GOLDEN) / m + seg * GOLDEN)
        out[pos:pos + m] = radius * np.exp(1j * ang)
        pos += m
    # vanished low-order coefficients mean roots at (numerically) the origin;
    # seed them on a small circle of their own
    rem = p.degree - pos
    if rem:
        r0 = 1e-2 * (first_radius if first_radius else 1.0)
        ang = 2.0 * np.pi * ((np.arange(rem) + GOLDEN) / rem)
        out[pos:] = r0 * np.exp(1j * ang)
    return out


def _xratio(a: XArray, b: XArray) -> np.ndarray:
    """a/b collapsed to complex doubles; b == 0 gives inf."""
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(b.sig == 0, np.inf + 0j, a.sig / np.where(b.sig == 0, 1, b.sig))
    e = np.clip(a.exp - b.exp, -1074, 1024)
    return s * np.ldexp(1.0, e)


def _pairwise_sums(z: np.ndarray, active_idx: np.ndarray) -> np.ndarray:
    """sum_{j != i} 1/(z_i - z_j) for the active rows, chunked."""
    n = z.size
    za = z[active_idx]
    out = np.empty(za.size, dtype=np.complex128)
    rows_per_chunk = max(1, (1 << 21) // max(n, 1))
    for s in range(0, za.size, rows_per_chunk):
        blk = za[s:s + rows_per_chunk, None] - z[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / blk
        inv[~np.isfinite(inv)] = 0.0  # self terms (and exact collisions)
        out[s:s + rows_per_chunk] = inv.sum(axis=1)
    return out


def _double_phase(q: Poly, z: np.ndarray, tol: float, max_iter: int) -> int:
    """Aberth sweeps in extended-range doubles; updates z in place."""
    active = np.ones(z.size, dtype=bool)
    iters = 0
    for iters in range(1, max_iter + 1):
        idx = np.nonzero(active)[0]
        pv, dpv = horner_with_derivative(q.coeffs, z[idx])
        inv_newton = _xratio(dpv, pv)  # p'/p, inf where p == 0
        s_sums = _pairwise_sums(z, idx)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            delta = 1.0 / (inv_newton - s_sums)
        delta[~np.isfinite(delta)] = 0.0
        # soft cap against wild early jumps
        mag = np.abs(delta)
        cap = 0.5 * (1.0 + np.abs(z[idx]))
        big = mag > cap
        if np.any(big):
            delta[big] *= (cap[big] / mag[big])
        znew = z[idx] - delta
        z[idx] = znew
        done = np.abs(delta) < tol * np.maximum(1.0, np.abs(znew))
        active[idx[done]] = False
        if not active.any():
            break
    return iters


# evaluation precision for exact-double polynomials without their own channel
_LIFT_BITS = 192
# cheap certification rung; points whose local depth exceeds it escalate to
# the coefficients' full width
_CERT_BITS = 224


def _maxterm_scale(coeffs: XArray, z: np.ndarray) -> np.ndarray:
    """log of the largest monomial term |c_k z^k| at each point."""
    la = coeffs.log_abs()
    ks = np.arange(la.size, dtype=np.float64)
    with np.errstate(divide="ignore"):
        logz = np.where(z == 0, -np.inf, np.log(np.abs(np.where(z == 0, 1, z))))
    out = np.empty(z.size)
    chunk = max(1, (1 << 21) // max(la.size, 1))
    for s in range(0, z.size, chunk):
        block = la[None, :] + ks[None, :] * logz[s:s + chunk, None]
        out[s:s + chunk] = np.max(block, axis=1)
    return out


def find_roots(p: Poly, tol: float | None = None, max_iter: int = 400,
               verify_iter: int = 80) -> RootSet:
    """All zeroes of ``p`` away from the origin by Aberth-Ehrlich iteration.

    Origin zeroes (exact only) are deflated first and reported through
    ``origin_zeros``.  After the double-precision sweeps, every root is
    certified against the high-precision coefficient channel (the double
    coefficients lifted exactly, when the polynomial does not carry one) and
    failures are re-iterated there; a point certifies only if the evaluation
    also resolved p' above the rounding floor of the precision used, which is
    what exposes iterates parked on double-rounding artifacts.  Convergence
    requires every certified correction to satisfy |dz| < tol * max(1, |z|);
    leftovers are returned flagged with ``converged=False``.
    """
    if p.degree < 1:
        raise ValueError("degree must be at least 1")
    # exact zeroes only: profile polynomials legitimately span thousands of
    # nats between smallest and largest coefficient, so a threshold relative
    # to the maximum would deflate honest low-order structure
    q, nstrip = strip_origin_zeros(p, tol=0.0)
    d = q.degree
    if d == 0:
        return RootSet(np.empty(0, dtype=np.complex128), np.empty(0), 0, True,
                       tol or 0.0, nstrip)
    if tol is None:
        tol = default_root_tol(d)
    z = initial_guesses(q)
    iters = _double_phase(q, z, tol, min(max_iter, 150))

    # certification phase against the wide-significand coefficients
    bits_full = max(q.precision_bits, _LIFT_BITS)
    bits_lo = min(_CERT_BITS, bits_full)
    hp = list(q.hp) if q.hp is not None else highprec.lift_xarray(q.coeffs)
    dhp = highprec.scale_derivative(hp, bits_full)
    logp_all = np.full(d, np.nan)
    logd = math.log(d + 1.0)
    pending = np.arange(d)
    converged = False
    for _ in range(verify_iter):
        iters += 1
        zp = z[pending]
        newton, logp, logdp = highprec.horner_batch(hp, dhp, zp, bits_lo)
        scale = _maxterm_scale(q.coeffs, zp)
        # precision is sufficient once the rounding floor of the evaluation
        # sits below |p'| * tol, so the correction is actually measured
        need = scale - logdp + logd - np.log(tol * np.maximum(1.0, np.abs(zp))) + 2.0
        unresolved = need > bits_lo * math.log(2.0)
        if bits_lo < bits_full and np.any(unresolved):
            n2, lp2, ld2 = highprec.horner_batch(hp, dhp, zp[unresolved], bits_full)
            newton[unresolved] = n2
            logp[unresolved] = lp2
            logdp[unresolved] = ld2
            need2 = (scale[unresolved] - ld2 + logd
                     - np.log(tol * np.maximum(1.0, np.abs(zp[unresolved]))) + 2.0)
            still = np.zeros(pending.size, dtype=bool)
            still[np.nonzero(unresolved)[0][need2 > bits_full * math.log(2.0)]] = True
            unresolved = still
        logp_all[pending] = logp
        s_sums = _pairwise_sums(z, pending)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            delta = np.where(np.isfinite(newton),
                             newton / (1.0 - newton * s_sums),
                             -1.0 / s_sums)
        delta[~np.isfinite(delta)] = 0.0
        mag = np.abs(delta)
        cap = 0.5 * (1.0 + np.abs(zp))
        big = mag > cap
        if np.any(big):
            delta[big] *= (cap[big] / mag[big])
        znew = zp - delta
        z[pending] = znew
        done = (np.abs(delta) < tol * np.maximum(1.0, np.abs(znew))) & ~unresolved
        pending = pending[~done]
        if pending.size == 0:
            converged = True
            break

    res = logp_all - _maxterm_scale(q.coeffs, z)
    return RootSet(z, res, iters, converged, tol, nstrip)


# ---------------------------------------------------------------------------
# Real-rooted path
# ---------------------------------------------------------------------------


def _bisect_many(coeffs: XArray, lo: np.ndarray, hi: np.ndarray,
                 slo: np.ndarray, tol: float, max_iter: int = 90) -> np.ndarray:
    """Vectorized sign-change bisection; (lo, hi) must bracket one root each."""
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        sm = horner_sign_real(coeffs, mid)
        left = (sm == slo) | (sm == 0.0)
        # a zero sign lands the root exactly; collapse the bracket onto it
        lo = np.where(left, mid, lo)
        hi = np.where(left, hi, mid)
        if np.all(hi - lo < tol * np.maximum(1.0, np.abs(mid))):
            break
    return 0.5 * (lo + hi)


def _ladder_roots(q: Poly, a: float, b: float, tol: float) -> np.ndarray:
    """Recursive interlacing descent: brackets for q come from roots of q'."""
    if q.degree == 1:
        r = _xratio(q.coeffs[0:1], q.coeffs[1:2])[0]
        return np.array([-r.real])
    inner = _ladder_roots(derivative(q, 1), a, b, tol)
    pts = np.concatenate(([a], np.sort(inner), [b]))
    sv = horner_sign_real(q.coeffs, pts)
    roots = []
    exact = np.nonzero(sv == 0.0)[0]
    change = np.nonzero(sv[:-1] * sv[1:] < 0)[0]
    lo, hi, slo = pts[change], pts[change + 1], sv[change]
    if change.size:
        roots.append(_bisect_many(q.coeffs, lo, hi, slo, tol))
    if exact.size:
        roots.append(pts[exact])
    return np.sort(np.concatenate(roots)) if roots else np.empty(0)


def find_real_roots(p: Poly, interval: tuple[float, float], tol: float = 1e-10) -> np.ndarray:
    """All roots of a real-rooted polynomial inside [a, b], sorted ascending.

    Every root is certified by a sign change and polished by bisection with
    extended-range evaluation.  Small degrees use the classical interlacing
    descent (brackets for p come from the recursively computed roots of p');
    large degrees take bracket seeds from the Aberth iteration instead, since
    the full derivative ladder costs O(degree^3) evaluations.

    Multiple roots cannot produce sign changes; deflate known multiplicities
    (for instance with ``strip_origin_zeros`` or ``two_atom_interior``) before
    calling.  A mismatch between bracket count and degree raises
    ``BracketCountError``, which usually means the real-rootedness
    precondition failed.
    """
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise ValueError("empty interval")
    q, nstrip = strip_origin_zeros(p, tol=0.0)
    origin = [0.0] * nstrip if (a <= 0.0 <= b and nstrip) else []
    if q.degree == 0:
        return np.array(sorted(origin))
    if q.degree <= LADDER_MAX_DEGREE:
        roots = _ladder_roots(q, a, b, tol)
    else:
        # the simultaneous iteration already certifies each root against the
        # high-precision channel; the sign sweep below re-certifies the count
        # (one root per bracket), also in high precision, since double signs
        # are meaningless inside the cancellation band
        rs = find_roots(q, tol=min(tol, default_root_tol(q.degree)))
        if not rs.converged:
            raise RootFindingError("simultaneous iteration did not converge")
        imag_scale = np.abs(rs.roots.imag) / np.maximum(1.0, np.abs(rs.roots))
        if np.max(imag_scale) > 1e-6:
            raise BracketCountError("roots are not numerically real")
        x = np.sort(rs.roots.real)
        pts = np.concatenate(([a], 0.5 * (x[:-1] + x[1:]), [b]))
        bits = max(q.precision_bits, 192)
        hp = list(q.hp) if q.hp is not None else highprec.lift_xarray(q.coeffs)
        sv = highprec.sign_batch_real(hp, pts, bits)
        if np.any(sv == 0.0):
            # nudge an unlucky bracket point off the root
            eps = 1e-12 * max(1.0, abs(a), abs(b))
            pts[sv == 0.0] += eps
            sv = highprec.sign_batch_real(hp, pts, bits)
        change = np.nonzero(sv[:-1] * sv[1:] < 0)[0]
        if change.size != q.degree:
            raise BracketCountError(
                f"{change.size} sign-change brackets for degree {q.degree}")
        roots = x
    if roots.size != q.degree:
        raise BracketCountError(
            f"found {roots.size} roots for degree {q.degree}")
    return np.sort(np.concatenate([roots, origin])) if origin else roots


def two_atom_derivative_real_roots(mult_zero: int, mult_minus_one: int,
                                   order: int) -> tuple[np.ndarray, int, int]:
    """Interior roots of a derivative of ``x^a (x+1)^b``, plus multiplicities.

    The order-th derivative factors as ``x^r0 (x+1)^r1 R(x)`` with R a
    classical orthogonal polynomial on (-1, 0) (Rodrigues' construction, with
    degenerate parameters absorbed when the order exceeds a multiplicity).
    Its roots are therefore the eigenvalues of a symmetric tridiagonal matrix
    built from the three-term recurrence, a perfectly conditioned computation
    that never touches the (sign-alternating, catastrophically cancelling)
    monomial coefficients.

    Returns (interior roots ascending in (-1, 0), r0, r1).
    """
    a, b, mu = int(mult_zero), int(mult_minus_one), int(order)
    if min(a, b) < 0 or not 0 <= mu <= a + b:
        raise ValueError("invalid multiplicities or order")
    r0, r1 = max(a - mu, 0), max(b - mu, 0)
    deg = (a + b - mu) - r0 - r1
    if deg == 0:
        return np.empty(0), r0, r1
    alpha, beta = float(abs(mu - a)), float(abs(mu - b))
    k = np.arange(deg, dtype=np.float64)
    s = 2.0 * k + alpha + beta
    # monic three-term recurrence for the weight (1-y)^alpha (1+y)^beta
    with np.errstate(invalid="ignore", divide="ignore"):
        diag = (beta**2 - alpha**2) / (s * (s + 2.0))
    diag[k == 0] = (beta - alpha) / (alpha + beta + 2.0)
    kk = k[1:]
    ss = s[1:]
    off = np.sqrt(4.0 * kk * (kk + alpha) * (kk + beta) * (kk + alpha + beta)
                  / (ss**2 * (ss**2 - 1.0)))
    y = eigvalsh_tridiagonal(diag, off)
    return np.sort((y - 1.0) / 2.0), r0, r1


def dump_roots(rootset: RootSet, path) -> None:
    """CSV dump with columns (re, im, modulus, residual_log)."""
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im", "modulus", "residual_log"])
        for z, r in zip(rootset.roots, rootset.residual_log):
            w.writerow([repr(z.real), repr(z.imag), repr(abs(z)), repr(float(r))])
