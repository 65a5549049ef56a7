"""High-precision coefficient channel.

Polynomials built from a few thousand sampled roots have coefficient
log-magnitudes that fluctuate around their limit profile on the scale
sqrt(degree) nats.  At the roots the polynomial sits that far below its
largest monomial term, so once the fluctuation exceeds the 53-bit significand
(degree of a few hundred and up) the double-rounded coefficients acquire
spurious "noise roots" in regions where the true polynomial is relatively
tiny, and these survive any root finder.  The cure is to carry coefficients
with a significand wide enough to cover the fluctuation band, which this
module provides through gmpy2 (MPFR/MPC) arrays, while evaluation geometry
(repulsion sums, corrections) stays in ordinary doubles.

Cost model: the product tree and the verification sweeps are O(n^2) scalar
mpc operations at ~0.5 us each, which keeps degree 10^4 builds in the
one-minute range.
"""

from __future__ import annotations

import math

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .numeric import XArray


def precision_for_degree(n: int) -> int:
    """Significand bits needed for sampled-root coefficient pipelines.

    Two sqrt(n)-sized costs stack: the coefficient fluctuation band around
    the limit profile (~1.5 sqrt(n) nats for the laws used here), which sets
    how deep below the largest monomial the polynomial must remain resolvable,
    and convolution cancellation inside the product tree, which consumes a
    band of the same size.  5 sqrt(n) bits plus a fixed guard covers both
    with margin.
    """
    return max(160, 128 + int(5.0 * math.sqrt(max(n, 1))))


class _Ctx:
    """Temporarily set the gmpy2 working precision."""

    def __init__(self, bits: int):
        self.bits = int(bits)

    def __enter__(self):
        self._old = gmpy2.get_context().precision
        gmpy2.get_context().precision = self.bits
        return self

    def __exit__(self, *exc):
        gmpy2.get_context().precision = self._old
        return False


def lift_xarray(arr: XArray) -> list:
    """Exact embedding of extended-range doubles into mpc values."""
    out = []
    for i in range(len(arr)):
        s = arr.sig[i]
        e = int(arr.exp[i])
        if s == 0:
            out.append(mpc(0))
        else:
            scale = mpfr(2) ** e  # a single bit, exact at any precision
            out.append(mpc(mpfr(s.real) * scale, mpfr(s.imag) * scale))
    return out


def _mpfr_sig_exp(x: mpfr) -> tuple[float, int]:
    """(double significand, extra base-2 exponent) of an mpfr, near-exact."""
    if gmpy2.is_zero(x):
        return 0.0, 0
    m, e = x.as_mantissa_exp()  # x = m * 2^e with m an integer
    bits = m.bit_length()
    if bits <= 53:
        return float(m), int(e)
    shift = bits - 53
    return float(m >> shift), int(e) + shift


def to_xarray(coeffs: list) -> XArray:
    """Round mpc coefficients to the double significand / int exponent form."""
    n = len(coeffs)
    sig = np.zeros(n, dtype=np.complex128)
    exp = np.zeros(n, dtype=np.int64)
    for i, c in enumerate(coeffs):
        sr, er = _mpfr_sig_exp(c.real)
        si, ei = _mpfr_sig_exp(c.imag)
        if sr == 0.0 and si == 0.0:
            continue
        # one shared exponent; the smaller part is shifted into its frame
        if sr == 0.0:
            e = ei
        elif si == 0.0:
            e = er
        else:
            e = max(er, ei)
        vr = math.ldexp(sr, max(er - e, -1074)) if sr != 0.0 else 0.0
        vi = math.ldexp(si, max(ei - e, -1074)) if si != 0.0 else 0.0
        sig[i] = complex(vr, vi)
        exp[i] = e
    return XArray(sig, exp)


def product_tree(roots, bits: int) -> list:
    """Coefficients of the monic polynomial with the given roots, as mpc.

    Balanced pairwise merging, same deterministic tree shape as the
    double-precision path.
    """
    with _Ctx(bits):
        level = [[mpc(-complex(r).real, -complex(r).imag), mpc(1)] for r in roots]
        while len(level) > 1:
            nxt = []
            for i in range(0, len(level) - 1, 2):
                nxt.append(_conv(level[i], level[i + 1]))
            if len(level) % 2 == 1:
                nxt.append(level[-1])
            level = nxt
        return level[0]


def _conv(a: list, b: list) -> list:
    la, lb = len(a), len(b)
    out = [mpc(0)] * (la + lb - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] = out[i + j] + ai * bj
    return out


def derivative_coeffs(coeffs: list, m: int, bits: int) -> list:
    """m-fold derivative with exact integer factorial ratios.

    ratio_k = (k+m)!/k! is carried as an exact big integer (the cumulative
    update ratio_{k+1} = ratio_k * (k+m+1) // (k+1) stays integral), so the
    only rounding is the final one into the working precision.
    """
    d_out = len(coeffs) - 1 - m
    with _Ctx(bits):
        out = []
        ratio = math.prod(range(1, m + 1))
        for k in range(d_out + 1):
            if k > 0:
                ratio = (ratio // k) * (k + m)
            out.append(coeffs[k + m] * ratio)
        return out


def scale_derivative(coeffs: list, bits: int) -> list:
    """First-derivative coefficients k*c_k (exact integer scaling)."""
    with _Ctx(bits):
        return [coeffs[k] * k for k in range(1, len(coeffs))]


def horner_batch(coeffs: list, dcoeffs: list, zs, bits: int):
    """Evaluate p and p' at each point.

    Returns (newton, logp, logdp): the Newton correction p/p' collapsed to an
    ordinary complex double (it is a length scale of order the root spacing),
    plus log|p| and log|p'| for residual reporting and for judging whether the
    working precision resolved the value above its own rounding floor.
    Running at a context precision below the coefficients' own width is fine;
    gmpy2 rounds each operation to the context.
    """
    with _Ctx(bits):
        newton = np.empty(len(zs), dtype=np.complex128)
        logp = np.empty(len(zs), dtype=np.float64)
        logdp = np.empty(len(zs), dtype=np.float64)
        for i, z in enumerate(zs):
            zz = mpc(z.real, z.imag)
            pv = coeffs[-1]
            for c in reversed(coeffs[:-1]):
                pv = pv * zz + c
            dv = dcoeffs[-1]
            for c in reversed(dcoeffs[:-1]):
                dv = dv * zz + c
            logp[i] = _log_abs_mpc(pv)
            logdp[i] = _log_abs_mpc(dv)
            if pv == 0:
                newton[i] = 0.0
            elif dv == 0:
                newton[i] = np.inf
            else:
                q = pv / dv
                newton[i] = complex(float(q.real), float(q.imag))
        return newton, logp, logdp


def _log_abs_mpc(v: mpc) -> float:
    if v == 0:
        return -np.inf
    n2 = gmpy2.norm(v)  # |v|^2
    m, e = n2.as_mantissa_exp()
    mb = m.bit_length()
    top = float(m >> max(mb - 64, 0)) if mb > 64 else float(m)
    return 0.5 * (math.log(top) + (int(e) + max(mb - 64, 0)) * math.log(2.0))


def sign_batch_real(coeffs: list, xs, bits: int) -> np.ndarray:
    """Sign of a real polynomial at real points, evaluated in high precision."""
    with _Ctx(bits):
        out = np.empty(len(xs), dtype=np.float64)
        rc = [c.real for c in coeffs]
        for i, x in enumerate(xs):
            xx = mpfr(x)
            pv = rc[-1]
            for c in reversed(rc[:-1]):
                pv = pv * xx + c
            out[i] = float(gmpy2.sign(pv))
        return out
