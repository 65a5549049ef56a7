"""Dense polynomials over extended-range coefficients.

Supports construction from a root multiset, m-fold and fractional
differentiation, Horner evaluation, and deflation of origin zeroes.  Degrees
up to a few 10^4 are routine; all coefficient arithmetic goes through the
extended-range layer so nothing overflows.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import highprec
from .numeric import (
    LN2,
    XArray,
    XComplex,
    XReal,
    horner_many,
    log_gamma_array,
)

# m-fold differentiation uses exact integer factorial ratios up to this order;
# beyond it (in the absence of a high-precision channel) the ratios are formed
# from log-gamma differences.
EXACT_DERIVATIVE_ORDER = 64

# Above this degree, root-sampled polynomials get a high-precision coefficient
# channel: coefficient fluctuations ~exp(c*sqrt(n)) around the limit profile
# exceed the double significand and would otherwise seed spurious zeroes.
HIGHPREC_DEGREE = 64


@dataclass(frozen=True)
class Poly:
    """Polynomial ``sum coeffs[k] z^k`` with nonzero leading coefficient.

    ``coeffs`` is the extended-range double view used for fast evaluation and
    Newton-polygon geometry.  ``hp`` optionally carries the same coefficients
    at ``precision_bits`` significand bits (as gmpy2 values); root finding
    verifies against this channel when present.  ``derivative_order`` counts
    differentiations applied since construction.
    """

    coeffs: XArray
    derivative_order: int = 0
    hp: tuple | None = None
    precision_bits: int = 0

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise ValueError("empty coefficient array")
        if self.coeffs[len(self.coeffs) - 1].is_zero:
            raise ValueError("leading coefficient must be nonzero")
        if self.hp is not None and len(self.hp) != len(self.coeffs):
            raise ValueError("high-precision channel length mismatch")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def from_complex_coeffs(cls, coeffs, derivative_order: int = 0) -> "Poly":
        return cls(XArray.from_complex(np.asarray(coeffs, dtype=np.complex128)),
                   derivative_order)


def from_roots(roots, precision: int | None = None) -> Poly:
    """Monic polynomial with the given multiset of roots.

    Linear factors are merged pairwise in a balanced tree, which keeps the
    relative coefficient error polylogarithmic in the degree; sequential
    multiplication visibly distorts radial histograms by degree ~10^4.  The
    tree shape is fixed by the input order, so results are deterministic.

    Beyond degree ~64 the tree runs in the high-precision channel
    (``precision`` bits; automatic policy when None), because coefficient
    fluctuations of sampled-root polynomials outgrow a double significand and
    rounding there plants spurious roots.  ``precision=0`` forces the pure
    double tree.
    """
    roots = np.asarray(roots, dtype=np.complex128).ravel()
    if roots.size == 0:
        raise ValueError("at least one root required")
    if not np.all(np.isfinite(roots)):
        raise ValueError("roots must be finite")
    n = roots.size
    if precision is None:
        precision = highprec.precision_for_degree(n) if n > HIGHPREC_DEGREE else 0
    if precision:
        hp = highprec.product_tree(roots, precision)
        return Poly(highprec.to_xarray(hp), 0, tuple(hp), precision)
    level = [XArray.from_complex(np.array([-r, 1.0], dtype=np.complex128))
             for r in roots]
    while len(level) > 1:
        nxt = []
        for i in range(0, len(level) - 1, 2):
            nxt.append(level[i].conv(level[i + 1]))
        if len(level) % 2 == 1:
            nxt.append(level[-1])
        level = nxt
    return Poly(level[0])


def _int_ratio_logs(degree_out: int, m: int) -> np.ndarray:
    """log((k+m)!/k!) for k = 0..degree_out via exact integer products."""
    logs = np.empty(degree_out + 1)
    r = math.prod(range(1, m + 1))  # m!/0!
    logs[0] = XReal.from_int(r).log_abs()
    for k in range(1, degree_out + 1):
        r = (r // k) * (k + m)  # (k+m)!/k! from (k-1+m)!/(k-1)!, exact
        logs[k] = XReal.from_int(r).log_abs()
    return logs


def derivative(p: Poly, m: int) -> Poly:
    """m-fold derivative: coefficient k becomes coeffs[k+m] * (k+m)!/k!.

    With a high-precision channel the factorial ratios are exact big
    integers.  On the double path, small orders use exact integer ratios and
    large ones log-gamma differences (~1e-12 relative).
    """
    m = int(m)
    if m < 0 or m > p.degree:
        raise ValueError(f"derivative order {m} outside [0, {p.degree}]")
    if m == 0:
        return p
    if p.hp is not None:
        hp = highprec.derivative_coeffs(list(p.hp), m, p.precision_bits)
        return Poly(highprec.to_xarray(hp), p.derivative_order + m,
                    tuple(hp), p.precision_bits)
    d_out = p.degree - m
    k = np.arange(d_out + 1)
    if m <= EXACT_DERIVATIVE_ORDER:
        logr = _int_ratio_logs(d_out, m)
    else:
        logr = log_gamma_array(k + m + 1) - log_gamma_array(k + 1)
    shifted = p.coeffs[m:]
    return Poly(shifted.scale_by_log(logr), p.derivative_order + m)


def fractional_derivative(p: Poly, alpha: float) -> Poly:
    """Continuous-order embedding of repeated differentiation.

    Returns the degree-n polynomial whose coefficient at z^k is
    ``p^(k)(0) / Gamma(k - alpha + 1)`` for k >= floor(alpha) and zero below,
    i.e. z^alpha times the alpha-th derivative.  At integer alpha = m its
    zeroes are those of the m-th derivative plus an origin zero of
    multiplicity m, and the coefficients vary continuously in alpha.
    """
    alpha = float(alpha)
    if not 0.0 <= alpha <= p.degree:
        raise ValueError(f"alpha {alpha} outside [0, {p.degree}]")
    k = np.arange(p.degree + 1)
    lo = int(math.floor(alpha))
    # p^(k)(0)/k! = coeffs[k], so the target coefficient is
    # coeffs[k] * k! / Gamma(k - alpha + 1)
    logf = np.full(p.degree + 1, -np.inf)
    kk = k[lo:]
    logf[lo:] = log_gamma_array(kk + 1.0) - log_gamma_array(kk - alpha + 1.0)
    out = p.coeffs.scale_by_log(logf)
    # the gamma factors are double-rounded, so no high-precision channel is
    # propagated; fractional orders are an exploratory mode
    return Poly(out, p.derivative_order)


def evaluate(p: Poly, z: complex) -> XComplex:
    """Horner evaluation in extended range."""
    return horner_many(p.coeffs, np.array([z], dtype=np.complex128))[0]


def evaluate_many(p: Poly, z) -> XArray:
    return horner_many(p.coeffs, np.asarray(z, dtype=np.complex128))


def default_strip_tol(degree: int) -> float:
    """Noise floor for near-zero low-order coefficients.

    Anything more than 0.9 * 53 bits below the largest coefficient (plus a
    degree factor for accumulated rounding in the product tree) is
    indistinguishable from rounding noise.
    """
    return math.exp(-0.9 * 53 * LN2 - math.log(max(degree, 2)))


def strip_origin_zeros(p: Poly, tol: float | None = None) -> tuple[Poly, int]:
    """Remove low-order coefficients below the noise floor.

    Returns the deflated polynomial and the multiplicity removed, i.e. the
    number of zeroes at the origin (exact or numerically unresolvable).
    """
    if tol is not None and tol < 0:
        raise ValueError("tol must be nonnegative")
    la = p.coeffs.log_abs()
    cutoff = la.max() + math.log(tol) if tol not in (None, 0.0) else \
        la.max() + math.log(default_strip_tol(p.degree))
    if tol == 0.0:
        cutoff = -np.inf  # strip exact zeroes only
    m = 0
    while m < p.degree and (la[m] < cutoff or la[m] == -np.inf):
        m += 1
    if m == 0:
        return p, 0
    hp = tuple(p.hp[m:]) if p.hp is not None else None
    return Poly(p.coeffs[m:], p.derivative_order, hp, p.precision_bits), m


def two_atom_interior(mult_zero: int, mult_minus_one: int, order: int) -> tuple[Poly, int, int]:
    """Interior factor of a derivative of ``x^a (x+1)^b``.

    The order-th derivative of ``x^a (x+1)^b`` factors as
    ``x^r0 (x+1)^r1 R(x)`` where r0 = (a-order)+, r1 = (b-order)+ and R has
    only simple roots strictly inside (-1, 0).  The Leibniz expansion of the
    derivative gives R as a sum of terms ``T_i x^i (x+1)^(K-i)`` with all
    T_i > 0, so the monomial coefficients of R are sums of positive terms and
    can be accumulated exactly in log space, with no cancellation.

    Returns (R, r0, r1).  This bypasses both the product tree and deflation
    for the deterministic two-atom polynomials, whose multiple roots would
    otherwise defeat a general-purpose root finder.
    """
    a, b, mu = int(mult_zero), int(mult_minus_one), int(order)
    if min(a, b) < 0 or not 0 <= mu <= a + b:
        raise ValueError("invalid multiplicities or order")
    r0, r1 = max(a - mu, 0), max(b - mu, 0)
    K = (a + b - mu) - r0 - r1
    jlo = max(0, mu - a)
    i = np.arange(K + 1, dtype=np.float64)
    j = jlo + i
    # T_i = C(mu, j) * a!/(a-(mu-j))! * b!/(b-j)!
    logT = (log_gamma_array(mu + 1.0) - log_gamma_array(j + 1.0)
            - log_gamma_array(mu - j + 1.0)
            + log_gamma_array(a + 1.0) - log_gamma_array(a - (mu - j) + 1.0)
            + log_gamma_array(b + 1.0) - log_gamma_array(b - j + 1.0))
    # R_p = sum_{i <= p} T_i * C(K - i, p - i), all terms positive
    def logC(n_arr, k_arr):
        return (log_gamma_array(n_arr + 1.0) - log_gamma_array(k_arr + 1.0)
                - log_gamma_array(n_arr - k_arr + 1.0))

    logR = np.empty(K + 1)
    for pidx in range(K + 1):
        ii = i[: pidx + 1]
        v = logT[: pidx + 1] + logC(K - ii, pidx - ii)
        vmax = v.max()
        logR[pidx] = vmax + math.log(np.exp(v - vmax).sum())
    return Poly(XArray.from_log_abs(logR), mu), r0, r1


def dump_coefficients(p: Poly, path) -> None:
    """CSV dump with columns (index, re_significand, im_significand, exponent)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re_significand", "im_significand", "exponent"])
        for k in range(p.degree + 1):
            c = p.coeffs[k]
            w.writerow([k, repr(c.sig.real), repr(c.sig.imag), c.exp])
