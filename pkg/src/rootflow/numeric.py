"""Extended-range scalar and array arithmetic.

Coefficients of degree-10^4 polynomials, and the factorial ratios produced by
thousands of differentiations, span magnitudes like e^{+-50000}, far beyond
what a double can hold.  Values here are carried as a pair
(significand, base-2 exponent): a double (real or complex) significand with
absolute value in [1, 2), plus a signed integer exponent.  This keeps ~15
significant digits over an effectively unbounded dynamic range, which is all
the large-degree asymptotics need.

Two layers are provided:

* ``XComplex`` / ``XReal``: immutable scalars with ``xc_mul``, ``xc_add``,
  ``log_abs`` and friends.
* ``XArray``: a vectorized (significand array, exponent array) container used
  by the polynomial and root-finding layers, with convolution and Horner
  evaluation as the performance-critical kernels.

All values are immutable after construction and every operation is pure, so
instances can be shared freely across threads.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

LN2 = math.log(2.0)

# An exponent gap beyond which the smaller addend cannot move any bit of the
# larger one's 53-bit significand (53*2 plus headroom).
ADD_EXPONENT_CUTOFF = 106

# Effective exponent of a zero significand; small enough that sums of two
# such sentinels stay far from the int64 boundary.
_BIG_NEG = -(2**55)


def _normalize_scalar(sig: complex, exp: int) -> tuple[complex, int]:
    m = abs(sig)
    if m == 0.0 or m != m:  # zero or NaN; NaN collapses to zero deliberately?
        if m != m:
            raise ValueError("NaN significand")
        return 0j, 0
    e = math.frexp(m)[1]  # m = f * 2^e with f in [0.5, 1)
    shift = 1 - e
    sig = complex(math.ldexp(sig.real, shift), math.ldexp(sig.imag, shift))
    return sig, exp + e - 1


class XComplex:
    """Complex scalar ``sig * 2^exp`` with ``|sig|`` in [1, 2) or sig == 0."""

    __slots__ = ("sig", "exp")

    def __init__(self, sig: complex, exp: int = 0):
        s, e = _normalize_scalar(complex(sig), int(exp))
        object.__setattr__(self, "sig", s)
        object.__setattr__(self, "exp", e)

    def __setattr__(self, *a):  # immutable
        raise AttributeError("XComplex is immutable")

    @classmethod
    def from_complex(cls, z: complex) -> "XComplex":
        return cls(z, 0)

    @classmethod
    def zero(cls) -> "XComplex":
        return cls(0j, 0)

    @property
    def is_zero(self) -> bool:
        return self.sig == 0

    def mul(self, other: "XComplex") -> "XComplex":
        return XComplex(self.sig * other.sig, self.exp + other.exp)

    def add(self, other: "XComplex") -> "XComplex":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        a, b = (self, other) if self.exp >= other.exp else (other, self)
        d = a.exp - b.exp
        if d > ADD_EXPONENT_CUTOFF:
            return a
        small = complex(math.ldexp(b.sig.real, -d), math.ldexp(b.sig.imag, -d))
        return XComplex(a.sig + small, a.exp)

    def neg(self) -> "XComplex":
        if self.is_zero:
            return self
        out = object.__new__(XComplex)
        object.__setattr__(out, "sig", -self.sig)
        object.__setattr__(out, "exp", self.exp)
        return out

    def log_abs(self) -> float:
        if self.is_zero:
            raise ValueError("log_abs of zero")
        return math.log(abs(self.sig)) + self.exp * LN2

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0j
        if self.exp > 1030:
            return complex(math.inf, math.inf)
        return complex(math.ldexp(self.sig.real, self.exp),
                       math.ldexp(self.sig.imag, self.exp))

    def __eq__(self, other) -> bool:
        return (isinstance(other, XComplex)
                and self.sig == other.sig and self.exp == other.exp)

    def __repr__(self) -> str:
        return f"XComplex({self.sig!r}, 2**{self.exp})"


class XReal:
    """Real scalar ``sig * 2^exp`` with ``|sig|`` in [1, 2) or sig == 0."""

    __slots__ = ("sig", "exp")

    def __init__(self, sig: float, exp: int = 0):
        sig = float(sig)
        if sig != sig:
            raise ValueError("NaN significand")
        if sig == 0.0:
            object.__setattr__(self, "sig", 0.0)
            object.__setattr__(self, "exp", 0)
            return
        e = math.frexp(abs(sig))[1]
        object.__setattr__(self, "sig", math.ldexp(sig, 1 - e))
        object.__setattr__(self, "exp", int(exp) + e - 1)

    def __setattr__(self, *a):
        raise AttributeError("XReal is immutable")

    @classmethod
    def from_float(cls, x: float) -> "XReal":
        return cls(x, 0)

    @classmethod
    def from_int(cls, n: int) -> "XReal":
        """Exact up to one double rounding, valid for arbitrarily large ints."""
        if n == 0:
            return cls(0.0, 0)
        bits = abs(n).bit_length()
        if bits <= 53:
            return cls(float(n), 0)
        shift = bits - 53
        return cls(float(n >> shift), shift)

    @property
    def is_zero(self) -> bool:
        return self.sig == 0.0

    def mul(self, other: "XReal") -> "XReal":
        return XReal(self.sig * other.sig, self.exp + other.exp)

    def add(self, other: "XReal") -> "XReal":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        a, b = (self, other) if self.exp >= other.exp else (other, self)
        d = a.exp - b.exp
        if d > ADD_EXPONENT_CUTOFF:
            return a
        return XReal(a.sig + math.ldexp(b.sig, -d), a.exp)

    def log_abs(self) -> float:
        if self.is_zero:
            raise ValueError("log_abs of zero")
        return math.log(abs(self.sig)) + self.exp * LN2

    def sign(self) -> float:
        return math.copysign(1.0, self.sig) if self.sig != 0.0 else 0.0

    def to_float(self) -> float:
        if self.is_zero:
            return 0.0
        if self.exp > 1030:
            return math.copysign(math.inf, self.sig)
        return math.ldexp(self.sig, self.exp)

    def __eq__(self, other) -> bool:
        return (isinstance(other, XReal)
                and self.sig == other.sig and self.exp == other.exp)

    def __repr__(self) -> str:
        return f"XReal({self.sig!r}, 2**{self.exp})"


def xc_mul(a: XComplex, b: XComplex) -> XComplex:
    return a.mul(b)


def xc_add(a: XComplex, b: XComplex) -> XComplex:
    return a.add(b)


def log_abs(a) -> float:
    return a.log_abs()


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0, accurate to ~1e-12 relative.

    Needed for factorial ratios in repeated and fractional differentiation;
    delegates to the platform Lanczos-style lgamma.
    """
    if x <= 0.0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def log_gamma_array(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0.0):
        raise ValueError("log_gamma requires positive arguments")
    return gammaln(x)


# ---------------------------------------------------------------------------
# Vectorized layer
# ---------------------------------------------------------------------------


def _pow2(k: np.ndarray) -> np.ndarray:
    """Exact powers of two for integer arrays, flushing k < -1074 to 0."""
    k = np.clip(k, -1075, 1023).astype(np.int64)
    return np.ldexp(np.float64(1.0), k)


def _renorm(sig: np.ndarray, exp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = np.abs(sig)
    _, e = np.frexp(m)
    e = e.astype(np.int64)
    nz = m != 0.0
    shift = np.where(nz, 1 - e, 0)
    out = np.empty_like(sig)
    out.real = np.ldexp(sig.real, shift)
    out.imag = np.ldexp(sig.imag, shift)
    exp = np.where(nz, exp + e - 1, 0)
    return out, exp


class XArray:
    """Dense array of extended-range complex values.

    ``values[k] = sig[k] * 2^exp[k]`` with each nonzero significand normalized
    to [1, 2) in absolute value.  Zero entries are stored as (0, 0).
    """

    __slots__ = ("sig", "exp")

    def __init__(self, sig: np.ndarray, exp: np.ndarray, *, normalized: bool = False):
        sig = np.asarray(sig, dtype=np.complex128)
        exp = np.asarray(exp, dtype=np.int64)
        if sig.shape != exp.shape:
            raise ValueError("significand/exponent shape mismatch")
        if not normalized:
            sig, exp = _renorm(sig.copy(), exp.copy())
        self.sig = sig
        self.exp = exp

    # -- constructors -------------------------------------------------------

    @classmethod
    def zeros(cls, n: int) -> "XArray":
        return cls(np.zeros(n, dtype=np.complex128), np.zeros(n, dtype=np.int64),
                   normalized=True)

    @classmethod
    def from_complex(cls, arr) -> "XArray":
        arr = np.asarray(arr, dtype=np.complex128)
        return cls(arr, np.zeros(arr.shape, dtype=np.int64))

    @classmethod
    def from_log_abs(cls, logmag, phase=None) -> "XArray":
        """Build from natural-log magnitudes (and optional phases).

        Entries with ``logmag == -inf`` become zeros.  This is the entry point
        for coefficient profiles of the form e^{-n v(k/n)}.
        """
        logmag = np.asarray(logmag, dtype=np.float64)
        finite = np.isfinite(logmag)
        if np.any(logmag[~finite] != -np.inf):
            raise ValueError("log magnitudes must be finite or -inf")
        l2 = np.where(finite, logmag, 0.0) / LN2
        e = np.floor(l2).astype(np.int64)
        frac = np.exp((l2 - e) * LN2)  # in [1, 2)
        if phase is None:
            sig = frac.astype(np.complex128)
        else:
            phase = np.asarray(phase, dtype=np.float64)
            sig = frac * np.exp(1j * phase)
        sig = np.where(finite, sig, 0.0)
        e = np.where(finite, e, 0)
        return cls(sig, e, normalized=True)

    @classmethod
    def from_scalar_list(cls, scalars) -> "XArray":
        sig = np.array([s.sig for s in scalars], dtype=np.complex128)
        exp = np.array([s.exp for s in scalars], dtype=np.int64)
        return cls(sig, exp, normalized=True)

    # -- basics --------------------------------------------------------------

    def __len__(self) -> int:
        return self.sig.shape[0]

    def __getitem__(self, idx):
        if isinstance(idx, (int, np.integer)):
            s = self.sig[idx]
            out = object.__new__(XComplex)
            object.__setattr__(out, "sig", complex(s))
            object.__setattr__(out, "exp", int(self.exp[idx]) if s != 0 else 0)
            return out
        return XArray(self.sig[idx], self.exp[idx], normalized=True)

    def copy(self) -> "XArray":
        return XArray(self.sig.copy(), self.exp.copy(), normalized=True)

    def is_zero(self) -> np.ndarray:
        return self.sig == 0.0

    def log_abs(self) -> np.ndarray:
        """Natural log of magnitudes; -inf at zero entries."""
        m = np.abs(self.sig)
        with np.errstate(divide="ignore"):
            return np.where(m == 0.0, -np.inf, np.log(m) + self.exp * LN2)

    def angle(self) -> np.ndarray:
        return np.angle(self.sig)

    def to_complex(self) -> np.ndarray:
        """Collapse to plain complex doubles; overflows saturate to inf."""
        e = np.clip(self.exp, -1075, 1024)
        over = self.exp > 1024
        scale_ok = _pow2(np.where(over, 0, e))
        out = self.sig * scale_ok
        if np.any(over):
            out = np.where(over, self.sig * np.inf, out)
        return out

    # -- arithmetic ----------------------------------------------------------

    def mul(self, other: "XArray") -> "XArray":
        sig = self.sig * other.sig
        exp = self.exp + other.exp
        m2 = sig.real * sig.real + sig.imag * sig.imag
        big = m2 >= 4.0
        sig = np.where(big, sig * 0.5, sig)
        exp = np.where(big, exp + 1, exp)
        z = sig == 0.0
        return XArray(sig, np.where(z, 0, exp), normalized=True)

    def mul_scalar(self, s: XComplex) -> "XArray":
        if s.is_zero:
            return XArray.zeros(len(self))
        sig = self.sig * s.sig
        exp = self.exp + s.exp
        return XArray(sig, exp)

    def mul_double(self, a) -> "XArray":
        """Multiply by ordinary doubles (scalar or array), renormalizing."""
        sig = self.sig * a
        return XArray(sig, self.exp.copy())

    def scale_by_log(self, logfactors) -> "XArray":
        """Multiply elementwise by e^{logfactors} given in natural log."""
        f = XArray.from_log_abs(logfactors)
        return self.mul(f)

    def add(self, other: "XArray") -> "XArray":
        ea = np.where(self.sig == 0, _BIG_NEG, self.exp)
        eb = np.where(other.sig == 0, _BIG_NEG, other.exp)
        e = np.maximum(ea, eb)
        sig = (self.sig * _pow2(np.minimum(ea - e, 0))
               + other.sig * _pow2(np.minimum(eb - e, 0)))
        return XArray(sig, np.where(sig == 0, 0, e))

    def conv(self, other: "XArray") -> "XArray":
        """Full polynomial convolution (Cauchy product) in extended range.

        Each output coefficient is accumulated in the frame of its largest
        term, so the result is exact up to double rounding no matter how the
        magnitudes are spread across the index range.
        """
        na, nb = len(self), len(other)
        if na == 0 or nb == 0:
            raise ValueError("empty operand")
        nc = na + nb - 1
        asig, aexp = self.sig, np.where(self.sig == 0, _BIG_NEG, self.exp)
        # reversed copies give contiguous diagonal slices
        brs = other.sig[::-1].copy()
        bre = np.where(brs == 0, _BIG_NEG, other.exp[::-1].copy())
        out_sig = np.empty(nc, dtype=np.complex128)
        out_exp = np.empty(nc, dtype=np.int64)
        for k in range(nc):
            i0 = max(0, k - nb + 1)
            i1 = min(na - 1, k)
            sa = asig[i0:i1 + 1]
            ea = aexp[i0:i1 + 1]
            j0 = nb - 1 - (k - i0)
            sb = brs[j0:j0 + (i1 - i0 + 1)]
            eb = bre[j0:j0 + (i1 - i0 + 1)]
            e = ea + eb
            m = e.max()
            if m <= _BIG_NEG:
                out_sig[k] = 0.0
                out_exp[k] = 0
                continue
            terms = (sa * sb) * _pow2(e - m)
            s = terms.sum()
            out_sig[k] = s
            out_exp[k] = m if s != 0 else 0
        return XArray(out_sig, out_exp)

    def max_log_abs(self) -> float:
        la = self.log_abs()
        return float(np.max(la))


# ---------------------------------------------------------------------------
# Horner evaluation kernels
# ---------------------------------------------------------------------------


def _horner_block(coeffs: XArray, z: np.ndarray, want_deriv: bool):
    """Shared Horner loop over points ``z`` (complex array).

    Runs highest coefficient first with a block renormalization every few
    steps; between renormalizations the significands are allowed to drift by
    a bounded number of bits, which keeps the numpy call count low.
    """
    z = np.asarray(z, dtype=np.complex128)
    n = len(coeffs)
    npts = z.shape[0]
    with np.errstate(divide="ignore"):
        zmag = np.where(z == 0, 0.0, np.abs(np.log2(np.abs(np.where(z == 0, 1, z)))))
    drift = float(np.max(zmag)) + 2.0 if npts else 2.0
    block = max(1, min(64, int(400.0 / drift)))

    csig, cexp = coeffs.sig, coeffs.exp
    czero = csig == 0.0

    vs = np.full(npts, csig[n - 1], dtype=np.complex128)
    ve = np.full(npts, cexp[n - 1] if not czero[n - 1] else _BIG_NEG,
                 dtype=np.int64)
    if want_deriv:
        ds = np.zeros(npts, dtype=np.complex128)
        de = np.full(npts, _BIG_NEG, dtype=np.int64)

    steps = 0
    for k in range(n - 2, -1, -1):
        if want_deriv:
            # d <- d*z + v, done before v is updated
            ds = ds * z
            ee = np.maximum(de, ve)
            ds = ds * _pow2(np.minimum(de - ee, 0)) + vs * _pow2(np.minimum(ve - ee, 0))
            de = ee
        vs = vs * z
        if czero[k]:
            pass
        else:
            ce = cexp[k]
            ee = np.maximum(ve, ce)
            vs = vs * _pow2(np.minimum(ve - ee, 0)) + csig[k] * _pow2(np.minimum(ce - ee, 0))
            ve = ee
        steps += 1
        if steps >= block:
            vs, ve = _renorm(vs, ve)
            ve = np.where(vs == 0, _BIG_NEG, ve)
            if want_deriv:
                ds, de = _renorm(ds, de)
                de = np.where(ds == 0, _BIG_NEG, de)
            steps = 0

    vs, ve = _renorm(vs, ve)
    val = XArray(vs, np.where(vs == 0, 0, ve), normalized=True)
    if not want_deriv:
        return val
    ds, de = _renorm(ds, de)
    der = XArray(ds, np.where(ds == 0, 0, de), normalized=True)
    return val, der


def horner_many(coeffs: XArray, z) -> XArray:
    """Evaluate the polynomial with the given coefficients at each point."""
    return _horner_block(coeffs, np.atleast_1d(np.asarray(z, dtype=np.complex128)),
                         want_deriv=False)


def horner_with_derivative(coeffs: XArray, z) -> tuple[XArray, XArray]:
    """Evaluate polynomial and first derivative simultaneously."""
    return _horner_block(coeffs, np.atleast_1d(np.asarray(z, dtype=np.complex128)),
                         want_deriv=True)


def horner_sign_real(coeffs: XArray, x) -> np.ndarray:
    """Sign of a real-coefficient polynomial at real points.

    Works on the real parts of the stored significands; intended for
    polynomials built through real pipelines where imaginary parts vanish.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    val = _horner_block(coeffs, x.astype(np.complex128), want_deriv=False)
    return np.sign(val.sig.real)
