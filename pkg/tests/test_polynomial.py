import math

import numpy as np
import pytest

from rootflow import polynomial as poly
from rootflow.polynomial import (
    Poly,
    derivative,
    dump_coefficients,
    evaluate,
    fractional_derivative,
    from_roots,
    strip_origin_zeros,
    two_atom_interior,
)


def coeffs_of(p):
    return p.coeffs.to_complex()


class TestFromRoots:
    def test_two_roots(self):
        p = from_roots([1.0, -1.0])
        assert np.allclose(coeffs_of(p), [-1.0, 0.0, 1.0])

    def test_single_root(self):
        p = from_roots([2.5 + 1j])
        assert np.allclose(coeffs_of(p), [-(2.5 + 1j), 1.0])

    def test_cube_roots_of_unity(self):
        roots = np.exp(2j * np.pi * np.arange(3) / 3)
        p = from_roots(roots)
        # oracle: direct sequential convolution
        want = np.array([1.0 + 0j])
        for r in roots:
            want = np.convolve(want, np.array([-r, 1.0]))
        assert np.allclose(coeffs_of(p), want, atol=1e-14)
        assert np.allclose(coeffs_of(p), [-1.0, 0.0, 0.0, 1.0], atol=1e-14)

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            from_roots([])

    def test_large_degree_monic(self):
        rng = np.random.default_rng(5)
        roots = rng.normal(size=300) + 1j * rng.normal(size=300)
        p = from_roots(roots)
        lead = p.coeffs[p.degree]
        assert lead.sig == 1.0 and lead.exp == 0

    def test_matches_direct_convolution_degree_40(self):
        rng = np.random.default_rng(7)
        roots = rng.normal(size=40) + 1j * rng.normal(size=40)
        p = from_roots(roots)
        want = np.array([1.0 + 0j])
        for r in roots:
            want = np.convolve(want, np.array([-r, 1.0]))
        got = coeffs_of(p)
        assert np.allclose(got, want, rtol=1e-11, atol=1e-11)


class TestDerivative:
    def test_first_derivative(self):
        p = from_roots([1.0, -1.0])  # x^2 - 1
        d = derivative(p, 1)
        assert np.allclose(coeffs_of(d), [0.0, 2.0])
        assert d.derivative_order == 1

    def test_full_order_constant(self):
        p = from_roots(np.arange(1.0, 6.0))  # degree 5 monic
        d = derivative(p, 5)
        assert d.degree == 0
        assert abs(coeffs_of(d)[0] - math.factorial(5)) < 1e-9

    def test_factorial_ratio(self):
        # derivative(x^5, 3) = 60 x^2
        p = Poly.from_complex_coeffs([0, 0, 0, 0, 0, 1.0])
        d = derivative(p, 3)
        assert np.allclose(coeffs_of(d), [0.0, 0.0, 60.0])

    def test_order_out_of_range(self):
        p = from_roots([0.5])
        with pytest.raises(ValueError):
            derivative(p, 2)

    def test_semigroup(self):
        rng = np.random.default_rng(11)
        p = from_roots(rng.normal(size=30) + 1j * rng.normal(size=30))
        a = derivative(derivative(p, 7), 5)
        b = derivative(p, 12)
        la, lb = a.coeffs.log_abs(), b.coeffs.log_abs()
        assert np.allclose(la, lb, rtol=0, atol=1e-12)
        assert np.allclose(a.coeffs.angle(), b.coeffs.angle(), atol=1e-12)

    def test_large_order_matches_loggamma(self):
        # cross-check the exact-integer path against the log-gamma path
        n = 200
        p = Poly.from_complex_coeffs(np.ones(n + 1))
        d_exact = derivative(p, 64)
        d_lg = Poly(p.coeffs[64:].scale_by_log(
            poly.log_gamma_array(np.arange(n - 64 + 1) + 65.0)
            - poly.log_gamma_array(np.arange(n - 64 + 1) + 1.0)))
        assert np.allclose(d_exact.coeffs.log_abs(), d_lg.coeffs.log_abs(),
                           rtol=0, atol=1e-11)

    def test_multiple_root_structure(self):
        # d/dx (x - r)^k = k (x - r)^(k-1)
        r, k = 0.7 - 0.2j, 6
        p = from_roots([r] * k)
        d = derivative(p, 1)
        want = from_roots([r] * (k - 1)).coeffs.to_complex() * k
        assert np.allclose(coeffs_of(d), want, rtol=1e-12, atol=1e-12)


class TestFractionalDerivative:
    def test_alpha_zero_identity(self):
        p = from_roots([1.0, 2.0, 3.0])
        f = fractional_derivative(p, 0.0)
        assert np.allclose(coeffs_of(f), coeffs_of(p), rtol=1e-14)

    def test_integer_alpha_matches_shifted_derivative(self):
        # at alpha = m the coefficients equal those of z^m p^(m)(z)
        rng = np.random.default_rng(3)
        p = from_roots(rng.normal(size=12) + 1j * rng.normal(size=12))
        m = 4
        f = fractional_derivative(p, float(m))
        d = derivative(p, m)
        fc, dc = coeffs_of(f), coeffs_of(d)
        assert np.allclose(fc[:m], 0.0)
        assert np.allclose(fc[m:], dc, rtol=1e-11, atol=1e-11)

    def test_continuity_at_integer(self):
        rng = np.random.default_rng(4)
        p = from_roots(rng.normal(size=10) + 1j * rng.normal(size=10))
        m = 3
        f1 = fractional_derivative(p, m - 1e-6)
        f2 = fractional_derivative(p, float(m))
        c1, c2 = coeffs_of(f1), coeffs_of(f2)
        sel = np.abs(c2) > 0
        rel = np.abs(c1[sel] - c2[sel]) / np.abs(c2[sel])
        assert rel.max() < 1e-4

    def test_out_of_range(self):
        p = from_roots([1.0])
        with pytest.raises(ValueError):
            fractional_derivative(p, 1.5)


class TestEvaluate:
    def test_simple_values(self):
        p = from_roots([1.0, -1.0])
        assert abs(evaluate(p, 1.0).to_complex()) < 1e-14
        assert abs(evaluate(p, 2.0).to_complex() - 3.0) < 1e-13

    def test_log_of_product_over_roots(self):
        # log|p(z)| must equal the sum of log|z - root|
        rng = np.random.default_rng(9)
        u = rng.random(500)
        roots = np.sqrt(u) * np.exp(2j * np.pi * rng.random(500))
        p = from_roots(roots)
        z = 2.0 + 0j
        want = np.sum(np.log(np.abs(z - roots)))
        got = evaluate(p, z).log_abs()
        assert abs(got - want) < 1e-8 * abs(want)


class TestStripOriginZeros:
    def test_exact_factor(self):
        # x^3 + x^2 = x^2 (x + 1)
        p = Poly.from_complex_coeffs([0.0, 0.0, 1.0, 1.0])
        q, m = strip_origin_zeros(p)
        assert m == 2
        assert np.allclose(coeffs_of(q), [1.0, 1.0])

    def test_no_vanishing_constant(self):
        p = from_roots([1.0, 2.0])
        q, m = strip_origin_zeros(p)
        assert m == 0 and q is p

    def test_fractional_then_strip_matches_derivative(self):
        rng = np.random.default_rng(17)
        p = from_roots(rng.normal(size=9) + 1j * rng.normal(size=9))
        m = 3
        f = fractional_derivative(p, float(m))
        q, stripped = strip_origin_zeros(f)
        assert stripped == m
        d = derivative(p, m)
        ratio = coeffs_of(q) / coeffs_of(d)
        assert np.allclose(ratio, ratio[0], rtol=1e-10)


class TestTwoAtomInterior:
    def test_tiny_case(self):
        # d/dx [x(x+1)] = 2x + 1
        r, m0, m1 = two_atom_interior(1, 1, 1)
        assert (m0, m1) == (0, 0)
        assert np.allclose(coeffs_of(r), [1.0, 2.0])

    def test_against_generic_derivative(self):
        a, b, mu = 5, 7, 4
        r, m0, m1 = two_atom_interior(a, b, mu)
        assert (m0, m1) == (1, 3)
        assert r.degree == (a + b - mu) - m0 - m1
        # oracle: build x^a (x+1)^b explicitly, differentiate, deflate exactly
        p = from_roots([0.0] * a + [-1.0] * b)
        d = derivative(p, mu)
        dc = coeffs_of(d)
        dc = dc[m0:]  # exact origin deflation
        for _ in range(m1):  # synthetic division by (x + 1)
            q = np.empty(len(dc) - 1, dtype=complex)
            acc = dc[-1]
            for j in range(len(dc) - 2, -1, -1):
                q[j] = acc
                acc = dc[j] - acc
            dc = q
        got = coeffs_of(r)
        assert np.allclose(got / got[-1], dc / dc[-1], rtol=1e-9)

    def test_beyond_first_multiplicity(self):
        a, b, mu = 3, 10, 6
        r, m0, m1 = two_atom_interior(a, b, mu)
        assert (m0, m1) == (0, 4)
        assert r.degree == a


def test_dump_coefficients(tmp_path):
    p = from_roots([1.0, -2.0])
    path = tmp_path / "c.csv"
    dump_coefficients(p, path)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "index,re_significand,im_significand,exponent"
    assert len(rows) == 4
