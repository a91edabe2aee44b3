import numpy as np
import pytest

from flsolve.dense import DenseMatrix, RngStream
from flsolve.regularizers import Regularizer, bregman_distance
from flsolve.theory import (
    RateConstants,
    alpha_of,
    beta_of,
    default_delta,
    nu_quadratic,
    simplified_bound,
    theorem_bound,
)


class TestRateConstants:
    def test_rho_is_max(self):
        c = RateConstants(alpha=0.7, beta=0.9, delta=0.1)
        assert c.rho == 0.9

    def test_delta_must_be_positive(self):
        with pytest.raises(ValueError):
            RateConstants(alpha=0.5, beta=0.5, delta=0.0)

    def test_alpha_of_identity(self):
        # sigma_min = 1, ||I_3||_F^2 = 3
        assert alpha_of(DenseMatrix(np.eye(3))) == pytest.approx(2.0 / 3.0)

    def test_alpha_in_unit_interval(self, np_rng):
        A = DenseMatrix(np_rng.standard_normal((40, 20)))
        assert 0.0 < alpha_of(A) < 1.0

    def test_nu_quadratic_identity(self):
        assert nu_quadratic(DenseMatrix(np.eye(2))) == pytest.approx(2.0)
        assert beta_of(2.0, 1.0, 2.0) == pytest.approx(0.5)

    def test_nu_quadratic_diag(self):
        B = DenseMatrix(np.diag([1.0, 2.0]))
        assert nu_quadratic(B) == pytest.approx(2.0)
        assert beta_of(B.frob_sq, 1.0, 2.0) == pytest.approx(0.8)

    def test_beta_matches_inner_projection_rate(self, np_rng):
        # For the quadratic objective the induced rate equals the row
        # projection rate on B: 1 - sigma_min(B^T)^2 / ||B||_F^2.
        B = DenseMatrix(np_rng.standard_normal((10, 25)))
        beta = beta_of(B.frob_sq, 1.0, nu_quadratic(B))
        assert beta == pytest.approx(alpha_of(B.transpose()), rel=1e-12)

    def test_beta_negative_warns(self):
        with pytest.warns(UserWarning):
            beta_of(1.0, 1.0, 10.0)

    def test_default_delta_midpoint(self):
        assert default_delta(1.0, 0.5) == pytest.approx(0.5)
        with pytest.raises(ValueError):
            default_delta(1.0, 1.0)


class TestAdmissibilityInequality:
    def test_quadratic_nu_bound_on_row_space(self, np_rng):
        # D_{f,z}(x, x_star) <= (1/nu) ||B (x - x_star)||^2 whenever the
        # offset lies in ran(B^T).
        B = DenseMatrix(np_rng.standard_normal((20, 40)))
        nu = nu_quadratic(B)
        reg = Regularizer.quadratic()
        x_star = np_rng.standard_normal(40)
        for _ in range(1000):
            w = B.rmatvec(np_rng.standard_normal(20))
            z = x_star + w
            D = bregman_distance(reg, z, x_star)
            Bw = B.matvec(w)
            assert D <= (1.0 / nu) * float(Bw @ Bw) + 1e-10


HAND = RateConstants(alpha=0.5, beta=0.5, delta=1.0)


class TestTheoremBound:
    def test_k0_is_initial_distance(self):
        assert theorem_bound(HAND, 3.25, 1.0, 2.0, 1.0, 0) == 3.25

    def test_k1_direct_substitution(self):
        c = RateConstants(alpha=0.3, beta=0.6, delta=0.2)
        gamma, Bf, D0, lhs = 1.0, 4.0, 2.0, 5.0
        growth = 1.0 + c.delta / gamma
        expect = growth * c.beta * D0 + \
            (c.delta + gamma) * gamma / (2 * c.delta * Bf) * lhs * c.alpha
        assert theorem_bound(c, D0, lhs, Bf, gamma, 1) == pytest.approx(
            expect, rel=1e-14)

    def test_k3_frozen_value(self):
        # alpha = beta = 0.5, delta = gamma = 1, D0 = 1, lhs = 1, ||B||_F^2 = 2:
        #   2^3 0.5^3 + (2/(2*2)) * (0.5^3 + 0.5^2*(2*0.5) + 0.5*(2*0.5)^2)
        # = 1 + 0.5 * 0.875 = 1.4375
        assert theorem_bound(HAND, 1.0, 1.0, 2.0, 1.0, 3) == pytest.approx(
            1.4375, rel=1e-14)

    def test_negative_k_rejected(self):
        with pytest.raises(ValueError):
            theorem_bound(HAND, 1.0, 1.0, 2.0, 1.0, -1)

    def test_eventually_decreasing_when_contractive(self):
        # (1 + delta/gamma) beta < 1 and alpha < 1: after a burn-in the
        # bound decreases monotonically.
        c = RateConstants(alpha=0.9, beta=0.6, delta=0.2)
        vals = [theorem_bound(c, 1.0, 1.0, 2.0, 1.0, k) for k in range(200)]
        tail = vals[50:]
        assert all(b <= a + 1e-15 for a, b in zip(tail, tail[1:]))
        assert vals[-1] < 1e-3 * vals[0]


class TestSimplifiedBound:
    def test_k0_envelope(self):
        c = RateConstants(alpha=0.5, beta=0.5, delta=0.25)
        v = simplified_bound(c, 1.0, 1.0, 2.0, 1.0, 0)
        expect = 1.0 + (0.25 + 1.0) * 1.0 / (2 * 0.25 ** 2 * 2.0)
        assert v == pytest.approx(expect, rel=1e-14)
        assert v >= theorem_bound(c, 1.0, 1.0, 2.0, 1.0, 0)

    def test_boundary_delta_rejected(self):
        # rho = 0.5, delta = gamma: (1 + 1) * 0.5 = 1 is inadmissible.
        c = RateConstants(alpha=0.5, beta=0.5, delta=1.0)
        with pytest.raises(ValueError, match="admissible"):
            simplified_bound(c, 1.0, 1.0, 2.0, 1.0, 5)

    def test_dominates_exact_bound_pointwise(self):
        c = RateConstants(alpha=0.8, beta=0.7, delta=default_delta(1.0, 0.8))
        for k in range(51):
            simple = simplified_bound(c, 2.0, 3.0, 5.0, 1.0, k)
            exact = theorem_bound(c, 2.0, 3.0, 5.0, 1.0, k)
            assert simple >= exact - 1e-12 * max(1.0, exact)

    def test_linear_decay(self):
        c = RateConstants(alpha=0.8, beta=0.7, delta=default_delta(1.0, 0.8))
        rate = (1.0 + c.delta) * c.rho
        v10 = simplified_bound(c, 1.0, 1.0, 2.0, 1.0, 10)
        v11 = simplified_bound(c, 1.0, 1.0, 2.0, 1.0, 11)
        assert v11 / v10 == pytest.approx(rate, rel=1e-12)
