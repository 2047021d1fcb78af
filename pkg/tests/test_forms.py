"""Representation theorem: lower bounds, Riesz solves, A = B^-1."""

import numpy as np
import pytest

from formcalc.duality import FROM_DUAL, dense_pair, functional, operator_from_matrix
from formcalc.errors import LowerBoundError, NotPositive
from formcalc.forms import (
    associated_operator, form_from_gram, form_of_operator, inverse_selfadjoint,
    lower_bound, riesz_solve,
)

DP2 = dense_pair(2)


def random_hpd(rng, n, shift=0.5):
    W = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return W @ W.conj().T + shift * np.eye(n)


class TestLowerBound:
    def test_identity_orthonormal(self):
        t = form_from_gram(np.eye(2), np.eye(2))
        assert lower_bound(t, DP2).gamma == pytest.approx(1.0, abs=1e-10)

    def test_diag_gram_eigensolve_oracle(self):
        t = form_from_gram(np.eye(2), np.diag([2.0, 3.0]))
        cert = lower_bound(t, DP2)
        assert cert.kind == "exact-p2"
        # oracle: smallest eigenvalue by characteristic polynomial
        assert cert.gamma == pytest.approx(2.0, abs=1e-10)

    def test_equivalence_scaled_p4(self):
        dp = dense_pair(2, p=4.0)
        t = form_from_gram(np.eye(2), np.diag([2.0, 3.0]))
        cert = lower_bound(t, dp)
        assert cert.kind == "equivalence-scaled"
        assert cert.gamma == pytest.approx(2.0 * 2.0 ** (2 * (0.25 - 0.5)))
        assert cert.slack > 0
        # grid-minimization oracle: t(x,x)/||x||_4^2 over a dense direction grid
        thetas = np.linspace(0, np.pi / 2, 4001)
        xs = np.stack([np.cos(thetas), np.sin(thetas)])
        quad = 2 * xs[0] ** 2 + 3 * xs[1] ** 2
        p4 = (xs[0] ** 4 + xs[1] ** 4) ** (2 / 4)
        assert np.min(quad / p4) >= cert.gamma - 1e-12

    def test_indefinite_rejected(self):
        with pytest.raises(NotPositive):
            form_from_gram(np.eye(2), np.diag([1.0, -1.0]))

    def test_nonorthonormal_basis(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(1, 6))
            B = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) + 3 * np.eye(n)
            M = random_hpd(rng, n)
            # gram of the form (Mx, y) over basis columns of B
            G = (B.conj().T @ (M @ B)).T
            t = form_from_gram(B, G)
            gamma = lower_bound(t, dense_pair(n)).gamma
            # oracle: min Rayleigh quotient of M on random unit vectors
            xs = rng.normal(size=(n, 400)) + 1j * rng.normal(size=(n, 400))
            xs /= np.linalg.norm(xs, axis=0)
            rq = np.real(np.einsum("in,ij,jn->n", xs.conj(), M, xs))
            assert np.min(rq) >= gamma - 1e-9 * max(1.0, gamma)


class TestAssociatedOperator:
    def test_identity_form(self):
        rep = associated_operator(form_from_gram(np.eye(2), np.eye(2)), DP2)
        np.testing.assert_allclose(rep.A.canonical_matrix(), np.eye(2), atol=1e-12)
        np.testing.assert_allclose(rep.B.canonical_matrix(), np.eye(2), atol=1e-12)

    def test_diag_2_5(self):
        rep = associated_operator(form_from_gram(np.eye(2), np.diag([2.0, 5.0])), DP2)
        np.testing.assert_allclose(rep.A.canonical_matrix(), np.diag([2.0, 5.0]),
                                   atol=1e-12)
        np.testing.assert_allclose(rep.B.canonical_matrix(), np.diag([0.5, 0.2]),
                                   atol=1e-12)
        assert rep.b_norm == pytest.approx(0.5, abs=1e-12)
        assert rep.b_norm <= 1.0 / rep.gamma + 1e-12

    def test_hermitian_offdiagonal(self):
        G = np.array([[2.0, 1j], [-1j, 2.0]])
        rep = associated_operator(form_from_gram(np.eye(2), G), DP2)
        # matrix of A is gram^T; same spectrum {1, 3} as the gram
        np.testing.assert_allclose(rep.A.canonical_matrix(), G.T, atol=1e-12)
        evals = np.linalg.eigvalsh(rep.A.canonical_matrix())
        np.testing.assert_allclose(evals, [1.0, 3.0], atol=1e-12)
        assert rep.gamma == pytest.approx(1.0, abs=1e-12)
        assert rep.b_norm == pytest.approx(1.0, abs=1e-10)

    def test_round_trip_gram(self):
        rng = np.random.default_rng(42)
        for _ in range(60):
            n = int(rng.integers(1, 13))
            G = random_hpd(rng, n)
            rep = associated_operator(form_from_gram(np.eye(n), G), dense_pair(n))
            G_back = form_of_operator(rep.A).gram
            assert np.linalg.norm(G_back - G) <= 1e-10 * np.linalg.norm(G)

    def test_quadratic_lower_bound_on_samples(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            n = int(rng.integers(1, 9))
            G = random_hpd(rng, n)
            rep = associated_operator(form_from_gram(np.eye(n), G), dense_pair(n))
            M = rep.A.canonical_matrix()
            x = rng.normal(size=n) + 1j * rng.normal(size=n)
            quad = float(np.real(np.vdot(x, M @ x)))
            assert quad >= rep.gamma * np.vdot(x, x).real * (1 - 1e-10)

    def test_b_positive(self):
        rng = np.random.default_rng(13)
        rep = associated_operator(form_from_gram(np.eye(4), random_hpd(rng, 4)),
                                  dense_pair(4))
        R = rep.B.canonical_matrix()
        for _ in range(50):
            z = rng.normal(size=4) + 1j * rng.normal(size=4)
            # (z, Bz) = (Bz)^H z with R Hermitian
            assert np.real(np.vdot(R @ z, z)) >= -1e-12

    def test_gamma_zero_rejected(self):
        t = form_from_gram(np.eye(2), np.diag([1.0, 0.0]))
        with pytest.raises(LowerBoundError):
            associated_operator(t, DP2)


class TestRieszSolve:
    def test_zero(self):
        t = form_from_gram(np.eye(2), np.diag([2.0, 5.0]))
        f = riesz_solve(t, functional([0, 0], DP2), DP2)
        np.testing.assert_allclose(f.coords, 0.0, atol=1e-15)

    def test_identity_gram(self):
        t = form_from_gram(np.eye(2), np.eye(2))
        f = riesz_solve(t, functional([1, 0], DP2), DP2)
        np.testing.assert_allclose(f.coords, [1, 0], atol=1e-14)

    def test_diag_solve_oracle(self):
        t = form_from_gram(np.eye(2), np.diag([2.0, 5.0]))
        f = riesz_solve(t, functional([1, 1], DP2), DP2)
        np.testing.assert_allclose(f.coords, [0.5, 0.2], atol=1e-14)

    def test_equals_b_and_injectivity(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            n = int(rng.integers(1, 8))
            dp = dense_pair(n)
            t = form_from_gram(np.eye(n), random_hpd(rng, n))
            rep = associated_operator(t, dp)
            v = rng.normal(size=n) + 1j * rng.normal(size=n)
            f = riesz_solve(t, functional(v, dp), dp)
            np.testing.assert_allclose(f.coords, rep.B.canonical_matrix() @ v,
                                       atol=1e-11 * max(1, np.linalg.norm(v)))
            if np.linalg.norm(f.coords) <= 1e-10:
                assert np.linalg.norm(v) <= 1e-10


class TestInverseSelfadjoint:
    def test_identity(self):
        B = operator_from_matrix(np.eye(2), DP2, FROM_DUAL)
        A = inverse_selfadjoint(B, DP2)
        np.testing.assert_allclose(A.effective_matrix(), np.eye(2), atol=1e-12)

    def test_diagonal(self):
        B = operator_from_matrix(np.diag([0.5, 1 / 3]), DP2, FROM_DUAL)
        A = inverse_selfadjoint(B, DP2)
        np.testing.assert_allclose(A.effective_matrix(), np.diag([2.0, 3.0]),
                                   atol=1e-12)

    def test_two_by_two_oracle(self):
        B = operator_from_matrix([[2.0, 1.0], [1.0, 1.0]], DP2, FROM_DUAL)
        A = inverse_selfadjoint(B, DP2)
        # 2x2 inversion oracle: inv([[2,1],[1,1]]) = [[1,-1],[-1,2]]
        np.testing.assert_allclose(A.effective_matrix(),
                                   [[1.0, -1.0], [-1.0, 2.0]], atol=1e-12)

    def test_non_injective_rejected(self):
        B = operator_from_matrix(np.diag([1.0, 0.0]), DP2, FROM_DUAL)
        with pytest.raises(ValueError):
            inverse_selfadjoint(B, DP2)

    def test_non_selfadjoint_rejected(self):
        B = operator_from_matrix([[1.0, 1.0], [0.0, 1.0]], DP2, FROM_DUAL)
        with pytest.raises(ValueError):
            inverse_selfadjoint(B, DP2)
