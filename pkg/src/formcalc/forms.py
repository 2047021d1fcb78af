"""Positive sesquilinear forms and their representing operators.

A form with positive lower bound gamma on a (effectively) dense domain
is represented by a positive self-adjoint operator A from X to X*.  The
construction goes through the everywhere-defined inverse B first (the
Riesz solve f with (v, x) = [f, x]), then inverts it, so the bounded
inverse path is exercised rather than bypassed.  ||B|| <= 1/gamma comes
out as a checked residual, exactly for p = 2 and against the
equivalence-scaled bound otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import series
from .duality import (
    DENSE, FROM_DUAL, SEQUENCE, TO_DUAL, DenseOperator, DualityPair,
    Functional, Vector, operator_norm,
)
from .errors import BackendMismatch, LowerBoundError, NotPositive, Uncertifiable
from .linalg import (
    assert_hermitian, gram_inner, min_eigenvalue, relative_residual,
    smallest_generalized_eig,
)

CLOSED_AUTOMATIC = "lower-bound-automatic"
CLOSED_SEQUENTIAL = "sequential"


@dataclass(frozen=True, eq=False)
class SesquilinearForm:
    """Hermitian form on a domain subspace, stored through its gram.

    ``gram[i, j] = t(b_i, b_j)`` with the domain basis as columns of
    ``basis_mat``.  Sequence-backend forms are diagonal with a weight
    generator instead.  ``closedness`` names the certificate kind; in the
    dense backend with positive lower bound it is automatic.
    """

    backend: str
    basis_mat: np.ndarray | None = None
    gram: np.ndarray | None = None
    diagonal: series.Rule | None = None
    symmetric: bool = True
    closedness: str = CLOSED_AUTOMATIC

    def __post_init__(self):
        if self.backend == DENSE:
            B = np.asarray(self.basis_mat, dtype=complex)
            G = np.asarray(self.gram, dtype=complex)
            if G.shape != (B.shape[1], B.shape[1]):
                raise ValueError("gram must be d x d for a d-column basis")
            if self.symmetric:
                assert_hermitian(G, 1e-12, "form gram")
            lam = min_eigenvalue(0.5 * (G + G.conj().T))
            if lam < -1e-12 * max(1.0, operator_norm(G)):
                raise NotPositive(f"form indefinite (eigenvalue {lam:.3e})")
            B.setflags(write=False)
            G.setflags(write=False)
            object.__setattr__(self, "basis_mat", B)
            object.__setattr__(self, "gram", G)
        elif self.backend == SEQUENCE:
            if self.diagonal is None:
                raise ValueError("sequence forms need a diagonal weight rule")
            if not self.diagonal.is_nonnegative:
                raise NotPositive("sequence form weights must be nonnegative")
        else:
            raise ValueError(f"unknown backend {self.backend!r}")

    @property
    def d(self) -> int:
        return self.basis_mat.shape[1]

    def value(self, c: np.ndarray, dcoef: np.ndarray) -> complex:
        """t(x, y) for coefficient vectors in the domain basis."""
        return gram_inner(self.gram, c, dcoef)

    def quadratic(self, c: np.ndarray) -> float:
        return float(np.real(gram_inner(self.gram, c, c)))


def form_from_gram(basis, gram, symmetric: bool = True) -> SesquilinearForm:
    B = np.asarray(basis, dtype=complex)
    if B.ndim == 1:
        B = B[:, None]
    return SesquilinearForm(DENSE, B, np.asarray(gram, dtype=complex),
                            symmetric=symmetric)


def form_of_operator(A: DenseOperator) -> SesquilinearForm:
    """The form t_A(x, y) = (Ax, y) on dom A."""
    if A.backend == SEQUENCE:
        return SesquilinearForm(SEQUENCE, diagonal=A.diagonal)
    G = A.form_gram()
    sym = bool(np.linalg.norm(G - G.conj().T) <= 1e-10 * max(1.0, operator_norm(G)))
    return SesquilinearForm(DENSE, A.basis_mat, G, symmetric=sym)


def diagonal_form(rule: series.Rule) -> SesquilinearForm:
    return SesquilinearForm(SEQUENCE, diagonal=rule)


@dataclass(frozen=True)
class LowerBoundCertificate:
    """gamma with t(x, x) >= gamma ||x||_p^2 on the form domain.

    ``exact-p2`` is tight (generalized eigensolve); ``equivalence-scaled``
    is a certified under-estimate through the l_p / l_2 norm equivalence
    with the conceded amount recorded in ``slack``.
    """

    gamma: float
    kind: str
    slack: float = 0.0
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.kind == "exact-p2" and self.detail.get("p", 2.0) != 2.0:
            raise ValueError("exact-p2 certificates require p = 2")


def equivalence_factor(n: int, p: float) -> float:
    """kappa with ||x||_2^2 >= kappa ||x||_p^2 on n coordinates."""
    return float(n) ** (-2.0 * abs(1.0 / p - 0.5))


def lower_bound(t: SesquilinearForm, dp: DualityPair) -> LowerBoundCertificate:
    """Certified gamma with t(x,x) >= gamma ||x||_p^2.

    p = 2: smallest eigenvalue of the form gram against the Euclidean
    gram of the domain basis, exact.  p != 2: the p = 2 value scaled by
    the certified norm-equivalence factor on the ambient coordinates.
    """
    if t.backend == SEQUENCE:
        gamma2 = series.rule_lower_bound(t.diagonal)
        if dp.p == 2.0:
            return LowerBoundCertificate(gamma2, "exact-p2", detail={"p": 2.0})
        raise Uncertifiable("sequence lower bounds are certified for p = 2 only")
    B = t.basis_mat
    Gq = np.conj(t.gram)          # quadratic matrix in original coefficients
    S = B.conj().T @ B
    gamma2 = smallest_generalized_eig(0.5 * (Gq + Gq.conj().T), S)
    if gamma2 < -1e-12 * max(1.0, operator_norm(t.gram)):
        raise NotPositive(f"form indefinite (gamma {gamma2:.3e})")
    gamma2 = max(gamma2, 0.0)
    if dp.p == 2.0:
        return LowerBoundCertificate(gamma2, "exact-p2", detail={"p": 2.0})
    kappa = equivalence_factor(dp.n, dp.p)
    gamma_p = gamma2 * kappa
    return LowerBoundCertificate(gamma_p, "equivalence-scaled",
                                 slack=gamma2 - gamma_p,
                                 detail={"p": dp.p, "kappa": kappa,
                                         "gamma_p2": gamma2})


@dataclass(frozen=True, eq=False)
class RepresentationResult:
    """Output of the representation theorem: A with bounded inverse B."""

    A: DenseOperator
    B: DenseOperator
    gamma: float
    lower_certificate: LowerBoundCertificate
    residuals: dict

    @property
    def b_norm(self) -> float:
        return self.residuals["b_norm"]


def _solve_chol(H: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    c, low = scipy.linalg.cho_factor(H)
    return scipy.linalg.cho_solve((c, low), rhs)


def riesz_coefficients(t: SesquilinearForm, v_coords: np.ndarray) -> np.ndarray:
    """Coefficients of f with (v, x) = [f, x] for all x in the domain."""
    B = t.basis_mat
    rhs = B.conj().T @ v_coords
    Gt = t.gram.T.copy()
    return _solve_chol(Gt, rhs)


def riesz_solve(t: SesquilinearForm, v: Functional, dp: DualityPair) -> Vector:
    """The Riesz representer f of (v, .) inside the form domain."""
    cert = lower_bound(t, dp)
    if cert.gamma <= 0:
        raise LowerBoundError("riesz solve needs a positive lower bound")
    coef = riesz_coefficients(t, v.coords)
    f = t.basis_mat @ coef
    # defining identity on the basis: (v, b_j) = [f, b_j]
    for j in range(t.d):
        lhs = complex(np.vdot(t.basis_mat[:, j], v.coords))
        rhs = gram_inner(t.gram, coef, np.eye(t.d)[j])
        if abs(lhs - rhs) > 1e-10 * max(1.0, abs(lhs)):
            raise ArithmeticError("riesz identity violated beyond tolerance")
    return Vector(f, DENSE)


def associated_operator(t: SesquilinearForm, dp: DualityPair) -> RepresentationResult:
    """Representing operator of a symmetric positive form with gamma > 0.

    Returns A (positive, self-adjoint, dom A the effective closure of the
    form domain) together with the everywhere-defined bounded inverse B,
    with the identity and norm residuals recorded.
    """
    if t.backend != DENSE:
        raise BackendMismatch("the representation route is dense-backend only")
    if not t.symmetric:
        raise NotPositive("form must be symmetric")
    cert = lower_bound(t, dp)
    if cert.gamma <= 0.0:
        raise LowerBoundError(f"lower bound gamma = {cert.gamma:.3e} is not positive")
    B = t.basis_mat
    Gt = t.gram.T            # conj(gram) for Hermitian grams
    Sb = B.conj().T @ B
    # B: X* -> X, everywhere defined on the effective dual, f = R v
    R = B @ _solve_chol(Gt, B.conj().T)
    # A: action on the domain basis column j is  B (B^H B)^-1 G^T e_j
    Z = B @ np.linalg.solve(Sb, Gt)
    A = DenseOperator(DENSE, TO_DUAL, B, Z)
    Bop = DenseOperator(DENSE, FROM_DUAL, B, R @ B)

    P = A.effective_projector()
    M_A = A.canonical_matrix()
    scale = max(operator_norm(M_A), operator_norm(R), 1.0)
    ab_res = relative_residual(operator_norm(M_A @ R - P), [scale])
    ba_res = relative_residual(operator_norm(R @ M_A @ P - P), [scale])
    sa_res = relative_residual(operator_norm(P @ M_A - (P @ M_A).conj().T),
                               [operator_norm(M_A), 1.0])
    bnorm = _b_operator_norm(R, dp)
    residuals = {
        "ab_identity": ab_res,
        "ba_identity": ba_res,
        "selfadjoint": sa_res,
        "b_norm": bnorm,
        "b_norm_bound": bnorm - 1.0 / cert.gamma,
        "b_positive": max(0.0, -min_eigenvalue(0.5 * (R + R.conj().T))),
    }
    if ab_res > 1e-10 or ba_res > 1e-10:
        raise ArithmeticError(f"inverse identities violated: {residuals}")
    bound = 1.0 / cert.gamma
    if bnorm > bound * (1.0 + 1e-8) + 1e-8:
        raise ArithmeticError(
            f"||B|| = {bnorm:.12g} exceeds 1/gamma = {bound:.12g}")
    return RepresentationResult(A, Bop, cert.gamma, cert, residuals)


def _b_operator_norm(R: np.ndarray, dp: DualityPair) -> float:
    """Norm of B as a map (X*, q) -> (X, p); spectral norm for p = 2,
    a certified over-estimate through norm equivalence otherwise."""
    s = operator_norm(R)
    if dp.p == 2.0:
        return s
    n = dp.n
    kappa_out = n ** max(0.0, 1.0 / dp.p - 0.5)   # ||.||_p <= k ||.||_2
    kappa_in = n ** max(0.0, 0.5 - 1.0 / dp.q)    # ||.||_2 <= k ||.||_q
    return s * kappa_out * kappa_in


def inverse_selfadjoint(B: DenseOperator, dp: DualityPair) -> DenseOperator:
    """Inverse of a bounded injective self-adjoint B: X* -> X.

    The result A = B^-1 has dom A = ran B; its self-adjointness is
    verified through the adjoint construction before returning.
    """
    from .duality import adjoint  # local to avoid cycle at import time

    if B.backend != DENSE:
        raise BackendMismatch("inverse construction is dense-backend only")
    if B.direction != FROM_DUAL:
        raise ValueError("B must map X* to X")
    if not B.is_full_domain():
        raise ValueError("B must be everywhere defined (bounded)")
    M = B.canonical_matrix()
    smin = float(np.linalg.svd(M, compute_uv=False)[-1])
    if smin <= 1e-12 * max(1.0, operator_norm(M)):
        raise ValueError(f"B not injective (smallest singular value {smin:.3e})")
    sa = relative_residual(operator_norm(M - M.conj().T), [operator_norm(M), 1.0])
    if sa > 1e-10:
        raise ValueError(f"B not self-adjoint (residual {sa:.3e})")
    # dom A = ran B: swap basis and action
    A = DenseOperator(DENSE, TO_DUAL, B.action_mat, B.basis_mat)
    M_A = A.effective_matrix()
    adj_res = relative_residual(
        operator_norm(adjoint(A).effective_matrix() - M_A), [operator_norm(M_A), 1.0])
    if adj_res > 1e-10:
        raise ArithmeticError(f"inverse failed self-adjointness check ({adj_res:.3e})")
    comp = relative_residual(operator_norm(M_A @ M - A.effective_projector()),
                             [operator_norm(M_A), 1.0])
    if comp > 1e-10:
        raise ArithmeticError(f"A o B != id (residual {comp:.3e})")
    return A
