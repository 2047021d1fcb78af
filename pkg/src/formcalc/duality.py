"""Duality pairs, vectors, functionals, dense operators and adjoints.

The pairing convention is fixed once and for all as

    (v, x) = sum_i v_i * conj(x_i)

(linear in the functional, conjugate linear in the vector), which makes
self-adjointness of a full-domain operator the same as Hermitian-ness of
its coordinate matrix.

Two backends exist.  The dense backend is exact finite-dimensional
algebra on C^n; a proper subspace of C^n is never dense, so operators
treat the closure of their domain as the effective ambient space.
Genuinely proper dense domains live on the sequence backend, which is
restricted to diagonal operators with power-geometric coefficient
generators so that every tail admits a certificate (see
:mod:`formcalc.series`).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from . import series
from .errors import BackendMismatch, DomainError, Uncertifiable
from .linalg import operator_norm, relative_residual

DENSE = "dense"
SEQUENCE = "sequence"

TO_DUAL = "to-dual"      # X -> X*
FROM_DUAL = "from-dual"  # X* -> X
ENDO = "endo"            # X -> X

DOMAIN_SPAN = "span"
DOMAIN_FINITE = "finitely-supported"
DOMAIN_MAXIMAL = "graph-summable"

#: relative tolerances for subspace / action residuals in is_extension
TOL_SUB = 1e-9
TOL_ACT = 1e-9
#: relative tolerance for exact-identity checks
TOL_EXACT = 1e-10
#: certified tail target for sequence pairings and norms
TOL_TAIL = 1e-12


@dataclass(frozen=True)
class DualityPair:
    """A reflexive coordinate space X with its conjugate dual X*.

    ``p`` in (1, inf) is the norm exponent of X; the dual exponent q with
    1/p + 1/q = 1 is derived, never stored.  The dense backend carries an
    ambient dimension, the sequence backend a working truncation plus the
    kind of tail certificate its generators must admit.
    """

    backend: str
    p: float
    dim: int | None = None
    truncation: int | None = None
    tail_certificates: str = "power-geometric"

    def __post_init__(self):
        if self.backend not in (DENSE, SEQUENCE):
            raise ValueError(f"unknown backend {self.backend!r}")
        if not (1.0 < self.p < np.inf):
            raise ValueError("norm exponent must lie in (1, inf)")
        if self.backend == DENSE and (self.dim is None or self.dim < 1):
            raise ValueError("dense backend needs ambient dimension >= 1")
        if self.backend == SEQUENCE and (self.truncation is None or self.truncation < 1):
            raise ValueError("sequence backend needs truncation >= 1")

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    def dual(self) -> "DualityPair":
        return replace(self, p=self.q)

    @property
    def n(self) -> int:
        return self.dim if self.backend == DENSE else self.truncation


def dense_pair(dim: int, p: float = 2.0) -> DualityPair:
    return DualityPair(DENSE, p, dim=dim)


def sequence_pair(truncation: int, p: float = 2.0) -> DualityPair:
    return DualityPair(SEQUENCE, p, truncation=truncation)


def _as_coords(coords, n=None) -> np.ndarray:
    a = np.ascontiguousarray(coords, dtype=complex).reshape(-1)
    if not (np.all(np.isfinite(a.real)) and np.all(np.isfinite(a.imag))):
        raise ValueError("coordinates must be finite")
    if n is not None and a.size != n:
        raise ValueError(f"expected {n} coordinates, got {a.size}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Vector:
    """Element of X.  Sequence-backend vectors carry a tail descriptor:
    ``tail is None`` means exactly supported inside the truncation,
    otherwise the rule generated the coordinates and rules the tail."""

    coords: np.ndarray
    backend: str = DENSE
    tail: series.Rule | None = None

    def __post_init__(self):
        object.__setattr__(self, "coords", _as_coords(self.coords))

    @property
    def n(self) -> int:
        return self.coords.size


@dataclass(frozen=True, eq=False)
class Functional:
    """Element of X*, i.e. a conjugate linear functional in coordinates."""

    coords: np.ndarray
    backend: str = DENSE
    tail: series.Rule | None = None

    def __post_init__(self):
        object.__setattr__(self, "coords", _as_coords(self.coords))

    @property
    def n(self) -> int:
        return self.coords.size


def vector(coords, dp: DualityPair) -> Vector:
    return Vector(_as_coords(coords, dp.n), dp.backend)


def functional(coords, dp: DualityPair) -> Functional:
    return Functional(_as_coords(coords, dp.n), dp.backend)


def generated_vector(rule: series.Rule, dp: DualityPair) -> Vector:
    if dp.backend != SEQUENCE:
        raise BackendMismatch("generated vectors need the sequence backend")
    ns = np.arange(1, dp.truncation + 1)
    return Vector(rule(ns), SEQUENCE, tail=rule)


def generated_functional(rule: series.Rule, dp: DualityPair) -> Functional:
    if dp.backend != SEQUENCE:
        raise BackendMismatch("generated functionals need the sequence backend")
    ns = np.arange(1, dp.truncation + 1)
    return Functional(rule(ns), SEQUENCE, tail=rule)


def basis_vector(i: int, dp: DualityPair) -> Vector:
    e = np.zeros(dp.n, dtype=complex)
    e[i] = 1.0
    return Vector(e, dp.backend)


def basis_functional(i: int, dp: DualityPair) -> Functional:
    e = np.zeros(dp.n, dtype=complex)
    e[i] = 1.0
    return Functional(e, dp.backend)


def _check_same_backend(a, b):
    if a.backend != b.backend:
        raise BackendMismatch(f"{a.backend} vs {b.backend}")


def _tail_rule(obj) -> series.Rule | None:
    return obj.tail if obj.backend == SEQUENCE else None


def pair(v: Functional, x: Vector) -> complex:
    """The pairing (v, x) = sum_i v_i conj(x_i).

    Dense backend: exact finite sum.  Sequence backend: partial sum over
    the common truncation plus a certified tail bound below ``TOL_TAIL``
    (relative, floored at 1); fails with :class:`Uncertifiable` when the
    product tail cannot be certified.
    """
    _check_same_backend(v, x)
    if v.backend == DENSE:
        if v.n != x.n:
            raise BackendMismatch("length mismatch")
        return complex(np.vdot(x.coords, v.coords))
    n = max(v.n, x.n)
    rv, rx = _tail_rule(v), _tail_rule(x)
    ns = np.arange(1, n + 1)
    vv = v.coords if v.n == n else (rv(ns) if rv is not None else _pad(v.coords, n))
    xx = x.coords if x.n == n else (rx(ns) if rx is not None else _pad(x.coords, n))
    partial = complex(np.vdot(xx, vv))
    if rv is None or rx is None:
        return partial  # one factor exactly supported: tail is exactly zero
    prod = rv * rx.conjugate()
    tb = series.tail_bound(prod, n)
    if not np.isfinite(tb) or tb > TOL_TAIL * max(1.0, abs(partial)):
        res = series.certified_sum(prod, tol=TOL_TAIL, scale=max(1.0, abs(partial)))
        return res.value
    return partial


def _pad(coords: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=complex)
    out[:coords.size] = coords
    return out


def norm(x: Vector | Functional, p: float) -> float:
    """l_p norm of the coordinates; certified tail on the sequence backend."""
    if not (1.0 < p < np.inf):
        raise ValueError("norm exponent must lie in (1, inf)")
    head = float(np.sum(np.abs(x.coords) ** p))
    rule = _tail_rule(x)
    if x.backend == DENSE or rule is None:
        return head ** (1.0 / p)
    maj = rule.majorant()
    powered = series.Rule((series.Term(abs(maj.coef) ** p, maj.alpha * p,
                                       maj.ratio ** p, maj.start),))
    tb = series.tail_bound(powered, x.n)
    if not np.isfinite(tb) or tb > TOL_TAIL * max(1.0, head):
        raise Uncertifiable("norm tail not certifiable at the working truncation")
    return (head + tb / 2.0) ** (1.0 / p)


def dual_norm(v: Functional, dp: DualityPair) -> float:
    return norm(v, dp.q)


# ---------------------------------------------------------------------------
# dense operators


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """Operator given by a domain basis and its action on that basis.

    ``basis_mat`` holds the domain basis as columns, ``action_mat`` the
    action on each basis column (functional coordinates for X -> X*
    operators, vector coordinates otherwise).  Sequence-backend operators
    are diagonal with a coefficient generator and one of two domain
    rules: all finitely supported vectors, or the maximal graph domain
    {y : sum |a_n y_n|^2 certified finite}.
    """

    backend: str
    direction: str = TO_DUAL
    basis_mat: np.ndarray | None = None
    action_mat: np.ndarray | None = None
    diagonal: series.Rule | None = None
    domain_rule: str = DOMAIN_SPAN
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.backend == DENSE:
            B = np.asarray(self.basis_mat, dtype=complex)
            Z = np.asarray(self.action_mat, dtype=complex)
            if B.ndim != 2 or Z.shape != B.shape[:1] + B.shape[1:]:
                raise ValueError("basis and action must be matching n x d matrices")
            if B.shape[1] == 0 or np.linalg.matrix_rank(B, tol=1e-9 * max(
                    1.0, operator_norm(B))) < B.shape[1]:
                raise DomainError("domain basis is not linearly independent")
            B.setflags(write=False)
            Z.setflags(write=False)
            object.__setattr__(self, "basis_mat", B)
            object.__setattr__(self, "action_mat", Z)
        elif self.backend == SEQUENCE:
            if self.diagonal is None:
                raise ValueError("sequence operators need a diagonal generator")
            if self.domain_rule not in (DOMAIN_FINITE, DOMAIN_MAXIMAL):
                raise ValueError("sequence domain must be finitely-supported "
                                 "or graph-summable")
        else:
            raise ValueError(f"unknown backend {self.backend!r}")

    # -- dense backend views ------------------------------------------------

    @property
    def n(self) -> int:
        return self.basis_mat.shape[0]

    @property
    def d(self) -> int:
        return self.basis_mat.shape[1]

    @property
    def domain_basis(self) -> tuple:
        cls = Functional if self.direction == FROM_DUAL else Vector
        return tuple(cls(self.basis_mat[:, j], self.backend) for j in range(self.d))

    @property
    def action(self) -> tuple:
        cls = Functional if self.direction == TO_DUAL else Vector
        return tuple(cls(self.action_mat[:, j], self.backend) for j in range(self.d))

    def coefficients_of(self, x: np.ndarray, rtol: float = TOL_SUB) -> np.ndarray:
        """Coefficients of x in the domain basis; DomainError when x is
        outside the span beyond ``rtol``."""
        c, *_ = np.linalg.lstsq(self.basis_mat, x, rcond=None)
        res = np.linalg.norm(self.basis_mat @ c - x)
        if res > rtol * max(np.linalg.norm(x), 1e-300):
            raise DomainError(f"vector outside the operator domain (residual {res:.3e})")
        return c

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.action_mat @ self.coefficients_of(x)

    def canonical_matrix(self) -> np.ndarray:
        """Matrix acting on the domain span (zero on its complement)."""
        B, Z = self.basis_mat, self.action_mat
        Gb = B.conj().T @ B
        return Z @ np.linalg.solve(Gb, B.conj().T)

    def effective_projector(self) -> np.ndarray:
        Q = scipy.linalg.orth(self.basis_mat)
        return Q @ Q.conj().T

    def effective_matrix(self) -> np.ndarray:
        """Canonical matrix with the action restricted to the effective
        ambient space (functionals identified by their restriction)."""
        P = self.effective_projector()
        return P @ self.canonical_matrix()

    def form_gram(self) -> np.ndarray:
        """G[i, j] = (A b_i, b_j) in the fixed pairing convention."""
        return (self.basis_mat.conj().T @ self.action_mat).T

    def is_full_domain(self) -> bool:
        return self.backend == DENSE and self.d == self.n

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        if self.backend == SEQUENCE:
            vals = self.diagonal(np.arange(1, 65))
            return bool(np.max(np.abs(vals.imag)) <= tol * max(
                1.0, float(np.max(np.abs(vals)))))
        G = self.form_gram()
        scale = max(operator_norm(G), 1e-300)
        return bool(np.linalg.norm(G - G.conj().T) <= tol * scale)


def operator_from_matrix(M, dp: DualityPair, direction: str = TO_DUAL) -> DenseOperator:
    M = np.asarray(M, dtype=complex)
    return DenseOperator(DENSE, direction, np.eye(M.shape[0], dtype=complex), M)


def restricted_operator(M, basis, dp: DualityPair, direction: str = TO_DUAL) -> DenseOperator:
    """Operator with the given domain basis acting through matrix M."""
    M = np.asarray(M, dtype=complex)
    B = np.asarray(basis, dtype=complex)
    if B.ndim == 1:
        B = B[:, None]
    return DenseOperator(DENSE, direction, B, M @ B)


def diagonal_operator(rule: series.Rule, dp: DualityPair,
                      domain_rule: str = DOMAIN_FINITE,
                      direction: str = TO_DUAL) -> DenseOperator:
    if dp.backend != SEQUENCE:
        raise BackendMismatch("diagonal generators need the sequence backend")
    return DenseOperator(SEQUENCE, direction, diagonal=rule, domain_rule=domain_rule)


def identity_operator(dp: DualityPair, direction: str = TO_DUAL) -> DenseOperator:
    if dp.backend == DENSE:
        return operator_from_matrix(np.eye(dp.dim), dp, direction)
    return diagonal_operator(series.constant(1.0), dp, DOMAIN_MAXIMAL, direction)


def adjoint(A: DenseOperator) -> DenseOperator:
    """Adjoint with respect to the pairing: (Ax, y) = (x, A* y).

    Dense backend: the effective matrix of A* is the conjugate transpose
    of the effective matrix of A (the domain is dense in its closure by
    the effective-ambient convention).  Sequence backend: conjugated
    generator on the same domain rule.
    """
    if A.backend == SEQUENCE:
        return replace(A, diagonal=A.diagonal.conjugate())
    if A.direction == ENDO:
        raise DomainError("adjoint of an X -> X endomorphism lives on X*; "
                          "use its conjugate-transpose matrix directly")
    Q = scipy.linalg.orth(A.basis_mat)
    M_eff = A.effective_matrix()
    return DenseOperator(DENSE, A.direction, Q, M_eff.conj().T @ Q)


def is_extension(S: DenseOperator, T: DenseOperator,
                 tol_sub: float = TOL_SUB, tol_act: float = TOL_ACT) -> bool:
    """True iff T extends S: dom S inside dom T (residual <= tol_sub,
    relative) and the actions agree there (residual <= tol_act, scaled by
    the operator norms).  Never raises; any failure is False."""
    if S.backend != T.backend or S.direction != T.direction:
        return False
    if S.backend == SEQUENCE:
        if not series.rules_agree(S.diagonal, T.diagonal):
            return False
        order = {DOMAIN_FINITE: 0, DOMAIN_MAXIMAL: 1}
        return order[S.domain_rule] <= order[T.domain_rule]
    if S.n != T.n:
        return False
    Bt, Zt = T.basis_mat, T.action_mat
    scale_act = max(operator_norm(T.action_mat), operator_norm(S.action_mat), 1e-300)
    for j in range(S.d):
        s = S.basis_mat[:, j]
        z = S.action_mat[:, j]
        ns = np.linalg.norm(s)
        if ns == 0.0:
            return False
        c, *_ = np.linalg.lstsq(Bt, s, rcond=None)
        if np.linalg.norm(Bt @ c - s) > tol_sub * ns:
            return False
        if np.linalg.norm(Zt @ c - z) > tol_act * scale_act * max(
                1.0, float(np.linalg.norm(c))):
            return False
    return True


def graph_domain_contains(A: DenseOperator, y: Vector) -> bool:
    """Membership in the maximal graph domain of a diagonal operator:
    sum |a_n y_n|^2 certified finite.  Exactly supported vectors always
    belong; raises :class:`Uncertifiable` outside the rule class."""
    if A.backend != SEQUENCE:
        raise BackendMismatch("graph domains are a sequence-backend notion")
    if y.tail is None:
        return True
    rule = A.diagonal.abs_square() * y.tail.abs_square()
    return series.rule_convergent(rule)


def selfadjointness_residual(A: DenseOperator) -> float:
    if A.backend == SEQUENCE:
        vals = A.diagonal(np.arange(1, 65))
        return relative_residual(np.max(np.abs(vals.imag)),
                                 [np.max(np.abs(vals)), 1.0])
    M = A.effective_matrix()
    return relative_residual(np.linalg.norm(M - M.conj().T), [operator_norm(M), 1.0])
