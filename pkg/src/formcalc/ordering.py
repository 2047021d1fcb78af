"""Factorization A = JJ*, the form of A on X, and the induced order.

The auxiliary space H_A is built from the pre-inner product
[Ax, Ay] = (Ax, y) on ran A; its gram over the domain basis is exactly
the form gram of A, and the kernel is quotiented away by pivoted
Cholesky.  The value of the form of A at y,

    sup { |(Ax, y)|^2 : x in dom A, (Ax, x) <= 1 },

reduces in the dense backend to a weighted least-squares solve (the
constrained maximization is kept as a cross-check oracle, not the
primary path).  On the sequence backend the value is a certified series
with tail or divergence certificate.

Orderings are probe-based: a verdict certifies the relation over the
probe set and says so in the report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import series
from .duality import (
    DENSE, SEQUENCE, DenseOperator, DualityPair, Vector, operator_norm,
)
from .errors import BackendMismatch, NotPositive
from .linalg import gram_inner, hermitian_residual, pivoted_cholesky, rank_of


@dataclass(frozen=True, eq=False)
class FactorizationResult:
    """H_A (gram over the pivot basis of ran A), J and the JJ* check."""

    operator: DenseOperator
    pivots: np.ndarray
    gram: np.ndarray            # K_r = form gram restricted to pivots
    rank: int
    extension_residual: float   # JJ* against A on the domain basis
    details: dict = field(default_factory=dict)

    def jstar_coefficients(self, y: np.ndarray) -> np.ndarray:
        """Coefficients of J* y in the pivot basis {A b_p} of H_A."""
        A = self.operator
        rhs = np.array([np.vdot(y, A.action_mat[:, p]) for p in self.pivots])
        d_conj = np.linalg.solve(self.gram, rhs)
        return np.conj(d_conj)

    def h_inner(self, c: np.ndarray, d: np.ndarray) -> complex:
        return gram_inner(self.gram, c, d)


def factorize(A: DenseOperator) -> FactorizationResult:
    """Auxiliary-space factorization of a positive symmetric operator.

    Builds the gram [A b_i, A b_j] = (A b_i, b_j), quotients the kernel
    by pivoted Cholesky (threshold 1e-10 times the action scale) and
    verifies that JJ* extends A; for everywhere-defined dense operators
    the two agree exactly.
    """
    if A.backend != DENSE:
        raise BackendMismatch("factorization is a dense-backend construction")
    F = A.form_gram()
    herm = hermitian_residual(F)
    if herm > 1e-10:
        raise NotPositive(f"operator form not symmetric (residual {herm:.3e})")
    quad = np.conj(F)
    lam_min = float(scipy.linalg.eigvalsh(0.5 * (quad + quad.conj().T))[0])
    if lam_min < -1e-12 * max(1.0, operator_norm(F)):
        raise NotPositive(f"operator not positive (eigenvalue {lam_min:.3e})")
    scale = max(operator_norm(A.action_mat), 1e-300)
    L, piv, rank = pivoted_cholesky(quad, tol=1e-10 * scale)
    pivots = piv[:rank]
    K_r = F[np.ix_(pivots, pivots)]
    action_rank = rank_of(A.action_mat)
    res = FactorizationResult(A, pivots, K_r, rank, 0.0,
                              {"action_rank": action_rank,
                               "rank_gap": abs(action_rank - rank)})
    worst = 0.0
    for j in range(A.d):
        z = A.action_mat[:, j]
        c = res.jstar_coefficients(A.basis_mat[:, j])
        z_jj = A.action_mat[:, pivots] @ c
        worst = max(worst, float(np.linalg.norm(z_jj - z)) / scale)
    object.__setattr__(res, "extension_residual", worst)
    if worst > 1e-10:
        raise ArithmeticError(f"JJ* does not reproduce A (residual {worst:.3e})")
    return res


@dataclass(frozen=True)
class FormValue:
    """Value of the form of A at y: finite with witness, or +inf with a
    divergence certificate."""

    value: float
    witness: np.ndarray | None = None
    kind: str = "exact-eigensolve"       # | "grid" | "tail-sum" | "tail-divergence"
    certificate: dict = field(default_factory=dict)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


def form_on_X(A: DenseOperator, y: Vector) -> FormValue:
    """sup |(Ax, y)|^2 over (Ax, x) <= 1, certified.

    Dense backend: exact reduction through the A-weighted least-squares
    solve (Cauchy-Schwarz saturates; the eigensolve cross-check lives in
    the verification suites).  Sequence backend, diagonal generator a_n:
    the certified series sum a_n |y_n|^2, or +inf with a divergence
    record.
    """
    if A.backend == SEQUENCE:
        return _form_sequence(A, y)
    F = A.form_gram()
    quad = np.conj(F)
    w = A.action_mat.conj().T @ y.coords          # w_j = conj((A b_j, y))
    lam, V = scipy.linalg.eigh(0.5 * (quad + quad.conj().T))
    lam_max = max(float(lam[-1]), 1e-300)
    t = V.conj().T @ w
    live = lam > 1e-12 * lam_max
    dead_mass = float(np.linalg.norm(t[~live]))
    if dead_mass > 1e-8 * max(1.0, float(np.linalg.norm(t))):
        return FormValue(math.inf, None, "tail-divergence",
                         {"kind": "kernel-escape", "mass": dead_mass})
    value = float(np.sum(np.abs(t[live]) ** 2 / lam[live]))
    cstar = V[:, live] @ (t[live] / lam[live])
    witness = A.basis_mat @ cstar
    return FormValue(value, witness, "exact-eigensolve",
                     {"spectrum_floor": float(lam[0])})


def _form_sequence(A: DenseOperator, y: Vector) -> FormValue:
    if not A.diagonal.is_nonnegative:
        raise NotPositive("sequence form values need nonnegative generators")
    if y.tail is None:
        ns = np.arange(1, y.n + 1)
        vals = np.real(A.diagonal(ns))
        value = float(vals @ np.abs(y.coords) ** 2)
        return FormValue(value, y.coords, "tail-sum", {"tail": 0.0})
    rule = A.diagonal * y.tail.abs_square()
    ok, cert = series.decide_summable(rule)
    if not ok:
        return FormValue(math.inf, None, "tail-divergence", cert.as_dict())
    return FormValue(float(np.real(cert.value)), None, "tail-sum",
                     cert.certificate.as_dict())


def in_dom_Jstar(A: DenseOperator, y: Vector) -> bool:
    """Membership in dom J_A*: the form of A at y is finite."""
    return form_on_X(A, y).finite


def form_oracle_eigensolve(A: DenseOperator, y: Vector) -> float:
    """Constrained-maximization oracle: the largest generalized eigenvalue
    of the pencil (w w^H, form gram), solved by the LAPACK generalized
    path rather than the reduction used in form_on_X."""
    F = A.form_gram()
    quad = 0.5 * (np.conj(F) + F.T)
    w = A.action_mat.conj().T @ y.coords
    lam, V = scipy.linalg.eigh(quad)
    keep = lam > 1e-12 * max(float(lam[-1]), 1e-300)
    Vr = V[:, keep]
    quad_r = Vr.conj().T @ quad @ Vr
    wr = Vr.conj().T @ w
    vals = scipy.linalg.eigh(np.outer(wr, wr.conj()), quad_r, eigvals_only=True)
    return float(vals[-1])


@dataclass(frozen=True)
class ProbeRecord:
    label: str
    value_a: float
    value_b: float


@dataclass(frozen=True, eq=False)
class OrderingReport:
    verdict: str                       # "A>=B" | "B>=A" | "equal" | "incomparable"
    probes: tuple[ProbeRecord, ...]
    domain_inclusion: dict
    rel_slack: float

    def consistent(self) -> bool:
        ge = _all_ge([p.value_a for p in self.probes],
                     [p.value_b for p in self.probes], self.rel_slack)
        le = _all_ge([p.value_b for p in self.probes],
                     [p.value_a for p in self.probes], self.rel_slack)
        expected = {"A>=B": ge, "B>=A": le, "equal": ge and le,
                    "incomparable": not ge and not le}
        return expected[self.verdict]


def _ge(u: float, v: float, slack: float) -> bool:
    if math.isinf(u):
        return True
    if math.isinf(v):
        return False
    return u >= v - slack * max(abs(u), abs(v), 1.0)


def _all_ge(us, vs, slack):
    return all(_ge(u, v, slack) for u, v in zip(us, vs))


def compare(A: DenseOperator, B: DenseOperator, samples: list[Vector],
            rel_slack: float = 1e-9, seed: int = 0) -> OrderingReport:
    """Probe-based verdict for the order by form domination.

    Probes are the supplied samples plus structured ones: both domain
    bases, seeded random unit vectors and the eigenvectors of the
    difference of the effective matrices (adversarial directions).  The
    verdict is certified over this probe set only.
    """
    if A.backend != B.backend:
        raise BackendMismatch("operands on different backends")
    if A.backend == DENSE and A.n != B.n:
        raise BackendMismatch("operands on different ambient dimensions")
    probes: list[tuple[str, Vector]] = [(f"sample:{i}", s)
                                        for i, s in enumerate(samples)]
    if A.backend == DENSE:
        n = A.n
        rng = np.random.default_rng(seed)
        for j in range(A.d):
            probes.append((f"basisA:{j}", Vector(A.basis_mat[:, j])))
        for j in range(B.d):
            probes.append((f"basisB:{j}", Vector(B.basis_mat[:, j])))
        for k in range(max(4, n)):
            z = rng.normal(size=n) + 1j * rng.normal(size=n)
            probes.append((f"random:{k}", Vector(z / np.linalg.norm(z))))
        D = A.effective_matrix() - B.effective_matrix()
        _, V = scipy.linalg.eigh(0.5 * (D + D.conj().T))
        for k in range(V.shape[1]):
            probes.append((f"adversarial:{k}", Vector(V[:, k])))
    else:
        for k in range(4):
            c = np.zeros(8, dtype=complex)
            c[k] = 1.0
            probes.append((f"basis:{k}", Vector(c, SEQUENCE)))
    records = []
    dom_fwd, dom_bwd = True, True
    for label, y in probes:
        fa, fb = form_on_X(A, y), form_on_X(B, y)
        records.append(ProbeRecord(label, fa.value, fb.value))
        if fa.finite and not fb.finite:
            dom_bwd = False     # y in dom J_A* but escapes dom J_B*
        if fb.finite and not fa.finite:
            dom_fwd = False
    ge = _all_ge([r.value_a for r in records], [r.value_b for r in records],
                 rel_slack)
    le = _all_ge([r.value_b for r in records], [r.value_a for r in records],
                 rel_slack)
    # domain inclusion for A >= B means dom J_A* inside dom J_B*
    ge = ge and dom_bwd
    le = le and dom_fwd
    if ge and le:
        verdict = "equal"
    elif ge:
        verdict = "A>=B"
    elif le:
        verdict = "B>=A"
    else:
        verdict = "incomparable"
    return OrderingReport(verdict, tuple(records),
                          {"domain_A_le_B": dom_bwd, "domain_B_le_A": dom_fwd},
                          rel_slack)


@dataclass(frozen=True, eq=False)
class AntisymmetryReport:
    matrix_residual: float
    span_residual: float
    passed: bool


def antisymmetry_check(A: DenseOperator, B: DenseOperator,
                       report: OrderingReport) -> AntisymmetryReport:
    """Equal forms force equal operators (dense backend).

    Requires a prior ``equal`` verdict; verifies the canonical matrices
    and effective spans agree to 1e-10, mirroring the polarization
    argument (Ax, y) = [J*x, J*y] = (x, By)."""
    if report.verdict != "equal":
        raise ValueError("antisymmetry check needs an 'equal' verdict")
    if A.backend != DENSE:
        raise BackendMismatch("antisymmetry verification is dense-backend only")
    Ma, Mb = A.canonical_matrix(), B.canonical_matrix()
    scale = max(operator_norm(Ma), operator_norm(Mb), 1.0)
    m_res = float(operator_norm(Ma - Mb)) / scale
    Pa, Pb = A.effective_projector(), B.effective_projector()
    s_res = float(operator_norm(Pa - Pb))
    return AntisymmetryReport(m_res, s_res, m_res <= 1e-10 and s_res <= 1e-10)


@dataclass(frozen=True, eq=False)
class HilbertConsistencyReport:
    worst_residual: float
    samples: int
    passed: bool


def hilbert_consistency(A: DenseOperator, samples: list[Vector],
                        dp: DualityPair, tol: float = 1e-8) -> HilbertConsistencyReport:
    """For p = 2 the form of A at y equals ||A^(1/2) y||^2.

    The square root comes from the eigendecomposition of the effective
    matrix; y is projected on the effective span on both sides.
    """
    if dp.p != 2.0:
        raise ValueError("the square-root identity is a p = 2 statement")
    if A.backend != DENSE:
        raise BackendMismatch("dense backend only")
    M = A.effective_matrix()
    M = 0.5 * (M + M.conj().T)
    lam, V = scipy.linalg.eigh(M)
    if float(lam[0]) < -1e-12 * max(float(abs(lam[-1])), 1.0):
        raise NotPositive("operator must be positive semidefinite")
    lam = np.where(lam > 1e-14 * max(float(lam[-1]), 1e-300), lam, 0.0)
    root = V @ np.diag(np.sqrt(lam)) @ V.conj().T
    P = A.effective_projector()
    worst = 0.0
    for y in samples:
        yp = P @ y.coords
        lhs = form_on_X(A, Vector(yp)).value
        rhs = float(np.linalg.norm(root @ yp) ** 2)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0))
    return HilbertConsistencyReport(worst, len(samples), worst <= tol)
