"""Form sums, joint factorization and lifted commutants.

The form sum of a positive self-adjoint A with positive lower bound and
an operator B associated to a closed positive form represents t_A + t_B
on dom J_A* intersected with dom t_B.  The joint factor
J : H_A (+) H_B -> X*, J(Ax (+) By) = Ax + By, satisfies J** J* equal to
the form sum and extends A + B; both facts are verified numerically on
every construction.

A bounded E on X that leaves dom A invariant and intertwines through
E^H A contained in A E lifts to a bounded operator on H_A acting by
A x -> A E x.  The lift is self-adjoint in the H_A inner product, obeys
the spectral-radius bound, and its spectrum sits inside the real part of
the spectrum of E; all three claims are checked with residual records,
plus the resolvent identity at sampled real points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import series
from .duality import (
    DENSE, DOMAIN_MAXIMAL, ENDO, SEQUENCE, DenseOperator, DualityPair, Vector,
    diagonal_operator, operator_from_matrix, operator_norm,
)
from .errors import BackendMismatch, DomainError, LowerBoundError, NotPositive
from .forms import (
    CLOSED_AUTOMATIC, CLOSED_SEQUENTIAL, SesquilinearForm, associated_operator,
    form_from_gram, form_of_operator, lower_bound,
)
from .linalg import gram_inner, relative_residual
from .ordering import FactorizationResult, factorize


# ---------------------------------------------------------------------------
# closedness in the general sense


@dataclass(frozen=True)
class RunRecord:
    schedule: tuple[int, ...]
    tails: tuple[float, ...]          # t(x - x_k, x - x_k), certified
    contraction: tuple[float, ...]
    limit_in_domain: bool


@dataclass(frozen=True, eq=False)
class ClosednessWitness:
    kind: str                         # lower-bound-automatic | sequential
    runs: tuple[RunRecord, ...] = ()


def is_closed(t: SesquilinearForm, runs: list[Vector] | None,
              dp: DualityPair) -> ClosednessWitness:
    """Closedness certificate for a positive form.

    Dense backend with positive lower bound: automatic (the graph norm is
    complete in finite dimension).  Sequence backend: each supplied run
    is a generator-ruled limit vector; its truncations must be Cauchy in
    the form with certified contracting tails and the limit must satisfy
    the domain rule.  A run whose tails fail to contract is rejected.
    """
    if t.backend == DENSE:
        cert = lower_bound(t, dp)
        if cert.gamma <= 0:
            raise LowerBoundError("automatic closedness needs gamma > 0")
        return ClosednessWitness(CLOSED_AUTOMATIC)
    if not runs:
        return ClosednessWitness(CLOSED_SEQUENTIAL, ())
    records = []
    for x in runs:
        if x.tail is None:
            records.append(RunRecord((x.n,), (0.0,), (), True))
            continue
        weight = t.diagonal * x.tail.abs_square()
        ok, cert = series.decide_summable(weight)
        if not ok:
            raise DomainError(
                "run is not form-Cauchy: its truncation tails diverge")
        schedule = tuple(2 ** k for k in range(2, 13))
        tails = tuple(series.tail_bound(weight, k) for k in schedule)
        contraction = tuple(tails[i + 1] / tails[i]
                            for i in range(len(tails) - 1) if tails[i] > 0)
        if any(r >= 1.0 for r in contraction[-10:]):
            raise DomainError("form-Cauchy tails do not contract")
        records.append(RunRecord(schedule, tails, contraction, True))
    return ClosednessWitness(CLOSED_SEQUENTIAL, tuple(records))


# ---------------------------------------------------------------------------
# form sum


@dataclass(frozen=True, eq=False)
class FormSumResult:
    operator: DenseOperator            # A (+) B
    gamma: float
    density_record: dict
    extension_residual: float          # against A + B on dom A and dom B
    collapse_exact: bool               # full domains: A (+) B == A + B
    details: dict = field(default_factory=dict)


def _dense_gamma(A: DenseOperator, dp: DualityPair) -> float:
    return lower_bound(form_of_operator(A), dp).gamma


def form_sum(A: DenseOperator, B: DenseOperator, dp: DualityPair,
             closedness: ClosednessWitness | None = None) -> FormSumResult:
    """The operator representing t_A + t_B.

    Dense backend: requires gamma_A > 0 with A effectively everywhere
    defined, B associated to a closed positive form on its span; the sum
    form lives on dom t_B and the representation theorem applies.  With
    both domains full the result collapses to the exact matrix sum.
    Sequence backend: diagonal rules add, the domain rule is the graph
    rule of the summed generator.
    """
    if A.backend != B.backend:
        raise BackendMismatch("operands on different backends")
    if A.backend == SEQUENCE:
        return _form_sum_sequence(A, B, dp)
    gamma_a = _dense_gamma(A, dp)
    if gamma_a <= 0:
        raise LowerBoundError("form sum needs a positive lower bound on A")
    if A.effective_projector().trace().real < dp.n - 1e-9:
        raise DomainError("A must be effectively everywhere defined "
                          "(its closure carries the representation)")
    if closedness is None:
        closedness = is_closed(form_of_operator(B), None, dp)
    # H_{A,B} = dom J_A* (everything here) intersected with dom t_B
    C = B.basis_mat
    density = {"dim": int(C.shape[1]), "ambient": dp.n,
               "spans_ambient": bool(C.shape[1] == dp.n)}
    if C.shape[1] == 0:
        raise DomainError("intersection domain is trivial")
    fac_a = factorize(A)
    G_sum = _aform_gram(fac_a, C) + form_of_operator(B).gram
    t_sum = form_from_gram(C, G_sum)
    rep = associated_operator(t_sum, dp)
    AB = rep.A
    # extension of A + B on dom A intersect dom B = dom t_B here
    M_AB = AB.canonical_matrix()
    M_sum = A.canonical_matrix() + B.canonical_matrix()
    worst = 0.0
    for j in range(C.shape[1]):
        z1 = M_AB @ C[:, j]
        z2 = M_sum @ C[:, j]
        worst = max(worst, float(np.linalg.norm(z1 - z2)) / max(
            operator_norm(M_sum), 1.0))
    collapse = bool(A.is_full_domain() and B.is_full_domain())
    if collapse:
        exact = float(operator_norm(M_AB - M_sum)) / max(operator_norm(M_sum), 1.0)
        if exact > 1e-12:
            raise ArithmeticError(
                f"everywhere-defined collapse violated (residual {exact:.3e})")
    if worst > 1e-10:
        raise ArithmeticError(f"form sum fails to extend A + B ({worst:.3e})")
    return FormSumResult(AB, rep.gamma, density, worst, collapse,
                         {"closedness": closedness.kind})


def _aform_gram(fac: FactorizationResult, C: np.ndarray) -> np.ndarray:
    """Gram of the form of A, t_A(u, v) = [J* u, J* v], over columns of C."""
    cols = [fac.jstar_coefficients(C[:, j]) for j in range(C.shape[1])]
    G = np.empty((C.shape[1],) * 2, dtype=complex)
    for i, ci in enumerate(cols):
        for j, cj in enumerate(cols):
            G[i, j] = gram_inner(fac.gram, ci, cj)
    return G


def _form_sum_sequence(A: DenseOperator, B: DenseOperator,
                       dp: DualityPair) -> FormSumResult:
    # diagonal generators: the summed form is closed coefficientwise and
    # the construction stays valid when the lower bound degenerates to 0
    # (covariance rules decay), so only positivity is demanded here
    if not (A.diagonal.is_nonnegative and B.diagonal.is_nonnegative):
        raise NotPositive("sequence form sums need nonnegative generators")
    rule = A.diagonal + B.diagonal
    AB = diagonal_operator(rule, dp, DOMAIN_MAXIMAL)
    # density of H_{A,B}: every finitely supported vector passes both
    # membership tests (finite sums are always certified)
    ns = np.arange(1, 9)
    probes_ok = bool(np.all(np.isfinite(np.real(A.diagonal(ns)))) and
                     np.all(np.isfinite(np.real(B.diagonal(ns)))))
    density = {"finitely_supported_pass": probes_ok}
    if not probes_ok:
        raise DomainError("density check failed on finitely supported probes")
    gam = series.rule_lower_bound(rule)
    return FormSumResult(AB, gam, density, 0.0, False, {})


# ---------------------------------------------------------------------------
# joint factorization (the two-factor identity)


@dataclass(frozen=True, eq=False)
class JointFactorization:
    formsum: FormSumResult
    fac_a: FactorizationResult
    fac_b: FactorizationResult
    jstar_residual: float              # J* z against Az (+) Bz
    composition_residual: float        # J** J* against A (+) B and A + B
    energy_residual: float             # [J* y, J* y] = ((A (+) B) y, y)


def joint_factorize(A: DenseOperator, B: DenseOperator, dp: DualityPair,
                    samples: list[Vector] | None = None,
                    seed: int = 0) -> JointFactorization:
    """Builds J on H_A (+) H_B and verifies the three factorization claims."""
    if A.backend != DENSE:
        raise BackendMismatch("joint factorization is dense-backend only")
    fs = form_sum(A, B, dp)
    fac_a, fac_b = factorize(A), factorize(B)
    rng = np.random.default_rng(seed)
    if samples is None:
        samples = [Vector(rng.normal(size=dp.n) + 1j * rng.normal(size=dp.n))
                   for _ in range(6)]
    M_AB = fs.operator.canonical_matrix()
    M_sum = A.canonical_matrix() + B.canonical_matrix()
    scale = max(operator_norm(M_sum), 1.0)
    jstar_res = comp_res = energy_res = 0.0
    P_B = B.effective_projector()
    for y in samples:
        z = P_B @ y.coords      # restrict to dom t_B, the sum domain here
        ca = fac_a.jstar_coefficients(z)
        cb = fac_b.jstar_coefficients(z)
        # J* z must be Az (+) Bz: compare in action coordinates
        az = fac_a.operator.action_mat[:, fac_a.pivots] @ ca
        bz = fac_b.operator.action_mat[:, fac_b.pivots] @ cb
        try:
            az_direct = A.apply(z)
            bz_direct = B.apply(z)
            jstar_res = max(jstar_res,
                            float(np.linalg.norm(az - az_direct)) / scale,
                            float(np.linalg.norm(bz - bz_direct)) / scale)
        except DomainError:
            pass                # z outside dom A cap dom B: J* still defined
        # J** J* z = Az + Bz extends A + B and equals the form sum
        comp_res = max(comp_res,
                       float(np.linalg.norm((az + bz) - M_AB @ z)) / scale)
        # the energy identity [J* y, J* y] = ((A (+) B) y, y)
        lhs = float(np.real(gram_inner(fac_a.gram, ca, ca) +
                            gram_inner(fac_b.gram, cb, cb)))
        rhs = float(np.real(np.vdot(z, M_AB @ z)))
        energy_res = max(energy_res, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0))
    return JointFactorization(fs, fac_a, fac_b, jstar_res, comp_res, energy_res)


# ---------------------------------------------------------------------------
# lifted commutants


@dataclass(frozen=True, eq=False)
class CommutantLift:
    E: DenseOperator
    E_hat: np.ndarray                  # matrix on the H_A pivot basis
    factorization: FactorizationResult
    spectral_radius_sq: float          # r(E^2)
    bound_margin: float                # max [E^ h]^2 / ([h]^2 r(E^2)) sampled
    norm_bound: float                  # whitened operator norm of the lift
    selfadjoint_residual: float
    eq7_residual: float


def _eq7_residual(A: DenseOperator, E_mat: np.ndarray) -> float:
    """Residual of E^H A against A E on dom A (including invariance)."""
    worst = 0.0
    scale = max(operator_norm(A.action_mat), 1.0)
    for j in range(A.d):
        b = A.basis_mat[:, j]
        try:
            lhs = E_mat.conj().T @ A.apply(b)
            rhs = A.apply(E_mat @ b)
        except DomainError:
            return math.inf
        worst = max(worst, float(np.linalg.norm(lhs - rhs)) / scale)
    return worst


def lift_commutant(A: DenseOperator, E: DenseOperator,
                   dp: DualityPair, seed: int = 0) -> CommutantLift:
    """Lift of a bounded commuting E to the auxiliary space H_A.

    Preconditions verified: E everywhere defined on X, E(dom A) inside
    dom A, and the intertwining E^H A = A E on dom A (the commutation
    identity).  The lift acts by A x -> A E x on the pivot basis; the
    spectral-radius bound, H_A self-adjointness and boundedness come back
    as residual records.
    """
    if A.backend != DENSE:
        raise BackendMismatch("commutant lifts are dense-backend only")
    if E.direction != ENDO or not E.is_full_domain():
        raise DomainError("E must be a bounded operator defined on all of X")
    E_mat = E.canonical_matrix()
    eq7 = _eq7_residual(A, E_mat)
    tol = 1e-9
    if not math.isfinite(eq7) or eq7 > tol:
        raise DomainError(
            f"commutation identity violated (residual {eq7 if math.isfinite(eq7) else 'inf'})")
    fac = factorize(A)
    piv = fac.pivots
    r = len(piv)
    # columns: coefficients of A E b_p in the pivot basis {A b_q}
    E_hat = np.empty((r, r), dtype=complex)
    for col, p in enumerate(piv):
        Eb = E_mat @ A.basis_mat[:, p]
        A.coefficients_of(Eb)          # invariance of dom A, raises otherwise
        E_hat[:, col] = fac.jstar_coefficients(Eb)
    lam_E = np.linalg.eigvals(E_mat)
    r_e2 = float(np.max(np.abs(lam_E)) ** 2) if lam_E.size else 0.0
    # spectral-radius bound sampled on random H_A elements
    rng = np.random.default_rng(seed)
    margin = 0.0
    for _ in range(24):
        c = rng.normal(size=r) + 1j * rng.normal(size=r)
        num = float(np.real(gram_inner(fac.gram, E_hat @ c, E_hat @ c)))
        den = float(np.real(gram_inner(fac.gram, c, c))) * max(r_e2, 1e-300)
        if den > 0:
            margin = max(margin, num / den)
    # whitened norm: the K quadratic is c^H conj(K) c = c^H L L^H c, so the
    # K-norm of the lift is the 2-norm of L^H E^ L^-H
    LH = scipy.linalg.cholesky(np.conj(fac.gram), lower=True).conj().T
    norm_bound = operator_norm(LH @ E_hat @ np.linalg.inv(LH))
    sa_res = relative_residual(
        np.linalg.norm(E_hat.T @ fac.gram - fac.gram @ np.conj(E_hat)),
        [np.linalg.norm(fac.gram), 1.0])
    if sa_res > 1e-10:
        raise ArithmeticError(f"lift not self-adjoint in H_A ({sa_res:.3e})")
    if margin > 1.0 + 1e-8:
        raise ArithmeticError(f"spectral-radius bound violated ({margin:.12g})")
    return CommutantLift(E, E_hat, fac, r_e2, margin, norm_bound, sa_res, eq7)


def commuting_pair(A_mat: np.ndarray, K_mat: np.ndarray,
                   dp: DualityPair) -> DenseOperator:
    """E = A^-1 K: for Hermitian K and positive definite A these are
    exactly the solutions of the commutation identity, the generator used
    by the verification suites."""
    E_mat = np.linalg.solve(A_mat, K_mat)
    return operator_from_matrix(E_mat, dp, ENDO)


@dataclass(frozen=True, eq=False)
class CommutationReport:
    lift_a: CommutantLift
    lift_b: CommutantLift
    formsum_inclusion: float      # E^H (A (+) B) against (A (+) B) E
    factor_inclusions: dict       # sampled intermediate identities
    passed: bool


def commutation_formsum(A: DenseOperator, B: DenseOperator, E: DenseOperator,
                        dp: DualityPair, seed: int = 0) -> CommutationReport:
    """Commutation survives the form sum: E^H (A+B-sum) inside (A+B-sum) E."""
    lift_a = lift_commutant(A, E, dp, seed)
    lift_b = lift_commutant(B, E, dp, seed + 1)
    if _dense_gamma(A, dp) <= 0 or _dense_gamma(B, dp) <= 0:
        raise LowerBoundError("both summands need positive lower bounds")
    fs = form_sum(A, B, dp)
    M = fs.operator.canonical_matrix()
    E_mat = E.canonical_matrix()
    scale = max(operator_norm(M), 1.0)
    incl = float(operator_norm(E_mat.conj().T @ M - M @ E_mat)) / scale
    # intermediate identities on samples: E* J = J (E^_A (+) E^_B) and
    # (E^_A (+) E^_B) J* = J* E on dom A cap dom B
    rng = np.random.default_rng(seed + 2)
    fac_a, fac_b = lift_a.factorization, lift_b.factorization
    res_j = res_jstar = 0.0
    for _ in range(6):
        ca = rng.normal(size=len(fac_a.pivots)) + 1j * rng.normal(size=len(fac_a.pivots))
        cb = rng.normal(size=len(fac_b.pivots)) + 1j * rng.normal(size=len(fac_b.pivots))
        # J applied to the pair, then E*
        jx = fac_a.operator.action_mat[:, fac_a.pivots] @ ca + \
            fac_b.operator.action_mat[:, fac_b.pivots] @ cb
        lhs = E_mat.conj().T @ jx
        rhs = fac_a.operator.action_mat[:, fac_a.pivots] @ (lift_a.E_hat @ ca) + \
            fac_b.operator.action_mat[:, fac_b.pivots] @ (lift_b.E_hat @ cb)
        res_j = max(res_j, float(np.linalg.norm(lhs - rhs)) / scale)
        z = rng.normal(size=dp.n) + 1j * rng.normal(size=dp.n)
        za = fac_a.jstar_coefficients(z)
        zb = fac_b.jstar_coefficients(z)
        lhs_a = lift_a.E_hat @ za
        lhs_b = lift_b.E_hat @ zb
        rhs_a = fac_a.jstar_coefficients(E_mat @ z)
        rhs_b = fac_b.jstar_coefficients(E_mat @ z)
        # compare in H_A / H_B energy norms
        da, db = lhs_a - rhs_a, lhs_b - rhs_b
        res_jstar = max(
            res_jstar,
            math.sqrt(abs(np.real(gram_inner(fac_a.gram, da, da)))) / scale,
            math.sqrt(abs(np.real(gram_inner(fac_b.gram, db, db)))) / scale)
    ok = incl <= 1e-9 and res_j <= 1e-9 and res_jstar <= 1e-9
    return CommutationReport(lift_a, lift_b, incl,
                             {"E_star_J": res_j, "J_star_E": res_jstar}, ok)


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    lift_eigenvalues: np.ndarray
    e_eigenvalues: np.ndarray
    max_imag: float
    max_distance: float
    resolvent_points: tuple[float, ...]
    resolvent_residual: float
    passed: bool


def spectrum_inclusion(A: DenseOperator, E: DenseOperator, dp: DualityPair,
                       seed: int = 0) -> SpectrumReport:
    """Spectrum of the lift: real, inside the spectrum of E, with the
    resolvent identity checked at three real points outside sigma(E)."""
    lift = lift_commutant(A, E, dp, seed)
    lam_hat = np.linalg.eigvals(lift.E_hat)
    lam_e = np.linalg.eigvals(E.canonical_matrix())
    scale = max(float(np.max(np.abs(lam_e))), 1.0) if lam_e.size else 1.0
    max_imag = float(np.max(np.abs(lam_hat.imag))) if lam_hat.size else 0.0
    max_dist = 0.0
    for mu in lam_hat:
        max_dist = max(max_dist, float(np.min(np.abs(lam_e - mu))))
    base = float(np.max(np.abs(lam_e))) if lam_e.size else 0.0
    points = tuple(base + k for k in (1.0, 2.0, 3.0))
    E_mat = E.canonical_matrix()
    res_res = 0.0
    for lam in points:
        R = np.linalg.inv(E_mat - lam * np.eye(dp.n))
        Rop = operator_from_matrix(R, dp, ENDO)
        lift_R = lift_commutant(A, Rop, dp, seed)
        direct = np.linalg.inv(lift.E_hat - lam * np.eye(lift.E_hat.shape[0]))
        res_res = max(res_res, float(np.linalg.norm(lift_R.E_hat - direct)) /
                      max(float(np.linalg.norm(direct)), 1.0))
    ok = (max_imag <= 1e-9 * scale and max_dist <= 1e-8 * scale and
          res_res <= 1e-8)
    return SpectrumReport(lam_hat, lam_e, max_imag, max_dist, points, res_res, ok)
