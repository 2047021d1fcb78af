"""Seeded verification batteries, one per module, with negative controls.

Each battery runs its module's invariant and property checks and returns
:class:`Report` objects tagged with claim identifiers.  Every battery
contains at least one deliberately violated instance (``control=True``)
whose verdict must be ``fail``.  Everything is deterministic given the
seed; summaries therefore omit wall times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import series
from .covariance import (
    centered, covariance_form, exp_poly_variable, exponential_space,
    finite_space, independent_sum, paired_rule_space, rule_space,
    second_moment_membership, signed_basis_variable, table_variable,
    weak_expectation,
)
from .duality import (
    DOMAIN_FINITE, ENDO, FROM_DUAL, Functional, Vector, dense_pair,
    diagonal_operator, generated_vector, is_extension, operator_from_matrix,
    sequence_pair,
)
from .elliptic import (
    convergence_table, dirichlet_vs_neumann, discrete_poincare, neumann_operator,
    problem, sobolev_lower_bound, uniform_mesh, weak_solve,
)
from .errors import FormcalcError, Uncertifiable
from .formsum import (
    commutation_formsum, commuting_pair, is_closed, joint_factorize,
    lift_commutant, spectrum_inclusion,
)
from .forms import (
    associated_operator, diagonal_form, form_from_gram, inverse_selfadjoint,
)
from .friedrichs import core_check, friedrichs, idempotent, in_extension_domain
from .ordering import (
    antisymmetry_check, compare, factorize, form_on_X, form_oracle_eigensolve,
    hilbert_consistency,
)
from .reporting import CLAIM_TAGS, Report, make_report

SUITE_NAMES = ("representation", "friedrichs", "ordering", "formsum",
               "covariance", "elliptic")


@dataclass(frozen=True, eq=False)
class SuiteResult:
    name: str
    seed: int
    reports: tuple[Report, ...]
    artifacts: dict = field(default_factory=dict)   # name -> (header, rows)

    @property
    def ok(self) -> bool:
        return all(r.as_expected for r in self.reports)

    def coverage(self) -> dict:
        cov = {tag: 0 for tag in CLAIM_TAGS}
        for r in self.reports:
            if r.passed and not r.control:
                for tag in r.claims:
                    if tag in cov:
                        cov[tag] += 1
        return cov

    def summary_dict(self) -> dict:
        """Deterministic summary: no wall times."""
        return {
            "suite": self.name,
            "seed": self.seed,
            "reports": [r.as_dict(with_time=False) for r in self.reports],
            "coverage": self.coverage(),
            "counts": {
                "total": len(self.reports),
                "passed": sum(r.verdict == "pass" for r in self.reports),
                "failed": sum(r.verdict == "fail" for r in self.reports),
                "uncertified": sum(r.verdict == "uncertified"
                                   for r in self.reports),
                "controls": sum(r.control for r in self.reports),
            },
            "ok": self.ok,
        }


def _failing(scenario, claims, exc, control=False, tol_scale=1.0) -> Report:
    uncert = isinstance(exc, Uncertifiable)
    return make_report(scenario, claims, {"raised": 1.0}, {"raised": 0.0},
                       details={"error": f"{type(exc).__name__}: {exc}"},
                       uncertified=uncert, control=control, tol_scale=tol_scale)


def _guard(scenario, claims, fn, control=False, tol_scale=1.0) -> Report:
    """Run fn() -> (residuals, tolerances, details, certificates); failures
    become fail/uncertified reports instead of raising."""
    try:
        residuals, tolerances, details, certs = fn()
    except FormcalcError as exc:
        return _failing(scenario, claims, exc, control, tol_scale)
    except (ArithmeticError, ValueError) as exc:
        return _failing(scenario, claims, exc, control, tol_scale)
    return make_report(scenario, claims, residuals, tolerances,
                       certificates=certs, details=details, control=control,
                       tol_scale=tol_scale)


def _random_hpd(rng, n, shift=0.5):
    W = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return W @ W.conj().T + shift * np.eye(n)


def _random_psd(rng, n, force_kernel=False):
    d = n - int(rng.integers(1, n)) if force_kernel and n > 1 else n
    W = rng.normal(size=(n, max(d, 1))) + 1j * rng.normal(size=(n, max(d, 1)))
    return W @ W.conj().T


# ---------------------------------------------------------------------------


def representation_suite(seed: int, tol_scale: float = 1.0) -> list[Report]:
    rng = np.random.default_rng(seed)
    reports = []

    def inverses():
        worst = {"ab_identity": 0.0, "ba_identity": 0.0, "selfadjoint": 0.0,
                 "b_norm_excess": 0.0}
        for _ in range(200):
            n = int(rng.integers(1, 13))
            rep = associated_operator(
                form_from_gram(np.eye(n), _random_hpd(rng, n)), dense_pair(n))
            worst["ab_identity"] = max(worst["ab_identity"],
                                       rep.residuals["ab_identity"])
            worst["ba_identity"] = max(worst["ba_identity"],
                                       rep.residuals["ba_identity"])
            worst["selfadjoint"] = max(worst["selfadjoint"],
                                       rep.residuals["selfadjoint"])
            worst["b_norm_excess"] = max(worst["b_norm_excess"],
                                         rep.b_norm - 1.0 / rep.gamma)
        tol = {"ab_identity": 1e-10, "ba_identity": 1e-10,
               "selfadjoint": 1e-12, "b_norm_excess": 1e-8}
        return worst, tol, {"instances": 200}, []

    reports.append(_guard("thm1-random-inverses", ["Thm1"], inverses,
                          tol_scale=tol_scale))

    def lem1():
        worst = 0.0
        for _ in range(50):
            n = int(rng.integers(1, 9))
            Bm = np.linalg.inv(_random_hpd(rng, n))
            B = operator_from_matrix(Bm, dense_pair(n), FROM_DUAL)
            A = inverse_selfadjoint(B, dense_pair(n))
            M = A.effective_matrix()
            worst = max(worst, float(np.linalg.norm(M @ Bm - np.eye(n))) /
                        max(float(np.linalg.norm(M)), 1.0))
        return ({"composition": worst}, {"composition": 1e-10},
                {"instances": 50}, [])

    reports.append(_guard("lem1-bounded-inverse", ["Lem1"], lem1,
                          tol_scale=tol_scale))

    def worked():
        rep = associated_operator(
            form_from_gram(np.eye(2), np.array([[2.0, 1j], [-1j, 2.0]])),
            dense_pair(2))
        evals = np.linalg.eigvalsh(rep.A.canonical_matrix())
        return ({"eigenvalues": float(np.linalg.norm(evals - [1.0, 3.0])),
                 "b_norm_minus_one": abs(rep.b_norm - 1.0)},
                {"eigenvalues": 1e-10, "b_norm_minus_one": 1e-10},
                {"gamma": rep.gamma}, [])

    reports.append(_guard("thm1-offdiagonal-example", ["Thm1"], worked,
                          tol_scale=tol_scale))

    def control():
        associated_operator(form_from_gram(np.eye(2), np.diag([1.0, -1.0])),
                            dense_pair(2))
        return {}, {}, {}, []

    reports.append(_guard("control-indefinite-form", ["Thm1"], control,
                          control=True, tol_scale=tol_scale))
    return reports


def friedrichs_suite(seed: int, tol_scale: float = 1.0) -> list[Report]:
    sp = sequence_pair(64)
    reports = []
    generators = [("square", series.polynomial(2.0), 1.0, 2.0),
                  ("exponential", series.geometric(math.e), math.e, 1.0),
                  ("geometric-2", series.geometric(2.0), 2.0, 0.5)]
    for name, rule, gamma, in_decay in generators:
        def one(rule=rule, gamma=gamma, in_decay=in_decay):
            a = diagonal_operator(rule, sp, DOMAIN_FINITE)
            res = friedrichs(a, sp)
            ext_ok = is_extension(a, res.extension)
            gamma_gap = max(0.0, gamma - res.gamma_preserved.gamma)
            # 20 probes: in-domain iff the graph series converges; the
            # expected answers follow the p-series / ratio oracles
            mistakes = 0
            a_vals = rule(np.arange(1, 65)).real
            for k in range(20):
                if name == "square":
                    s = 2.05 + 0.1 * k
                    probe = generated_vector(series.polynomial(-s), sp)
                    expected = (4.0 - 2.0 * s) < -1.0
                else:
                    r = in_decay * (0.5 + 0.04 * k)
                    probe = generated_vector(series.geometric(r), sp)
                    ratio = (rule.terms[0].ratio * r) ** 2
                    expected = ratio < 1.0
                try:
                    got = in_extension_domain(res, probe)
                except Uncertifiable:
                    mistakes += 1
                    continue
                mistakes += int(got != expected)
            wit = core_check(a, res, [generated_vector(series.geometric(0.5), sp)])
            return ({"extension": 0.0 if ext_ok else 1.0,
                     "gamma_gap": gamma_gap,
                     "membership_mistakes": float(mistakes),
                     "embedding": res.embedding_residual,
                     "core_tail": wit.witnesses[0].tail,
                     "idempotent": 0.0 if idempotent(res, sp) else 1.0},
                    {"extension": 0.0, "gamma_gap": 1e-10,
                     "membership_mistakes": 0.0, "embedding": 1e-10,
                     "core_tail": 1e-6, "idempotent": 0.0},
                    {"generator": name, "max_diag_64": float(a_vals[-1])}, [])
        reports.append(_guard(f"thm2-{name}", ["Thm2"], one,
                              tol_scale=tol_scale))

    def dense_case():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(20):
            n = int(rng.integers(1, 8))
            dp = dense_pair(n)
            a = operator_from_matrix(_random_hpd(rng, n), dp)
            res = friedrichs(a, dp)
            d = np.linalg.norm(res.extension.effective_matrix()
                               - a.canonical_matrix())
            worst = max(worst, float(d) / max(
                float(np.linalg.norm(a.canonical_matrix())), 1.0))
        return ({"selfadjoint_fixed_point": worst},
                {"selfadjoint_fixed_point": 1e-10}, {"instances": 20}, [])

    reports.append(_guard("thm2-dense-fixed-point", ["Thm2"], dense_case,
                          tol_scale=tol_scale))

    def control():
        friedrichs(diagonal_operator(series.geometric(0.5), sp, DOMAIN_FINITE), sp)
        return {}, {}, {}, []

    reports.append(_guard("control-decaying-generator", ["Thm2"], control,
                          control=True, tol_scale=tol_scale))
    return reports


def ordering_suite(seed: int, tol_scale: float = 1.0) -> list[Report]:
    rng = np.random.default_rng(seed)
    sp = sequence_pair(48)
    reports = []

    def lem2():
        worst = 0.0
        rank_gaps = 0
        for k in range(200):
            n = int(rng.integers(1, 9))
            A = operator_from_matrix(
                _random_psd(rng, n, force_kernel=(k % 3 == 0)), dense_pair(n))
            res = factorize(A)
            worst = max(worst, res.extension_residual)
            rank_gaps += res.details["rank_gap"]
        return ({"jjstar": worst, "rank_gaps": float(rank_gaps)},
                {"jjstar": 1e-10, "rank_gaps": 0.0}, {"instances": 200}, [])

    reports.append(_guard("lem2-factorization", ["Lem2"], lem2,
                          tol_scale=tol_scale))

    def remark():
        worst = 0.0
        for _ in range(100):
            n = int(rng.integers(1, 8))
            A = operator_from_matrix(_random_psd(rng, n), dense_pair(n))
            y = Vector(rng.normal(size=n) + 1j * rng.normal(size=n))
            rep = hilbert_consistency(A, [y], dense_pair(n))
            worst = max(worst, rep.worst_residual)
        return ({"sqrt_identity": worst}, {"sqrt_identity": 1e-8},
                {"samples": 100}, [])

    reports.append(_guard("lem2-remark-sqrt", ["Lem2"], remark,
                          tol_scale=tol_scale))

    def lem3():
        worst = 0.0
        for _ in range(100):
            n = int(rng.integers(1, 8))
            A = operator_from_matrix(_random_psd(rng, n), dense_pair(n))
            y = Vector(rng.normal(size=n) + 1j * rng.normal(size=n))
            v1 = form_on_X(A, y).value
            v2 = form_oracle_eigensolve(A, y)
            worst = max(worst, abs(v1 - v2) / max(v1, v2, 1.0))
        mistakes = 0
        for s, expected in [(-2.0, True), (-1.0, False), (-0.8, False),
                            (-3.0, True), (-1.6, True), (-1.1, False),
                            (-2.5, True), (-0.5, False), (-4.0, True),
                            (-1.4, False)]:
            # a = diag(n^2): form sum n^2 n^(2s) finite iff 2 + 2s < -1
            A = diagonal_operator(series.polynomial(2.0), sp, DOMAIN_FINITE)
            y = generated_vector(series.polynomial(s), sp)
            fv = form_on_X(A, y)
            mistakes += int(fv.finite != expected)
        return ({"sup_vs_eigensolve": worst, "membership_mistakes": float(mistakes)},
                {"sup_vs_eigensolve": 1e-6, "membership_mistakes": 0.0},
                {"dense_instances": 100, "sequence_pairs": 10}, [])

    reports.append(_guard("lem3-form-characterization", ["Lem3"], lem3,
                          tol_scale=tol_scale))

    def order():
        checks = {}
        A = operator_from_matrix(2 * np.eye(2), dense_pair(2))
        B = operator_from_matrix(np.eye(2), dense_pair(2))
        checks["scalar"] = compare(A, B, []).verdict == "A>=B"
        C = operator_from_matrix(np.diag([1.0, 4.0]), dense_pair(2))
        D = operator_from_matrix(np.diag([4.0, 1.0]), dense_pair(2))
        checks["incomparable"] = compare(C, D, []).verdict == "incomparable"
        E1 = operator_from_matrix(np.diag([2.0, 3.0]), dense_pair(2))
        E2 = operator_from_matrix(np.diag([2.0, 3.0]), dense_pair(2))
        repE = compare(E1, E2, [])
        checks["equal"] = repE.verdict == "equal"
        checks["antisymmetry"] = antisymmetry_check(E1, E2, repE).passed
        for _ in range(20):
            n = int(rng.integers(1, 6))
            M = _random_psd(rng, n) + 0.1 * np.eye(n)
            c = float(rng.uniform(1.0, 3.0))
            v = compare(operator_from_matrix(c * M, dense_pair(n)),
                        operator_from_matrix(M, dense_pair(n)), []).verdict
            checks.setdefault("scaling", True)
            checks["scaling"] = checks["scaling"] and v in ("A>=B", "equal")
        bad = sum(0 if ok else 1 for ok in checks.values())
        return ({"verdict_mistakes": float(bad)}, {"verdict_mistakes": 0.0},
                {k: bool(v) for k, v in checks.items()}, [])

    reports.append(_guard("order-definition", ["Def-Order"], order,
                          tol_scale=tol_scale))

    def control():
        A = operator_from_matrix(np.diag([2.0, 3.0]), dense_pair(2))
        B = operator_from_matrix(np.diag([2.0, 3.0 + 1e-6]), dense_pair(2))
        rep = compare(A, B, [])
        antisymmetry_check(A, B, rep)   # refuses: verdict is not "equal"
        return {}, {}, {}, []

    reports.append(_guard("control-antisymmetry-refusal", ["Def-Order"],
                          control, control=True, tol_scale=tol_scale))
    return reports


def formsum_suite(seed: int, tol_scale: float = 1.0) -> list[Report]:
    rng = np.random.default_rng(seed)
    reports = []

    def thm4():
        worst_energy = worst_ext = worst_collapse = 0.0
        for _ in range(100):
            n = int(rng.integers(1, 7))
            dp = dense_pair(n)
            A = operator_from_matrix(_random_hpd(rng, n), dp)
            B = operator_from_matrix(_random_hpd(rng, n), dp)
            jf = joint_factorize(A, B, dp, seed=int(rng.integers(0, 2 ** 31)))
            worst_energy = max(worst_energy, jf.energy_residual)
            worst_ext = max(worst_ext, jf.formsum.extension_residual,
                            jf.composition_residual)
            M = jf.formsum.operator.canonical_matrix()
            Msum = A.canonical_matrix() + B.canonical_matrix()
            worst_collapse = max(worst_collapse,
                                 float(np.linalg.norm(M - Msum)) /
                                 max(float(np.linalg.norm(Msum)), 1.0))
        return ({"energy_identity": worst_energy, "extension": worst_ext,
                 "collapse": worst_collapse},
                {"energy_identity": 1e-9, "extension": 1e-9,
                 "collapse": 1e-12}, {"pairs": 100}, [])

    reports.append(_guard("thm4-joint-factorization", ["Thm4"], thm4,
                          tol_scale=tol_scale))

    def closedness():
        sp = sequence_pair(48)
        t = diagonal_form(series.polynomial(2.0))
        wit = is_closed(t, [generated_vector(series.polynomial(-2.0), sp)], sp)
        ok_run = all(r < 1.0 for r in wit.runs[0].contraction)
        rejected = False
        try:
            is_closed(t, [generated_vector(series.polynomial(-1.0), sp)], sp)
        except FormcalcError:
            rejected = True
        return ({"run_contracts": 0.0 if ok_run else 1.0,
                 "divergent_rejected": 0.0 if rejected else 1.0},
                {"run_contracts": 0.0, "divergent_rejected": 0.0},
                {"kind": wit.kind}, [])

    reports.append(_guard("closedness-sequential", ["Thm4"], closedness,
                          tol_scale=tol_scale))

    def commutants():
        worst = {"lemma4_excess": 0.0, "lemma5_selfadjoint": 0.0,
                 "thm5_inclusion": 0.0, "thm6_imag": 0.0, "thm6_distance": 0.0,
                 "thm6_resolvent": 0.0}
        for k in range(50):
            n = int(rng.integers(2, 7))
            dp = dense_pair(n)
            A_mat = _random_hpd(rng, n)
            K = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            K = K + K.conj().T
            A = operator_from_matrix(A_mat, dp)
            E = commuting_pair(A_mat, K, dp)
            lift = lift_commutant(A, E, dp, seed=k)
            worst["lemma4_excess"] = max(worst["lemma4_excess"],
                                         lift.bound_margin - 1.0)
            worst["lemma5_selfadjoint"] = max(worst["lemma5_selfadjoint"],
                                              lift.selfadjoint_residual)
            B_mat = float(rng.uniform(0.5, 2.0)) * A_mat
            rep = commutation_formsum(A, operator_from_matrix(B_mat, dp), E, dp,
                                      seed=k)
            worst["thm5_inclusion"] = max(worst["thm5_inclusion"],
                                          rep.formsum_inclusion,
                                          rep.factor_inclusions["E_star_J"],
                                          rep.factor_inclusions["J_star_E"])
            spect = spectrum_inclusion(A, E, dp, seed=k)
            worst["thm6_imag"] = max(worst["thm6_imag"], spect.max_imag)
            worst["thm6_distance"] = max(worst["thm6_distance"],
                                         spect.max_distance)
            worst["thm6_resolvent"] = max(worst["thm6_resolvent"],
                                          spect.resolvent_residual)
        tol = {"lemma4_excess": 1e-8, "lemma5_selfadjoint": 1e-10,
               "thm5_inclusion": 1e-9, "thm6_imag": 1e-9,
               "thm6_distance": 1e-8, "thm6_resolvent": 1e-8}
        return worst, tol, {"triples": 50}, []

    reports.append(_guard("eq7-lemmas45-thm56", ["Eq7", "Lem4", "Lem5", "Thm5",
                                                 "Thm6"], commutants,
                          tol_scale=tol_scale))

    def block_construction():
        # independent route: simultaneously block-diagonal A, B and E in
        # a random unitary frame (E need not come from A^-1 K here)
        worst = 0.0
        for _ in range(10):
            n = 2 * int(rng.integers(1, 4))
            dp = dense_pair(n)
            W = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            Q, _ = np.linalg.qr(W)
            da = rng.uniform(0.5, 3.0, size=n)
            db = rng.uniform(0.5, 3.0, size=n)
            de = rng.uniform(-2.0, 2.0, size=n)
            A = operator_from_matrix(Q @ np.diag(da) @ Q.conj().T, dp)
            B = operator_from_matrix(Q @ np.diag(db) @ Q.conj().T, dp)
            E = operator_from_matrix(Q @ np.diag(de) @ Q.conj().T, dp, ENDO)
            rep = commutation_formsum(A, B, E, dp, seed=int(rng.integers(0, 2 ** 31)))
            worst = max(worst, rep.formsum_inclusion,
                        rep.factor_inclusions["E_star_J"],
                        rep.factor_inclusions["J_star_E"])
        return ({"thm5_inclusion": worst}, {"thm5_inclusion": 1e-9},
                {"instances": 10, "frame": "random unitary"}, [])

    reports.append(_guard("thm5-block-construction", ["Thm5"],
                          block_construction, tol_scale=tol_scale))

    def control():
        dp = dense_pair(2)
        A = operator_from_matrix(np.diag([1.0, 2.0]), dp)
        E = operator_from_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]), dp, ENDO)
        lift_commutant(A, E, dp)    # Eq. (7) violated: must raise
        return {}, {}, {}, []

    reports.append(_guard("control-broken-commutation", ["Eq7"], control,
                          control=True, tol_scale=tol_scale))
    return reports


def covariance_suite(seed: int, tol_scale: float = 1.0) -> list[Report]:
    rng = np.random.default_rng(seed)
    reports = []

    def worked_example():
        sp = exponential_space(1.5)
        xi = exp_poly_variable(sp, sequence_pair(24))
        e = weak_expectation(xi, seed=seed)
        c = math.exp(1.5) - 1.0
        oracle1 = sum(c * math.exp(-1.5 * n) * n for n in range(1, 400))
        members = []
        for k in range(12):
            fc = np.zeros(24, dtype=complex)
            fc[k] = 1.0
            members.append(second_moment_membership(
                xi, Functional(fc, "sequence")).member)
        harmonic = series.polynomial(-1.0)
        f_out = Functional(harmonic(np.arange(1, 25)), "sequence", tail=harmonic)
        cert = second_moment_membership(xi, f_out)
        diverges = (not cert.member and
                    cert.certificate["kind"] == "partial-sum-growth")
        return ({"expectation_coord1": abs(e.coords[0].real - oracle1),
                 "finitely_supported_in": 0.0 if all(members) else 1.0,
                 "harmonic_out": 0.0 if diverges else 1.0},
                {"expectation_coord1": 1e-10, "finitely_supported_in": 0.0,
                 "harmonic_out": 0.0},
                {"weights": "c e^(-1.5 n)", "checked_functionals": 12},
                [cert.certificate])

    reports.append(_guard("thm7-second-moment-example", ["Thm7"],
                          worked_example, tol_scale=tol_scale))

    def closed_form():
        nu = series.geometric(0.25, coef=3.0)
        s = series.geometric(math.sqrt(0.5))
        xi = signed_basis_variable(paired_rule_space(nu), s, sequence_pair(24))
        t, _ = covariance_form(xi)
        runs = [generated_vector(series.geometric(0.5), sequence_pair(24))]
        wit = is_closed(t, runs, sequence_pair(24).dual())
        ok = all(all(r < 1.0 for r in rec.contraction) and rec.limit_in_domain
                 for rec in wit.runs)
        psd = 0.0 if t.diagonal.is_nonnegative else 1.0
        return ({"closed_runs": 0.0 if ok else 1.0, "psd": psd},
                {"closed_runs": 0.0, "psd": 0.0}, {"runs": len(wit.runs)}, [])

    reports.append(_guard("thm7-closedness", ["Thm7"], closed_form,
                          tol_scale=tol_scale))

    def thm8():
        worst = 0.0
        for _ in range(50):
            n = int(rng.integers(1, 4))
            dp = dense_pair(n)
            m1 = int(rng.integers(n + 1, n + 4))
            m2 = int(rng.integers(n + 1, n + 4))
            w1 = rng.uniform(0.2, 1.0, size=m1)
            w2 = rng.uniform(0.2, 1.0, size=m2)
            xi = centered(table_variable(finite_space(w1 / w1.sum()),
                                         list(rng.normal(size=(m1, n))), dp))
            eta = centered(table_variable(finite_space(w2 / w2.sum()),
                                          list(rng.normal(size=(m2, n))), dp))
            rep = independent_sum(xi, eta)
            worst = max(worst, rep.residual if rep.passed else 1.0)
        nu = series.geometric(0.25, coef=3.0)
        xi = signed_basis_variable(paired_rule_space(nu),
                                   series.geometric(math.sqrt(2.0),
                                                    coef=1 / math.sqrt(3.0)),
                                   sequence_pair(24))
        eta = signed_basis_variable(paired_rule_space(nu),
                                    series.geometric(math.sqrt(4.0 / 3.0),
                                                     coef=1 / math.sqrt(3.0)),
                                    sequence_pair(24))
        drep = independent_sum(xi, eta)
        return ({"finite_product": worst,
                 "diagonal_rules": 0.0 if drep.passed else 1.0},
                {"finite_product": 1e-10, "diagonal_rules": 0.0},
                {"instances": 50}, [])

    reports.append(_guard("thm8-independent-sums", ["Thm8"], thm8,
                          tol_scale=tol_scale))

    def control():
        rule_space(series.geometric(0.5, coef=3.0))   # sums to 3, not 1
        return {}, {}, {}, []

    reports.append(_guard("control-unnormalized-weights", ["Thm7"], control,
                          control=True, tol_scale=tol_scale))
    return reports


def elliptic_suite(seed: int, tol_scale: float = 1.0) -> list[Report]:
    reports = []
    pb = problem(1.0, "1", "1", 1.0)
    laplace = problem(1.0, "1", "0", 1.0)

    def ordering():
        bad = 0
        for m in (16, 32, 64):
            rep = dirichlet_vs_neumann(pb, uniform_mesh(m), seed=seed)
            if rep.verdict != "A>=B":
                bad += 1
        return ({"ordering_violations": float(bad)},
                {"ordering_violations": 0.0}, {"meshes": [16, 32, 64]}, [])

    reports.append(_guard("thm3-dirichlet-vs-neumann", ["Thm3", "Elliptic"],
                          ordering, tol_scale=tol_scale))

    def poincare():
        lam = discrete_poincare(laplace, uniform_mesh(64))
        rel = abs(lam - math.pi ** 2) / math.pi ** 2
        return ({"poincare_rel_error": rel}, {"poincare_rel_error": 0.02},
                {"lambda_h": lam, "pi_sq": math.pi ** 2}, [])

    reports.append(_guard("elliptic-poincare", ["Elliptic"], poincare,
                          tol_scale=tol_scale))

    def convergence():
        rows = convergence_table(laplace, "pi^2 * sin(pi*x)", "sin(pi*x)",
                                 ms=(16, 32, 64, 128))
        ratios = [r["ratio"] for r in rows if r["ratio"] is not None]
        off = max(abs(r - 4.0) for r in ratios)
        table = [[r["m"], r["h"], r["l2_error"],
                  "" if r["ratio"] is None else r["ratio"]] for r in rows]
        return ({"ratio_offset": off}, {"ratio_offset": 0.4},
                {"rows": table}, [])

    reports.append(_guard("elliptic-convergence", ["Elliptic"], convergence,
                          tol_scale=tol_scale))

    def solves():
        rules = ["1", "x", "exp(x)", "sin(3*x)", "cos(pi*x)", "x^2 - x",
                 "2 + sin(2*pi*x)", "exp(0 - x)", "x^3", "1 + cos(x)"]
        worst = 0.0
        for g in rules:
            sol = weak_solve(pb, uniform_mesh(32), g)
            worst = max(worst, sol.galerkin_residual)
        singular = problem(1.0, "1", "1 / (0.01 + x)", 1.0)
        sol = weak_solve(singular, uniform_mesh(64), "1")
        worst = max(worst, sol.galerkin_residual)
        return ({"galerkin": worst}, {"galerkin": 1e-10},
                {"rules": len(rules) + 1}, [])

    reports.append(_guard("elliptic-weak-solves", ["Elliptic"], solves,
                          tol_scale=tol_scale))

    def bounds():
        c2 = sobolev_lower_bound(laplace, uniform_mesh(32), seed=seed)
        p4 = problem(1.0, "1", "0", 1.0, p=4.0)
        c4 = sobolev_lower_bound(p4, uniform_mesh(24), seed=seed)
        return ({"p2_slack": max(0.0, -c2.detail["worst_slack"]),
                 "p4_slack": max(0.0, -c4.detail["worst_slack"])},
                {"p2_slack": 1e-10, "p4_slack": 1e-10},
                {"c_p2": c2.gamma, "c_p4": c4.gamma}, [])

    reports.append(_guard("elliptic-lower-bounds", ["Elliptic"], bounds,
                          tol_scale=tol_scale))

    def control():
        neumann_operator(laplace, uniform_mesh(8))   # b = 0: degenerate
        return {}, {}, {}, []

    reports.append(_guard("control-neumann-kernel", ["Elliptic"], control,
                          control=True, tol_scale=tol_scale))
    return reports


_SUITES = {
    "representation": representation_suite,
    "friedrichs": friedrichs_suite,
    "ordering": ordering_suite,
    "formsum": formsum_suite,
    "covariance": covariance_suite,
    "elliptic": elliptic_suite,
}


def run_suite(name: str, seed: int = 0, tol_scale: float = 1.0) -> SuiteResult:
    if name == "all":
        reports = []
        artifacts = {}
        for sub in SUITE_NAMES:
            part = _SUITES[sub](seed, tol_scale)
            reports.extend(part)
        res = SuiteResult("all", seed, tuple(reports))
        artifacts.update(_artifacts_from(res))
        return SuiteResult("all", seed, tuple(reports), artifacts)
    if name not in _SUITES:
        raise KeyError(f"unknown suite {name!r}")
    reports = tuple(_SUITES[name](seed, tol_scale))
    res = SuiteResult(name, seed, reports)
    return SuiteResult(name, seed, reports, _artifacts_from(res))


def _artifacts_from(res: SuiteResult) -> dict:
    artifacts = {}
    for r in res.reports:
        if r.scenario == "elliptic-convergence" and "rows" in r.details:
            artifacts["convergence.csv"] = (
                ["m", "h", "l2_error", "ratio"], r.details["rows"])
    return artifacts
