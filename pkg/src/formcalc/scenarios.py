"""Declarative scenario dispatch for the command line.

A scenario file is JSON: ``{"scenarios": [{"id": ..., "op": ...,
"seed": ..., "tolerances": {...}, ...operands...}]}``.  Operands are
inline per the wire schemas in :mod:`formcalc.reporting`.  Each handler
produces a :class:`Report`; mathematical violations come back as
``fail`` verdicts, uncertifiable questions as ``uncertified``.
"""

from __future__ import annotations

import math
import time

import numpy as np

from .covariance import (
    covariance_form, covariance_operator, exp_poly_variable, exponential_space,
    finite_space, independent_sum, paired_rule_space, rule_space,
    second_moment_membership, signed_basis_variable, table_variable,
    weak_expectation,
)
from .duality import (
    DOMAIN_FINITE, ENDO, adjoint, diagonal_operator, is_extension, norm,
    operator_from_matrix, pair as pairing,
)
from .elliptic import (
    assemble, dirichlet_vs_neumann, problem, sobolev_lower_bound, uniform_mesh,
    weak_solve,
)
from .errors import FormcalcError, Uncertifiable
from .forms import associated_operator, form_from_gram, inverse_selfadjoint, lower_bound, riesz_solve
from .formsum import (
    commutation_formsum, commuting_pair, form_sum, joint_factorize,
    lift_commutant, spectrum_inclusion,
)
from .friedrichs import core_check, friedrichs
from .ordering import antisymmetry_check, compare, factorize, form_on_X, hilbert_consistency
from .reporting import (
    Report, array_from_json, functional_from_json, make_report,
    matrix_from_json, operator_from_json, pair_from_json, rule_from_json,
    vector_from_json,
)

RESERVED = {"id", "op", "seed", "tolerances", "expect"}


def _operands(sc: dict) -> dict:
    return {k: v for k, v in sc.items() if k not in RESERVED}


def _space_from_json(obj):
    kind = obj.get("kind", "finite")
    if kind == "finite":
        return finite_space(obj["weights"])
    if kind == "exponential":
        return exponential_space(float(obj["beta"]))
    if kind == "rule":
        return rule_space(rule_from_json(obj["rule"]))
    if kind == "paired-rule":
        return paired_rule_space(rule_from_json(obj["rule"]))
    raise ValueError(f"unknown space kind {kind!r}")


def _variable_from_json(obj, space, dp):
    kind = obj.get("kind", "table")
    if kind == "table":
        return table_variable(space, [array_from_json(v) for v in obj["values"]], dp)
    if kind == "exp-poly":
        return exp_poly_variable(space, dp)
    if kind == "signed-basis":
        return signed_basis_variable(space, rule_from_json(obj["scale"]), dp)
    raise ValueError(f"unknown variable kind {kind!r}")


def _problem_from_json(obj):
    return problem(float(obj.get("length", 1.0)), obj["a"], obj["b"],
                   float(obj["gamma"]), float(obj.get("p", 2.0)))


# --- handlers --------------------------------------------------------------
# each returns (claims, residuals, tolerances, details, certificates)


def _op_pair(ops, seed):
    dp = pair_from_json(ops["space"])
    v = functional_from_json(ops["v"])
    x = vector_from_json(ops["x"])
    got = pairing(v, x)
    details = {"value": [got.real, got.imag]}
    residuals, tols = {}, {}
    if "expected" in ops:
        want = complex(*ops["expected"])
        residuals["pairing"] = abs(got - want) / max(1.0, abs(want))
        tols["pairing"] = 1e-12
    return [], residuals, tols, details, []


def _op_norm(ops, seed):
    x = vector_from_json(ops["x"])
    got = norm(x, float(ops["p"]))
    residuals, tols = {}, {}
    if "expected" in ops:
        residuals["norm"] = abs(got - float(ops["expected"])) / max(
            1.0, float(ops["expected"]))
        tols["norm"] = 1e-12
    return [], residuals, tols, {"value": got}, []


def _op_adjoint_involution(ops, seed):
    dp = pair_from_json(ops["space"])
    A = operator_from_json(ops["operator"])
    back = adjoint(adjoint(A))
    res = float(np.linalg.norm(back.effective_matrix() - A.effective_matrix()))
    scale = max(float(np.linalg.norm(A.effective_matrix())), 1.0)
    return [], {"involution": res / scale}, {"involution": 1e-12}, {}, []


def _op_is_extension(ops, seed):
    S = operator_from_json(ops["S"])
    T = operator_from_json(ops["T"])
    got = is_extension(S, T)
    want = bool(ops.get("expected", True))
    return [], {"verdict_mismatch": 0.0 if got == want else 1.0}, \
        {"verdict_mismatch": 0.0}, {"is_extension": got}, []


def _op_lower_bound(ops, seed):
    dp = pair_from_json(ops["space"])
    basis = matrix_from_json(ops["basis"]) if "basis" in ops else np.eye(
        len(ops["gram"]), dtype=complex)
    t = form_from_gram(basis, matrix_from_json(ops["gram"]))
    cert = lower_bound(t, dp)
    residuals, tols = {}, {}
    if "expected_gamma" in ops:
        residuals["gamma"] = abs(cert.gamma - float(ops["expected_gamma"]))
        tols["gamma"] = 1e-10
    return ["Thm1"], residuals, tols, \
        {"gamma": cert.gamma, "kind": cert.kind, "slack": cert.slack}, []


def _op_associated_operator(ops, seed):
    dp = pair_from_json(ops["space"])
    basis = matrix_from_json(ops["basis"]) if "basis" in ops else np.eye(
        len(ops["gram"]), dtype=complex)
    rep = associated_operator(form_from_gram(basis, matrix_from_json(ops["gram"])), dp)
    residuals = {"ab_identity": rep.residuals["ab_identity"],
                 "ba_identity": rep.residuals["ba_identity"],
                 "selfadjoint": rep.residuals["selfadjoint"],
                 "b_norm_excess": max(0.0, rep.b_norm - 1.0 / rep.gamma)}
    tols = {"ab_identity": 1e-10, "ba_identity": 1e-10, "selfadjoint": 1e-12,
            "b_norm_excess": 1e-8}
    return ["Thm1"], residuals, tols, {"gamma": rep.gamma,
                                       "b_norm": rep.b_norm}, []


def _op_riesz_solve(ops, seed):
    dp = pair_from_json(ops["space"])
    basis = matrix_from_json(ops["basis"]) if "basis" in ops else np.eye(
        len(ops["gram"]), dtype=complex)
    t = form_from_gram(basis, matrix_from_json(ops["gram"]))
    f = riesz_solve(t, functional_from_json(ops["v"]), dp)
    residuals, tols = {}, {}
    if "expected" in ops:
        want = array_from_json(ops["expected"])
        residuals["solution"] = float(np.linalg.norm(f.coords - want)) / max(
            1.0, float(np.linalg.norm(want)))
        tols["solution"] = 1e-10
    return ["Thm1"], residuals, tols, {}, []


def _op_inverse_selfadjoint(ops, seed):
    dp = pair_from_json(ops["space"])
    B = operator_from_json(ops["B"])
    A = inverse_selfadjoint(B, dp)
    M = A.effective_matrix()
    res = float(np.linalg.norm(M @ B.canonical_matrix()
                               - A.effective_projector()))
    return ["Lem1"], {"composition": res / max(float(np.linalg.norm(M)), 1.0)}, \
        {"composition": 1e-10}, {}, []


def _op_friedrichs(ops, seed):
    dp = pair_from_json(ops["space"])
    a = diagonal_operator(rule_from_json(ops["generator"]), dp, DOMAIN_FINITE)
    res = friedrichs(a, dp)
    samples = [vector_from_json(s) for s in ops.get("samples", [])]
    residuals = {"extension": 0.0 if is_extension(a, res.extension) else 1.0,
                 "embedding": res.embedding_residual}
    tols = {"extension": 0.0, "embedding": 1e-10}
    certs = []
    if samples:
        rep = core_check(a, res, samples)
        residuals["core_tail"] = max(w.tail for w in rep.witnesses)
        tols["core_tail"] = 1e-6
        certs = [{"witness_truncations": [w.truncation for w in rep.witnesses]}]
    return ["Thm2"], residuals, tols, {"gamma": res.gamma_preserved.gamma}, certs


def _op_factorize(ops, seed):
    A = operator_from_json(ops["A"])
    res = factorize(A)
    return ["Lem2"], {"jjstar": res.extension_residual,
                      "rank_gap": float(res.details["rank_gap"])}, \
        {"jjstar": 1e-10, "rank_gap": 0.0}, {"rank": res.rank}, []


def _op_form_on_x(ops, seed):
    A = operator_from_json(ops["A"])
    y = vector_from_json(ops["y"])
    fv = form_on_X(A, y)
    residuals, tols = {}, {}
    if "expected" in ops:
        want = float(ops["expected"]) if ops["expected"] != "inf" else math.inf
        if math.isinf(want):
            residuals["finite_mismatch"] = 0.0 if math.isinf(fv.value) else 1.0
            tols["finite_mismatch"] = 0.0
        else:
            residuals["value"] = abs(fv.value - want) / max(1.0, abs(want))
            tols["value"] = 1e-6
    cert = [fv.certificate] if fv.certificate else []
    return ["Lem3"], residuals, tols, \
        {"value": fv.value if math.isfinite(fv.value) else "inf",
         "kind": fv.kind}, cert


def _op_compare(ops, seed):
    A = operator_from_json(ops["A"])
    B = operator_from_json(ops["B"])
    samples = [vector_from_json(s) for s in ops.get("samples", [])]
    rep = compare(A, B, samples, seed=seed)
    want = ops.get("expected")
    residuals = {"consistent": 0.0 if rep.consistent() else 1.0}
    tols = {"consistent": 0.0}
    if want:
        residuals["verdict_mismatch"] = 0.0 if rep.verdict == want else 1.0
        tols["verdict_mismatch"] = 0.0
    probes = [[r.label, r.value_a if math.isfinite(r.value_a) else "inf",
               r.value_b if math.isfinite(r.value_b) else "inf"]
              for r in rep.probes]
    return ["Def-Order"], residuals, tols, \
        {"verdict": rep.verdict, "probes": probes}, []


def _op_antisymmetry(ops, seed):
    A = operator_from_json(ops["A"])
    B = operator_from_json(ops["B"])
    rep = compare(A, B, [], seed=seed)
    chk = antisymmetry_check(A, B, rep)
    return ["Def-Order"], {"matrix": chk.matrix_residual,
                           "span": chk.span_residual}, \
        {"matrix": 1e-10, "span": 1e-10}, {}, []


def _op_hilbert_consistency(ops, seed):
    dp = pair_from_json(ops["space"])
    A = operator_from_json(ops["A"])
    samples = [vector_from_json(s) for s in ops["samples"]]
    rep = hilbert_consistency(A, samples, dp)
    return ["Lem2"], {"sqrt_identity": rep.worst_residual}, \
        {"sqrt_identity": 1e-8}, {"samples": rep.samples}, []


def _op_form_sum(ops, seed):
    dp = pair_from_json(ops["space"])
    A = operator_from_json(ops["A"])
    B = operator_from_json(ops["B"])
    fs = form_sum(A, B, dp)
    residuals = {"extension": fs.extension_residual}
    tols = {"extension": 1e-10}
    details = {"gamma": fs.gamma, "collapse_exact": fs.collapse_exact}
    if "expected_matrix" in ops:
        want = matrix_from_json(ops["expected_matrix"])
        got = fs.operator.canonical_matrix()
        residuals["matrix"] = float(np.linalg.norm(got - want)) / max(
            1.0, float(np.linalg.norm(want)))
        tols["matrix"] = 1e-10
    return ["Thm4"], residuals, tols, details, []


def _op_joint_factorize(ops, seed):
    dp = pair_from_json(ops["space"])
    jf = joint_factorize(operator_from_json(ops["A"]),
                         operator_from_json(ops["B"]), dp, seed=seed)
    return ["Thm4"], {"jstar": jf.jstar_residual,
                      "composition": jf.composition_residual,
                      "energy_identity": jf.energy_residual}, \
        {"jstar": 1e-10, "composition": 1e-9, "energy_identity": 1e-9}, {}, []


def _get_commutant(ops, dp):
    A = operator_from_json(ops["A"])
    if "K" in ops:
        E = commuting_pair(A.canonical_matrix(), matrix_from_json(ops["K"]), dp)
    else:
        E = operator_from_matrix(matrix_from_json(ops["E"]), dp, ENDO)
    return A, E


def _op_lift_commutant(ops, seed):
    dp = pair_from_json(ops["space"])
    A, E = _get_commutant(ops, dp)
    lift = lift_commutant(A, E, dp, seed=seed)
    return ["Eq7", "Lem4", "Lem5"], \
        {"lemma4_excess": max(0.0, lift.bound_margin - 1.0),
         "selfadjoint": lift.selfadjoint_residual,
         "eq7": lift.eq7_residual}, \
        {"lemma4_excess": 1e-8, "selfadjoint": 1e-10, "eq7": 1e-9}, \
        {"spectral_radius_sq": lift.spectral_radius_sq,
         "norm_bound": lift.norm_bound}, []


def _op_commutation_formsum(ops, seed):
    dp = pair_from_json(ops["space"])
    A, E = _get_commutant(ops, dp)
    B = operator_from_json(ops["B"])
    rep = commutation_formsum(A, B, E, dp, seed=seed)
    return ["Thm5"], {"inclusion": rep.formsum_inclusion,
                      "e_star_j": rep.factor_inclusions["E_star_J"],
                      "j_star_e": rep.factor_inclusions["J_star_E"]}, \
        {"inclusion": 1e-9, "e_star_j": 1e-9, "j_star_e": 1e-9}, {}, []


def _op_spectrum_inclusion(ops, seed):
    dp = pair_from_json(ops["space"])
    A, E = _get_commutant(ops, dp)
    rep = spectrum_inclusion(A, E, dp, seed=seed)
    return ["Thm6"], {"imag": rep.max_imag, "distance": rep.max_distance,
                      "resolvent": rep.resolvent_residual}, \
        {"imag": 1e-9, "distance": 1e-8, "resolvent": 1e-8}, \
        {"lift_eigenvalues": sorted(rep.lift_eigenvalues.real.tolist())}, []


def _op_weak_expectation(ops, seed):
    dp = pair_from_json(ops["space_pair"])
    space = _space_from_json(ops["probability"])
    xi = _variable_from_json(ops["variable"], space, dp)
    e = weak_expectation(xi, seed=seed)
    residuals, tols = {}, {}
    if "expected" in ops:
        want = array_from_json(ops["expected"])
        residuals["expectation"] = float(np.linalg.norm(e.coords - want)) / max(
            1.0, float(np.linalg.norm(want)))
        tols["expectation"] = 1e-10
    return ["Thm7"], residuals, tols, \
        {"coords_head": [[z.real, z.imag] for z in e.coords[:4]]}, []


def _op_second_moment(ops, seed):
    dp = pair_from_json(ops["space_pair"])
    space = _space_from_json(ops["probability"])
    xi = _variable_from_json(ops["variable"], space, dp)
    f = functional_from_json(ops["functional"])
    cert = second_moment_membership(xi, f)
    want = bool(ops.get("expected", True))
    return ["Thm7"], {"membership_mismatch": 0.0 if cert.member == want else 1.0}, \
        {"membership_mismatch": 0.0}, {"member": cert.member}, [cert.certificate]


def _op_covariance_form(ops, seed):
    from .reporting import gram_csv_rows

    dp = pair_from_json(ops["space_pair"])
    space = _space_from_json(ops["probability"])
    xi = _variable_from_json(ops["variable"], space, dp)
    t, _ = covariance_form(xi)
    if t.backend == "dense":
        lam = float(np.min(np.linalg.eigvalsh(t.gram)))
        residuals = {"psd": max(0.0, -lam)}
        details = {"gram_dim": t.d,
                   "csv": {"covariance-gram.csv": (["i", "j", "re", "im"],
                                                   gram_csv_rows(t.gram))}}
    else:
        residuals = {"psd": 0.0 if t.diagonal.is_nonnegative else 1.0}
        details = {"diagonal_head": np.real(t.diagonal(np.arange(1, 5))).tolist()}
    return ["Thm7"], residuals, {"psd": 1e-12}, details, []


def _op_covariance_operator(ops, seed):
    dp = pair_from_json(ops["space_pair"])
    space = _space_from_json(ops["probability"])
    xi = _variable_from_json(ops["variable"], space, dp)
    A = covariance_operator(xi)
    residuals, tols = {}, {}
    if "expected_matrix" in ops:
        want = matrix_from_json(ops["expected_matrix"])
        got = A.canonical_matrix()
        residuals["matrix"] = float(np.linalg.norm(got - want)) / max(
            1.0, float(np.linalg.norm(want)))
        tols["matrix"] = 1e-10
    return ["Thm7"], residuals, tols, {"direction": A.direction}, []


def _op_independent_sum(ops, seed):
    dp = pair_from_json(ops["space_pair"])
    sp1 = _space_from_json(ops["probability_xi"])
    sp2 = _space_from_json(ops["probability_eta"])
    xi = _variable_from_json(ops["xi"], sp1, dp)
    eta = _variable_from_json(ops["eta"], sp2, dp)
    rep = independent_sum(xi, eta)
    return ["Thm8"], {"covariance_vs_formsum": rep.residual if rep.passed
                      else max(rep.residual, 1.0)}, \
        {"covariance_vs_formsum": 1e-10}, rep.details, []


def _op_elliptic_assemble(ops, seed):
    pb = _problem_from_json(ops["problem"])
    t = assemble(pb, uniform_mesh(int(ops["m"]), pb.length),
                 ops.get("boundary", "dirichlet"))
    lam = float(np.min(np.linalg.eigvalsh(np.conj(t.gram))))
    residuals = {"definite": max(0.0, -lam)}
    tols = {"definite": 1e-12}
    if "expected_gram" in ops:
        want = matrix_from_json(ops["expected_gram"])
        residuals["gram"] = float(np.linalg.norm(t.gram - want)) / max(
            1.0, float(np.linalg.norm(want)))
        tols["gram"] = 1e-10
    return ["Elliptic"], residuals, tols, {"dim": t.d}, []


def _op_sobolev_lower_bound(ops, seed):
    pb = _problem_from_json(ops["problem"])
    cert = sobolev_lower_bound(pb, uniform_mesh(int(ops.get("m", 32)),
                                                pb.length), seed=seed)
    return ["Elliptic"], {"violation": max(0.0, -cert.detail["worst_slack"])}, \
        {"violation": 1e-10}, {"constant": cert.gamma, "kind": cert.kind}, []


def _op_weak_solve(ops, seed):
    pb = _problem_from_json(ops["problem"])
    mesh = uniform_mesh(int(ops["m"]), pb.length)
    sol = weak_solve(pb, mesh, ops["g"])
    residuals = {"galerkin": sol.galerkin_residual}
    tols = {"galerkin": 1e-10}
    details = {"energy_norm": sol.energy_norm, "lp_norm": sol.lp_norm,
               "csv": {"solution.csv": (["x", "f_h"],
                                        [[float(x), float(v)] for x, v in
                                         zip(mesh.nodes, sol.nodal_values())])}}
    return ["Elliptic"], residuals, tols, details, []


def _op_dirichlet_vs_neumann(ops, seed):
    pb = _problem_from_json(ops["problem"])
    rep = dirichlet_vs_neumann(pb, uniform_mesh(int(ops["m"]), pb.length),
                               seed=seed)
    probes = [[r.label, r.value_a, r.value_b] for r in rep.probes]
    return ["Thm3", "Elliptic"], \
        {"ordering": 0.0 if rep.verdict == "A>=B" else 1.0}, \
        {"ordering": 0.0}, {"verdict": rep.verdict, "probes": probes}, []


OPERATIONS = {
    "pair": _op_pair,
    "norm": _op_norm,
    "adjoint-involution": _op_adjoint_involution,
    "is-extension": _op_is_extension,
    "lower-bound": _op_lower_bound,
    "associated-operator": _op_associated_operator,
    "riesz-solve": _op_riesz_solve,
    "inverse-selfadjoint": _op_inverse_selfadjoint,
    "friedrichs": _op_friedrichs,
    "factorize": _op_factorize,
    "form-on-x": _op_form_on_x,
    "compare": _op_compare,
    "antisymmetry": _op_antisymmetry,
    "hilbert-consistency": _op_hilbert_consistency,
    "form-sum": _op_form_sum,
    "joint-factorize": _op_joint_factorize,
    "lift-commutant": _op_lift_commutant,
    "commutation-formsum": _op_commutation_formsum,
    "spectrum-inclusion": _op_spectrum_inclusion,
    "weak-expectation": _op_weak_expectation,
    "second-moment": _op_second_moment,
    "covariance-form": _op_covariance_form,
    "covariance-operator": _op_covariance_operator,
    "independent-sum": _op_independent_sum,
    "elliptic-assemble": _op_elliptic_assemble,
    "sobolev-lower-bound": _op_sobolev_lower_bound,
    "weak-solve": _op_weak_solve,
    "dirichlet-vs-neumann": _op_dirichlet_vs_neumann,
}


class UnknownOperation(KeyError):
    pass


def run_scenario(sc: dict, tol_scale: float = 1.0) -> Report:
    op = sc.get("op")
    if op not in OPERATIONS:
        raise UnknownOperation(f"unknown operation {op!r}")
    seed = int(sc.get("seed", 0))
    sid = str(sc.get("id", op))
    overrides = sc.get("tolerances", {})
    t0 = time.perf_counter()
    try:
        claims, residuals, tols, details, certs = OPERATIONS[op](
            _operands(sc), seed)
        tols.update({k: float(v) for k, v in overrides.items()})
        rep = make_report(sid, claims, residuals, tols, certificates=certs,
                          details=details, tol_scale=tol_scale,
                          wall_time=time.perf_counter() - t0)
    except Uncertifiable as exc:
        rep = make_report(sid, [], {"raised": 1.0}, {"raised": 0.0},
                          details={"error": f"{type(exc).__name__}: {exc}"},
                          uncertified=True, tol_scale=tol_scale,
                          wall_time=time.perf_counter() - t0)
    except (FormcalcError, ArithmeticError, ValueError) as exc:
        rep = make_report(sid, [], {"raised": 1.0}, {"raised": 0.0},
                          details={"error": f"{type(exc).__name__}: {exc}"},
                          tol_scale=tol_scale,
                          wall_time=time.perf_counter() - t0)
    return rep
