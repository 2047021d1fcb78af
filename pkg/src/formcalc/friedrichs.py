"""Friedrichs extension of a positive operator with positive lower bound.

Dense backend: the extension is the representing operator of the form
t_a completed over the closure of dom a, so an already self-adjoint
operator is its own extension.  Sequence backend: diagonal generators
a_n >= gamma > 0 on finitely supported vectors; these are essentially
self-adjoint and the extension is the same generator on the maximal
graph domain {y : sum a_n^2 |y_n|^2 certified finite}.  The embedding of
the energy space into X is checked injective by sampling its defining
identity [t, y] = (a t, I_a y).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import series
from .duality import (
    DENSE, DOMAIN_FINITE, DOMAIN_MAXIMAL, SEQUENCE, DenseOperator, DualityPair,
    Vector, diagonal_operator, is_extension,
)
from .errors import (
    BackendMismatch, DomainError, LowerBoundError, NotPositive, SeriesDiverges,
    Uncertifiable,
)
from .forms import (
    LowerBoundCertificate, SesquilinearForm, associated_operator,
    form_of_operator, lower_bound,
)


@dataclass(frozen=True, eq=False)
class FriedrichsResult:
    extension: DenseOperator
    energy_space: SesquilinearForm
    embedding_residual: float
    gamma_preserved: LowerBoundCertificate
    details: dict


def friedrichs(a: DenseOperator, dp: DualityPair) -> FriedrichsResult:
    """Positive self-adjoint extension of ``a`` with the same lower bound."""
    if a.backend == DENSE:
        return _friedrichs_dense(a, dp)
    return _friedrichs_sequence(a, dp)


def _friedrichs_dense(a: DenseOperator, dp: DualityPair) -> FriedrichsResult:
    if not a.is_symmetric(1e-10):
        raise NotPositive("operator form is not symmetric")
    t = form_of_operator(a)
    cert = lower_bound(t, dp)
    if cert.gamma <= 0:
        raise LowerBoundError(f"gamma = {cert.gamma:.3e} is not positive")
    rep = associated_operator(t, dp)
    ext_ok = is_extension(a, rep.A)
    if not ext_ok:
        raise ArithmeticError("constructed extension does not extend the input")
    # dense energy space embeds by inclusion; its injectivity residual is
    # the identity [t, y] = (a t, y) sampled over the basis
    G = t.gram
    F = a.form_gram()
    emb = float(np.linalg.norm(G - F)) / max(1.0, float(np.linalg.norm(F)))
    return FriedrichsResult(rep.A, t, emb, cert,
                            {"backend": DENSE, "representation": rep.residuals})


def _friedrichs_sequence(a: DenseOperator, dp: DualityPair) -> FriedrichsResult:
    rule = a.diagonal
    if rule is None:
        raise BackendMismatch("sequence extension needs a diagonal generator")
    if not a.is_symmetric():
        raise NotPositive("diagonal generator must be real")
    if a.domain_rule != DOMAIN_FINITE:
        raise DomainError("input operator must act on finitely supported vectors")
    gamma = series.rule_lower_bound(rule)
    if gamma <= 0:
        raise LowerBoundError(
            f"generator lower bound {gamma:.3e} is not positive (certified)")
    ext = diagonal_operator(rule, dp, DOMAIN_MAXIMAL)
    emb = _embedding_residual(rule, dp)
    cert = LowerBoundCertificate(gamma, "exact-p2", detail={"p": 2.0})
    return FriedrichsResult(ext, SesquilinearForm(SEQUENCE, diagonal=rule),
                            emb, cert, {"backend": SEQUENCE})


def _embedding_residual(rule: series.Rule, dp: DualityPair) -> float:
    """Sample the identity [t, y] = (a t, I_a y) for finitely supported t
    and generator probes y.  The left side is the energy-form value, the
    right side goes through the pairing machinery; the worst relative
    residual comes back."""
    from .duality import Functional, generated_vector, pair as pairing

    ns = np.arange(1, dp.truncation + 1)
    diag = rule(ns)
    worst = 0.0
    for prb in (series.geometric(0.5), series.polynomial(-2.0)):
        y = generated_vector(prb, dp)
        for k in range(min(8, dp.truncation)):
            lhs = diag[k] * np.conj(y.coords[k])   # [e_k, y] in the energy form
            at = np.zeros(dp.truncation, dtype=complex)
            at[k] = diag[k]
            rhs = pairing(Functional(at, SEQUENCE), y)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return worst


def in_extension_domain(res: FriedrichsResult, y: Vector) -> bool:
    """Membership of y in dom A_F, certified.

    Sequence backend: the graph series sum a_n^2 |y_n|^2 must be
    certified finite; an exactly supported y always belongs.  Raises
    :class:`Uncertifiable` when the tail rule is outside the certified
    class.
    """
    A = res.extension
    if A.backend == DENSE:
        try:
            A.coefficients_of(y.coords)
            return True
        except DomainError:
            return False
    from .duality import graph_domain_contains
    return graph_domain_contains(A, y)


def in_energy_domain(res: FriedrichsResult, y: Vector) -> bool:
    """Membership in the energy space dom J*: sum a_n |y_n|^2 finite."""
    A = res.extension
    if A.backend == DENSE:
        return True
    if y.tail is None:
        return True
    ok, _ = series.decide_summable(A.diagonal * y.tail.abs_square())
    return ok


@dataclass(frozen=True)
class CoreWitness:
    truncation: int
    tail: float
    tail_trace: tuple[float, ...]
    ratios: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class CoreCheckReport:
    witnesses: tuple[CoreWitness, ...]
    passed: bool
    tol: float


def core_check(a: DenseOperator, res: FriedrichsResult, samples: list[Vector],
               tol: float = 1e-8) -> CoreCheckReport:
    """Finitely supported truncations converge in the energy norm.

    For each sample y in dom J*, finds K with the certified energy tail
    sum_{n > K} a_n |y_n|^2 below ``tol`` times the total energy, and
    records the contraction trace of the tails.  A sample outside dom J*
    raises :class:`DomainError`.
    """
    if res.extension.backend == DENSE:
        witnesses = tuple(CoreWitness(s.n, 0.0, (0.0,), ()) for s in samples)
        return CoreCheckReport(witnesses, True, tol)
    rule = res.extension.diagonal
    witnesses = []
    for y in samples:
        if y.tail is None:
            witnesses.append(CoreWitness(int(np.max(np.nonzero(
                np.abs(y.coords) > 0)[0]) + 1) if np.any(y.coords) else 0,
                0.0, (0.0,), ()))
            continue
        energy_rule = rule * y.tail.abs_square()
        try:
            total = series.certified_sum(energy_rule, tol=1e-10)
        except SeriesDiverges as exc:
            raise DomainError("sample outside the energy domain") from exc
        scale = max(abs(total.value), 1e-300)
        target = tol * scale
        trace, ks = [], []
        k = 1
        while True:
            tb = series.tail_bound(energy_rule, k)
            trace.append(tb)
            ks.append(k)
            if tb < target:
                break
            if k > series._MAX_TERMS:
                raise Uncertifiable("energy tail does not reach the target")
            k = k + max(1, k // 2)
        ratios = tuple(trace[i + 1] / trace[i] for i in range(len(trace) - 1)
                       if trace[i] > 0)
        if any(r >= 1.0 for r in ratios):
            raise ArithmeticError("energy tails failed to contract")
        witnesses.append(CoreWitness(ks[-1], trace[-1], tuple(trace), ratios))
    return CoreCheckReport(tuple(witnesses), True, tol)


def idempotent(res: FriedrichsResult, dp: DualityPair) -> bool:
    """friedrichs(A_F) returns A_F again (same matrix or same rule+domain)."""
    A = res.extension
    if A.backend == DENSE:
        again = friedrichs(A, dp).extension
        d = np.linalg.norm(again.effective_matrix() - A.effective_matrix())
        return bool(d <= 1e-10 * max(1.0, np.linalg.norm(A.effective_matrix())))
    finite = diagonal_operator(A.diagonal, dp, DOMAIN_FINITE)
    again = friedrichs(finite, dp).extension
    return series.rules_agree(A.diagonal, again.diagonal) and (
        again.domain_rule == A.domain_rule)
