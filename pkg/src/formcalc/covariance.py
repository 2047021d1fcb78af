"""Covariance forms and operators of vector-valued random variables.

Probability spaces are discrete (atomic) so every Pettis integral is a
certified sum.  Three kinds of variables are supported:

* ``table``: finitely many atoms with explicit coordinate values;
* ``exp-poly``: the sequence-space family  xi(w_n)_k = n^k / k!  over
  geometric weights, the worked second-moment example;
* ``signed-basis``: paired atoms (w_n, +-) mapped to +- s_n e_n, which
  produces diagonal covariances with generator rules.

The covariance form t(f, g) = E f(xi) conj(g(xi)) lives on functionals;
its representing operator maps X* to X and exists only with a positive
lower bound (the Hilbert-space fallback at lower bound zero is a stated
non-goal and surfaces as an error).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import series
from .duality import (
    DENSE, FROM_DUAL, SEQUENCE, DenseOperator, DualityPair, Functional, Vector,
)
from .errors import BackendMismatch, DomainError, LowerBoundError, Uncertifiable
from .forms import SesquilinearForm, associated_operator, form_from_gram, lower_bound
from .formsum import ClosednessWitness, form_sum, is_closed

WEIGHT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteProbabilitySpace:
    """Atomic probability space: finite weights, a weight generator, or a
    paired generator (atoms (w_n, +) and (w_n, -) with half weight each)."""

    kind: str                         # "finite" | "rule" | "paired-rule"
    weights: np.ndarray | None = None
    rule: series.Rule | None = None
    normalization: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == "finite":
            w = np.asarray(self.weights, dtype=float)
            if np.any(w <= 0):
                raise ValueError("weights must be positive")
            if abs(float(np.sum(w)) - 1.0) > WEIGHT_TOL:
                raise ValueError("weights must sum to one")
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)
        elif self.kind in ("rule", "paired-rule"):
            if self.rule is None or not self.rule.is_nonnegative:
                raise ValueError("weight rule must be nonnegative")
            total = series.certified_sum(self.rule, tol=WEIGHT_TOL)
            if abs(total.value.real - 1.0) > 1e-10:
                raise ValueError(
                    f"weight rule sums to {total.value.real!r}, not 1")
            object.__setattr__(self, "normalization",
                               {"sum": total.value.real, "tail": total.tail,
                                "n_used": total.n_used})
        else:
            raise ValueError(f"unknown space kind {self.kind!r}")

    @property
    def m(self) -> int:
        return len(self.weights)


def finite_space(weights) -> DiscreteProbabilitySpace:
    return DiscreteProbabilitySpace("finite", weights=weights)


def rule_space(rule: series.Rule) -> DiscreteProbabilitySpace:
    return DiscreteProbabilitySpace("rule", rule=rule)


def exponential_space(beta: float) -> DiscreteProbabilitySpace:
    """mu({w_n}) = c e^(-beta n) with the normalizing c = e^beta - 1."""
    c = math.exp(beta) - 1.0
    return rule_space(series.geometric(math.exp(-beta), coef=c))


def paired_rule_space(rule: series.Rule) -> DiscreteProbabilitySpace:
    return DiscreteProbabilitySpace("paired-rule", rule=rule)


@dataclass(frozen=True, eq=False)
class RandomVariable:
    kind: str                          # "table" | "exp-poly" | "signed-basis"
    space: DiscreteProbabilitySpace
    codomain: DualityPair
    values: tuple = ()                 # table: one coordinate array per atom
    scale: series.Rule | None = None   # signed-basis: s_n

    def __post_init__(self):
        if self.kind == "table":
            if self.space.kind != "finite":
                raise BackendMismatch("table variables need a finite space")
            vals = tuple(np.asarray(v, dtype=complex) for v in self.values)
            if len(vals) != self.space.m:
                raise ValueError("one value per atom required")
            for v in vals:
                if not np.all(np.isfinite(v.view(float))):
                    raise ValueError("values must have finite norm")
            object.__setattr__(self, "values", vals)
        elif self.kind == "exp-poly":
            if self.space.kind != "rule":
                raise BackendMismatch("the exp-poly family needs a rule space")
        elif self.kind == "signed-basis":
            if self.space.kind != "paired-rule":
                raise BackendMismatch("signed-basis variables need a paired space")
            if self.scale is None:
                raise ValueError("signed-basis variables need a scale rule")
        else:
            raise ValueError(f"unknown variable kind {self.kind!r}")

    def exp_poly_value(self, n: int, k_max: int) -> np.ndarray:
        ks = np.arange(1, k_max + 1, dtype=float)
        log_v = ks * math.log(n) - np.cumsum(np.log(ks))
        return np.exp(log_v).astype(complex)


def table_variable(space, values, dp: DualityPair) -> RandomVariable:
    return RandomVariable("table", space, dp, values=tuple(values))


def exp_poly_variable(space, dp: DualityPair) -> RandomVariable:
    return RandomVariable("exp-poly", space, dp)


def signed_basis_variable(space, scale: series.Rule, dp: DualityPair) -> RandomVariable:
    return RandomVariable("signed-basis", space, dp, scale=scale)


# ---------------------------------------------------------------------------
# weak (Pettis) expectation


def weak_expectation(xi: RandomVariable, seed: int = 0) -> Vector:
    """Coordinatewise certified weighted sum, spot-checked against the
    functional criterion (f(E xi) = E f(xi) on random finitely supported
    functionals)."""
    sp = xi.space
    if xi.kind == "table":
        out = np.zeros_like(xi.values[0])
        for w, v in zip(sp.weights, xi.values):
            out = out + w * v
        exp = Vector(out, xi.codomain.backend if xi.codomain.backend == DENSE
                     else SEQUENCE)
    elif xi.kind == "signed-basis":
        # the paired atoms cancel exactly
        exp = Vector(np.zeros(xi.codomain.n, dtype=complex), SEQUENCE)
    else:
        k_ret = xi.codomain.n
        coords = np.empty(k_ret, dtype=complex)
        kfact = np.cumsum(np.log(np.arange(1, k_ret + 1, dtype=float)))
        for k in range(1, k_ret + 1):
            rule_k = sp.rule * series.polynomial(float(k),
                                                 coef=math.exp(-kfact[k - 1]))
            coords[k - 1] = series.certified_sum(rule_k, tol=1e-12).value
        exp = Vector(coords, SEQUENCE)
    _spot_check_functional_criterion(xi, exp, seed)
    return exp


def _spot_check_functional_criterion(xi: RandomVariable, exp: Vector, seed: int,
                                     count: int = 10, tol: float = 1e-10):
    rng = np.random.default_rng(seed)
    nf = min(exp.n, 8)
    for _ in range(count):
        fc = np.zeros(exp.n, dtype=complex)
        fc[:nf] = rng.normal(size=nf)
        f = Functional(fc, exp.backend)
        lhs = complex(np.vdot(exp.coords, fc))          # f(E xi)
        rhs = _expect_functional(xi, f)
        if abs(lhs - rhs) > tol * max(1.0, abs(lhs), abs(rhs)):
            raise ArithmeticError(
                f"functional criterion violated ({abs(lhs - rhs):.3e})")


def _expect_functional(xi: RandomVariable, f: Functional) -> complex:
    """E f(xi) as a certified sum."""
    sp = xi.space
    if xi.kind == "table":
        return complex(sum(w * np.vdot(v[:f.n], f.coords[:v.size])
                           for w, v in zip(sp.weights, xi.values)))
    if xi.kind == "signed-basis":
        return 0.0 + 0.0j
    # exp-poly with finitely supported f: polynomial-in-n summand
    if f.tail is not None:
        raise Uncertifiable("expectation spot checks use finitely supported f")
    nz = np.nonzero(np.abs(f.coords) > 0)[0]
    rule = None
    kfact = np.cumsum(np.log(np.arange(1, f.n + 1, dtype=float)))
    for k in nz:
        term = sp.rule * series.polynomial(float(k + 1),
                                           coef=f.coords[k] * math.exp(-kfact[k]))
        rule = term if rule is None else rule + term
    if rule is None:
        return 0.0 + 0.0j
    return series.certified_sum(rule, tol=1e-12).value


# ---------------------------------------------------------------------------
# second-moment domain


@dataclass(frozen=True)
class MembershipCertificate:
    member: bool
    certificate: dict


def in_second_moment_domain(xi: RandomVariable, f: Functional) -> bool:
    """Certified decision of  sum_n mu_n |f(xi(w_n))|^2 < infinity."""
    return second_moment_membership(xi, f).member


def second_moment_membership(xi: RandomVariable, f: Functional) -> MembershipCertificate:
    sp = xi.space
    if xi.kind == "table":
        return MembershipCertificate(True, {"kind": "finite"})
    if xi.kind == "signed-basis":
        fr = f.tail if f.tail is not None else None
        if fr is None:
            # finitely supported: finite sum
            return MembershipCertificate(True, {"kind": "finite"})
        rule = sp.rule * xi.scale.abs_square() * fr.abs_square()
        ok, cert = series.decide_summable(rule)
        return MembershipCertificate(ok, cert.as_dict() if not ok else
                                     cert.certificate.as_dict())
    return _exp_poly_membership(xi, f)


def _exp_poly_membership(xi: RandomVariable, f: Functional) -> MembershipCertificate:
    sp = xi.space
    if f.tail is None:
        # |f(xi(w_n))| <= (sum_k |f_k|/k!) n^K: ratio-test majorant
        nz = np.nonzero(np.abs(f.coords) > 0)[0]
        if nz.size == 0:
            return MembershipCertificate(True, {"kind": "finite"})
        K = int(nz[-1] + 1)
        kfact = np.cumsum(np.log(np.arange(1, f.n + 1, dtype=float)))
        C = float(np.sum(np.abs(f.coords[nz]) * np.exp(-kfact[nz])))
        majorant = sp.rule * series.power_geometric(C * C, 2.0 * K, 1.0)
        ok, cert = series.decide_summable(majorant)
        if not ok:
            raise Uncertifiable("weight rule does not dominate the majorant")
        return MembershipCertificate(True, cert.certificate.as_dict())
    # generator-ruled f: the certified family is c k^beta with beta in [-1, 0]
    terms = f.tail.terms
    if (len(terms) != 1 or terms[0].ratio != 1.0 or
            not (-1.0 <= terms[0].alpha <= 0.0) or
            complex(terms[0].coef).imag != 0.0 or complex(terms[0].coef).real <= 0):
        raise Uncertifiable("functional growth rule outside the supported forms")
    c, beta = complex(terms[0].coef).real, terms[0].alpha
    # minorant: f(xi(w_n)) >= c (e^n - 1 - n)/n >= (c/2) e^n / n for n >= 2
    minorant = sp.rule * series.Rule(
        (series.Term(c * c / 4.0, -2.0, math.exp(2.0), start=2),))
    # majorant: f(xi(w_n)) <= c (e^n - 1) <= c e^n (since k^beta <= 1)
    majorant = sp.rule * series.geometric(math.exp(2.0), coef=c * c)
    if series.rule_convergent(majorant):
        _, cert = series.decide_summable(majorant)
        return MembershipCertificate(True, cert.certificate.as_dict())
    ok, cert = series.decide_summable(minorant)
    if not ok:
        return MembershipCertificate(False, cert.as_dict())
    raise Uncertifiable("majorant diverges but minorant converges: undecided")


@dataclass(frozen=True, eq=False)
class SecondMomentDomain:
    """Membership view of D = {f : E |f(xi)|^2 < infinity} with the
    finitely-supported density surrogate."""

    xi: RandomVariable

    def contains(self, f: Functional) -> bool:
        return in_second_moment_domain(self.xi, f)

    def density_witness(self, count: int = 12) -> dict:
        """Every coordinate functional (finitely supported) is a member;
        density of their span is the recorded surrogate, inferred."""
        n = self.xi.codomain.n
        members = []
        for k in range(min(count, n)):
            fc = np.zeros(n, dtype=complex)
            fc[k] = 1.0
            members.append(in_second_moment_domain(
                self.xi, Functional(fc, SEQUENCE if
                                    self.xi.codomain.backend == SEQUENCE else DENSE)))
        return {"finitely_supported_members": all(members),
                "checked": len(members), "density": "inferred"}


# ---------------------------------------------------------------------------
# covariance form and operator


def covariance_form(xi: RandomVariable, basis: list[Functional] | None = None,
                    runs: list[Vector] | None = None):
    """The second-moment form t(f, g) = E f(xi) conj(g(xi)).

    The caller centers xi first (subtract the weak expectation); the
    uncentered formula is computed as given.  Returns a form over the
    dual pair: dense gram on the supplied functional basis for finite
    spaces, a diagonal weight rule for signed-basis variables.  Basis
    functionals outside the second-moment domain raise.
    """
    if xi.kind == "signed-basis":
        rule = xi.space.rule * xi.scale.abs_square()
        t = SesquilinearForm(SEQUENCE, diagonal=rule)
        witness = is_closed(t, runs, xi.codomain.dual()) if runs else None
        return t, witness
    if xi.kind == "exp-poly":
        raise Uncertifiable("covariance operators for the uncentered exp-poly "
                            "family are outside scope; center a table variable")
    if basis is None:
        basis = [Functional(np.eye(xi.codomain.n)[k]) for k in range(xi.codomain.n)]
    for f in basis:
        if not in_second_moment_domain(xi, f):
            raise DomainError("basis functional outside the second-moment domain")
    m = len(basis)
    G = np.empty((m, m), dtype=complex)
    vals = [np.array([complex(np.vdot(v[:f.n], f.coords[:v.size]))
                      for v in xi.values]) for f in basis]
    w = xi.space.weights
    for i in range(m):
        for j in range(m):
            G[i, j] = np.sum(w * vals[i] * np.conj(vals[j]))
    B = np.stack([f.coords for f in basis], axis=1)
    t = form_from_gram(B, G)
    return t, ClosednessWitness("lower-bound-automatic")


def covariance_operator(xi: RandomVariable, basis: list[Functional] | None = None,
                        runs: list[Vector] | None = None) -> DenseOperator:
    """Representing operator of the covariance form, mapping X* to X.

    Requires a certified positive lower bound on the chosen basis span;
    at gamma = 0 the construction is refused (the Hilbert-space fallback
    at lower bound zero is out of scope here).
    """
    t, _ = covariance_form(xi, basis, runs)
    dual = xi.codomain.dual()
    if t.backend == SEQUENCE:
        from .duality import diagonal_operator, DOMAIN_MAXIMAL
        return diagonal_operator(t.diagonal, dual, DOMAIN_MAXIMAL, FROM_DUAL)
    cert = lower_bound(t, dual)
    if cert.gamma <= 0:
        raise LowerBoundError(
            "covariance form has lower bound 0; the Hilbert-space fallback "
            "(representation at gamma = 0) is out of scope")
    rep = associated_operator(t, dual)
    from dataclasses import replace
    return replace(rep.A, direction=FROM_DUAL)


def centered(xi: RandomVariable) -> RandomVariable:
    """Subtract the weak expectation (table variables)."""
    if xi.kind != "table":
        raise BackendMismatch("centering is implemented for table variables")
    e = weak_expectation(xi)
    vals = tuple(v - e.coords[:v.size] for v in xi.values)
    return RandomVariable("table", xi.space, xi.codomain, values=vals)


@dataclass(frozen=True, eq=False)
class IndependentSumReport:
    residual: float
    passed: bool
    details: dict


def independent_sum(xi: RandomVariable, eta: RandomVariable,
                    basis: list[Functional] | None = None) -> IndependentSumReport:
    """Covariance of the independent sum equals the form sum A (+) B.

    Independence is structural: the sum variable lives on the product of
    the factor spaces.  Finite spaces are enumerated; signed-basis
    variables compare generator rules with certified tails.
    """
    if xi.kind == "table" and eta.kind == "table":
        sp1, sp2 = xi.space, eta.space
        w = np.outer(sp1.weights, sp2.weights).reshape(-1)
        vals = tuple(v1 + v2 for v1 in xi.values for v2 in eta.values)
        joint = table_variable(finite_space(w / np.sum(w)), vals, xi.codomain)
        cov_sum = covariance_operator(joint, basis)
        A = covariance_operator(xi, basis)
        B = covariance_operator(eta, basis)
        dual = xi.codomain.dual()
        fs = form_sum(
            DenseOperator(DENSE, "to-dual", A.basis_mat, A.action_mat),
            DenseOperator(DENSE, "to-dual", B.basis_mat, B.action_mat), dual)
        M1 = cov_sum.canonical_matrix()
        M2 = fs.operator.canonical_matrix()
        res = float(np.linalg.norm(M1 - M2)) / max(1.0, float(np.linalg.norm(M2)))
        return IndependentSumReport(res, res <= 1e-10, {"kind": "finite-product"})
    if xi.kind == "signed-basis" and eta.kind == "signed-basis":
        cov_a = covariance_operator(xi)
        cov_b = covariance_operator(eta)
        dual = xi.codomain.dual()
        fs = form_sum(
            DenseOperator(SEQUENCE, "to-dual", diagonal=cov_a.diagonal,
                          domain_rule="finitely-supported"),
            DenseOperator(SEQUENCE, "to-dual", diagonal=cov_b.diagonal,
                          domain_rule="finitely-supported"), dual)
        # brute-force window over the product space: enumerate the signed
        # atom pairs ((n, sg1), (m, sg2)) and accumulate the second moment
        # of each retained coordinate, then compare with the summed rule
        # up to the certified weight tails beyond the window
        W = 12
        ns = np.arange(1, W + 1)
        nu, rho = np.real(xi.space.rule(ns)), np.real(eta.space.rule(ns))
        s, r = np.real(xi.scale(ns)), np.real(eta.scale(ns))
        brute = np.zeros(W)
        for i in range(W):
            acc = 0.0
            for n in range(W):
                for m in range(W):
                    w = 0.25 * nu[n] * rho[m]
                    for sg1 in (1.0, -1.0):
                        for sg2 in (1.0, -1.0):
                            val = sg1 * s[n] * (n == i) + sg2 * r[m] * (m == i)
                            acc += w * val * val
            brute[i] = acc
        sum_rule = np.real(fs.operator.diagonal(ns))
        tail_w = series.tail_bound(xi.space.rule, W) + series.tail_bound(
            eta.space.rule, W)
        err = np.abs(brute - sum_rule)
        allowed = sum_rule * tail_w + 1e-10 * np.maximum(sum_rule, 1e-300)
        res = float(np.max(err / np.maximum(allowed, 1e-300)))
        passed = bool(np.all(err <= allowed))
        return IndependentSumReport(res, passed,
                                    {"kind": "diagonal-rules", "window": W,
                                     "weight_tail": tail_w})
    raise BackendMismatch("independent sums need matching variable kinds")
