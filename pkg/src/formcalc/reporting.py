"""Machine-readable reports and the JSON wire schemas.

Every verification produces a :class:`Report`: claim tags, named
residuals with their tolerances, certificates, and a three-valued
verdict (``pass`` / ``fail`` / ``uncertified``).  The JSON schema is
versioned; complex scalars travel as [re, im] pairs, grams row-major,
generators as tagged term lists.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import series
from .duality import (
    DENSE, SEQUENCE, DenseOperator, DualityPair, Functional, Vector,
    dense_pair, sequence_pair,
)

SCHEMA_VERSION = "1"

#: claim identifiers used by the verification suites and the coverage map
CLAIM_TAGS = ("Thm1", "Lem1", "Thm2", "Lem2", "Lem3", "Def-Order", "Thm3",
              "Thm4", "Eq7", "Lem4", "Lem5", "Thm5", "Thm6", "Thm7", "Thm8",
              "Elliptic")

PASS, FAIL, UNCERTIFIED = "pass", "fail", "uncertified"


@dataclass(frozen=True, eq=False)
class Report:
    scenario: str
    claims: tuple[str, ...]
    residuals: dict
    tolerances: dict
    certificates: list
    verdict: str
    wall_time: float = 0.0
    details: dict = field(default_factory=dict)
    control: bool = False           # deliberately violated instance

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def as_expected(self) -> bool:
        """Controls must fail; everything else must pass."""
        return self.verdict == (FAIL if self.control else PASS)

    def as_dict(self, with_time: bool = True) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "scenario": self.scenario,
            "claims": list(self.claims),
            "residuals": {k: _num(v) for k, v in self.residuals.items()},
            "tolerances": {k: _num(v) for k, v in self.tolerances.items()},
            "certificates": self.certificates,
            "verdict": self.verdict,
            "control": self.control,
            "details": _jsonable(self.details),
        }
        if with_time:
            out["wall_time"] = self.wall_time
        return out


def _num(v) -> float:
    v = float(v)
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, int, float, str)) or obj is None:
        return obj
    return repr(obj)


def make_report(scenario: str, claims, residuals: dict, tolerances: dict,
                certificates=None, details=None, wall_time: float = 0.0,
                uncertified: bool = False, control: bool = False,
                tol_scale: float = 1.0) -> Report:
    """Verdict rule: pass iff every residual is within its (scaled)
    tolerance and nothing is uncertified."""
    tolerances = {k: float(v) * tol_scale for k, v in tolerances.items()}
    if uncertified:
        verdict = UNCERTIFIED
    else:
        bad = [k for k, v in residuals.items()
               if not (float(v) <= tolerances.get(k, np.inf))]
        verdict = FAIL if bad else PASS
    return Report(scenario, tuple(claims), dict(residuals), tolerances,
                  list(certificates or []), verdict, wall_time,
                  dict(details or {}), control)


# ---------------------------------------------------------------------------
# JSON wire schemas


def complex_to_json(z: complex):
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    return complex(v[0], v[1])


def array_to_json(a: np.ndarray):
    return [complex_to_json(z) for z in np.asarray(a, dtype=complex).ravel()]


def array_from_json(v) -> np.ndarray:
    return np.array([complex_from_json(z) for z in v], dtype=complex)


def matrix_to_json(M: np.ndarray):
    return [[complex_to_json(z) for z in row] for row in np.asarray(M, dtype=complex)]


def matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex_from_json(z) for z in row] for row in rows],
                    dtype=complex)


def rule_to_json(rule: series.Rule):
    return {"terms": [{"coef": complex_to_json(t.coef), "alpha": t.alpha,
                       "ratio": t.ratio, "start": t.start}
                      for t in rule.terms]}


def rule_from_json(obj) -> series.Rule:
    return series.Rule(tuple(
        series.Term(complex_from_json(t["coef"]), float(t.get("alpha", 0.0)),
                    float(t.get("ratio", 1.0)), int(t.get("start", 1)))
        for t in obj["terms"]))


def pair_to_json(dp: DualityPair):
    if dp.backend == DENSE:
        return {"backend": DENSE, "dim": dp.dim, "p": dp.p}
    return {"backend": SEQUENCE, "truncation": dp.truncation, "p": dp.p,
            "tail_certificates": dp.tail_certificates}


def pair_from_json(obj) -> DualityPair:
    if obj["backend"] == DENSE:
        return dense_pair(int(obj["dim"]), float(obj.get("p", 2.0)))
    return sequence_pair(int(obj["truncation"]), float(obj.get("p", 2.0)))


def vector_to_json(x: Vector | Functional):
    out = {"backend": x.backend, "coords": array_to_json(x.coords)}
    if x.backend == SEQUENCE:
        out["tail"] = ({"kind": "exact"} if x.tail is None
                       else {"kind": "rule", **rule_to_json(x.tail)})
    return out


def vector_from_json(obj, cls=Vector):
    tail = None
    t = obj.get("tail")
    if t and t.get("kind") == "rule":
        tail = rule_from_json(t)
    return cls(array_from_json(obj["coords"]), obj.get("backend", DENSE), tail)


def functional_from_json(obj) -> Functional:
    return vector_from_json(obj, cls=Functional)


def operator_to_json(A: DenseOperator):
    if A.backend == SEQUENCE:
        return {"backend": SEQUENCE, "direction": A.direction,
                "diagonal": rule_to_json(A.diagonal), "domain": A.domain_rule}
    return {"backend": DENSE, "direction": A.direction,
            "domain_basis": matrix_to_json(A.basis_mat),
            "action": matrix_to_json(A.action_mat)}


def operator_from_json(obj) -> DenseOperator:
    if obj["backend"] == SEQUENCE:
        return DenseOperator(SEQUENCE, obj.get("direction", "to-dual"),
                             diagonal=rule_from_json(obj["diagonal"]),
                             domain_rule=obj.get("domain", "finitely-supported"))
    basis = matrix_from_json(obj["domain_basis"])
    action = matrix_from_json(obj["action"])
    return DenseOperator(DENSE, obj.get("direction", "to-dual"), basis, action)


def form_to_json(t):
    if t.backend == SEQUENCE:
        return {"backend": SEQUENCE, "diagonal": rule_to_json(t.diagonal),
                "closedness": t.closedness}
    return {"backend": DENSE, "basis": matrix_to_json(t.basis_mat),
            "gram": matrix_to_json(t.gram), "symmetric": t.symmetric,
            "closedness": t.closedness}


def write_report(report: Report, path):
    with open(path, "w") as fh:
        json.dump(report.as_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def gram_csv_rows(G: np.ndarray):
    rows = []
    for i, row in enumerate(np.asarray(G, dtype=complex)):
        for j, z in enumerate(row):
            rows.append([i, j, z.real, z.imag])
    return rows
