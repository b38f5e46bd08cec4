"""Randomized property checks over Haar ensembles.

Each ensemble is run through every inequality and identity linking the
exact success probabilities to the closed-form bounds; margins are signed
so that a negative margin below ``-tol`` is a violation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .ensemble import StateEnsemble, haar_random, max_pairwise_fidelity
from .pgm import build_pgm, pgm_success, proof_diagnostics
from .sma import build_sequential, exact_distributions

LOW_FIDELITY = 0.1


def random_ensembles(trials, d_range=(2, 16), m_range=(2, 8), seed=0, independent_only=False):
    """Yield ``(trial, ensemble)``; ``d`` and ``m`` uniform over the inclusive ranges.

    With ``independent_only`` draws with ``m > d`` are skipped until
    ``trials`` ensembles have been produced.
    """
    produced = 0
    t = 0
    while produced < trials:
        rng = np.random.default_rng([seed, t])
        d = int(rng.integers(d_range[0], d_range[1] + 1))
        m = int(rng.integers(m_range[0], m_range[1] + 1))
        t += 1
        if independent_only and m > d:
            continue
        produced += 1
        yield t - 1, haar_random(d, m, seed=int(rng.integers(2**63)))


def ensemble_margins(e, convention="squared"):
    """Signed margins of every checked property for one ensemble.

    Inequalities give ``rhs_slack`` (pass iff ``>= -tol``); identities give
    ``-|residual|``. Properties not applicable to ``e`` are omitted.
    """
    ops = build_sequential(e)
    povm = build_pgm(e)
    report = pgm_success(e)
    diag = proof_diagnostics(e, ops)
    P = exact_distributions(e, ops)
    m = e.m
    F = bounds.overlap_parameter(e, convention)
    fid = max_pairwise_fidelity(e)
    trM = np.array([np.real(np.vdot(v, ops.effects[i] @ v)) for i, v in enumerate(e.states)])
    sm = float(np.min(np.diag(P) + P[:, m] / m))

    out = {
        "pgm_completeness": -povm.completeness_residual(),
        "pgm_psd": povm.min_eigenvalue(),
        "sma_completeness": -ops.completeness_residual(),
        "sma_psd": ops.min_eigenvalue(),
        "sma_sum_to_one": -float(np.max(np.abs(P.sum(axis=1) - 1.0))),
        "pgm_ge_linear": report.worst_case - bounds.linear_bound(m, F),
        "trA2_le_1_plus_mF2": float(np.min(1.0 + m * F * F - diag.trA2)),
        "trB2_eq_p": -float(np.max(np.abs(diag.trB2 - report.per_state))),
        "trAB_eq_trMrho": -float(np.max(np.abs(diag.trAB - trM))),
        "cauchy_schwarz": float(np.min(np.sqrt(diag.trA2 * diag.trB2) - diag.trAB)),
    }
    # the squaring step needs a non-negative union term; the stated reading asserts it regardless
    if convention == "squared" or bounds.union_term(m, F) >= 0:
        out["pgm_ge_refined"] = report.worst_case - bounds.refined_bound(m, F)
    if fid <= LOW_FIDELITY:
        out["sm_ge_eq3"] = sm - bounds.eq3_lower_bound(e, convention, ops)
    return out


@dataclass
class SuiteResult:
    tol: float
    convention: str
    trials: int = 0
    evaluated: dict = field(default_factory=dict)
    failed: dict = field(default_factory=dict)
    min_margin: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    counterexample: StateEnsemble | None = None

    @property
    def ok(self):
        return not self.violations

    def add(self, trial, e, margins):
        self.trials += 1
        for name, value in margins.items():
            self.evaluated[name] = self.evaluated.get(name, 0) + 1
            self.min_margin[name] = min(self.min_margin.get(name, np.inf), value)
            if value < -self.tol:
                self.failed[name] = self.failed.get(name, 0) + 1
                self.violations.append((trial, name, value))
                if self.counterexample is None:
                    self.counterexample = e

    def to_text(self):
        lines = [
            f"trials: {self.trials}",
            f"tolerance: {self.tol!r}",
            f"convention: {self.convention}",
            "check,evaluated,failed,min_margin",
        ]
        for name in self.evaluated:
            lines.append(
                f"{name},{self.evaluated[name]},{self.failed.get(name, 0)},{self.min_margin[name]!r}"
            )
        for trial, name, value in self.violations[:20]:
            lines.append(f"VIOLATION trial={trial} {name} margin={value!r}")
        if len(self.violations) > 20:
            lines.append(f"... {len(self.violations) - 20} more violations")
        lines.append("PASS" if self.ok else "FAIL")
        return "\n".join(lines)


def run_suite(trials=1000, d_range=(2, 16), m_range=(2, 8), seed=0, tol=1e-9,
              convention="squared", independent_only=False):
    result = SuiteResult(tol=tol, convention=convention)
    for t, e in random_ensembles(trials, d_range, m_range, seed, independent_only):
        result.add(t, e, ensemble_margins(e, convention))
    return result
