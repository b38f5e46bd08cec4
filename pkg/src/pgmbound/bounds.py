"""Closed-form success-probability bounds and the positivity certificate
showing the quadratic bound beats the linear one for ``m >= 4``.

Bound formulas take the overlap parameter ``F`` as a plain number. How
``F`` is extracted from an ensemble is a separate choice (see
:func:`overlap_parameter`):

``"squared"``
    ``F = max_{i != j} |<v_i|v_j>|**2``, the pairwise fidelity.
``"overlap"``
    ``F = max_{i != j} |<v_i|v_j>|``. Under this reading the quadratic
    bounds follow from the union bound and ``<v_i|S|v_i> <= 1 + (m-1) F**2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ensemble import _as_ensemble, max_pairwise_fidelity, max_pairwise_overlap
from .pgm import pgm_success
from .sma import build_sequential, exact_distributions

__all__ = [
    "CONVENTIONS",
    "overlap_parameter",
    "linear_bound",
    "refined_bound",
    "union_term",
    "eq3_per_state",
    "eq3_lower_bound",
    "BoundReport",
    "evaluate",
    "g_poly",
    "h_poly",
    "h_prime",
    "h_second",
    "dh_dm",
    "p_poly",
    "p_prime",
    "p_second",
    "CriticalPoint",
    "h_critical_point",
    "p_critical_point",
    "VerificationSummary",
    "verify_appendix",
]

CONVENTIONS = ("squared", "overlap")


def overlap_parameter(e, convention="squared"):
    if convention == "squared":
        return max_pairwise_fidelity(e)
    if convention == "overlap":
        return max_pairwise_overlap(e)
    raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")


def linear_bound(m, F):
    """``1 - m F`` (not clamped)."""
    return 1.0 - m * F


def union_term(m, F):
    """``1 - 4 (m-1) F**2``."""
    return 1.0 - 4.0 * (m - 1) * F * F


def refined_bound(m, F):
    """``(1 - 4 (m-1) F**2)**2 / (1 + m F**2)``."""
    return union_term(m, F) ** 2 / (1.0 + m * F * F)


def eq3_per_state(e, convention="squared", sequential=None):
    """``1 - 4(m-1)F**2 + <v_k|M_m|v_k> / m`` for every input ``k``."""
    e = _as_ensemble(e)
    F = overlap_parameter(e, convention)
    P = exact_distributions(e, sequential)
    return union_term(e.m, F) + P[:, e.m] / e.m


def eq3_lower_bound(e, convention="squared", sequential=None):
    """Worst case over inputs of :func:`eq3_per_state`."""
    return float(np.min(eq3_per_state(e, convention, sequential)))


@dataclass(frozen=True)
class BoundReport:
    m: int
    d: int
    F: float
    convention: str
    linear: float
    refined: float
    union_term: float
    eq3: float | None = None
    pgm_exact: float | None = None
    sm_exact: float | None = None

    @classmethod
    def from_parameters(cls, m, F, d=0, convention="squared", **exact):
        return cls(
            m=m, d=d, F=F, convention=convention,
            linear=linear_bound(m, F),
            refined=refined_bound(m, F),
            union_term=union_term(m, F),
            **exact,
        )

    def dominance(self, tol=1e-9):
        """Comparison flags, always recomputed from the stored values."""
        flags = {"refined_gt_linear": self.refined > self.linear}
        if self.pgm_exact is not None:
            flags["pgm_ge_linear"] = self.pgm_exact >= self.linear - tol
            flags["pgm_ge_refined"] = self.pgm_exact >= self.refined - tol
        if self.sm_exact is not None and self.eq3 is not None:
            flags["sm_ge_eq3"] = self.sm_exact >= self.eq3 - tol
        return flags


def evaluate(e, convention="squared", cutoff=None):
    """Exact PGM and sequential success together with every bound."""
    e = _as_ensemble(e)
    ops = build_sequential(e)
    return BoundReport.from_parameters(
        e.m,
        overlap_parameter(e, convention),
        d=e.d,
        convention=convention,
        eq3=eq3_lower_bound(e, convention, ops),
        pgm_exact=pgm_success(e, cutoff).worst_case,
        sm_exact=float(np.min(_success_from(exact_distributions(e, ops)))),
    )


def _success_from(P):
    m = P.shape[0]
    return np.diag(P) + P[:, m] / m


# -- polynomials of the dominance argument ----------------------------------

def g_poly(F, m):
    """``(1 - 4(m-1)F**2)**2 - (1 + m F**2)(1 - m F)``, evaluated as written."""
    return (1 - 4 * (m - 1) * F**2) ** 2 - (1 + m * F**2) * (1 - m * F)


def h_poly(F, m):
    """``16(m-1)**2 F**3 + m**2 F**2 - 8(m-1) F - m F + m``."""
    return 16 * (m - 1) ** 2 * F**3 + m**2 * F**2 - 8 * (m - 1) * F - m * F + m


def h_prime(F, m):
    """``dh/dF``."""
    return 48 * (m - 1) ** 2 * F**2 + 2 * m**2 * F - (9 * m - 8)


def h_second(F, m):
    return 96 * (m - 1) ** 2 * F + 2 * m**2


def dh_dm(F, m):
    """``dh/dm = 32 F**3 (m-1) + 2 m F**2 - 9 F + 1``."""
    return 32 * F**3 * (m - 1) + 2 * m * F**2 - 9 * F + 1


def p_poly(F):
    """``dh/dm`` at ``m = 4``: ``96 F**3 + 8 F**2 - 9 F + 1``."""
    return 96 * F**3 + 8 * F**2 - 9 * F + 1


def p_prime(F):
    return 288 * F**2 + 16 * F - 9


def p_second(F):
    return 576 * F + 16


@dataclass(frozen=True)
class CriticalPoint:
    location: float
    value: float
    derivative: float
    second_derivative: float

    @property
    def second_derivative_sign(self):
        return "positive" if self.second_derivative > 0 else "negative"

    @property
    def is_minimum(self):
        return self.second_derivative > 0


def _positive_root(a, b, c):
    """Positive root of ``a x**2 + b x + c`` with ``a > 0, c < 0``, cancellation-free."""
    disc = math.sqrt(b * b - 4 * a * c)
    # (-b + disc) / (2a) rewritten to avoid subtracting nearly equal numbers
    return (-2 * c) / (b + disc) if b >= 0 else (-b + disc) / (2 * a)


def h_critical_point(m=4):
    """Stationary point of ``h(., m)`` in ``(0, 1]``, a minimum for every ``m >= 2``."""
    F = _positive_root(48 * (m - 1) ** 2, 2 * m**2, -(9 * m - 8))
    return CriticalPoint(F, h_poly(F, m), h_prime(F, m), h_second(F, m))


def p_critical_point():
    F = _positive_root(288, 16, -9)
    return CriticalPoint(F, p_poly(F), p_prime(F), p_second(F))


# -- grid certification ------------------------------------------------------

@dataclass
class VerificationSummary:
    grid_step: float
    m_max: int
    points_checked: int = 0
    violations: list = field(default_factory=list)
    min_h: float = math.inf
    min_h_at: tuple = (math.nan, 0)
    min_dominance_margin: float = math.inf
    min_dh_dm: float = math.inf
    max_identity_residual: float = 0.0
    identity_samples: int = 0
    h_critical: CriticalPoint | None = None
    p_critical: CriticalPoint | None = None
    negative_control: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.violations

    def record(self, check, F, m, value):
        self.violations.append((check, float(F), int(m), float(value)))

    def items(self):
        """Flat ``(key, value)`` pairs for CSV or text output."""
        hc, pc = self.h_critical, self.p_critical
        rows = [
            ("grid_step", self.grid_step),
            ("m_max", self.m_max),
            ("points_checked", self.points_checked),
            ("violations", len(self.violations)),
            ("min_h", self.min_h),
            ("min_h_F", self.min_h_at[0]),
            ("min_h_m", self.min_h_at[1]),
            ("min_refined_minus_linear", self.min_dominance_margin),
            ("min_dh_dm", self.min_dh_dm),
            ("identity_samples", self.identity_samples),
            ("max_identity_residual", self.max_identity_residual),
        ]
        if hc is not None:
            rows += [
                ("h_critical_F", hc.location),
                ("h_critical_value", hc.value),
                ("h_critical_second_derivative", hc.second_derivative),
            ]
        if pc is not None:
            rows += [
                ("p_critical_F", pc.location),
                ("p_critical_value", pc.value),
                ("p_critical_second_derivative", pc.second_derivative),
            ]
        for m, n in sorted(self.negative_control.items()):
            rows.append((f"control_m{m}_points_refined_le_linear", n))
        return rows

    def to_text(self):
        lines = [f"{k}: {v!r}" for k, v in self.items()]
        for check, F, m, value in self.violations[:20]:
            lines.append(f"VIOLATION {check} at F={F!r} m={m}: {value!r}")
        lines.append("PASS" if self.ok else "FAIL")
        return "\n".join(lines)


def _identity_scale(F, m):
    return (1 + 4 * (m - 1) * F**2) ** 2 + (1 + m * F**2) * (1 + m * F)


def verify_appendix(grid_step=1e-3, m_max=64, identity_samples=10_000, seed=0,
                    identity_rtol=1e-12):
    """Check every positivity claim of the dominance argument on a grid.

    The grid is ``F in {grid_step, 2 grid_step, ..., 1}`` by
    ``m in {4, ..., m_max}``. At each point: ``h > 0``, ``g == F h``,
    refined bound strictly above the linear one, ``dh/dm >= p(F) > 0`` and
    ``h(F, m+1) > h(F, m)``. The closed-form minima of ``h(., 4)`` and ``p``
    are evaluated exactly. ``m = 2, 3`` are tallied as a negative control
    and never counted as violations.
    """
    if not 0 < grid_step <= 0.01:
        raise ValueError(f"grid_step must lie in (0, 0.01], got {grid_step!r}")
    if m_max < 4:
        raise ValueError(f"m_max must be >= 4, got {m_max}")
    n = int(round(1.0 / grid_step))
    F = np.arange(1, n + 1) * (1.0 / n)
    ms = np.arange(4, m_max + 1)
    FF, MM = np.meshgrid(F, ms.astype(float), indexing="xy")

    out = VerificationSummary(grid_step=1.0 / n, m_max=m_max)
    out.points_checked = FF.size

    def flag(check, mask, values):
        for r, c in zip(*np.nonzero(mask)):
            out.record(check, FF[r, c], MM[r, c], values[r, c])

    h = h_poly(FF, MM)
    flag("h_positive", ~(h > 0), h)
    i = np.unravel_index(np.argmin(h), h.shape)
    out.min_h, out.min_h_at = float(h[i]), (float(FF[i]), int(MM[i]))

    g = g_poly(FF, MM)
    resid = np.abs(g - FF * h)
    flag("g_equals_F_h", resid > identity_rtol * _identity_scale(FF, MM), resid)
    out.max_identity_residual = float(resid.max())

    margin = refined_bound(MM, FF) - linear_bound(MM, FF)
    flag("refined_gt_linear", ~(margin > 0), margin)
    out.min_dominance_margin = float(margin.min())

    dm = dh_dm(FF, MM)
    flag("dh_dm_positive", ~(dm > 0), dm)
    flag("dh_dm_ge_p", dm < p_poly(FF), dm - p_poly(FF))
    out.min_dh_dm = float(dm.min())

    step = h_poly(FF, MM + 1) - h
    flag("h_increasing_in_m", ~(step > 0), step)

    # closed-form minima certify the continuum, the grid guards transcription
    hc, pc = h_critical_point(4), p_critical_point()
    out.h_critical, out.p_critical = hc, pc
    for name, cp in (("h4_critical", hc), ("p_critical", pc)):
        if not (0 < cp.location <= 1 and cp.is_minimum and cp.value > 0):
            out.record(name, cp.location, 4, cp.value)
        if abs(cp.derivative) > 1e-12:
            out.record(name + "_stationary", cp.location, 4, cp.derivative)
    grid_min_h4 = float(h_poly(F, 4).min())
    if grid_min_h4 < hc.value - 1e-12:
        out.record("h4_grid_below_critical", F[np.argmin(h_poly(F, 4))], 4, grid_min_h4)
    grid_min_p = float(p_poly(F).min())
    if grid_min_p < pc.value - 1e-12:
        out.record("p_grid_below_critical", F[np.argmin(p_poly(F))], 4, grid_min_p)

    if identity_samples:
        rng = np.random.default_rng(seed)
        Fr = rng.uniform(0.0, 1.0, identity_samples)
        mr = rng.integers(2, m_max + 1, identity_samples).astype(float)
        r = np.abs(g_poly(Fr, mr) - Fr * h_poly(Fr, mr))
        bad = r > identity_rtol * _identity_scale(Fr, mr)
        for j in np.flatnonzero(bad):
            out.record("g_equals_F_h_random", Fr[j], mr[j], r[j])
        out.identity_samples = identity_samples
        out.max_identity_residual = max(out.max_identity_residual, float(r.max()))

    for m in (2, 3):
        out.negative_control[m] = int(np.count_nonzero(refined_bound(m, F) <= linear_bound(m, F)))
    return out
