"""Sequential measurement of the projectors ``|v_1><v_1|, ..., |v_m><v_m|``.

Round ``t`` measures ``{Pi_t, I - Pi_t}``. The first ``Pi_t`` click ends the
procedure with guess ``t``; if every round fails, one of the ``m`` states is
guessed uniformly. Outcome ``m`` (zero-based) denotes that all rounds failed.

Kraus operators ``L_t = Pi_t (I - Pi_{t-1}) ... (I - Pi_1)`` and
``L_m = (I - Pi_{m-1}) ... (I - Pi_0)`` give effects ``M_t = L_t^dagger L_t``
which telescope to the identity.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_index, check_states
from .ensemble import StateEnsemble, _as_ensemble
from .pgm import clamp_probabilities

__all__ = [
    "SequentialOperators",
    "OutcomeDistribution",
    "build_sequential",
    "exact_distribution",
    "exact_distributions",
    "sm_success",
    "good_decomposition",
    "monte_carlo",
    "SequentialMeasurement",
]

# collapse onto a branch whose probability is below this is treated as impossible
BRANCH_FLOOR = 1e-14
_MAX_RESAMPLE = 64


@dataclass(frozen=True)
class SequentialOperators:
    kraus: tuple
    effects: tuple

    def __len__(self):
        return len(self.effects)

    def completeness_residual(self):
        total = np.sum(self.effects, axis=0)
        return float(np.max(np.abs(total - np.eye(total.shape[0]))))

    def min_eigenvalue(self):
        return min(float(np.linalg.eigvalsh(M)[0]) for M in self.effects)


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities of the ``m + 1`` outcomes for input state ``input_index``."""

    probs: np.ndarray
    kind: str
    shots: int
    input_index: int
    counts: np.ndarray = field(default=None, repr=False)
    rejected: int = 0

    @property
    def success(self):
        """Probability the final guess is correct, fallback included."""
        m = len(self.probs) - 1
        return float(self.probs[self.input_index] + self.probs[m] / m)

    def standard_errors(self, exact):
        """Binomial standard errors of these frequencies around ``exact``."""
        p = np.asarray(exact.probs if isinstance(exact, OutcomeDistribution) else exact)
        return np.sqrt(p * (1.0 - p) / self.shots)


def build_sequential(e):
    """Kraus operators and effects of the sequential procedure."""
    e = _as_ensemble(e)
    d = e.d
    eye = np.eye(d, dtype=complex)
    R = eye.copy()  # (I - Pi_{t-1}) ... (I - Pi_0)
    kraus, effects = [], []
    for t in range(e.m):
        v = e.states[t]
        # Pi_t R = |v><v| R, formed as an outer product
        L = np.outer(v, v.conj() @ R)
        kraus.append(L)
        R = R - L
    kraus.append(R)
    for L in kraus:
        M = L.conj().T @ L
        effects.append(0.5 * (M + M.conj().T))
    return SequentialOperators(tuple(kraus), tuple(effects))


def exact_distribution(e, k, sequential=None):
    """``probs[t] = <v_k|M_t|v_k>`` for ``t = 0..m``."""
    e = _as_ensemble(e)
    k = check_index(k, e.m)
    ops = sequential if sequential is not None else build_sequential(e)
    v = e.states[k]
    p = np.array([np.real(np.vdot(v, M @ v)) for M in ops.effects])
    if abs(p.sum() - 1.0) > 1e-9:
        raise ArithmeticError(f"outcome probabilities sum to {p.sum()!r}")
    return OutcomeDistribution(clamp_probabilities(p), "exact", 0, k)


def exact_distributions(e, sequential=None):
    """``(m, m+1)`` array, row ``k`` is ``exact_distribution(e, k).probs``."""
    e = _as_ensemble(e)
    ops = sequential if sequential is not None else build_sequential(e)
    return np.stack([exact_distribution(e, k, ops).probs for k in range(e.m)])


def good_decomposition(e, k, sequential=None):
    """``(good1, good2)``: caught by round ``k``, and all rounds failed then guessed ``k``."""
    dist = exact_distribution(e, k, sequential)
    m = len(dist.probs) - 1
    return float(dist.probs[k]), float(dist.probs[m] / m)


def per_state_success(e, sequential=None):
    P = exact_distributions(e, sequential)
    m = P.shape[0]
    return np.diag(P) + P[:, m] / m


def sm_success(e, sequential=None):
    """Worst-case success probability of the sequential procedure."""
    return float(np.min(per_state_success(e, sequential)))


# -- Monte Carlo -------------------------------------------------------------

def _uniforms(seed, stream, start, count, width):
    """Uniform ``[0, 1)`` draws for trajectories ``start .. start+count-1``.

    Trajectory ``j`` of ``stream`` owns a fixed window of Philox counter
    blocks, so its draws do not depend on how trajectories are chunked.
    """
    blocks = -(-width // 4)
    bg = np.random.Philox(key=seed, counter=stream << 192)
    if start:
        bg.advance(int(start) * blocks)
    raw = bg.random_raw(count * blocks * 4).reshape(count, blocks * 4)[:, :width]
    return (raw >> np.uint64(11)).astype(float) * 2.0**-53


def _run(states, k, u):
    """Advance every trajectory through the rounds; return outcomes and a reject mask."""
    m = states.shape[0]
    n = u.shape[0]
    outcome = np.full(n, m, dtype=np.int64)
    alive = np.ones(n, dtype=bool)
    rejected = np.zeros(n, dtype=bool)
    psi = states[k].copy()
    for t in range(m):
        amp = np.vdot(states[t], psi)
        p = min(1.0, abs(amp) ** 2)
        hit = alive & (u[:, t] < p)
        outcome[hit] = t
        alive &= ~hit
        rest = psi - amp * states[t]
        q = float(np.real(np.vdot(rest, rest)))
        if q < BRANCH_FLOOR:
            rejected |= alive
            break
        psi = rest / np.sqrt(q)
        if not alive.any():
            break
    return outcome, rejected


def monte_carlo(e, k, shots, seed, chunk_size=65536):
    """Sample the sequential procedure trajectory by trajectory.

    All surviving trajectories share the collapsed state
    ``(I - Pi_t) psi / ||(I - Pi_t) psi||``, so each round is one Born draw
    per surviving shot. Randomness is counter-based: trajectory ``j`` always
    consumes the same Philox draws, and the result is independent of
    ``chunk_size``. A trajectory that lands on a branch of probability below
    1e-14 is rejected and redrawn from a secondary stream; the number of
    such events is reported in ``rejected``.
    """
    e = _as_ensemble(e)
    k = check_index(k, e.m)
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    seed = int(seed)
    if not 0 <= seed < 2**128:
        raise ValueError("seed must be a non-negative integer below 2**128")
    m = e.m
    counts = np.zeros(m + 1, dtype=np.int64)
    n_rejected = 0
    for start in range(0, shots, chunk_size):
        count = min(chunk_size, shots - start)
        outcome, rej = _run(e.states, k, _uniforms(seed, 0, start, count, m))
        for j in np.flatnonzero(rej):
            for attempt in range(1, _MAX_RESAMPLE + 1):
                n_rejected += 1
                o, r = _run(e.states, k, _uniforms(seed, attempt, start + int(j), 1, m))
                if not r[0]:
                    outcome[j] = o[0]
                    break
            else:
                raise RuntimeError(f"trajectory {start + j} rejected {_MAX_RESAMPLE} times")
        counts += np.bincount(outcome, minlength=m + 1)
    return OutcomeDistribution(
        probs=counts / shots,
        kind="empirical",
        shots=int(shots),
        input_index=k,
        counts=counts,
        rejected=n_rejected,
    )


class SequentialMeasurement(ClassifierMixin, BaseEstimator):
    """The sequential projective procedure as a probabilistic classifier.

    ``predict_proba`` folds the all-fail outcome into a uniform guess, so
    each row is the distribution of the returned label. ``outcome_proba``
    keeps the ``m + 1`` raw outcomes.

    Parameters
    ----------
    random_state : int, default=0
        Seed for :meth:`sample`.
    normalize : bool, default=False
        Rescale rows of ``X`` to unit norm instead of rejecting them.
    """

    def __init__(self, random_state=0, normalize=False):
        self.random_state = random_state
        self.normalize = normalize

    def fit(self, X, y=None):
        X = check_states(X, normalize=self.normalize)
        self.ensemble_ = StateEnsemble(X)
        self.operators_ = build_sequential(self.ensemble_)
        self.classes_ = np.arange(X.shape[0])
        self.n_features_in_ = X.shape[1]
        return self

    def outcome_proba(self, X):
        check_is_fitted(self)
        X = check_states(X, normalize=self.normalize)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} amplitudes per state, expected {self.n_features_in_}"
            )
        E = np.stack(self.operators_.effects)
        return np.real(np.einsum("nd,tde,ne->nt", X.conj(), E, X))

    def predict_proba(self, X):
        P = self.outcome_proba(X)
        m = P.shape[1] - 1
        return P[:, :m] + P[:, m:] / m

    def predict(self, X):
        P = self.predict_proba(X)
        return self.classes_[np.argmax(P, axis=1)]

    def score(self, X, y=None, sample_weight=None):
        """Worst-case probability of returning the label ``y`` (default: row index)."""
        P = self.predict_proba(X)
        y = np.arange(P.shape[0]) if y is None else np.asarray(y)
        return float(np.min(P[np.arange(P.shape[0]), y]))

    def sample(self, k, shots):
        check_is_fitted(self)
        return monte_carlo(self.ensemble_, k, shots, self.random_state)
