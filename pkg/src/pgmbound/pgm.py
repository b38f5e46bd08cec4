"""Worst-case Pretty Good Measurement.

For states ``v_i`` with frame operator ``S = sum_i |v_i><v_i|`` the PGM has
elements ``E_i = S^{-1/2} |v_i><v_i| S^{-1/2}``. On an ensemble whose span is
smaller than the ambient space the elements sum to the projector onto that
span rather than the identity.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from . import numerics
from ._validation import check_states
from .ensemble import StateEnsemble, _as_ensemble

__all__ = [
    "Povm",
    "DiscriminationReport",
    "ProofDiagnostics",
    "build_pgm",
    "pgm_success",
    "proof_diagnostics",
    "PrettyGoodMeasurement",
]

PROB_ATOL = 1e-9


def clamp_probabilities(p, atol=PROB_ATOL):
    """Clip to [0, 1] after checking nothing is out of range by more than ``atol``."""
    p = np.asarray(p, dtype=float)
    lo, hi = float(p.min()), float(p.max())
    if lo < -atol or hi > 1.0 + atol:
        raise ArithmeticError(f"probability outside [0, 1] beyond rounding: [{lo!r}, {hi!r}]")
    return np.clip(p, 0.0, 1.0)


@dataclass(frozen=True)
class Povm:
    """A list of PSD effects together with the projector they sum to."""

    elements: tuple
    support: np.ndarray

    def __len__(self):
        return len(self.elements)

    def total(self):
        return np.sum(self.elements, axis=0)

    def completeness_residual(self):
        """Max-abs entry of ``sum(elements) - support``."""
        return float(np.max(np.abs(self.total() - self.support)))

    def min_eigenvalue(self):
        return min(float(np.linalg.eigvalsh(E)[0]) for E in self.elements)

    def probabilities(self, psi):
        psi = np.asarray(psi)
        return np.array([np.real(np.vdot(psi, E @ psi)) for E in self.elements])


@dataclass(frozen=True)
class DiscriminationReport:
    per_state: np.ndarray
    worst_case: float
    argmin_index: int

    @classmethod
    def from_per_state(cls, p):
        p = clamp_probabilities(p)
        k = int(np.argmin(p))
        return cls(per_state=p, worst_case=float(p[k]), argmin_index=k)


class _PgmData(NamedTuple):
    sqrt_inv: np.ndarray
    vectors: np.ndarray  # rows S^{-1/2} v_i
    support: np.ndarray


def _pgm_data(e, cutoff=None):
    S = e.frame_operator()
    dec = numerics.eigh(S)
    R = numerics.spectral_power(dec, -0.5, cutoff)
    P = numerics.support_projector(dec, cutoff)
    W = (R @ e.columns).T
    return _PgmData(R, W, P)


def build_pgm(e, cutoff=None):
    """Materialize the PGM effects ``E_i = |w_i><w_i|`` with ``w_i = S^{-1/2} v_i``."""
    e = _as_ensemble(e)
    data = _pgm_data(e, cutoff)
    elements = tuple(np.outer(w, w.conj()) for w in data.vectors)
    return Povm(elements=elements, support=data.support)


def pgm_success(e, cutoff=None):
    """Exact per-state and worst-case PGM success probabilities.

    ``p_i = <v_i|E_i|v_i> = <v_i|S^{-1/2}|v_i>**2``, computed without forming
    the effects.
    """
    e = _as_ensemble(e)
    data = _pgm_data(e, cutoff)
    diag = np.einsum("id,id->i", e.states.conj(), data.vectors)
    return DiscriminationReport.from_per_state(np.real(diag) ** 2)


class ProofDiagnostics(NamedTuple):
    """Per-state traces behind the Cauchy-Schwarz argument.

    With ``A_i = S^{1/4} M_i S^{1/4}`` (``M_i`` the sequential effect) and
    ``B_i = S^{-1/4} |v_i><v_i| S^{-1/4}``.
    """

    trA2: np.ndarray
    trB2: np.ndarray
    trAB: np.ndarray


def proof_diagnostics(e, sequential=None, cutoff=None):
    """``Tr(A_i^2)``, ``Tr(B_i^2)`` and ``Tr(A_i B_i)`` for every state."""
    from .sma import build_sequential

    e = _as_ensemble(e)
    ops = sequential if sequential is not None else build_sequential(e)
    dec = numerics.eigh(e.frame_operator())
    S_q = numerics.spectral_power(dec, 0.25, cutoff)
    S_mq = numerics.spectral_power(dec, -0.25, cutoff)
    trA2, trB2, trAB = (np.empty(e.m) for _ in range(3))
    for i in range(e.m):
        A = S_q @ ops.effects[i] @ S_q
        b = S_mq @ e.states[i]
        B = np.outer(b, b.conj())
        # A, B Hermitian: Tr(A^2) = ||A||_F^2, Tr(AB) = <b|A|b>
        trA2[i] = np.sum(np.abs(A) ** 2)
        trB2[i] = np.sum(np.abs(B) ** 2)
        trAB[i] = np.real(np.vdot(b, A @ b))
    return ProofDiagnostics(trA2, trB2, trAB)


class PrettyGoodMeasurement(ClassifierMixin, BaseEstimator):
    """Pretty Good Measurement as a probabilistic classifier of pure states.

    ``fit`` takes the ensemble (rows of ``X`` are states, the row index is
    the class label). ``predict_proba`` returns, for each input row ``x``,
    the Born probabilities ``<x|E_j|x>`` of the ``m`` outcomes. Rows sum to
    ``<x|P|x>`` where ``P`` is the support projector, i.e. to 1 for inputs in
    the span of the training states.

    Parameters
    ----------
    cutoff : float, default=1e-10
        Relative eigenvalue threshold for the pseudo-inverse square root.
    normalize : bool, default=False
        Rescale rows of ``X`` to unit norm instead of rejecting them.
    """

    def __init__(self, cutoff=1e-10, normalize=False):
        self.cutoff = cutoff
        self.normalize = normalize

    def fit(self, X, y=None):
        X = check_states(X, normalize=self.normalize)
        self.ensemble_ = StateEnsemble(X)
        data = _pgm_data(self.ensemble_, self.cutoff)
        self.sqrt_inv_ = data.sqrt_inv
        self.measurement_vectors_ = data.vectors
        self.support_ = data.support
        self.classes_ = np.arange(X.shape[0])
        self.n_features_in_ = X.shape[1]
        return self

    def _check_input(self, X):
        check_is_fitted(self)
        X = check_states(X, normalize=self.normalize)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} amplitudes per state, the measurement was fit on "
                f"{self.n_features_in_}"
            )
        return X

    def predict_proba(self, X):
        X = self._check_input(X)
        amps = X @ self.measurement_vectors_.conj().T
        return np.abs(amps) ** 2

    def predict(self, X):
        P = self.predict_proba(X)
        return self.classes_[np.argmax(P, axis=1)]

    def score(self, X, y=None, sample_weight=None):
        """Worst-case success probability over the rows of ``X``.

        ``y`` gives the correct outcome of each row and defaults to the row
        index, so ``score(X_train)`` is the worst-case PGM success.
        """
        P = self.predict_proba(X)
        y = np.arange(P.shape[0]) if y is None else np.asarray(y)
        return float(np.min(P[np.arange(P.shape[0]), y]))

    @property
    def povm_(self):
        check_is_fitted(self)
        W = self.measurement_vectors_
        return Povm(tuple(np.outer(w, w.conj()) for w in W), self.support_)

    def report(self):
        check_is_fitted(self)
        return pgm_success(self.ensemble_, self.cutoff)
