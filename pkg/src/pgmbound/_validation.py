"""Input checks shared by the functional API and the estimators.

scikit-learn's ``check_array`` refuses complex input, so the state arrays
handled here get their own small set of validators.
"""
from __future__ import annotations

import numbers

import numpy as np

NORM_ATOL = 1e-12
HERMITIAN_ATOL = 1e-12


class NotHermitianError(ValueError):
    """Raised when a matrix is asymmetric beyond tolerance."""


class NotPSDError(ValueError):
    """Raised when an operator has a materially negative eigenvalue."""


def check_square(H, name="matrix"):
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty square 2-D array, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ValueError(f"{name} contains NaN or inf")
    return H.astype(complex, copy=False)


def hermitian_asymmetry(H):
    """Max-abs entry of ``H - H^dagger``."""
    return float(np.max(np.abs(H - H.conj().T)))


def check_hermitian(H, atol=HERMITIAN_ATOL, name="matrix"):
    H = check_square(H, name)
    # absolute tolerance, relaxed for operators whose entries exceed one in size
    scale = max(1.0, float(np.max(np.abs(H))))
    asym = hermitian_asymmetry(H)
    if asym > atol * scale:
        raise NotHermitianError(
            f"{name} is not Hermitian: max |H - H^dagger| = {asym:.3e} "
            f"exceeds {atol * scale:.1e}"
        )
    return H


def check_states(X, normalize=False, atol=NORM_ATOL):
    """Validate an ``(m, d)`` array whose rows are pure-state amplitudes.

    With ``normalize=True`` rows are rescaled to unit norm instead of being
    checked; zero rows are always rejected.
    """
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[np.newaxis, :]
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError(f"expected a 2-D array of state rows, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("state amplitudes contain NaN or inf")
    X = np.array(X, dtype=complex)
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0.0):
        raise ValueError(f"state {int(np.argmin(norms))} is the zero vector")
    if normalize:
        X /= norms[:, np.newaxis]
    else:
        worst = int(np.argmax(np.abs(norms - 1.0)))
        if abs(norms[worst] - 1.0) > atol:
            raise ValueError(
                f"state {worst} has norm {norms[worst]!r}; expected 1 within {atol:g}"
            )
    return X


def check_index(k, m):
    if not isinstance(k, numbers.Integral) or isinstance(k, bool):
        raise TypeError(f"state index must be an integer, got {type(k).__name__}")
    if not 0 <= k < m:
        raise IndexError(f"state index {k} out of range for an ensemble of {m} states")
    return int(k)
