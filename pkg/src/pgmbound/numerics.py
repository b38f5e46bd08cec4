"""Dense Hermitian linear algebra for small operators.

Everything the measurement constructions need reduces to functions of a
Hermitian matrix evaluated through its eigendecomposition: fractional
powers of the frame operator, support projectors and PSD tests.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import NotHermitianError, NotPSDError, check_hermitian

__all__ = [
    "EigenDecomposition",
    "SpectralCutoff",
    "NotHermitianError",
    "NotPSDError",
    "eigh",
    "spectral_power",
    "support_projector",
    "is_psd",
]


@dataclass(frozen=True)
class SpectralCutoff:
    """Relative threshold below which eigenvalues count as exactly zero.

    An eigenvalue ``lam`` is dropped when ``|lam| <= relative_threshold * lam_max``.
    A relative rule keeps the rank decision stable as the frame operator
    grows with the number of states.
    """

    relative_threshold: float = 1e-10

    def __post_init__(self):
        if not 0.0 < self.relative_threshold < 1.0:
            raise ValueError(
                f"relative_threshold must lie in (0, 1), got {self.relative_threshold!r}"
            )

    def absolute(self, eigenvalues):
        eigenvalues = np.asarray(eigenvalues)
        if eigenvalues.size == 0:
            return 0.0
        return self.relative_threshold * float(np.max(np.abs(eigenvalues)))


DEFAULT_CUTOFF = SpectralCutoff()


def _as_cutoff(cutoff):
    if cutoff is None:
        return DEFAULT_CUTOFF
    if isinstance(cutoff, SpectralCutoff):
        return cutoff
    return SpectralCutoff(float(cutoff))


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral data ``H = V diag(eigenvalues) V^dagger``, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    def reconstruct(self):
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T

    def apply(self, f):
        """Return ``V diag(f(eigenvalues)) V^dagger``."""
        V = self.eigenvectors
        vals = np.asarray(f(self.eigenvalues))
        out = (V * vals) @ V.conj().T
        return 0.5 * (out + out.conj().T)


def eigh(H):
    """Eigendecomposition of a Hermitian matrix.

    Raises
    ------
    NotHermitianError
        If ``H`` departs from Hermitian symmetry beyond 1e-12 (max-abs,
        scaled by the largest entry when that exceeds one).
    """
    H = check_hermitian(H)
    # symmetrize so LAPACK sees exactly the matrix we validated
    w, V = np.linalg.eigh(0.5 * (H + H.conj().T))
    w.setflags(write=False)
    V.setflags(write=False)
    return EigenDecomposition(w, V)


def _decomposition(H):
    return H if isinstance(H, EigenDecomposition) else eigh(H)


def spectral_power(H, p, cutoff=None):
    """Pseudo-power ``H**p`` of a Hermitian operator.

    Eigenvalues within the cutoff of zero are clamped to exactly zero and
    stay zero under any power, so negative ``p`` yields the Moore-Penrose
    style pseudo-inverse power on the support of ``H``.

    Parameters
    ----------
    H : array_like or EigenDecomposition
        Hermitian matrix, or its precomputed decomposition.
    p : float
        Exponent.
    cutoff : SpectralCutoff or float, optional
        Relative zero threshold, default ``1e-10``.

    Raises
    ------
    NotPSDError
        If a fractional power is requested of an operator whose spectrum
        has an eigenvalue below ``-cutoff``.
    """
    dec = _decomposition(H)
    cut = _as_cutoff(cutoff)
    lam = np.array(dec.eigenvalues, dtype=float)
    thr = cut.absolute(lam)
    zero = np.abs(lam) <= thr
    p = float(p)
    if not float(p).is_integer() and np.any(lam[~zero] < 0):
        raise NotPSDError(
            f"fractional power {p:g} of an operator with eigenvalue {lam.min():.6e} "
            f"below the zero threshold -{thr:.3e}"
        )
    vals = np.zeros_like(lam)
    vals[~zero] = lam[~zero] ** p
    return dec.apply(lambda _: vals)


def support_projector(H, cutoff=None):
    """Orthogonal projector onto the span of eigenvectors with nonzero eigenvalue."""
    dec = _decomposition(H)
    lam = dec.eigenvalues
    thr = _as_cutoff(cutoff).absolute(lam)
    return dec.apply(lambda w: (np.abs(w) > thr).astype(float))


def rank(H, cutoff=None):
    dec = _decomposition(H)
    thr = _as_cutoff(cutoff).absolute(dec.eigenvalues)
    return int(np.count_nonzero(np.abs(dec.eigenvalues) > thr))


def is_psd(H, tol=1e-9):
    """True iff the smallest eigenvalue of ``H`` is at least ``-tol``."""
    dec = _decomposition(H)
    return bool(dec.eigenvalues[0] >= -tol)
