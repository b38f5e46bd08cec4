"""Pure-state ensembles, their Gram matrices and pairwise overlaps."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import numerics
from ._validation import NotPSDError, check_hermitian, check_states

__all__ = [
    "StateEnsemble",
    "gram",
    "max_pairwise_fidelity",
    "max_pairwise_overlap",
    "haar_random",
    "from_gram",
    "equal_overlap_ensemble",
    "trine_ensemble",
    "read_ensemble",
    "write_ensemble",
    "ensemble_to_dict",
    "ensemble_from_dict",
]


@dataclass(frozen=True, eq=False)
class StateEnsemble:
    """``m`` unit vectors in ``C^d``, stored as the rows of ``states``.

    The array is copied and frozen on construction; every row is checked
    to have unit norm within 1e-12.
    """

    states: np.ndarray

    def __post_init__(self):
        X = check_states(self.states)
        if X.shape[0] < 2:
            raise ValueError(f"an ensemble needs at least 2 states, got {X.shape[0]}")
        X.setflags(write=False)
        object.__setattr__(self, "states", X)

    @classmethod
    def from_unnormalized(cls, X):
        return cls(check_states(X, normalize=True))

    @property
    def m(self):
        return self.states.shape[0]

    @property
    def d(self):
        return self.states.shape[1]

    def __len__(self):
        return self.m

    def __getitem__(self, i):
        return self.states[i]

    def __repr__(self):
        return f"StateEnsemble(m={self.m}, d={self.d})"

    @property
    def columns(self):
        """The ``d x m`` matrix whose columns are the states."""
        return self.states.T

    def frame_operator(self):
        """``S = sum_i |v_i><v_i|``."""
        V = self.columns
        S = V @ V.conj().T
        return 0.5 * (S + S.conj().T)

    def projector(self, i):
        v = self.states[i]
        return np.outer(v, v.conj())

    def transformed(self, U):
        """Apply one matrix ``U`` to every state (a unitary keeps norms)."""
        return StateEnsemble((np.asarray(U) @ self.columns).T)

    def permuted(self, order):
        return StateEnsemble(self.states[list(order)])


def _as_ensemble(e):
    return e if isinstance(e, StateEnsemble) else StateEnsemble(e)


def gram(e):
    """Gram matrix ``G[i, j] = <v_i|v_j>``."""
    X = _as_ensemble(e).states
    G = X.conj() @ X.T
    return 0.5 * (G + G.conj().T)


def _off_diagonal_abs(e):
    G = gram(e)
    A = np.abs(G)
    np.fill_diagonal(A, 0.0)
    return A


def max_pairwise_overlap(e):
    """``max_{i != j} |<v_i|v_j>|``."""
    return float(min(1.0, _off_diagonal_abs(e).max()))


def max_pairwise_fidelity(e):
    """``F = max_{i != j} |<v_i|v_j>|**2``."""
    A = _off_diagonal_abs(e)
    return float(min(1.0, (A * A).max()))


def haar_random(d, m, seed=None):
    """``m`` independent Haar-random pure states in ``C^d``.

    Normalized i.i.d. standard complex Gaussian vectors; the same
    ``(d, m, seed)`` always gives the same ensemble.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((m, d, 2))
    X = z[..., 0] + 1j * z[..., 1]
    return StateEnsemble.from_unnormalized(X)


def from_gram(G, target_dim=None, cutoff=None, diag_atol=1e-9):
    """Realize states whose Gram matrix is ``G``.

    Factorizes ``G = U diag(lam) U^dagger`` and takes the rows of
    ``diag(sqrt(lam)) U^dagger`` restricted to the nonzero modes as
    coordinates, so the returned dimension is ``rank(G)`` unless
    ``target_dim`` pads it with zeros.
    """
    G = check_hermitian(G, name="Gram matrix")
    diag = np.real(np.diag(G))
    if np.max(np.abs(diag - 1.0)) > diag_atol or np.max(np.abs(np.imag(np.diag(G)))) > diag_atol:
        raise ValueError(f"Gram matrix diagonal must be 1, got {np.diag(G)!r}")
    dec = numerics.eigh(G)
    lam = dec.eigenvalues
    thr = numerics._as_cutoff(cutoff).absolute(lam)
    if lam[0] < -max(thr, 1e-12):
        raise NotPSDError(
            f"Gram matrix is not PSD: eigenvalue {lam[0]:.6e} is negative"
        )
    keep = lam > thr
    r = int(np.count_nonzero(keep))
    coords = np.sqrt(lam[keep])[:, np.newaxis] * dec.eigenvectors[:, keep].conj().T
    d = r if target_dim is None else int(target_dim)
    if d < r:
        raise ValueError(f"target_dim={d} is smaller than rank(G)={r}")
    V = np.zeros((d, G.shape[0]), dtype=complex)
    V[:r] = coords
    return StateEnsemble.from_unnormalized(V.T)


def equal_overlap_ensemble(m, c):
    """``m`` states with every pairwise inner product equal to real ``c``."""
    if not 0.0 <= c < 1.0:
        raise ValueError(f"overlap c must lie in [0, 1), got {c!r}")
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    G = (1.0 - c) * np.eye(m) + c * np.ones((m, m))
    return from_gram(G)


def trine_ensemble():
    """Three real qubit states at 120 degrees; all overlaps equal -1/2."""
    angles = 2.0 * np.pi * np.arange(3) / 3.0
    return StateEnsemble(np.stack([np.cos(angles), np.sin(angles)], axis=1))


# -- file format -------------------------------------------------------------

def ensemble_to_dict(e):
    e = _as_ensemble(e)
    return {
        "d": e.d,
        "m": e.m,
        "states": [[[float(z.real), float(z.imag)] for z in row] for row in e.states],
    }


def ensemble_from_dict(obj):
    try:
        d, m, rows = int(obj["d"]), int(obj["m"]), obj["states"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed ensemble object: {exc}") from None
    if len(rows) != m:
        raise ValueError(f"'m' is {m} but {len(rows)} states are listed")
    X = np.empty((m, d), dtype=complex)
    for i, row in enumerate(rows):
        if len(row) != d:
            raise ValueError(f"state {i} has {len(row)} amplitudes, expected d={d}")
        for j, pair in enumerate(row):
            if len(pair) != 2:
                raise ValueError(f"amplitude ({i}, {j}) must be a [re, im] pair")
            X[i, j] = complex(float(pair[0]), float(pair[1]))
    return StateEnsemble(X)


def write_ensemble(e, path):
    # json writes floats with repr, the shortest string that round-trips
    Path(path).write_text(json.dumps(ensemble_to_dict(e)) + "\n", encoding="utf-8")


def read_ensemble(path):
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from None
    return ensemble_from_dict(obj)
