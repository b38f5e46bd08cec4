"""Worst-case discrimination of pure states with the Pretty Good Measurement
and the sequential projective measurement, plus the bounds relating them."""
from .bounds import (
    BoundReport,
    eq3_lower_bound,
    evaluate,
    linear_bound,
    refined_bound,
    verify_appendix,
)
from .ensemble import (
    StateEnsemble,
    equal_overlap_ensemble,
    from_gram,
    gram,
    haar_random,
    max_pairwise_fidelity,
    max_pairwise_overlap,
    read_ensemble,
    trine_ensemble,
    write_ensemble,
)
from .numerics import SpectralCutoff, eigh, is_psd, spectral_power
from .pgm import PrettyGoodMeasurement, build_pgm, pgm_success, proof_diagnostics
from .sma import (
    SequentialMeasurement,
    build_sequential,
    exact_distribution,
    good_decomposition,
    monte_carlo,
    sm_success,
)

__version__ = "0.1.0"
