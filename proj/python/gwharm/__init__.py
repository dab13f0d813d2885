"""Random walks on weighted Galton-Watson trees: conductances, regenerations and
the dimension of harmonic measure."""

from ._core import (
    EnvironmentLaw,
    MarginRefused,
    NotRealizedError,
    __version__,
    beta_adaptive,
    beta_profile,
    beta_truncated,
    experiment_names,
    harm_first_step,
    preset,
    preset_examples,
    psi,
    run_experiment,
    run_walk,
    transience_margin,
    tree_key,
)

__all__ = [
    "EnvironmentLaw",
    "MarginRefused",
    "NotRealizedError",
    "__version__",
    "beta_adaptive",
    "beta_profile",
    "beta_truncated",
    "experiment_names",
    "harm_first_step",
    "preset",
    "preset_examples",
    "psi",
    "run_experiment",
    "run_walk",
    "transience_margin",
    "tree_key",
]
