"""Disentangled text representation learning for adversarial robustness.

Thin python surface over the C++ core: exact information-theoretic
quantities, the text attack primitives, the density-ratio MI estimator and
the experiment pipeline (generate / train / augment / evaluate).
"""

from dtrl._core import (  # noqa: F401
    ConfigError,
    ContractError,
    DimensionError,
    ValidationError,
    __version__,
    augment,
    char_candidates,
    entropy,
    evaluate,
    featurize,
    gaussian_mi_estimate,
    generate,
    edit_distance,
    mi_check,
    mutual_information,
    random_joint_triangle_gap,
    train,
    triangle_gap,
    variation_of_information,
)
