"""Stealthy false data injection attacks on DC state estimation, and an
autoencoder detector for them."""

from pkgutil import extend_path

# lets a build tree's compiled module sit beside the source package
__path__ = extend_path(__path__, __name__)

from ._core import (  # noqa: E402
    AttackPlan,
    AutoencoderModel,
    GridModel,
    InfeasibleError,
    InputError,
    NumericalError,
    bdd_test,
    brute_force_min_attack,
    chi_squared_cdf,
    chi_squared_quantile,
    cli,
    compute_threshold,
    craft_attack,
    generate_scenarios,
    load_grid,
    load_model,
    measure,
    min_resource_attack,
    reconstruction_errors,
    residual,
    roc_curve,
    split_sizes,
    threshold_sweep,
    train_autoencoder,
    wls_estimate,
)

__all__ = [
    "AttackPlan",
    "AutoencoderModel",
    "GridModel",
    "InfeasibleError",
    "InputError",
    "NumericalError",
    "bdd_test",
    "brute_force_min_attack",
    "chi_squared_cdf",
    "chi_squared_quantile",
    "cli",
    "compute_threshold",
    "craft_attack",
    "generate_scenarios",
    "load_grid",
    "load_model",
    "measure",
    "min_resource_attack",
    "reconstruction_errors",
    "residual",
    "roc_curve",
    "split_sizes",
    "threshold_sweep",
    "train_autoencoder",
    "wls_estimate",
]
