"""Probability aggregation clustering (PAC), online probability aggregation (OPA), baselines and metrics."""

from ._probagg import (
    ConfigError,
    DataError,
    SolverError,
    accuracy,
    ari,
    fcm,
    kl_loss,
    kmeans,
    make_blobs,
    nmi,
    objective_jpac,
    online_train,
    opa_targets,
    pac_fit,
    pac_fit_jacobi,
    pairwise_distances,
    update_row,
)

__all__ = [
    "ConfigError",
    "DataError",
    "SolverError",
    "accuracy",
    "ari",
    "fcm",
    "kl_loss",
    "kmeans",
    "make_blobs",
    "nmi",
    "objective_jpac",
    "online_train",
    "opa_targets",
    "pac_fit",
    "pac_fit_jacobi",
    "pairwise_distances",
    "update_row",
]
