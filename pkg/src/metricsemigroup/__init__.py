"""Inverse semigroups of quasi-isometry classes of metrics on doubles of finite spaces."""

from .extcore import (
    INF,
    BridgeMetric,
    DoubleMetric,
    FiniteSpace,
    MetricError,
    MetricViolation,
    QIWitness,
    adjoint,
    almost_isometry_metric,
    compose,
    ext,
    idempotent_criterion,
    point_metric,
    qi_check,
    qi_fit,
    subset_metric,
    unit_metric,
    validate_double,
)

__all__ = [
    "INF",
    "BridgeMetric",
    "DoubleMetric",
    "FiniteSpace",
    "MetricError",
    "MetricViolation",
    "QIWitness",
    "adjoint",
    "almost_isometry_metric",
    "compose",
    "ext",
    "idempotent_criterion",
    "point_metric",
    "qi_check",
    "qi_fit",
    "subset_metric",
    "unit_metric",
    "validate_double",
]

__version__ = "0.1.0"
