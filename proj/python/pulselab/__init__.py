"""Python access to the pulselab core."""

from ._core import (
    ConfigError,
    NumericalError,
    catalog_json,
    catalog_names,
    evaluate_i1,
    evaluate_i32,
    first_order_integrals,
    frobenius,
    nogo_report,
    scaling,
    tau_p,
)

__all__ = [
    "ConfigError",
    "NumericalError",
    "catalog_json",
    "catalog_names",
    "evaluate_i1",
    "evaluate_i32",
    "first_order_integrals",
    "frobenius",
    "nogo_report",
    "scaling",
    "tau_p",
]
