"""Higher-order PCA for three-way arrays."""

from ._core import (
    DimensionError,
    Error,
    NumericalError,
    cp_als,
    fpca,
    hooi,
    hosvd,
    simulate,
    sparse_cp_als,
    sparse_cp_tpa,
    sparse_hooi,
    sparse_hosvd,
    tpa,
    variance_explained,
)

__all__ = [
    "DimensionError",
    "Error",
    "NumericalError",
    "cp_als",
    "fpca",
    "hooi",
    "hosvd",
    "simulate",
    "sparse_cp_als",
    "sparse_cp_tpa",
    "sparse_hooi",
    "sparse_hosvd",
    "tpa",
    "variance_explained",
]
