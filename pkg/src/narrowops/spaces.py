"""Alias module: the F-norm machinery lives in :mod:`narrowops.norms`."""

from .norms import (  # noqa: F401
    TargetNorm,
    coefficient_sup_norm,
    dual_unit_functional,
    fnorm,
    fnorm_many,
    lp_norm,
    sup_norm,
)
