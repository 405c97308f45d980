"""Numerical checks of the inequalities behind the converse bounds."""

from .density import (check_product_lower_bound, log_max_tilted_density, log_r_lower_bound,
                      max_tilted_density, product_bound_margin, r_lower_bound)
from .toy import ToyEncoders, TypicalSetParams
from .lemmas import PointCheck, check_lemma3_pointwise, quadrature_lemma_checks_n1

__all__ = [
    "check_product_lower_bound", "log_max_tilted_density", "log_r_lower_bound",
    "max_tilted_density", "product_bound_margin", "r_lower_bound", "ToyEncoders",
    "TypicalSetParams", "PointCheck", "check_lemma3_pointwise", "quadrature_lemma_checks_n1",
]
