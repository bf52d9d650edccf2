"""Crofton formulae and line-section estimators for Minkowski surface tensors."""

__version__ = "0.1.0"

from .bodies import AffineLine, Ball, Ellipsoid, Empty, Polytope, Segment, VerticalFlat2
from .coeffs import CroftonTable, G_batch, G_s, c_coeff, crofton_rhs, d_matrix
from .ground_truth import QuadratureSpec, crofton_integral_oracle, inverse_crofton_oracle, surface_tensor
from .symtensor import LinearDirection, SymmetricTensor, metric_tensor, sym_product

__all__ = [
    "AffineLine", "Ball", "CroftonTable", "Ellipsoid", "Empty", "G_batch", "G_s", "LinearDirection",
    "Polytope", "QuadratureSpec", "Segment", "SymmetricTensor", "VerticalFlat2", "__version__",
    "c_coeff", "crofton_integral_oracle", "crofton_rhs", "d_matrix", "inverse_crofton_oracle",
    "metric_tensor", "surface_tensor", "sym_product",
]
