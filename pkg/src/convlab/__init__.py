"""Discrete measured-group laboratory for convolution-convexity inequalities."""

from .convex import ConvexFn
from .convolution import convolve, convolve_fft, tent_value
from .groups import CosetStructure, GroupModel, coset_structure, make_cyclic, make_finite_cayley, make_product, make_real_grid
from .inequalities import CheckReport, SplitCertificate
from .stepfn import StepFn

__all__ = [
    "CheckReport", "ConvexFn", "CosetStructure", "GroupModel", "SplitCertificate", "StepFn", "convolve", "convolve_fft",
    "coset_structure", "make_cyclic", "make_finite_cayley", "make_product", "make_real_grid", "tent_value",
]
