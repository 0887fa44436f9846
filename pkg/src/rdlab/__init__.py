"""rdlab: Fourier calculus and certified norm bounds on reduced crossed products.

A library and command-line workbench for finitely supported elements of
crossed products of matrix algebras by word groups: exact group normal
forms and sphere enumeration, geodesic-prefix factorization checks with
solution counting, the twisted convolution calculus, compression-based
certified lower bounds for operator norms, and seeded experiment runners
for the rapid-decay inequality family.
"""

__version__ = "0.1.0"

from .groups import (
    FreeAbelian,
    FreeGroup,
    FreeProductCyclic,
    GroupElement,
    SphereIndex,
    ball_index,
    cancellation_number,
    enumerate_spheres,
    growth_fit,
    parse_group_spec,
)

__all__ = [
    "FreeAbelian",
    "FreeGroup",
    "FreeProductCyclic",
    "GroupElement",
    "SphereIndex",
    "ball_index",
    "cancellation_number",
    "enumerate_spheres",
    "growth_fit",
    "parse_group_spec",
    "__version__",
]
