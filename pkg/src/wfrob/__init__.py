"""Frobenius manifolds on orbit spaces of extended affine Weyl groups of type A_l.

Exact pipeline: invariants and intersection form (``orbit``), flat coordinates
and potential (``frobenius``), independent checks (``verify``), and the numeric
Landau-Ginzburg comparison (``lg``).
"""

from .orbit import GroupSpec, InvalidSpec, compute_orbit
from .frobenius import build_frobenius

__all__ = ["GroupSpec", "InvalidSpec", "compute_orbit", "build_frobenius"]
__version__ = "0.1.0"
