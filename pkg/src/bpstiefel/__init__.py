"""Exact computations for BP-cohomology of complex projective Stiefel manifolds.

Formal group law data for the p-typical Brown-Peterson theory, Adams
operations, the homotopy fixed point spectral sequence for
W(n,k) -> PW(n,k) -> CP^oo, and nonexistence criteria for
S^1-equivariant maps between complex Stiefel manifolds.
"""

__version__ = "0.1.0"
