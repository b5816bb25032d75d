"""Exact homology, cohomology and intersection numbers for constructible sheaves
on triangulated integral affine manifolds with singularities."""

__version__ = "0.1.0"
