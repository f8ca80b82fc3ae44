"""Factorization of matrix groups into products of Grassmannian involutions."""

__version__ = "0.1.0"
