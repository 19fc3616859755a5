"""Desk-scale calculus for Bernstein numbers of Sobolev-Lorentz embeddings."""

__version__ = "0.1.0"
