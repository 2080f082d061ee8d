"""Finite-precision computations around formal group laws, p-adic arithmetic
and the invariant-ring presentations of the degree-zero Morava E-theory of
finite general linear groups."""

__version__ = "0.1.0"
