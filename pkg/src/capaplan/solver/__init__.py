"""Solver subprocess client and the bundled SMT-LIB2 fragment solver."""
