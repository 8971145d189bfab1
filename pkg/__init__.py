"""
PLL Toolkit Package

This package contains modules for building, checking and cut-eliminating
parsimonious linear logic proofs and coderivations, and for the lambda-calculus
encodings that run on them.
"""

__version__ = "1.0.0"
