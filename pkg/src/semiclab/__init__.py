"""Numerical companion for complex-metaplectic Toeplitz quantization, exchange statistics,
sphere quantization, oscillator frequency operators and dilation dynamics."""

__version__ = "0.1.0"

from .numcore import GridSpec, complex_gamma, hermite_basis  # noqa: F401
