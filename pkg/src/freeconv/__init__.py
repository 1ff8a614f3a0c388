"""Numerical free probability: free convolution through R-transforms."""

__version__ = "0.1.0"
