"""Coefficients of (1+1/x)^x = e(1 - sum d_k/(x+11/12)^k), their verification routes and Carleman weights."""

__version__ = "0.1.0"
