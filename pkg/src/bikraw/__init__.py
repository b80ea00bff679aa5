"""Bivariate Krawtchouk polynomials and the cumulative Bernoulli trial chain."""

__version__ = "0.1.0"
