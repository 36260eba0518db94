"""Local Whittaker newforms, matrix coefficients and the bookkeeping behind sup-norm bounds for GL2 newforms."""

__version__ = "0.1.0"
