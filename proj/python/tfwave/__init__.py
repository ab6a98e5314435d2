"""Spectral and finite-element solvers for the stochastic tempered
time-fractional wave equation, with Monte-Carlo error studies."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
