"""Pessimistic offline RL for linear MDPs and zero-sum linear Markov games."""

from ._linorl import *  # noqa: F401,F403
from ._linorl import __doc__  # noqa: F401
