"""Exact normal forms and KAM-tori diagnostics for Nose-type thermostats."""

__version__ = "0.1.0"

from .jets import GradedJet, JetSpace, RationalParam  # noqa: F401
