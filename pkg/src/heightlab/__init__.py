"""Heights on model varieties and empirical fraction-limit classification."""

__version__ = "0.1.0"
