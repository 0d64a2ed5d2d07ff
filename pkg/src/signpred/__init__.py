"""Edge sign prediction in signed directed networks from Bayesian node types."""

__version__ = "0.1.0"
