"""Capital-deployment engine: threshold policies from backward induction,
validated by Monte Carlo fund simulation."""

__version__ = "0.1.0"
