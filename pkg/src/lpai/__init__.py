"""Light-pulse atom interferometry in quadratic potentials."""
__version__ = "0.1.0"
