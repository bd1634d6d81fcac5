"""poisson-forge: symbolic-numeric checks for explicit symplectic groupoids
and resolutions of symplectic-leaf closures."""

__version__ = "0.1.0"
