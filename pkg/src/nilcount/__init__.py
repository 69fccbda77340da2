"""nilcount: lattice point counting in anisotropic homogeneous-norm balls on
step-two nilpotent groups, with the spectral and phase-function toolkit used
to probe the counting discrepancy numerically."""

__version__ = "0.1.0"
