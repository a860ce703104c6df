"""Exact wavefunction machinery for a time-dependent SU(2) Gross-Neveu model.

Modules
-------
spin          dense spin-1/2 tensor algebra
special       complex Gamma function
scattering    couplings, S- and R-matrices, Yang-Baxter and matching checks
wavefunction  orderings, amplitudes and position-space evaluation
transport     periodic-boundary transport and constant-coupling transfer matrices
qkz           phase/spin separation, qKZ operators and Jackson-sum solutions
cli           verification harness (``qkz-kit``)
"""

__version__ = "0.1.0"
