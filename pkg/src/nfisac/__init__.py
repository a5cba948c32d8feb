"""Energy-efficient hybrid beamfocusing for near-field sensing and communication.

Subpackages and modules:

- geometry: arrays, steering vectors, spherical-wave channels
- metrics: SINR, rate, power, energy efficiency
- bounds: point-target and extended-target estimation bounds
- conic: semidefinite programming layer (modeling + ADMM solver)
- sca: successive convex approximation of the beamfocusing designs
- hybrid: analog/digital factorization of digital beamformers
- estimators: echo simulation, grid ML, subspace, and linear MMSE baselines
- harness, cli: scenario sweeps, result tables, command line front end
"""

__version__ = "0.1.0"
