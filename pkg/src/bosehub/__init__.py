"""Bose-Hubbard ground states at desk scale.

Exact diagonalization over the full and symmetry-reduced Fock bases, a
neural-network variational baseline, two single-qubit data-re-uploading
circuit Ansaetze, and shot-noise / readout-error-mitigation studies on a
simulated noisy device.
"""

__version__ = "0.1.0"
