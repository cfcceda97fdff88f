"""Quantum and classical kicked top: Floquet spectra, scars, and qubit entanglement."""

from .classical import (NORTH_POLE, SOUTH_POLE, SphereAngles, SpherePoint, StabilityReport,
                        bifurcation_scan, classical_step, find_fixed_point, stability,
                        tangent_jacobian, to_angles, trajectory)
from .entanglement import (EntanglementReport, bipartite_Q, collective_moments, concurrence,
                           entanglement_of_formation, entanglement_report, negativity,
                           reduce_one_qubit, reduce_two_qubit)
from .floquet import (FloquetOperator, FloquetSpectrum, ScarRecord, SpectralDensity, build_floquet,
                      diagonalize, husimi_map, husimi_overlap, locate_scar, m_step_autocorrelation,
                      propagate, spectral_transform)
from .spin import (SpinSystem, build_j_operators, coherent_state, hermitian_exponential,
                   rotation_operator)

__version__ = "0.1.0"
