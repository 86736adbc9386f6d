"""majoflow: Lindblad open-system dynamics with majorization-monotonicity
certificates.

The library simulates Markovian master equations, decides unitality
(L(I) = 0, the criterion for dynamics that only ever mix states), and
produces checkable certificates: doubly stochastic matrices linking the
spectra of states along a trajectory, plus entropy and purity monotone
traces.
"""

__version__ = "0.1.0"

from .channel import (KrausSet, MonotoneCertificate, SuperOperator,
                      channel_from_generator, check_trace_preserving,
                      check_unital_kraus, choi_matrix, kraus_from_choi,
                      stochastic_matrix, verify_monotone)
from .lindblad import (GksMatrix, HamiltonianSchedule, LindbladGenerator,
                       Trajectory, apply_dissipator, check_unital,
                       eigenvalue_flow, evolve, generator_fingerprint,
                       liouville_matrix, make_generator)
from .majorization import (BirkhoffDecomposition, apply_doubly_stochastic,
                           birkhoff_decompose, convex_sum_compare, majorizes,
                           mix_unitary_conjugations, schur_horn_construct,
                           schur_horn_diagonal)
from .operator_core import (DensityMatrix, OperatorBasis,
                            SpectralDecomposition, Tolerances, density,
                            eig_hermitian, gell_mann_basis, purity,
                            validate_density, von_neumann_entropy)
from .single_spin import (ControlSchedule, SpinGks, adjoint_so3, lambda_rate,
                          reachable_interval, simulate_controlled, spin_gks,
                          transverse_relaxation_demo)
