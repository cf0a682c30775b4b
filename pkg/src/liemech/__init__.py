"""liemech: geometric mechanics on Lie algebroids.

Classical Hamiltonian flow lives on the prolongation of an algebroid over
its dual bundle; quantum mechanics is instantiated twice, as state dynamics
on the realified projective space and as operator dynamics on the dual of
the unitary algebra, with numerical verification that the two pictures and
the variance inequality agree.
"""

from .algebroids import (AlgebroidForm, AlgebroidSection, DualCoordinates,
                         LieAlgebroid, NumericalBlowupError, StructureReport,
                         affine_algebroid, algebroid_from_dict, antisymmetrize,
                         basis_sections, bracket, check_structure_equations,
                         differential, differential_components, dual_poisson,
                         levi_civita, lie_algebra_algebroid, lie_derivative,
                         load_algebroid, named_algebroid, so3_algebroid,
                         tangent_algebroid)
from .prolongation import (ProlongationBasis, ProlongationPoint,
                           SymplecticSectionData, anchor_vector_field,
                           canonical_two_form, differential_of_function,
                           hamiltonian_section, interior_product, liouville,
                           liouville_pairing, prolongation_algebroid,
                           prolongation_basis, symplectic_poisson,
                           two_form_closedness_residual)
from .flow import (CasimirRegistry, IntegratorConfig, Trajectory, integrate,
                   register_casimir)
from .kahler import (KahlerSpace, QuantumState, RayProjector, chart_coordinates,
                     chart_embedding, fubini_study_metric, geodesic_transition,
                     hermitian_split, ray_projector, realified_operator, realify,
                     unrealify)
from .schrodinger import (Observable, evolve, expectation, expectation_gradient,
                          generator_function, measure, schrodinger_vector_field)
from .heisenberg import (AntiHermitianElement, DualElement, StateFunctional,
                         associator_identity_residual, hamiltonian_derivation,
                         heisenberg_evolve, jordan_associator, jordan_product,
                         lie_product, momentum_map, pairing, tensor_Lambda,
                         tensor_R, to_algebra, to_dual)
from .verify import (EquivalenceReport, UncertaintyReport, UncertaintySample,
                     check_equivalence, check_quadratic_identities,
                     check_uncertainty, geometric_uncertainty_rhs,
                     random_hermitian, random_state)

__version__ = "0.1.0"
