"""Prime number races over F_q[t] and the integers: exact counts, L-functions,
zero-relation checks, and torus-measure predictions of race densities."""

__version__ = "0.1.0"

from .errors import (ComputationError, PrecisionError, PrimeRaceError, ResourceError, RHViolation,
                     RootFindingError, ValidationError)
from .ffpoly import FieldSpec, MonicPoly, parse_poly
from .characters import (Character, DirichletGroup, characters, conductor, is_primitive,
                         unit_group)
from .lfunc import (LPolynomial, ZeroMultiset, ingest_classical_zeros, inverse_roots, l_polynomial,
                    l_polynomials, psi_by_enumeration, psi_from_roots, zero_multiset)
from .relations import (is_rational_multiple_of_pi, relation_lattice, self_sufficient_zeros)
from .torus import (APFunctionSpec, build_subtorus, fourier_mu, hyperplane_mass_bound,
                    sample_measure)
from .density import log_density, natural_density, weighted_prime_density
from .races import RaceSpec, explicit_error, normalized_error, prime_counts, race_report
from .config import RunConfig
