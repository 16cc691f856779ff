"""locckit: a process-theory engine for LOCC state discrimination.

The package provides two concrete process models (non-negative matrices and
classically indexed Choi families), generic process capabilities (composition,
tensor, discarding, time-reversal, purity), multipartite state oracles, and an
LOCC protocol layer with constructive distinguishers, protocol reversal, and
refutation tooling.
"""

from .classical import (ClassicalProcess, Process, delta_state,
                        discard_classical, identity_resolution)
from .errors import (ChoiValidationError, DimensionMismatchError,
                     EntangledMemberError, FamilyValidationError, LoccKitError,
                     NotNormalisedError, ProtocolDirectionError,
                     ScenarioFormatError, UnknownProtocolError,
                     WireMismatchError, ZeroProcessError)
from .quantum import (ChoiMatrix, DensityState, HybridProcess, apply_to_state,
                      cp_from_kraus, dagger_quantum, discard_hybrid,
                      embed_classical, maximally_mixed_feed, prepare_pure)
from .states import (FamilyReport, OrthonormalFamily, PartyPartition,
                     ProductFactorization, PureState, check_family,
                     product_factorize, schmidt_rank)
from .systems import (SCALAR_ONE, ClassicalSystem, QuantumSystem, Scalar,
                      SystemType)
from .theory import (LinearCombination, approx_eq, compose, dagger, discard,
                     identity, impurity_witness, is_normalised, is_pure,
                     is_unital, linear_combine, max_difference,
                     normalisation_defect, reversed_discard, tensor,
                     unitality_defect)

__version__ = "0.1.0"
