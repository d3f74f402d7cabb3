"""Numerical lab for Fock representations of the self-dual CAR algebra.

Builds finite-dimensional Fock representations, the geometry of a basis
projection against a conjugation-invariant subspace, brute-force modular
data of the vacuum and the twisted duality of local algebras.
"""

from .car_space import BUILTIN, BasisProjection, CarSpace, Instance, InvariantSubspace, e1, e2, e3, random_instance
from .fock_rep import FockSpace, TensorRepresentation, enumerate_pairings, parity_ops, vacuum_expansion
from .pair_geometry import analyze_pair, halmos, kato_identities
from .vn_alg import OperatorAlgebra, algebra_span, check_twisted_duality, commutant, local_algebra

__all__ = [
    "BUILTIN",
    "BasisProjection",
    "CarSpace",
    "FockSpace",
    "Instance",
    "InvariantSubspace",
    "OperatorAlgebra",
    "TensorRepresentation",
    "algebra_span",
    "analyze_pair",
    "check_twisted_duality",
    "commutant",
    "e1",
    "e2",
    "e3",
    "enumerate_pairings",
    "halmos",
    "kato_identities",
    "local_algebra",
    "parity_ops",
    "random_instance",
    "vacuum_expansion",
]
