"""
Additive decompositions of the problem operator and the restriction families behind them.
"""

from .partition import (PartitionOfUnity, PartitionProfile, RestrictionFamily, build_strip_partition,
                        restrictions_from_partition)
from .factorized import (FactorizedForm, build_gradient_factor, direction_restrictions, edge_restrictions,
                         factorization_error)
from .space_restriction import SpaceRestrictionFamily, build_space_restrictions
from .operator_family import (FamilyCheck, FamilyKind, OperatorFamily, Side, decompose_chiA, decompose_DRD,
                              decompose_R, generic_family, reconstruction_error, skew_split, split_directional,
                              trivial_family, verify_family)

__all__ = [
    'PartitionOfUnity', 'PartitionProfile', 'RestrictionFamily', 'build_strip_partition',
    'restrictions_from_partition',
    'FactorizedForm', 'build_gradient_factor', 'direction_restrictions', 'edge_restrictions',
    'factorization_error',
    'SpaceRestrictionFamily', 'build_space_restrictions',
    'FamilyCheck', 'FamilyKind', 'OperatorFamily', 'Side', 'decompose_chiA', 'decompose_DRD',
    'decompose_R', 'generic_family', 'reconstruction_error', 'skew_split', 'split_directional',
    'trivial_family', 'verify_family',
]
