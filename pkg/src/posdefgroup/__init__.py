"""Positive definite operator-valued functions on finite groups.

Gram blocks and positivity certificates, minimal Naimark dilations, explicit
criteria for small groups and for truncations of Z and Z+Z, block Hadamard
powers, and the structure of commutative unitary representations.
"""

from .criteria import (CriterionReport, GammaFactor, HalfPower, TruncationReport, brehmer_check,
                       counterexample_det, counterexample_function, dcmap, doubly_commuting_check,
                       factor_3x3, gamma_factor, half_power, klein_criterion, pm_criterion, z2_criterion,
                       z3_criterion, z4_criterion, z_truncation, zz_truncation)
from .dilation import (NaimarkDilation, compression, naimark_dilate, power_compatibility,
                       verify_dilation)
from .errors import PosDefError
from .groupcore import (FiniteGroup, GroupMorphism, closure, commutator_subgroup, find_isomorphism,
                        make_cyclic, make_dihedral, make_from_table, make_product, make_symmetric,
                        power_subgroup, validate_morphism)
from .linalg import DEFAULT_TOL, PsdReport, ToleranceConfig, joint_diagonalize, psd_check
from .pdfun import (OperatorFunction, check_symmetry, conjugate_by, gram_block, hadamard_block,
                    is_positive_definite, power_map, power_pd_check, pullback)
from .reps import (StructureDecomposition, UnitaryRep, build_cyclic_rep, build_dihedral_commutative,
                   build_symmetric_commutative, is_commutative, permutation_rep, power_rep_check,
                   reconstruct, spectrum_in_roots, structure_decompose, verify_rep)

__version__ = "0.1.0"
