"""Formal power-series transformations: composition, inversion, resonances,
functional roots, logarithms and flows, all truncated at a fixed order."""

from .errors import (
    BranchCut,
    DefectiveLinearPart,
    DimensionMismatch,
    FFGError,
    InconsistentWitness,
    NonzeroConstantTerm,
    NotInvertible,
    ObstructionError,
    OrderMismatch,
)
from .flows import (
    Obstruction,
    VectorField,
    derivation_matrix,
    exp_flow,
    functional_root,
    functional_root_all_branches,
    iterate,
    log_transform,
    substitution_matrix,
)
from .linfun import eigen, mat_exp, mat_log, mat_power, mat_root
from .resonance import (
    ResonanceReport,
    ResonanceWitness,
    check_obstructive_by_sampling,
    classify_witness,
    find_resonances,
)
from .series import Series
from .textio import ParseError, SemanticError, emit_map, parse_map, to_transformation
from .transform import (
    GroupTag,
    Transformation,
    classify,
    compose,
    distance,
    identity,
    inverse,
    jacobian_det,
)

__version__ = "0.1.0"
