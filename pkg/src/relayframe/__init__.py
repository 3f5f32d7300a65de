"""Numerical toolkit for discretized relay fusion frames.

A relay system on ``R^n`` chains an outer projection ``pi_W``, an operator
``Lambda`` into a local space ``K`` and an inner projection ``P_V``, weighted
by two levels of positive masses and a scalar ``alpha``.  The package
computes its frame operator and optimal bounds, reconstructs vectors, builds
dual and Parseval systems, and checks the invertible-transform and
perturbation bounds against exact eigenvalue computations.
"""
__version__ = "0.1.0"

from ._accel import BACKEND
from .analysis import (
    analysis_diagnostics,
    cross_duality_check,
    frame_bounds,
    reconstruct,
    reconstruct_vector,
    require_frame,
)
from .duality import (
    canonical_coefficients,
    canonical_dual,
    canonical_identities,
    global_dual,
    local_dual,
    minimal_norm_check,
    mixed_reconstruction,
    parseval_tighten,
    q_transform_ambient,
    q_transform_local,
)
from .errors import *  # noqa: F401,F403
from .io import dumps_system, load_system, loads_system, save_system
from .measure import DiscreteMeasureSpace, MeasureAtom, total_mass
from .model import (
    InnerAtom,
    LocalSystem,
    RelaySystem,
    Subspace,
    from_fusion_frame,
    from_plain_frame,
    same_structure,
    validate_system,
)
from .ops import (
    CoefficientFamily,
    analysis,
    assemble_dense,
    coeff_inner,
    coeff_norm,
    frame_operator,
    frame_operator_apply,
    is_valid_family,
    synthesis,
)
from .perturbation import (
    check_perturbation_simple,
    check_perturbation_three_constant,
    deviation_operator,
)
