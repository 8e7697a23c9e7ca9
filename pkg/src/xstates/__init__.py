"""Bloch-model toolkit for the variety of n-qubit X-states and its local-symmetry invariants."""

from .bloch import (
    BlochState,
    DensityMatrix,
    bracket,
    correlation,
    from_bloch,
    pauli_string,
    scalar_product,
    to_bloch,
)
from .errors import XStateError
from .geometry import (
    SectionPoint2,
    XFiberPoint,
    XTPoint,
    dim_formulas,
    fiber_embed,
    is_x_pattern,
    random_xstate,
    reduce_to_section2,
    section_embed2,
    truncate_to_xT,
    weyl_orbit_section2,
)
from .group import (
    LieTangent,
    LocalRotation,
    WeylElement,
    act,
    from_sl2,
    gm_from_so2,
    infinitesimal_action,
    random_rotation,
    so2_from_gm,
    weyl_embed,
    weyl_sample,
)
from .invariants import aux_dtab, p_invariants, quotient_coords, torsor_recover

__version__ = "0.1.0"
