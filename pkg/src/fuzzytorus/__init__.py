"""Finite matrix models of noncommutative tori with semigroup Lipschitz norms."""

from .lattice import (
    LatticeIndex,
    LengthFunction,
    GromovMatrix,
    CocycleFactor,
    MultiplierSpec,
    length_eval,
    gromov_matrix,
    check_conditionally_negative,
    cocycle_factor,
    build_smoothing_multiplier,
    product_multiplier,
    band_mask,
)
from .ncpoly import (
    TwistMatrix,
    NCPoly,
    normal_order_phase,
    multiply,
    adjoint,
    project,
    mean_zero,
    l2_norm,
    apply_multiplier,
    apply_semigroup,
    gradient_form,
    sup_norm_oracle,
)
from .matrixmodel import (
    MatrixModel,
    ModelElement,
    clock_shift,
    fuzzy_generators,
    higher_dim_generators,
    admissible_sizes,
    embed,
    fourier_coefficients,
    op_norm,
    schatten_norm,
    model_multiplier,
    model_semigroup,
)
from .lipnorm import (
    LipReport,
    lip_seminorm,
    riesz_check,
    sobolev_constant,
    lip_ball_sample,
)

__version__ = "0.1.0"
