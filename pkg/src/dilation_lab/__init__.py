"""Numerical ranges and unitary N-dilations of compressed shifts on model spaces."""

from .dilation import (
    DilationOrigin,
    GeneralDilationParams,
    UnitaryDilation,
    build_U_Omega,
    build_Z_Xi,
    det_scan,
    dilation_spectrum,
    factor_dilation,
    general_dilation,
    locate_zeros,
    match_zeros,
    spectrum_predicate,
)
from .errors import *  # noqa: F401,F403
from .inner import (
    BPFactor,
    BPProduct,
    DirectSum,
    FrostmanTransform,
    direct_sum,
    factor_eval,
    frostman_transform,
    is_pure,
    model_dimension,
    product_eval,
    purity_check,
)
from .linalg import (
    UnitaryParams,
    gram_correct,
    haar_unitary,
    hermitian_eigs,
    psd_sqrt,
    unitary_eigs,
    unitary_from_params,
)
from .modelspace import (
    DefectData,
    ModelOperator,
    assemble_augmented,
    assemble_model,
    build_basis,
    defect_data,
    frostman_model,
    h2_inner,
)
from .numrange import (
    SupportProfile,
    WrapReport,
    ellipse_oracle,
    hausdorff,
    hull_merge,
    intersect_family,
    nr_unitary,
    rayleigh_samples,
    support_function,
    wrap_gap,
)

__version__ = "0.1.0"
