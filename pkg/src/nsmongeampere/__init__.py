"""Numerical toolkit for F(R) = log det R on non-symmetric matrices R = omega + beta."""

from .compound import check_compound_identities, compound2
from .comparison import (
    claims_check,
    comparison_verdict,
    hypotheses_check,
    linearized_coeffs,
    mu_bounds,
    omega_field,
    operator_G,
)
from .cone import (
    ConeParams,
    DecomposedR,
    cone_report,
    decompose,
    fd_grad,
    fd_hess,
    grad_F,
    hess_F,
    inv_parts,
    log_det_F,
    make_R,
    membership,
    sample_cone,
)
from .errors import (
    BadEta,
    BadParams,
    ConvergenceFailure,
    DimensionTooSmall,
    Inconsistent,
    NonElliptic,
    NotMember,
    NotSkew,
    NotSpd,
    NsmaError,
)
from .forms import (
    bounds_report,
    concavity_gap,
    d_bound,
    gh_forms,
    l_form,
    quad_form_direct,
    spectral_forms,
    split_form,
    tilde_transform,
)
from .matrix_core import skew_spectrum, spd_roots
from .scenario import Scenario, bundled_scenario_path, load_scenario, scenario_from_dict

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
