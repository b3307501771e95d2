"""Certified global bounds for fully-connected tanh networks, their input
derivatives and polynomial PDE residuals over box domains."""

from .branching import BranchReport, domain_split, greedy_branch, mc_sample
from .certify import (
    ConditionResult,
    build_certificate,
    emit_certificate,
    verify_boundary,
    verify_initial,
    verify_residual,
)
from .derivatives import (
    BoundConfig,
    BoxBounder,
    FirstDerivBounds,
    SecondDerivBounds,
    bound_first,
    bound_second,
)
from .linbounds import AffineForm, Box, LayerBounds, crown_propagate, mccormick
from .network import DenseNetwork, load_network, network_from_dict, save_network
from .relax import (
    LinRelax,
    chord_offset_relax,
    relax_neg_sin_pi,
    relax_tanh,
    relax_tanh_prime,
    relax_tanh_second,
    relax_two_sech,
    tangent_point,
)
from .residual import (
    Atom,
    PDEProblem,
    ResidualExpr,
    Term,
    bound_residual,
    build_pde,
    residual_values,
    term,
)

__version__ = "0.1.0"
