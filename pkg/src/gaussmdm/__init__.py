"""Gaussian minimal-disturbance measurement of coherent states at arbitrary gain."""
from .quadalg import (
    CovarianceSpec,
    Mode,
    ModeRole,
    QuadratureExpression,
    SymplecticMap,
    apply_symplectic,
    beam_splitter,
    commutator,
    covariance,
    p,
    two_mode_squeezed_cov,
    two_mode_squeezer,
    variance,
    x,
)
from .tradeoff import (
    UNBOUNDED,
    OptimalityWindow,
    PointClass,
    TradeoffPoint,
    classify_point,
    optimality_window,
    tradeoff_nu_out,
    uncertainty_bounds,
)
from .models import (
    MdmChannel,
    extreme_points,
    feedforward_mdm,
    optimal_electronic_gain,
    optimal_gain,
    symmetrize,
    teleportation_mdm,
)
from .certificates import build_certificate, certify, proof2_minimum_check, verify_certificate
from .montecarlo import SimConfig, SimResult, simulate

__version__ = "0.1.0"
