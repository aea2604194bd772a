"""Curve registration by matching moments of feature functions."""

from .baselines import LandmarkSpec, cmr_register, landmark_detect, landmark_register
from .errors import AlignmentError
from .feature_moments import FeatureSpec, MomentSpec, moment, moments, parse_features
from .metrics import sigma_metric, sync_metric
from .objective import CurveParams, Lambdas
from .registration import AnnealSchedule, FitConfig, FitResult, register
from .simgen import Scenario, ablation_scenario, simulate
from .spline_core import BasisSpec, Curve, make_basis, smooth_fit
from .tuning import TuningGrid, TuningReport, grid_search
from .warp import WarpModel, warp_eval, warp_penalty

__all__ = [
    "AlignmentError", "AnnealSchedule", "BasisSpec", "Curve", "CurveParams", "FeatureSpec",
    "FitConfig", "FitResult", "Lambdas", "LandmarkSpec", "MomentSpec", "Scenario", "TuningGrid",
    "TuningReport", "WarpModel", "cmr_register", "ablation_scenario", "grid_search",
    "landmark_detect", "landmark_register", "make_basis", "moment", "moments",
    "parse_features", "register", "sigma_metric", "simulate", "smooth_fit", "sync_metric",
    "warp_eval", "warp_penalty",
]
