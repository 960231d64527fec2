"""Symmetrized joint quasi-measures for families of Hermitian observables."""
from ._backend import BACKEND
from .cylinder import CylinderSet, GlobalMeasure, check_additivity, check_well_defined, global_operator_value, global_state_value
from .errors import QClassError
from .hermitian import DensityOperator, HermitianOperator, eig_hermitian, validate_density, validate_hermitian
from .quasi import (
    EventSpec,
    SignedMeasure,
    born_joint,
    event_value,
    mix,
    negativity_report,
    pushforward,
    quasi_measure,
    sym_moment,
)
from .scenario import load_builtin, load_scenario, run_scenario
from .spectral import SpectralMeasure, apply_function, commute
from .symproduct import OperatorMeasure, ProductSpace, Registry, marginalize, reorder, sym_product_measure

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CylinderSet",
    "DensityOperator",
    "EventSpec",
    "GlobalMeasure",
    "HermitianOperator",
    "OperatorMeasure",
    "ProductSpace",
    "QClassError",
    "Registry",
    "SignedMeasure",
    "SpectralMeasure",
    "apply_function",
    "born_joint",
    "check_additivity",
    "check_well_defined",
    "commute",
    "eig_hermitian",
    "event_value",
    "global_operator_value",
    "global_state_value",
    "load_builtin",
    "load_scenario",
    "marginalize",
    "mix",
    "negativity_report",
    "pushforward",
    "quasi_measure",
    "reorder",
    "run_scenario",
    "sym_moment",
    "sym_product_measure",
    "validate_density",
    "validate_hermitian",
]
