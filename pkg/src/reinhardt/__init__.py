"""Membership of hyperbolic Reinhardt domains in C^2 in the class of Stein
fibers whose bundles over Stein bases are always Stein."""

from .convexlog import model_from_json, model_to_json
from .serreclass import Verdict, classify_serre, find_hyperbolic_matrix, verify_certificate

__all__ = ["Verdict", "classify_serre", "find_hyperbolic_matrix", "verify_certificate", "model_from_json", "model_to_json"]
__version__ = "0.1.0"
