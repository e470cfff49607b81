"""Constructive homological algebra over finitely generated abelian groups."""

from .chain import ChainMap, Complex, cone, homology, is_quasi_iso, shift, truncate_left, truncate_right
from .core import ExactStructure, FgModule, Morphism, cokernel, image, kernel, morphism
from .derived import derive_colim, left_derive, lim_report, roos, coroos, telescope, two_term_check
from .indpro import FinitePoset, IndObject, ProObject, ind_resolution, ml_check
from .resolution import build_vs_system, resolve, verify_vs_system

__version__ = "0.1.0"

__all__ = [
    "ChainMap", "Complex", "ExactStructure", "FgModule", "FinitePoset", "IndObject", "Morphism",
    "ProObject", "build_vs_system", "cokernel", "cone", "coroos", "derive_colim", "homology",
    "image", "ind_resolution", "is_quasi_iso", "kernel", "left_derive", "lim_report", "ml_check",
    "morphism", "resolve", "roos", "shift", "telescope", "truncate_left", "truncate_right",
    "two_term_check", "verify_vs_system",
]
