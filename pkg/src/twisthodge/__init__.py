"""Exact computation of Hodge filtration steps for twisted localizations ``O(*f) f^(-alpha)``.

The package is layered: exact arithmetic (``arith``), the Weyl algebra
(``weyl``), Groebner bases (``groebner``), annihilators and b-functions
(``annbs``), the main filtration pipeline (``hodge``), an independent
truncated cross-check (``oracle``) and the command line (``cli``).
"""
from __future__ import annotations

from .annbs import BSPolyData, ann_fs_order1, bs_polynomial, euler_field, root_window_check
from .arith import UniPoly, rational_roots
from .hodge import Hypotheses, build_gamma, build_gamma_twisted, hodge_ideal_zero, hodge_step
from .oracle import OracleContext, TruncationBudget, hodge_via_v0, newton_multiplier, verify_paper_identities
from .polynomial import Poly
from .weyl import AlgebraSignature, WeylElement

__version__ = "0.1.0"

__all__ = [
    "AlgebraSignature",
    "BSPolyData",
    "Hypotheses",
    "OracleContext",
    "Poly",
    "TruncationBudget",
    "UniPoly",
    "WeylElement",
    "ann_fs_order1",
    "bs_polynomial",
    "build_gamma",
    "build_gamma_twisted",
    "euler_field",
    "hodge_ideal_zero",
    "hodge_step",
    "hodge_via_v0",
    "newton_multiplier",
    "rational_roots",
    "root_window_check",
    "verify_paper_identities",
]
