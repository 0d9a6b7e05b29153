"""Exact algebra and numerics for elementary symplectic factorization of Sp4(C)."""
from .factor import FactorizationResult, exp_factorization, factor_sl2, factor_sp4
from .polycore import MPoly, VarId, parse_poly
from .symgroup import ElemFactor, Parity, last_row, psi_product

__all__ = [
    "ElemFactor", "FactorizationResult", "MPoly", "Parity", "VarId",
    "exp_factorization", "factor_sl2", "factor_sp4", "last_row", "parse_poly", "psi_product",
]
__version__ = "0.1.0"
