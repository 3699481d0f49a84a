"""Relaxed locally correctable binary codes built by nesting small codes
inside locally testable ones, with exact verification tools."""

from .codes import (
    BudgetExceededError,
    LinearCode,
    hamming_code,
    min_distance,
    parity_code,
    random_ldpc,
    tensor_product,
)
from .gf2 import BitMatrix, BitWord
from .local import BOTTOM, Corrector, Tester
from .nesting import Level, iterate_nesting, make_nested, nest, nested_corrector

__all__ = [
    "BOTTOM",
    "BitMatrix",
    "BitWord",
    "BudgetExceededError",
    "Corrector",
    "Level",
    "LinearCode",
    "Tester",
    "hamming_code",
    "iterate_nesting",
    "make_nested",
    "min_distance",
    "nest",
    "nested_corrector",
    "parity_code",
    "random_ldpc",
    "tensor_product",
]
