"""
Utilitários para bitstrings de entrada
"""

from typing import List

import numpy as np

from core.errors import ValidationError


def validate_bitstring(x: str, n: int = None) -> str:
    """
    Valida uma bitstring ('0'/'1') e, opcionalmente, seu comprimento

    Args:
        x: Bitstring
        n: Comprimento esperado

    Returns:
        A própria bitstring
    """
    if not isinstance(x, str) or any(c not in "01" for c in x):
        raise ValidationError(f"Bitstring inválida: {x!r}")
    if n is not None and len(x) != n:
        raise ValidationError(f"Bitstring {x!r} tem {len(x)} bits, esperado {n}")
    return x


def bitstring_to_index(x: str) -> int:
    """Índice da base computacional (qubit 0 = bit mais significativo)."""
    return int(x, 2) if x else 0


def index_to_bitstring(index: int, n: int) -> str:
    return format(index, f"0{n}b") if n > 0 else ""


def random_bitstring(rng: np.random.Generator, n: int, p: float = 0.5) -> str:
    """Bitstring com bits independentes, P(bit = 1) = p."""
    return "".join("1" if b else "0" for b in (rng.random(n) < p))


def all_bitstrings(n: int) -> List[str]:
    return [index_to_bitstring(i, n) for i in range(2 ** n)]
