"""
Constantes do sistema ObsLearn
Define todas as constantes usadas em todo o sistema
"""

from enum import Enum

import numpy as np


class GateKind(Enum):
    """Tipos de portas suportadas pelo simulador"""
    X = "X"
    Y = "Y"
    Z = "Z"
    H = "H"
    S = "S"
    T = "T"
    CNOT = "CNOT"
    CZ = "CZ"
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    CUSTOM1 = "CUSTOM1"
    CUSTOM2 = "CUSTOM2"


class Geometry(Enum):
    """Geometria da localidade das strings de Pauli"""
    LINE = "line-contiguous"
    ALL_SUBSETS = "all-subsets"


class NoiseKind(Enum):
    """Modelos de ruído para rótulos e features"""
    EXACT = "exact"
    UNIFORM = "uniform"
    SHOTS = "shots"


class ConceptVariant(Enum):
    """Variantes de classe de conceito"""
    EVOLVED = "evolved"
    HARD_INSTANCE = "hard_instance"
    GROUND_STATE = "ground_state"
    UNITARY_PARAM = "unitary_param"
    FLIPPED = "flipped"


class DistributionKind(Enum):
    """Distribuições de entrada"""
    UNIFORM = "uniform"
    BERNOULLI = "product-bernoulli"
    TABLE = "explicit-table"
    DISPATCHER = "dispatcher"
    ALPHA_UNIFORM = "alpha-uniform"


class StepRule(Enum):
    """Regra de passo do gradiente projetado"""
    FIXED = "fixed"
    BACKTRACKING = "backtracking"


class Representation(Enum):
    """Representação do registrador de relógio"""
    ABSTRACT = "abstract"
    UNARY = "unary"


class LearnerKind(Enum):
    """Algoritmos de aprendizado disponíveis"""
    LASSO = "lasso"
    SHALLOW = "shallow"
    FLIPPED = "flipped"


class ExitCode(Enum):
    """Códigos de saída da linha de comando"""
    OK = 0
    VALIDATION = 1
    EXPERIMENT_FAIL = 2
    INTERNAL = 3


# Tolerâncias numéricas
NORM_TOL = 1e-10
NORM_DRIFT_TOL = 1e-8
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-12
DEGENERACY_TOL = 1e-10
FEATURE_TOL = 1e-9
L1_TOL = 1e-12

# Letras de Pauli na ordem lexicográfica usada nas enumerações
PAULI_LETTERS = "IXYZ"

# stab1 = {|0>, |1>, |+>, |->, |y+>, |y->}
_S = 1 / np.sqrt(2)
STAB1_STATES = (
    np.array([1, 0], dtype=complex),
    np.array([0, 1], dtype=complex),
    np.array([_S, _S], dtype=complex),
    np.array([_S, -_S], dtype=complex),
    np.array([_S, 1j * _S], dtype=complex),
    np.array([_S, -1j * _S], dtype=complex),
)
STAB1_NAMES = ("0", "1", "+", "-", "y+", "y-")

# <s|P|s> para cada estado de stab1 (linhas) e letra I, X, Y, Z (colunas)
STAB1_EXPECTATIONS = np.array([
    [1, 0, 0, 1],
    [1, 0, 0, -1],
    [1, 1, 0, 0],
    [1, -1, 0, 0],
    [1, 0, 1, 0],
    [1, 0, -1, 0],
], dtype=float)

# Divisão do orçamento de erro (eps'_1, eps_2, eps_3) em frações de eps
EPSILON_BUDGET = (0.2, 1.0, 0.4)

# Constantes do Teorema de generalização: r_inf = 1, M = B + 2
R_INFINITY = 1.0
M_OFFSET = 2.0

# Bits por qubit na codificação das sondas de estabilizador
PROBE_BITS_PER_QUBIT = 3

SCHEMA_VERSION = 1
