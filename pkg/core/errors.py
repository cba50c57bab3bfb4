"""
Exceções do sistema
Cada falha de domínio tem seu tipo, para que a CLI traduza em código de saída
"""


class ObsLearnError(Exception):
    """Erro base do ObsLearn"""


class ValidationError(ObsLearnError, ValueError):
    """Entrada inválida (parse, faixa de valores, configuração)"""


class DimensionMismatchError(ObsLearnError, ValueError):
    """Dimensões incompatíveis entre estado, operador ou circuito"""


class ResourceLimitError(ObsLearnError):
    """Instância excede o limite de qubits/dimensão configurado"""


class ConvergenceError(ObsLearnError):
    """Solver iterativo não convergiu"""


class DegenerateGroundStateError(ObsLearnError):
    """Estado fundamental degenerado: conceito mal definido"""


class CatalogMissError(ObsLearnError, KeyError):
    """Índice ausente em um catálogo do dispatcher"""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "catálogo sem entrada"


class InsufficientProbesError(ObsLearnError):
    """Poucas amostras com x1 = 0 para o aprendiz de observáveis rasos"""
