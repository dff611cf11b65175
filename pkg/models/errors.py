"""
Hierarquia de erros do hybridkin.

As mensagens são legíveis em português; os códigos de motivo
(por exemplo em InfeasibleTargetError.reason) permanecem em inglês para
consumo por máquinas.
"""

from typing import Any, Dict, Optional


class HybridKinError(Exception):
    """
    Erro base de todos os erros do pacote.
    """


class ConfigError(HybridKinError, ValueError):
    """
    Erro de configuração: chave desconhecida, valor inválido ou documento ilegível.
    """

    def __init__(self, key: str, message: str):
        """
        Inicializa o erro.

        Args:
            key: Caminho da chave ofensiva (por exemplo "tube.youngs_modulus")
            message: Descrição do problema
        """
        super().__init__(f"{key}: {message}")
        self.key = key
        self.message = message


class SingularityError(HybridKinError, ValueError):
    """
    Avaliação do campo de dipolo na origem (distância < 1e-12 m).
    """


class DegenerateTangentError(HybridKinError, ValueError):
    """
    Tangente do tendão degenerada (norma < 1e-9).
    """


class RodTooShortError(HybridKinError, ValueError):
    """
    O tubo é curto demais para alojar as esferas internas da corrente.
    """


class TooManyFreeBallsError(HybridKinError, ValueError):
    """
    Busca exaustiva solicitada com mais de duas esferas livres.
    """


class InfeasibleTargetError(HybridKinError, ValueError):
    """
    Alvo da cinemática inversa fora do alcance do robô.
    """

    def __init__(self, reason: str, details: Optional[Dict[str, Any]] = None):
        """
        Inicializa o erro.

        Args:
            reason: Código do motivo, por exemplo "radial reach exceeded"
            details: Grandezas que levaram à rejeição
        """
        super().__init__(f"Alvo inviável: {reason}")
        self.reason = reason
        self.details = details or {}


class ConvergenceError(HybridKinError, RuntimeError):
    """
    Um solver atingiu o limite de iterações sem convergir.
    """

    def __init__(self, message: str, iterations: int, residual: float, result: Any = None):
        """
        Inicializa o erro.

        Args:
            message: Descrição do problema
            iterations: Iterações executadas
            residual: Resíduo final
            result: Melhor resultado obtido até a falha
        """
        super().__init__(f"{message} (iterações={iterations}, resíduo={residual:.3e})")
        self.iterations = iterations
        self.residual = residual
        self.result = result


class RodConvergenceError(ConvergenceError):
    """Falha do método de shooting do tubo."""


class ChainConvergenceError(ConvergenceError):
    """Falha da minimização de energia da corrente."""


class CouplingConvergenceError(ConvergenceError):
    """Falha da iteração acoplada tubo/corrente."""
