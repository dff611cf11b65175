"""
Modelos do problema acoplado tubo + corrente.
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional

import numpy as np

from models.chain import ChainConfig, ChainSolution, ChainSolverSettings
from models.errors import ConfigError
from models.field import FieldSource, UniformField
from models.rod import PointLoad, RodShape

import config


DEFAULT_GRAVITY = np.array([-config.STANDARD_GRAVITY, 0.0, 0.0])


@dataclass
class ActuationInput:
    """
    Entradas de atuação: tensão do tendão, rolagem da base, fonte de campo,
    gravidade e número de esferas estendidas.
    """

    tension: float = 0.0
    roll: float = 0.0
    source: FieldSource = field(default_factory=UniformField.zero)
    gravity: Optional[np.ndarray] = field(default_factory=lambda: DEFAULT_GRAVITY.copy())
    extended: Optional[int] = None

    def __post_init__(self):
        if not (np.isfinite(self.tension) and self.tension >= 0.0):
            raise ConfigError("actuation.tension", f"deve ser finita e não negativa (recebido {self.tension})")
        if not np.isfinite(self.roll):
            raise ConfigError("actuation.roll", "deve ser finito")
        if self.gravity is not None:
            self.gravity = np.asarray(self.gravity, dtype=float).reshape(3)
        if self.extended is not None and self.extended < 0:
            raise ConfigError("chain.extended", "não pode ser negativo")

    @classmethod
    def from_load_mass(cls, mass: float, **kwargs) -> 'ActuationInput':
        """
        Converte a massa pendurada no tendão (kg) em tensão λ = m·g.
        """
        if mass < 0.0:
            raise ConfigError("actuation.load_mass", "não pode ser negativa")
        return cls(tension=mass * config.STANDARD_GRAVITY, **kwargs)

    def with_tension(self, tension: float) -> 'ActuationInput':
        return replace(self, tension=tension)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tension": self.tension,
            "roll": self.roll,
            "source": self.source.to_dict(),
            "gravity": None if self.gravity is None else self.gravity.tolist(),
            "extended": self.extended,
        }


@dataclass
class SolverSettings:
    """
    Configurações dos solvers do problema acoplado.

    Attributes:
        tolerance: ε, variação máxima das cargas entre iterações externas (N)
        max_outer: Máximo de iterações externas
        damping: α ∈ (0, 1], mistura entre cargas novas e antigas
        rod_steps: Passos de integração do tubo
        rod_tolerance: Tolerância do shooting
        rod_max_iter: Iterações do shooting
        chain: Configurações da minimização da corrente
    """

    tolerance: float = config.COUPLING_TOLERANCE
    max_outer: int = config.COUPLING_MAX_OUTER
    damping: float = config.COUPLING_DAMPING
    rod_steps: int = config.ROD_STEPS
    rod_tolerance: float = config.ROD_TOLERANCE
    rod_max_iter: int = config.ROD_MAX_ITER
    chain: ChainSolverSettings = field(default_factory=lambda: ChainSolverSettings(
        tol=config.CHAIN_TOLERANCE, max_iter=config.CHAIN_MAX_ITER))

    def __post_init__(self):
        if not self.tolerance > 0.0:
            raise ConfigError("solver.coupling_tolerance", "deve ser positiva")
        if not 0.0 < self.damping <= 1.0:
            raise ConfigError("solver.damping", "deve estar em (0, 1]")
        if self.max_outer < 1:
            raise ConfigError("solver.max_outer", "deve ser pelo menos 1")
        if self.rod_steps < 16:
            raise ConfigError("solver.rod_steps", "deve ser pelo menos 16")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tolerance": self.tolerance,
            "max_outer": self.max_outer,
            "damping": self.damping,
            "rod_steps": self.rod_steps,
            "rod_tolerance": self.rod_tolerance,
            "rod_max_iter": self.rod_max_iter,
            "chain": self.chain.to_dict(),
        }


@dataclass
class ChainLoads:
    """
    Cargas que a corrente aplica ao tubo: forças pontuais das esferas
    internas e a força na ponta das esferas estendidas.
    """

    point_loads: List[PointLoad]
    tip_force: np.ndarray

    @classmethod
    def zeros(cls, locations: List[float]) -> 'ChainLoads':
        return cls([PointLoad(s, np.zeros(3)) for s in locations], np.zeros(3))

    def as_vector(self) -> np.ndarray:
        """Todas as forças empilhadas, (k+1)·3."""
        return np.concatenate([load.force for load in self.point_loads] + [self.tip_force])

    def blend(self, other: 'ChainLoads', alpha: float) -> 'ChainLoads':
        """(1 − α)·self + α·other, com as posições de other."""
        return ChainLoads(
            [PointLoad(new.s, (1.0 - alpha) * old.force + alpha * new.force)
             for old, new in zip(self.point_loads, other.point_loads)],
            (1.0 - alpha) * self.tip_force + alpha * other.tip_force,
        )

    def change(self, other: 'ChainLoads') -> float:
        """Norma do máximo da diferença entre os dois conjuntos de cargas."""
        return float(np.max(np.abs(self.as_vector() - other.as_vector())))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "point_loads": [load.to_dict() for load in self.point_loads],
            "tip_force": self.tip_force.tolist(),
        }


@dataclass
class HybridDiagnostics:
    """
    Diagnóstico de uma solução do problema acoplado.
    """

    iterations: int
    load_residual: float
    converged: bool
    mode: str = "decoupled"
    rod_residual: float = 0.0
    rod_iterations: int = 0
    chain_gradient_norm: float = 0.0
    chain_iterations: int = 0
    history: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "iterations": self.iterations,
            "load_residual": self.load_residual,
            "converged": self.converged,
            "rod_residual": self.rod_residual,
            "rod_iterations": self.rod_iterations,
            "chain_gradient_norm": self.chain_gradient_norm,
            "chain_iterations": self.chain_iterations,
            "history": list(self.history),
        }


@dataclass
class HybridShape:
    """
    Solução do robô híbrido: forma do tubo, configuração da corrente e diagnóstico.
    """

    rod: RodShape
    chain: ChainConfig
    diagnostics: HybridDiagnostics
    chain_solution: Optional[ChainSolution] = None
    loads: Optional[ChainLoads] = None

    @property
    def tip(self) -> np.ndarray:
        """Ponta do robô: centro da última esfera."""
        return self.chain.tip

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "rod_tip": self.rod.tip.position.tolist(),
            "chain_tip": self.chain.tip.tolist(),
            "tension": self.rod.tension,
            "diagnostics": self.diagnostics.to_dict(),
            "chain": self.chain.to_dict(),
        }
        if self.chain_solution is not None:
            data["energy"] = self.chain_solution.energy.to_dict()
        if self.loads is not None:
            data["loads"] = self.loads.to_dict()
        return data


@dataclass
class ModelComparison:
    """
    Discrepância entre os modelos desacoplado e acoplado para a mesma atuação.
    """

    decoupled: HybridShape
    coupled: HybridShape

    @property
    def tip_distance(self) -> float:
        return float(np.linalg.norm(self.coupled.tip - self.decoupled.tip))

    @property
    def rod_tip_distance(self) -> float:
        return float(np.linalg.norm(self.coupled.rod.tip.position - self.decoupled.rod.tip.position))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tip_distance": self.tip_distance,
            "rod_tip_distance": self.rod_tip_distance,
            "decoupled": self.decoupled.diagnostics.to_dict(),
            "coupled": self.coupled.diagnostics.to_dict(),
        }
