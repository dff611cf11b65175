"""
Modelos da corrente de esferas magnéticas.
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional

import numpy as np

from models.errors import ConfigError


@dataclass(frozen=True)
class BallParams:
    """
    Parâmetros de uma esfera magnética.

    Attributes:
        diameter: Diâmetro d_c (m)
        mass: Massa (kg)
        dipole_moment: Módulo do dipolo μ (A·m²)
        remanence: Remanência de origem (T), quando o dipolo foi derivado dela
    """

    diameter: float
    mass: float
    dipole_moment: float
    remanence: Optional[float] = None

    def __post_init__(self):
        if not self.diameter > 0.0:
            raise ConfigError("ball.diameter", "deve ser positivo")
        if self.mass < 0.0:
            raise ConfigError("ball.mass", "não pode ser negativa")
        if self.dipole_moment < 0.0:
            raise ConfigError("ball.dipole_moment", "não pode ser negativo")

    @classmethod
    def from_remanence(cls, diameter: float, mass: float, remanence: float) -> 'BallParams':
        """
        Deriva μ = B_r·(π d³/6)/μ0.
        """
        from utils.magnetics import dipole_moment_from_remanence, sphere_volume

        moment = dipole_moment_from_remanence(remanence, sphere_volume(diameter))
        return cls(diameter=diameter, mass=mass, dipole_moment=moment, remanence=remanence)

    def scaled(self, moment_factor: float = 1.0, mass_factor: float = 1.0) -> 'BallParams':
        return replace(
            self,
            dipole_moment=self.dipole_moment * moment_factor,
            mass=self.mass * mass_factor,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "diameter": self.diameter,
            "mass": self.mass,
            "dipole_moment": self.dipole_moment,
            "remanence": self.remanence,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'BallParams':
        return cls(
            diameter=float(data["diameter"]),
            mass=float(data["mass"]),
            dipole_moment=float(data["dipole_moment"]),
            remanence=data.get("remanence"),
        )


@dataclass(frozen=True)
class ChainParams:
    """
    Parâmetros da corrente: n esferas, das quais n_e estendidas além da ponta do tubo.
    """

    ball: BallParams
    count: int
    extended: int
    sleeve_ei: float = 0.0

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError("chain.count", "deve ser pelo menos 1")
        if not 0 <= self.extended <= self.count:
            raise ConfigError("chain.extended", f"deve estar em [0, {self.count}]")
        if self.sleeve_ei < 0.0:
            raise ConfigError("assumptions.sleeve_bending_stiffness", "não pode ser negativa")

    @property
    def fixed_count(self) -> int:
        """Esferas internas ao tubo (posição e dipolo congelados)."""
        return self.count - self.extended

    def with_extended(self, extended: int) -> 'ChainParams':
        return replace(self, extended=extended)

    def with_ball(self, ball: BallParams) -> 'ChainParams':
        return replace(self, ball=ball)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ball": self.ball.to_dict(),
            "count": self.count,
            "extended": self.extended,
            "sleeve_ei": self.sleeve_ei,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ChainParams':
        return cls(
            ball=BallParams.from_dict(data["ball"]),
            count=int(data["count"]),
            extended=int(data["extended"]),
            sleeve_ei=float(data.get("sleeve_ei", 0.0)),
        )


@dataclass
class ChainConfig:
    """
    Centros p_i e dipolos μ_i das n esferas (índice 0 = base da corrente).
    """

    positions: np.ndarray
    dipoles: np.ndarray

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        self.dipoles = np.asarray(self.dipoles, dtype=float).reshape(-1, 3)
        if self.positions.shape != self.dipoles.shape:
            raise ValueError("Posições e dipolos com tamanhos diferentes")

    @property
    def count(self) -> int:
        return self.positions.shape[0]

    @property
    def tip(self) -> np.ndarray:
        return self.positions[-1]

    def links(self) -> np.ndarray:
        """Vetores p_i − p_{i−1}, i ≥ 1."""
        return np.diff(self.positions, axis=0)

    def link_directions(self) -> np.ndarray:
        links = self.links()
        return links / np.linalg.norm(links, axis=1, keepdims=True)

    def bend_angles(self) -> np.ndarray:
        """Ângulos θ_i entre direções de elos consecutivos (esferas 1..n−2)."""
        dirs = self.link_directions()
        if len(dirs) < 2:
            return np.zeros(0)
        a, b = dirs[:-1], dirs[1:]
        return np.arctan2(np.linalg.norm(np.cross(a, b), axis=1), np.sum(a * b, axis=1))

    def contact_residual(self, diameter: float) -> float:
        """max |‖p_i − p_{i−1}‖ − d_c|."""
        if self.count < 2:
            return 0.0
        return float(np.max(np.abs(np.linalg.norm(self.links(), axis=1) - diameter)))

    def magnitude_residual(self, moment: float) -> float:
        """max |‖μ_i‖ − μ| relativo a μ (absoluto quando μ = 0)."""
        norms = np.linalg.norm(self.dipoles, axis=1)
        return float(np.max(np.abs(norms - moment)) / (moment if moment > 0.0 else 1.0))

    def satisfies_invariants(self, ball: BallParams, tol: float = 1e-9) -> bool:
        return (
            self.contact_residual(ball.diameter) <= tol
            and self.magnitude_residual(ball.dipole_moment) <= tol
        )

    def transformed(self, rotation: np.ndarray, translation: Optional[np.ndarray] = None) -> 'ChainConfig':
        """Aplica uma transformação rígida a posições e dipolos."""
        shift = np.zeros(3) if translation is None else np.asarray(translation, dtype=float)
        return ChainConfig(self.positions @ rotation.T + shift, self.dipoles @ rotation.T)

    def copy(self) -> 'ChainConfig':
        return ChainConfig(self.positions.copy(), self.dipoles.copy())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "positions": self.positions.tolist(),
            "dipoles": self.dipoles.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ChainConfig':
        return cls(positions=data["positions"], dipoles=data["dipoles"])


@dataclass
class ChainConstraints:
    """
    Restrições da minimização: as fixed_count primeiras esferas ficam congeladas
    sobre o tubo; anchor é a ponta do tubo (posição e tangente).
    """

    fixed_count: int
    fixed_positions: np.ndarray
    fixed_dipoles: np.ndarray
    anchor_position: np.ndarray
    anchor_tangent: np.ndarray

    def __post_init__(self):
        self.fixed_positions = np.asarray(self.fixed_positions, dtype=float).reshape(-1, 3)
        self.fixed_dipoles = np.asarray(self.fixed_dipoles, dtype=float).reshape(-1, 3)
        self.anchor_position = np.asarray(self.anchor_position, dtype=float).reshape(3)
        tangent = np.asarray(self.anchor_tangent, dtype=float).reshape(3)
        self.anchor_tangent = tangent / np.linalg.norm(tangent)
        if self.fixed_positions.shape[0] != self.fixed_count:
            raise ValueError("fixed_count não corresponde às esferas congeladas")

    @property
    def origin(self) -> np.ndarray:
        """Ponto do qual parte o primeiro elo livre."""
        if self.fixed_count > 0:
            return self.fixed_positions[-1]
        return self.anchor_position

    @classmethod
    def from_guess(cls, guess: ChainConfig, fixed_count: int,
                   anchor_position: np.ndarray, anchor_tangent: np.ndarray) -> 'ChainConstraints':
        return cls(
            fixed_count=fixed_count,
            fixed_positions=guess.positions[:fixed_count].copy(),
            fixed_dipoles=guess.dipoles[:fixed_count].copy(),
            anchor_position=anchor_position,
            anchor_tangent=anchor_tangent,
        )

    def transformed(self, rotation: np.ndarray) -> 'ChainConstraints':
        return ChainConstraints(
            fixed_count=self.fixed_count,
            fixed_positions=self.fixed_positions @ rotation.T,
            fixed_dipoles=self.fixed_dipoles @ rotation.T,
            anchor_position=rotation @ self.anchor_position,
            anchor_tangent=rotation @ self.anchor_tangent,
        )


@dataclass(frozen=True)
class EnergyBreakdown:
    """
    Parcelas da energia potencial da corrente (J).
    """

    external: float
    pair: float
    gravity: float
    sleeve: float
    total: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total", self.external + self.pair + self.gravity + self.sleeve)

    def to_dict(self) -> Dict[str, float]:
        return {
            "U_e": self.external,
            "U_b": self.pair,
            "U_g": self.gravity,
            "U_s": self.sleeve,
            "U_total": self.total,
        }


@dataclass
class ChainSolverSettings:
    """
    Configurações da minimização de energia.

    Attributes:
        tol: Norma máxima do gradiente projetado (J/rad)
        max_iter: Iterações BFGS somadas sobre todos os ciclos
        rel_tol: Tolerância relativa à energia característica
        inner_gtol: gtol do BFGS sobre a energia escalada
        restart_angle: Ângulo das reinicializações (rad)
        finite_difference: Usa gradiente por diferenças centrais
        fd_step: Passo das diferenças centrais (rad)
    """

    tol: float = 1e-8
    max_iter: int = 2000
    rel_tol: float = 1e-6
    inner_gtol: float = 1e-10
    restart_angle: float = np.deg2rad(30.0)
    finite_difference: bool = False
    fd_step: float = 1e-6

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tol": self.tol,
            "max_iter": self.max_iter,
            "rel_tol": self.rel_tol,
            "inner_gtol": self.inner_gtol,
            "restart_angle": self.restart_angle,
            "finite_difference": self.finite_difference,
            "fd_step": self.fd_step,
        }


@dataclass
class ChainSolution:
    """
    Resultado de uma minimização: configuração, energia e diagnóstico.
    """

    config: ChainConfig
    energy: EnergyBreakdown
    gradient_norm: float
    iterations: int
    converged: bool = True
    start_energies: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "energy": self.energy.to_dict(),
            "gradient_norm": self.gradient_norm,
            "iterations": self.iterations,
            "converged": self.converged,
            "start_energies": list(self.start_energies),
        }
