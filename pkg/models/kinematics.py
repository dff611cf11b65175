"""
Modelos da cinemática em forma fechada e do espaço de trabalho.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from models.chain import ChainParams
from models.errors import ConfigError
from models.rod import TubeParams
from utils.geom import Pose


@dataclass
class CCParams:
    """
    Parâmetros do modelo de curvatura constante.

    Attributes:
        length: Comprimento do tubo l_t (m)
        bending_stiffness: EI (N·m²)
        tube_diameter: d_t (m), braço do tendão na fórmula da força
        count: Número total de esferas n
        ball_diameter: d_c (m)
        max_deflection: r_d (m); padrão 2 l_t/π
        base: Pose da base
    """

    length: float
    bending_stiffness: float
    tube_diameter: float
    count: int
    ball_diameter: float
    max_deflection: Optional[float] = None
    base: Pose = field(default_factory=Pose.identity)

    def __post_init__(self):
        if self.max_deflection is None:
            self.max_deflection = 2.0 * self.length / np.pi
        if not self.max_deflection > 0.0:
            raise ConfigError("assumptions.max_radial_deflection", "deve ser positivo")
        if not (self.length > 0.0 and self.bending_stiffness > 0.0 and self.tube_diameter > 0.0):
            raise ConfigError("tube", "comprimento, rigidez e diâmetro devem ser positivos")
        if self.count < 1 or not self.ball_diameter > 0.0:
            raise ConfigError("chain", "número de esferas e diâmetro devem ser positivos")

    @classmethod
    def from_params(cls, tube: TubeParams, chain: ChainParams,
                    max_deflection: Optional[float] = None) -> 'CCParams':
        return cls(
            length=tube.length,
            bending_stiffness=tube.bending_stiffness,
            tube_diameter=tube.diameter,
            count=chain.count,
            ball_diameter=chain.ball.diameter,
            max_deflection=max_deflection,
            base=tube.base,
        )

    @property
    def reach(self) -> float:
        """Comprimento da corrente completa, n·d_c."""
        return self.count * self.ball_diameter

    def to_dict(self) -> Dict[str, Any]:
        return {
            "length": self.length,
            "bending_stiffness": self.bending_stiffness,
            "tube_diameter": self.tube_diameter,
            "count": self.count,
            "ball_diameter": self.ball_diameter,
            "max_deflection": self.max_deflection,
            "base": self.base.to_dict(),
        }


@dataclass
class IKSolution:
    """
    Solução da cinemática inversa.

    Attributes:
        tension: Tensão do tendão F (N)
        phi: Rolagem da base φ (rad)
        b_hat: Direção do campo B̂ (unitária, global)
        bend: Ângulo de flexão do tubo k (rad)
        rho: Raio de curvatura ρ (m); inf para o tubo reto
        n_extended: Esferas estendidas n_e
        intersection: Ponto p_i na ponta do tubo (global)
        s_star: Distância s* de p_i ao alvo ao longo da corrente (m)
        insertion_length: Comprimento de arco do tubo ρ·k (m)
        base_advance: Avanço axial da base (m), não nulo no modo de flexão fixa
    """

    tension: float
    phi: float
    b_hat: np.ndarray
    bend: float
    rho: float
    n_extended: int
    intersection: np.ndarray
    s_star: float
    insertion_length: float
    base_advance: float = 0.0

    @property
    def kappa(self) -> float:
        return 0.0 if not np.isfinite(self.rho) else 1.0 / self.rho

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tension": self.tension,
            "phi": self.phi,
            "b_hat": np.asarray(self.b_hat).tolist(),
            "bend": self.bend,
            "rho": self.rho if np.isfinite(self.rho) else None,
            "kappa": self.kappa,
            "n_extended": self.n_extended,
            "intersection": np.asarray(self.intersection).tolist(),
            "s_star": self.s_star,
            "insertion_length": self.insertion_length,
            "base_advance": self.base_advance,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'IKSolution':
        rho = data.get("rho")
        return cls(
            tension=float(data["tension"]),
            phi=float(data["phi"]),
            b_hat=np.asarray(data["b_hat"], dtype=float),
            bend=float(data["bend"]),
            rho=np.inf if rho is None else float(rho),
            n_extended=int(data["n_extended"]),
            intersection=np.asarray(data["intersection"], dtype=float),
            s_star=float(data["s_star"]),
            insertion_length=float(data["insertion_length"]),
            base_advance=float(data.get("base_advance", 0.0)),
        )


@dataclass(frozen=True)
class WorkspaceEntry:
    """
    Linha da tabela do espaço de trabalho: amplitudes máximas de aproximação no raio r.
    """

    r: float
    alpha_max: float
    beta_max: float
    region: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"r": self.r, "alpha_max": self.alpha_max, "beta_max": self.beta_max, "region": self.region}


@dataclass
class FeasibilityReport:
    """
    Resultado do teste de viabilidade de um alvo, sem exceção.
    """

    feasible: bool
    reason: Optional[str]
    r: float
    alpha_g: float
    beta_g: float
    alpha_max: float
    beta_max: float
    s_interval: Optional[Tuple[float, float]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "feasible": self.feasible,
            "reason": self.reason,
            "r": self.r,
            "alpha_g": self.alpha_g,
            "beta_g": self.beta_g,
            "alpha_max": self.alpha_max,
            "beta_max": self.beta_max,
            "s_interval": None if self.s_interval is None else list(self.s_interval),
        }
