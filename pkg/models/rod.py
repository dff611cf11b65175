"""
Modelos do tubo atuado por tendão: parâmetros, estados e formas amostradas.
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial.transform import Rotation, Slerp

from models.errors import ConfigError
from utils.geom import E1, E3, Pose, rot_about_axis


@dataclass(frozen=True)
class TubeParams:
    """
    Geometria, elasticidade e roteamento do tendão do tubo proximal.

    Attributes:
        length: Comprimento l_t (m)
        diameter: Diâmetro externo d_t (m); o tendão corre a d_t/2 do eixo
        youngs_modulus: E (Pa)
        shear_modulus: G (Pa)
        area: Área da seção A (m²)
        i_xx, i_yy: Momentos de área (m⁴)
        j_zz: Momento polar (m⁴)
        u0: Curvatura de referência (1/m, referencial do corpo)
        v0: Deformação linear de referência (adimensional)
        linear_density: Massa por metro (kg/m)
        base: Pose da base
        inner_diameter: Diâmetro do furo (m), apenas registro
    """

    length: float
    diameter: float
    youngs_modulus: float
    shear_modulus: float
    area: float
    i_xx: float
    i_yy: float
    j_zz: float
    u0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    v0: np.ndarray = field(default_factory=lambda: E3.copy())
    linear_density: float = 0.0
    base: Pose = field(default_factory=Pose.identity)
    inner_diameter: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "u0", np.asarray(self.u0, dtype=float).reshape(3))
        object.__setattr__(self, "v0", np.asarray(self.v0, dtype=float).reshape(3))
        checks = {
            "tube.length": self.length,
            "tube.youngs_modulus": self.youngs_modulus,
            "tube.shear_modulus": self.shear_modulus,
            "tube.area": self.area,
            "tube.i_xx": self.i_xx,
            "tube.i_yy": self.i_yy,
            "tube.j_zz": self.j_zz,
            "assumptions.tube_outer_diameter": self.diameter,
        }
        for key, value in checks.items():
            if not (np.isfinite(value) and value > 0.0):
                raise ConfigError(key, f"deve ser positivo (recebido {value})")
        if self.linear_density < 0.0:
            raise ConfigError("assumptions.tube_linear_density", "não pode ser negativa")
        if not np.linalg.norm(self.v0) > 0.0:
            raise ConfigError("tube.v0", "deve ser não nulo")

    @classmethod
    def annulus(cls, length: float, outer_diameter: float, inner_diameter: float,
                youngs_modulus: float, shear_modulus: float, linear_density: float = 0.0,
                precurvature_radius: Optional[float] = None, precurvature_plane: float = 0.0,
                base: Optional[Pose] = None) -> 'TubeParams':
        """
        Cria os parâmetros de um tubo de seção anular.

        Args:
            length: Comprimento (m)
            outer_diameter: Diâmetro externo (m)
            inner_diameter: Diâmetro do furo (m)
            youngs_modulus: E (Pa)
            shear_modulus: G (Pa)
            linear_density: Massa por metro (kg/m)
            precurvature_radius: Raio da pré-curvatura (m), None para tubo reto
            precurvature_plane: Rotação do plano de pré-curvatura em torno de e_3 (rad)
            base: Pose da base

        Returns:
            Objeto TubeParams
        """
        if not 0.0 <= inner_diameter < outer_diameter:
            raise ConfigError("assumptions.tube_inner_diameter", "deve estar em [0, diâmetro externo)")
        ro, ri = outer_diameter / 2.0, inner_diameter / 2.0
        area = np.pi * (ro ** 2 - ri ** 2)
        second = np.pi * (ro ** 4 - ri ** 4) / 4.0
        u0 = np.zeros(3)
        if precurvature_radius is not None:
            u0 = rot_about_axis(3, precurvature_plane) @ np.array([0.0, 1.0 / precurvature_radius, 0.0])
        return cls(
            length=length, diameter=outer_diameter,
            youngs_modulus=youngs_modulus, shear_modulus=shear_modulus,
            area=area, i_xx=second, i_yy=second, j_zz=2.0 * second,
            u0=u0, linear_density=linear_density,
            base=base or Pose.identity(), inner_diameter=inner_diameter,
        )

    @property
    def shear_extension_stiffness(self) -> np.ndarray:
        """Diagonal de K_se = diag(GA, GA, EA)."""
        return np.array([self.shear_modulus * self.area,
                         self.shear_modulus * self.area,
                         self.youngs_modulus * self.area])

    @property
    def bending_torsion_stiffness(self) -> np.ndarray:
        """Diagonal de K_bt = diag(EI_xx, EI_yy, GJ_zz)."""
        return np.array([self.youngs_modulus * self.i_xx,
                         self.youngs_modulus * self.i_yy,
                         self.shear_modulus * self.j_zz])

    @property
    def bending_stiffness(self) -> float:
        """EI_yy, a rigidez no plano de flexão do tendão."""
        return self.youngs_modulus * self.i_yy

    def stiffness_matrix(self) -> np.ndarray:
        """K = diag(GA, GA, EA, EI_xx, EI_yy, GJ_zz)."""
        return np.diag(np.concatenate([self.shear_extension_stiffness, self.bending_torsion_stiffness]))

    @property
    def tendon_offset(self) -> np.ndarray:
        """Posição do tendão na seção, (d_t/2) e_1."""
        return 0.5 * self.diameter * E1

    def with_base(self, base: Pose) -> 'TubeParams':
        return replace(self, base=base)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "length": self.length,
            "diameter": self.diameter,
            "youngs_modulus": self.youngs_modulus,
            "shear_modulus": self.shear_modulus,
            "area": self.area,
            "i_xx": self.i_xx,
            "i_yy": self.i_yy,
            "j_zz": self.j_zz,
            "u0": self.u0.tolist(),
            "v0": self.v0.tolist(),
            "linear_density": self.linear_density,
            "base": self.base.to_dict(),
            "inner_diameter": self.inner_diameter,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TubeParams':
        values = dict(data)
        values["base"] = Pose.from_dict(values.get("base", {}))
        return cls(**values)


@dataclass
class RodState:
    """
    Estado do tubo na abscissa s: posição, orientação e esforços internos
    (força n e momento m no referencial do corpo).
    """

    s: float
    position: np.ndarray
    rotation: np.ndarray
    force: np.ndarray
    moment: np.ndarray

    @classmethod
    def at_base(cls, params: TubeParams, force: Optional[np.ndarray] = None,
                moment: Optional[np.ndarray] = None) -> 'RodState':
        return cls(
            s=0.0,
            position=params.base.position.copy(),
            rotation=params.base.orientation.copy(),
            force=np.zeros(3) if force is None else np.asarray(force, dtype=float),
            moment=np.zeros(3) if moment is None else np.asarray(moment, dtype=float),
        )

    @property
    def tangent(self) -> np.ndarray:
        return self.rotation[:, 2]


@dataclass(frozen=True)
class PointLoad:
    """
    Carga pontual (N, referencial global) aplicada na abscissa s.
    """

    s: float
    force: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "force", np.asarray(self.force, dtype=float).reshape(3))

    def to_dict(self) -> Dict[str, Any]:
        return {"s": self.s, "force": self.force.tolist()}


@dataclass
class RodShape:
    """
    Forma do tubo amostrada numa grade uniforme de s.

    Attributes:
        s: Abscissas (N+1,)
        positions: Linha central (N+1, 3)
        rotations: Orientações (N+1, 3, 3)
        forces: Força interna no corpo (N+1, 3)
        moments: Momento interno no corpo (N+1, 3)
        tension: Tensão do tendão λ (N)
        residual: Resíduo do shooting
        iterations: Iterações do shooting
    """

    s: np.ndarray
    positions: np.ndarray
    rotations: np.ndarray
    forces: np.ndarray
    moments: np.ndarray
    tension: float = 0.0
    residual: float = 0.0
    iterations: int = 0
    _spline: Any = field(default=None, init=False, repr=False, compare=False)
    _slerp: Any = field(default=None, init=False, repr=False, compare=False)

    @property
    def length(self) -> float:
        return float(self.s[-1])

    @property
    def samples(self) -> List[RodState]:
        return [
            RodState(float(s), p, r, n, m)
            for s, p, r, n, m in zip(self.s, self.positions, self.rotations, self.forces, self.moments)
        ]

    @property
    def base(self) -> RodState:
        return self.samples[0]

    @property
    def tip(self) -> RodState:
        return RodState(float(self.s[-1]), self.positions[-1], self.rotations[-1],
                        self.forces[-1], self.moments[-1])

    @property
    def forces_global(self) -> np.ndarray:
        return np.einsum('kij,kj->ki', self.rotations, self.forces)

    @property
    def moments_global(self) -> np.ndarray:
        return np.einsum('kij,kj->ki', self.rotations, self.moments)

    def position_at(self, s: float) -> np.ndarray:
        """Linha central interpolada por spline cúbica."""
        if self._spline is None:
            self._spline = CubicSpline(self.s, self.positions, axis=0)
        return self._spline(s)

    def rotation_at(self, s: float) -> np.ndarray:
        """Orientação interpolada por Slerp."""
        if self._slerp is None:
            self._slerp = Slerp(self.s, Rotation.from_matrix(self.rotations))
        s = float(np.clip(s, self.s[0], self.s[-1]))
        return self._slerp([s]).as_matrix()[0]

    def frame_at(self, s: float) -> Tuple[np.ndarray, np.ndarray]:
        return self.position_at(s), self.rotation_at(s)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "s": self.s.tolist(),
            "positions": self.positions.tolist(),
            "rotations": self.rotations.tolist(),
            "forces": self.forces.tolist(),
            "moments": self.moments.tolist(),
            "tension": self.tension,
            "residual": self.residual,
            "iterations": self.iterations,
        }
