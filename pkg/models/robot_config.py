"""
Documentos de configuração do robô e do ímã.

A leitura é estrita: chaves desconhecidas e valores inválidos levantam
ConfigError com o caminho da chave ofensiva.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

import numpy as np

from models.chain import BallParams, ChainParams, ChainSolverSettings
from models.errors import ConfigError
from models.field import Dipole, ExternalDipole, FieldSource, UniformField
from models.hybrid import DEFAULT_GRAVITY, ActuationInput, SolverSettings
from models.kinematics import CCParams
from models.rod import TubeParams
from utils.file_handler import read_config_document
from utils.geom import Pose

import config

# Valores que a caracterização do protótipo não fornece
DEFAULT_ASSUMPTIONS: Dict[str, Any] = {
    "tube_outer_diameter": 4.7e-3,
    "tube_inner_diameter": 3.4e-3,
    "tube_linear_density": 0.0099,
    "precurvature_enabled": False,
    "precurvature_radius": 0.0564,
    "precurvature_plane_deg": -26.8,
    "sleeve_bending_stiffness": 0.0,
    "max_radial_deflection": None,
}

ROBOT_KEYS = {"description", "tube", "chain", "gravity", "assumptions", "actuation", "solver"}
TUBE_KEYS = {"length", "youngs_modulus", "shear_modulus", "base"}
CHAIN_KEYS = {"count", "extended", "ball"}
BALL_KEYS = {"diameter", "mass", "remanence", "dipole_moment"}
ACTUATION_KEYS = {"tension", "load_mass", "roll"}
SOLVER_KEYS = {"rod_steps", "rod_tolerance", "rod_max_iter", "coupling_tolerance", "max_outer",
               "damping", "chain_tol", "chain_max_iter"}
MAGNET_KEYS = {"description", "kind", "position", "direction", "moment", "remanence", "diameter",
               "length", "field"}


def _check_keys(data: Any, allowed: Iterable[str], prefix: str) -> Dict[str, Any]:
    if not isinstance(data, dict):
        raise ConfigError(prefix or "<raiz>", "deve ser um objeto")
    for key in data:
        if key not in allowed:
            raise ConfigError(f"{prefix}.{key}" if prefix else key, "chave desconhecida")
    return data


def _require(data: Dict[str, Any], key: str, prefix: str) -> Any:
    if key not in data:
        raise ConfigError(f"{prefix}.{key}", "chave obrigatória ausente")
    return data[key]


def _number(value: Any, key: str, positive: bool = False, nonnegative: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"deve ser numérico (recebido {value!r})")
    value = float(value)
    if not np.isfinite(value):
        raise ConfigError(key, "deve ser finito")
    if positive and not value > 0.0:
        raise ConfigError(key, f"deve ser positivo (recebido {value})")
    if nonnegative and value < 0.0:
        raise ConfigError(key, f"não pode ser negativo (recebido {value})")
    return value


def _integer(value: Any, key: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"deve ser inteiro (recebido {value!r})")
    if value < minimum:
        raise ConfigError(key, f"deve ser pelo menos {minimum}")
    return value


def _vector(value: Any, key: str) -> np.ndarray:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(key, "deve ser uma lista de 3 números")
    return np.array([_number(v, f"{key}[{i}]") for i, v in enumerate(value)])


def _pose(value: Any, key: str) -> Pose:
    data = _check_keys(value, {"position", "orientation"}, key)
    position = _vector(data.get("position", [0.0, 0.0, 0.0]), f"{key}.position")
    rows = data.get("orientation", np.eye(3).tolist())
    shape_ok = isinstance(rows, (list, tuple)) and len(rows) == 3 and all(
        isinstance(row, (list, tuple)) and len(row) == 3 for row in rows)
    if not shape_ok:
        raise ConfigError(f"{key}.orientation", "deve ser uma matriz 3×3")
    orientation = np.array([[_number(v, f"{key}.orientation") for v in row] for row in rows])
    try:
        return Pose(position, orientation)
    except ValueError as e:
        raise ConfigError(f"{key}.orientation", str(e))


@dataclass
class RobotConfig:
    """
    Configuração completa do robô híbrido.

    Attributes:
        tube: Parâmetros do tubo
        chain: Parâmetros da corrente
        gravity: Aceleração da gravidade (m/s²); None desliga a gravidade
        assumptions: Valores assumidos, ecoados no diagnóstico
        tension: Tensão padrão do tendão (N)
        roll: Rolagem padrão da base (rad)
        settings: Configurações dos solvers
        source_path: Arquivo de origem, quando lido do disco
    """

    tube: TubeParams
    chain: ChainParams
    gravity: Optional[np.ndarray] = field(default_factory=lambda: DEFAULT_GRAVITY.copy())
    assumptions: Dict[str, Any] = field(default_factory=lambda: dict(DEFAULT_ASSUMPTIONS))
    tension: float = 0.0
    roll: float = 0.0
    settings: SolverSettings = field(default_factory=SolverSettings)
    source_path: Optional[str] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RobotConfig':
        """
        Cria a configuração a partir de um documento.

        Args:
            data: Documento com os blocos tube, chain, gravity, assumptions, actuation e solver

        Returns:
            Objeto RobotConfig

        Raises:
            ConfigError: Chave desconhecida, ausente ou valor inválido
        """
        data = _check_keys(data, ROBOT_KEYS, "")

        assumptions = dict(DEFAULT_ASSUMPTIONS)
        assumptions.update(_check_keys(data.get("assumptions", {}), DEFAULT_ASSUMPTIONS.keys(), "assumptions"))

        tube_data = _check_keys(_require(data, "tube", ""), TUBE_KEYS, "tube")
        precurvature = None
        if assumptions["precurvature_enabled"]:
            precurvature = _number(assumptions["precurvature_radius"], "assumptions.precurvature_radius",
                                   positive=True)
        tube = TubeParams.annulus(
            length=_number(_require(tube_data, "length", "tube"), "tube.length", positive=True),
            outer_diameter=_number(assumptions["tube_outer_diameter"], "assumptions.tube_outer_diameter",
                                   positive=True),
            inner_diameter=_number(assumptions["tube_inner_diameter"], "assumptions.tube_inner_diameter",
                                   nonnegative=True),
            youngs_modulus=_number(_require(tube_data, "youngs_modulus", "tube"), "tube.youngs_modulus",
                                   positive=True),
            shear_modulus=_number(_require(tube_data, "shear_modulus", "tube"), "tube.shear_modulus",
                                  positive=True),
            linear_density=_number(assumptions["tube_linear_density"], "assumptions.tube_linear_density",
                                   nonnegative=True),
            precurvature_radius=precurvature,
            precurvature_plane=np.deg2rad(_number(assumptions["precurvature_plane_deg"],
                                                  "assumptions.precurvature_plane_deg")),
            base=_pose(tube_data["base"], "tube.base") if "base" in tube_data else None,
        )

        chain_data = _check_keys(_require(data, "chain", ""), CHAIN_KEYS, "chain")
        ball = cls._parse_ball(_require(chain_data, "ball", "chain"))
        count = _integer(_require(chain_data, "count", "chain"), "chain.count", minimum=1)
        extended = _integer(chain_data.get("extended", 0), "chain.extended")
        if extended > count:
            raise ConfigError("chain.extended", f"deve estar em [0, {count}]")
        chain = ChainParams(
            ball=ball, count=count, extended=extended,
            sleeve_ei=_number(assumptions["sleeve_bending_stiffness"], "assumptions.sleeve_bending_stiffness",
                              nonnegative=True),
        )
        if assumptions["max_radial_deflection"] is not None:
            _number(assumptions["max_radial_deflection"], "assumptions.max_radial_deflection", positive=True)

        gravity = DEFAULT_GRAVITY.copy()
        if "gravity" in data:
            gravity = None if data["gravity"] is None else _vector(data["gravity"], "gravity")

        tension, roll = cls._parse_actuation(data.get("actuation", {}))
        settings = cls._parse_solver(data.get("solver", {}))

        return cls(tube=tube, chain=chain, gravity=gravity, assumptions=assumptions,
                   tension=tension, roll=roll, settings=settings)

    @staticmethod
    def _parse_ball(data: Any) -> BallParams:
        data = _check_keys(data, BALL_KEYS, "chain.ball")
        diameter = _number(_require(data, "diameter", "chain.ball"), "chain.ball.diameter", positive=True)
        mass = _number(data.get("mass", 0.0), "chain.ball.mass", nonnegative=True)
        if ("remanence" in data) == ("dipole_moment" in data):
            raise ConfigError("chain.ball", "informe exatamente um entre remanence e dipole_moment")
        if "remanence" in data:
            remanence = _number(data["remanence"], "chain.ball.remanence", nonnegative=True)
            return BallParams.from_remanence(diameter, mass, remanence)
        moment = _number(data["dipole_moment"], "chain.ball.dipole_moment", nonnegative=True)
        return BallParams(diameter=diameter, mass=mass, dipole_moment=moment)

    @staticmethod
    def _parse_actuation(data: Any):
        data = _check_keys(data, ACTUATION_KEYS, "actuation")
        if "tension" in data and "load_mass" in data:
            raise ConfigError("actuation", "informe tension ou load_mass, não ambos")
        tension = 0.0
        if "tension" in data:
            tension = _number(data["tension"], "actuation.tension", nonnegative=True)
        elif "load_mass" in data:
            tension = _number(data["load_mass"], "actuation.load_mass", nonnegative=True) * config.STANDARD_GRAVITY
        return tension, _number(data.get("roll", 0.0), "actuation.roll")

    @staticmethod
    def _parse_solver(data: Any) -> SolverSettings:
        data = _check_keys(data, SOLVER_KEYS, "solver")
        chain = ChainSolverSettings(
            tol=_number(data.get("chain_tol", config.CHAIN_TOLERANCE), "solver.chain_tol", positive=True),
            max_iter=_integer(data.get("chain_max_iter", config.CHAIN_MAX_ITER), "solver.chain_max_iter", 1),
        )
        return SolverSettings(
            tolerance=_number(data.get("coupling_tolerance", config.COUPLING_TOLERANCE),
                              "solver.coupling_tolerance", positive=True),
            max_outer=_integer(data.get("max_outer", config.COUPLING_MAX_OUTER), "solver.max_outer", 1),
            damping=_number(data.get("damping", config.COUPLING_DAMPING), "solver.damping", positive=True),
            rod_steps=_integer(data.get("rod_steps", config.ROD_STEPS), "solver.rod_steps", 16),
            rod_tolerance=_number(data.get("rod_tolerance", config.ROD_TOLERANCE), "solver.rod_tolerance",
                                  positive=True),
            rod_max_iter=_integer(data.get("rod_max_iter", config.ROD_MAX_ITER), "solver.rod_max_iter", 1),
            chain=chain,
        )

    @classmethod
    def load(cls, file_path: Union[str, Path]) -> 'RobotConfig':
        """Lê a configuração de um arquivo JSON ou YAML."""
        robot = cls.from_dict(read_config_document(file_path))
        robot.source_path = str(file_path)
        return robot

    @classmethod
    def default(cls) -> 'RobotConfig':
        """Configuração do protótipo (templates/robot_default.json)."""
        return cls.load(config.DEFAULT_ROBOT_CONFIG)

    def cc_params(self) -> CCParams:
        """Parâmetros do modelo de curvatura constante."""
        return CCParams.from_params(self.tube, self.chain, self.assumptions.get("max_radial_deflection"))

    def actuation(self, source: Optional[FieldSource] = None, tension: Optional[float] = None,
                  roll: Optional[float] = None, extended: Optional[int] = None) -> ActuationInput:
        """
        Entradas de atuação com os padrões do documento.
        """
        return ActuationInput(
            tension=self.tension if tension is None else tension,
            roll=self.roll if roll is None else roll,
            source=source or UniformField.zero(),
            gravity=None if self.gravity is None else self.gravity.copy(),
            extended=extended,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tube": self.tube.to_dict(),
            "chain": self.chain.to_dict(),
            "gravity": None if self.gravity is None else self.gravity.tolist(),
            "assumptions": dict(self.assumptions),
            "tension": self.tension,
            "roll": self.roll,
            "solver": self.settings.to_dict(),
            "source_path": self.source_path,
        }


@dataclass
class MagnetConfig:
    """
    Fonte de campo lida de um documento: ímã dipolar ou campo uniforme.

    Attributes:
        kind: "external_dipole" ou "uniform"
        source: Fonte de campo correspondente
        moment: Módulo do dipolo do ímã (A·m²), derivado da remanência quando for o caso
    """

    kind: str
    source: FieldSource
    moment: Optional[float] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'MagnetConfig':
        """
        Cria a fonte a partir de um documento.

        external_dipole exige position, direction e exatamente um entre
        moment e o trio (remanence, diameter, length) do ímã cilíndrico.
        uniform exige field.
        """
        from utils.magnetics import magnet_moment_from_cylinder

        data = _check_keys(data, MAGNET_KEYS, "magnet")
        kind = _require(data, "kind", "magnet")
        if kind == UniformField.kind:
            extra = set(data) - {"description", "kind", "field"}
            if extra:
                raise ConfigError(f"magnet.{sorted(extra)[0]}", "não se aplica ao campo uniforme")
            return cls(kind=kind, source=UniformField(_vector(_require(data, "field", "magnet"), "magnet.field")))

        if kind != ExternalDipole.kind:
            raise ConfigError("magnet.kind", f"tipo de fonte não suportado: {kind}")
        if "field" in data:
            raise ConfigError("magnet.field", "não se aplica ao ímã dipolar")
        position = _vector(_require(data, "position", "magnet"), "magnet.position")
        direction = _vector(_require(data, "direction", "magnet"), "magnet.direction")
        norm = np.linalg.norm(direction)
        if not norm > 0.0:
            raise ConfigError("magnet.direction", "deve ser não nula")

        cylinder = [key for key in ("remanence", "diameter", "length") if key in data]
        if "moment" in data:
            if cylinder:
                raise ConfigError(f"magnet.{cylinder[0]}", "informe moment ou a geometria do ímã, não ambos")
            moment = _number(data["moment"], "magnet.moment", nonnegative=True)
        else:
            if len(cylinder) != 3:
                raise ConfigError("magnet", "informe moment ou remanence, diameter e length")
            moment = magnet_moment_from_cylinder(
                _number(data["diameter"], "magnet.diameter", positive=True),
                _number(data["length"], "magnet.length", positive=True),
                _number(data["remanence"], "magnet.remanence", nonnegative=True),
            )
        source = ExternalDipole(Dipole(position, moment * direction / norm))
        return cls(kind=kind, source=source, moment=moment)

    @classmethod
    def load(cls, file_path: Union[str, Path]) -> 'MagnetConfig':
        return cls.from_dict(read_config_document(file_path))

    @classmethod
    def none(cls) -> 'MagnetConfig':
        """Sem fonte externa (campo uniforme nulo)."""
        return cls(kind=UniformField.kind, source=UniformField.zero())

    def to_dict(self) -> Dict[str, Any]:
        data = self.source.to_dict()
        if self.moment is not None:
            data["moment_magnitude"] = self.moment
        return data
