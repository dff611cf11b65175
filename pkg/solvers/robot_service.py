"""
Serviço do robô - Coordena configuração, solvers e exportação para a CLI e a API HTTP.
"""

import logging
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.spatial.transform import Rotation

from models.errors import ConfigError, ConvergenceError
from models.hybrid import ActuationInput, HybridShape
from models.kinematics import FeasibilityReport, IKSolution, WorkspaceEntry
from models.robot_config import MagnetConfig, RobotConfig
from solvers.closedform import (check_feasibility, curvature_for_tension, forward_from_ik, forward_hybrid_cc,
                                forward_tube_cc, inverse_kinematics, workspace_sweep)
from solvers.hybrid_solver import HybridSolver

logger = logging.getLogger(__name__)

SHAPE_COLUMNS = ["kind", "index", "s_or_i", "x", "y", "z", "qx", "qy", "qz", "qw", "mx", "my", "mz"]
WORKSPACE_COLUMNS = ["r", "alpha_max", "beta_max", "region"]


def parse_vector(text: str, name: str = "vetor") -> np.ndarray:
    """
    Converte "x,y,z" em um vetor.

    Raises:
        ConfigError: Se o texto não tem três números finitos
    """
    try:
        values = np.array([float(part) for part in str(text).split(",")])
    except ValueError:
        raise ConfigError(name, f"esperado x,y,z (recebido {text!r})")
    if values.shape != (3,) or not np.all(np.isfinite(values)):
        raise ConfigError(name, f"esperado x,y,z (recebido {text!r})")
    return values


def shape_table(shape: HybridShape) -> pd.DataFrame:
    """
    Tabela da forma: uma linha por amostra do tubo (com o quaternion da
    orientação) e uma por esfera (com o dipolo).
    """
    rod = shape.rod
    quats = Rotation.from_matrix(rod.rotations).as_quat()
    rows: List[Dict[str, Any]] = []
    for k, (s, p, q) in enumerate(zip(rod.s, rod.positions, quats)):
        rows.append({
            "kind": "rod", "index": k, "s_or_i": float(s),
            "x": p[0], "y": p[1], "z": p[2],
            "qx": q[0], "qy": q[1], "qz": q[2], "qw": q[3],
            "mx": np.nan, "my": np.nan, "mz": np.nan,
        })
    for i, (p, m) in enumerate(zip(shape.chain.positions, shape.chain.dipoles)):
        rows.append({
            "kind": "ball", "index": i, "s_or_i": float(i + 1),
            "x": p[0], "y": p[1], "z": p[2],
            "qx": np.nan, "qy": np.nan, "qz": np.nan, "qw": np.nan,
            "mx": m[0], "my": m[1], "mz": m[2],
        })
    return pd.DataFrame(rows, columns=SHAPE_COLUMNS)


def workspace_table(entries: Sequence[WorkspaceEntry]) -> pd.DataFrame:
    return pd.DataFrame([entry.to_dict() for entry in entries], columns=WORKSPACE_COLUMNS)


class RobotService:
    """
    Serviço do robô - ponto de entrada único dos comandos.
    """

    def __init__(self, robot: Optional[RobotConfig] = None):
        """
        Inicializa o serviço.

        Args:
            robot: Configuração padrão; lida de templates/robot_default.json quando omitida
        """
        self._robot = robot

    @property
    def robot(self) -> RobotConfig:
        if self._robot is None:
            self._robot = RobotConfig.default()
        return self._robot

    def resolve(self, document: Optional[Dict[str, Any]] = None) -> RobotConfig:
        """Configuração de um documento, ou a padrão do serviço."""
        return self.robot if document is None else RobotConfig.from_dict(document)

    def actuation(self, robot: RobotConfig, magnet: Optional[MagnetConfig] = None,
                  tension: Optional[float] = None, load_mass: Optional[float] = None,
                  roll: Optional[float] = None, extended: Optional[int] = None) -> ActuationInput:
        """
        Monta a atuação, validando as entradas antes de qualquer solver.
        """
        if tension is not None and load_mass is not None:
            raise ConfigError("tension", "informe a tensão ou a massa de carga, não ambas")
        if load_mass is not None:
            if load_mass < 0.0:
                raise ConfigError("load_mass", "não pode ser negativa")
            base = ActuationInput.from_load_mass(load_mass)
            tension = base.tension
        if extended is not None and not 0 <= extended <= robot.chain.count:
            raise ConfigError("extended", f"deve estar em [0, {robot.chain.count}]")
        source = (magnet or MagnetConfig.none()).source
        return robot.actuation(source=source, tension=tension, roll=roll, extended=extended)

    def solve(self, robot: RobotConfig, actuation: ActuationInput, coupled: bool = True) -> HybridShape:
        """
        Resolve a forma do robô.

        Args:
            robot: Configuração do robô
            actuation: Entradas de atuação
            coupled: Iteração acoplada (True) ou passo único desacoplado

        Returns:
            Forma do tubo e da corrente com diagnóstico
        """
        logger.info("Resolvendo (%s): tensão %.4g N, rolagem %.4g rad",
                    "acoplado" if coupled else "desacoplado", actuation.tension, actuation.roll)
        solver = HybridSolver(robot.tube, robot.chain, robot.settings)
        return solver.solve(actuation, coupled=coupled)

    def compare(self, robot: RobotConfig, actuation: ActuationInput) -> Dict[str, Any]:
        return HybridSolver(robot.tube, robot.chain, robot.settings).compare_models(actuation).to_dict()

    def solve_report(self, robot: RobotConfig, actuation: ActuationInput, shape: HybridShape,
                     magnet: Optional[MagnetConfig] = None) -> Dict[str, Any]:
        """
        Diagnóstico de uma solução: iterações, resíduos, energias e entradas ecoadas.
        """
        report = {"converged": shape.diagnostics.converged}
        report.update(shape.to_dict())
        report["actuation"] = actuation.to_dict()
        report["ball"] = robot.chain.ball.to_dict()
        report["magnet"] = (magnet or MagnetConfig.none()).to_dict()
        report["assumptions"] = dict(robot.assumptions)
        return report

    def failure_report(self, robot: RobotConfig, actuation: ActuationInput, error: ConvergenceError,
                       magnet: Optional[MagnetConfig] = None) -> Dict[str, Any]:
        """
        Diagnóstico de um solver que não convergiu, com a última iteração quando disponível.
        """
        report: Dict[str, Any] = {}
        if isinstance(error.result, HybridShape):
            report = self.solve_report(robot, actuation, error.result, magnet)
        report.update({
            "converged": False,
            "error": str(error),
            "error_type": type(error).__name__,
            "iterations": error.iterations,
            "residual": error.residual,
        })
        report.setdefault("actuation", actuation.to_dict())
        report.setdefault("ball", robot.chain.ball.to_dict())
        report.setdefault("magnet", (magnet or MagnetConfig.none()).to_dict())
        return report

    def forward(self, robot: RobotConfig, tension: Optional[float] = None, kappa: Optional[float] = None,
                roll: float = 0.0, direction: Optional[np.ndarray] = None, extended: Optional[int] = None,
                insertion: Optional[float] = None, base_advance: float = 0.0) -> Dict[str, Any]:
        """
        Cinemática direta de curvatura constante.

        A curvatura vem de kappa ou da tensão; sem direção de campo a corrente
        segue a tangente da ponta do tubo.
        """
        params = robot.cc_params()
        if tension is not None and kappa is not None:
            raise ConfigError("kappa", "informe a tensão ou a curvatura, não ambas")
        if kappa is None:
            tension = robot.tension if tension is None else tension
            kappa = curvature_for_tension(tension, params.bending_stiffness, params.tube_diameter)
        elif kappa < 0.0:
            raise ConfigError("kappa", "deve ser não negativa")
        n_extended = robot.chain.extended if extended is None else extended
        if not 0 <= n_extended <= params.count:
            raise ConfigError("extended", f"deve estar em [0, {params.count}]")
        if insertion is not None and not insertion > 0.0:
            raise ConfigError("insertion", "deve ser positivo")

        tube_tip = forward_tube_cc(params, roll, kappa, insertion, base_advance)
        if direction is None:
            b_hat = tube_tip.orientation[:, 2]
        else:
            b_hat = self._unit(direction, "direction")
        tip, tangent = forward_hybrid_cc(params, roll, kappa, b_hat, n_extended, insertion, base_advance)
        return {
            "kappa": kappa,
            "phi": roll,
            "n_extended": n_extended,
            "tube_tip": tube_tip.to_dict(),
            "tip": tip.tolist(),
            "tangent": tangent.tolist(),
        }

    def forward_from_ik(self, robot: RobotConfig, solution: IKSolution) -> Dict[str, Any]:
        tip, tangent = forward_from_ik(robot.cc_params(), solution)
        return {
            "kappa": solution.kappa,
            "phi": solution.phi,
            "n_extended": solution.n_extended,
            "tip": tip.tolist(),
            "tangent": tangent.tolist(),
        }

    def inverse(self, robot: RobotConfig, target: np.ndarray, direction: np.ndarray,
                fixed_bend: Optional[float] = None) -> IKSolution:
        """
        Cinemática inversa; a direção é normalizada aqui.

        Raises:
            InfeasibleTargetError: Com o relatório de viabilidade em details
        """
        return inverse_kinematics(np.asarray(target, dtype=float), self._unit(direction, "direction"),
                                  robot.cc_params(), fixed_bend=fixed_bend)

    def feasibility(self, robot: RobotConfig, target: np.ndarray, direction: np.ndarray) -> FeasibilityReport:
        return check_feasibility(np.asarray(target, dtype=float), self._unit(direction, "direction"),
                                 robot.cc_params())

    def workspace(self, robot: RobotConfig, samples: int, r_min: Optional[float] = None,
                  r_max: Optional[float] = None) -> List[WorkspaceEntry]:
        """
        Tabela do espaço de trabalho; por padrão de 0 a r_d + n d_c.
        """
        params = robot.cc_params()
        r_min = 0.0 if r_min is None else r_min
        r_max = params.max_deflection + params.reach if r_max is None else r_max
        return workspace_sweep(params, r_min, r_max, samples)

    def check(self, robot: RobotConfig):
        """Executa a suíte de verificação embutida."""
        from solvers.verification import run_verification

        return run_verification(robot)

    @staticmethod
    def _unit(vector: np.ndarray, name: str) -> np.ndarray:
        vector = np.asarray(vector, dtype=float).reshape(3)
        norm = np.linalg.norm(vector)
        if not (np.isfinite(norm) and norm > 0.0):
            raise ConfigError(name, "deve ser um vetor não nulo")
        return vector / norm
