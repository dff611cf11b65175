"""
API HTTP do hybridkin.
"""

import logging

from flask import Flask, jsonify, request
from flask_cors import CORS

from models.errors import ConfigError, ConvergenceError, HybridKinError, InfeasibleTargetError
from models.kinematics import IKSolution
from models.robot_config import MagnetConfig
from solvers.robot_service import RobotService, parse_vector
from utils.file_handler import ensure_dir
from utils.logger import setup_logging

import config

logger = logging.getLogger(__name__)

# Inicializa a aplicação Flask
app = Flask(__name__)
CORS(app)  # Habilita CORS para todas as rotas

# Inicializa o serviço do robô (configuração padrão carregada sob demanda)
service = RobotService()


def _payload():
    data = request.get_json(silent=True)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("corpo", "o corpo da requisição deve ser um objeto JSON")
    return data


def _vector(data, key, required=False):
    value = data.get(key)
    if value is None:
        if required:
            raise ConfigError(key, "campo obrigatório")
        return None
    if isinstance(value, str):
        return parse_vector(value, key)
    return parse_vector(",".join(str(v) for v in value), key)


def _optional_float(data, key):
    value = data.get(key)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, "deve ser numérico")
    return float(value)


@app.errorhandler(ConfigError)
def handle_config_error(error):
    return jsonify({"error": str(error), "key": error.key}), 400


@app.errorhandler(InfeasibleTargetError)
def handle_infeasible(error):
    report = dict(error.details)
    report.update({"feasible": False, "reason": error.reason})
    return jsonify({"error": str(error), "report": report}), 400


@app.errorhandler(HybridKinError)
def handle_model_error(error):
    # Entrada rejeitada pelos modelos vira 400; falha numérica vira 500
    status = 400 if isinstance(error, ValueError) else 500
    logger.error("%s: %s", type(error).__name__, error)
    return jsonify({"error": str(error), "error_type": type(error).__name__}), status


@app.route('/health', methods=['GET'])
def health_check():
    """Endpoint para verificar se a aplicação está funcionando."""
    return jsonify({"status": "ok"})


@app.route('/solve', methods=['POST'])
def solve():
    """Endpoint para resolver a forma de equilíbrio do robô."""
    data = _payload()
    robot = service.resolve(data.get("config"))
    magnet = MagnetConfig.from_dict(data["magnet"]) if data.get("magnet") else MagnetConfig.none()
    extended = data.get("extended")
    if extended is not None and (isinstance(extended, bool) or not isinstance(extended, int)):
        raise ConfigError("extended", "deve ser inteiro")
    actuation = service.actuation(robot, magnet, tension=_optional_float(data, "tension"),
                                  load_mass=_optional_float(data, "load_mass"),
                                  roll=_optional_float(data, "roll"), extended=extended)
    try:
        shape = service.solve(robot, actuation, coupled=bool(data.get("coupled", True)))
    except ConvergenceError as e:
        logger.error("Solver não convergiu: %s", e)
        return jsonify({"error": str(e), "diagnostics": service.failure_report(robot, actuation, e, magnet)}), 500

    report = service.solve_report(robot, actuation, shape, magnet)
    report["rod"] = shape.rod.to_dict()
    return jsonify(report)


@app.route('/forward', methods=['POST'])
def forward():
    """Endpoint para a cinemática direta de curvatura constante."""
    data = _payload()
    robot = service.resolve(data.get("config"))
    if data.get("ik_solution"):
        try:
            solution = IKSolution.from_dict(data["ik_solution"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError("ik_solution", f"solução inválida: {e}")
        return jsonify(service.forward_from_ik(robot, solution))

    extended = data.get("extended")
    if extended is not None and (isinstance(extended, bool) or not isinstance(extended, int)):
        raise ConfigError("extended", "deve ser inteiro")
    return jsonify(service.forward(
        robot,
        tension=_optional_float(data, "tension"),
        kappa=_optional_float(data, "kappa"),
        roll=_optional_float(data, "roll") or 0.0,
        direction=_vector(data, "direction"),
        extended=extended,
        insertion=_optional_float(data, "insertion"),
    ))


@app.route('/inverse', methods=['POST'])
def inverse():
    """Endpoint para a cinemática inversa."""
    data = _payload()
    robot = service.resolve(data.get("config"))
    solution = service.inverse(robot, _vector(data, "target", required=True),
                               _vector(data, "direction", required=True),
                               fixed_bend=_optional_float(data, "fixed_bend"))
    return jsonify(solution.to_dict())


@app.route('/workspace', methods=['POST'])
def workspace():
    """Endpoint para a tabela do espaço de trabalho."""
    data = _payload()
    robot = service.resolve(data.get("config"))
    samples = data.get("samples", 100)
    if isinstance(samples, bool) or not isinstance(samples, int):
        raise ConfigError("samples", "deve ser inteiro")
    entries = service.workspace(robot, samples, _optional_float(data, "r_min"), _optional_float(data, "r_max"))
    return jsonify({"entries": [entry.to_dict() for entry in entries]})


if __name__ == '__main__':
    setup_logging()

    # Garante que os diretórios necessários existem
    ensure_dir(config.OUTPUT_DIR)

    # Inicia a aplicação
    app.run(host=config.HOST, port=config.PORT, debug=config.DEBUG)
