#!/usr/bin/env python3
"""
Interface de linha de comando do hybridkin.

Comandos: solve, forward, inverse, workspace e check. Códigos de saída:
0 sucesso, 1 erro de configuração, 2 solver sem convergência, 3 alvo
inviável, 4 verificação com falha.
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

from models.errors import ConfigError, ConvergenceError, HybridKinError, InfeasibleTargetError
from models.kinematics import IKSolution
from models.robot_config import MagnetConfig, RobotConfig
from solvers.robot_service import RobotService, parse_vector, shape_table, workspace_table
from utils.file_handler import (diagnostics_path_for, read_json, write_json, write_shape_csv,
                                write_workspace_csv)
from utils.logger import setup_logging

logger = logging.getLogger("hybridkin.cli")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CONVERGENCE = 2
EXIT_INFEASIBLE = 3
EXIT_CHECK = 4


class ArgumentParser(argparse.ArgumentParser):
    """Parser que sinaliza erros de uso como ConfigError (código 1)."""

    def error(self, message):
        raise ConfigError("argumentos", message)


def _vector_arg(name: str):
    def parse(text: str):
        return parse_vector(text, name)
    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = ArgumentParser(prog="hybridkin", description="Cinemática do robô híbrido tubo + corrente magnética")
    parser.add_argument("--log-level", default=None, help="Nível de log (DEBUG, INFO, WARNING, ERROR)")
    commands = parser.add_subparsers(dest="command", parser_class=ArgumentParser)
    commands.required = True

    solve = commands.add_parser("solve", help="Forma de equilíbrio do tubo e da corrente")
    solve.add_argument("config", help="Configuração do robô (JSON ou YAML)")
    load = solve.add_mutually_exclusive_group()
    load.add_argument("--tension", type=float, help="Tensão do tendão (N)")
    load.add_argument("--load-kg", type=float, help="Massa pendurada no tendão (kg)")
    solve.add_argument("--roll", type=float, help="Rolagem da base (rad)")
    solve.add_argument("--extended", type=int, help="Esferas estendidas além da ponta")
    solve.add_argument("--magnet", help="Configuração do ímã ou campo uniforme")
    mode = solve.add_mutually_exclusive_group()
    mode.add_argument("--coupled", dest="coupled", action="store_true", default=True)
    mode.add_argument("--decoupled", dest="coupled", action="store_false")
    solve.add_argument("--out", required=True, help="CSV da forma; o diagnóstico vai para <nome>.diagnostics.json")

    forward = commands.add_parser("forward", help="Cinemática direta de curvatura constante")
    forward.add_argument("config")
    forward.add_argument("--from-ik", help="Solução JSON de 'inverse'")
    bend = forward.add_mutually_exclusive_group()
    bend.add_argument("--tension", type=float, help="Tensão do tendão (N)")
    bend.add_argument("--kappa", type=float, help="Curvatura do tubo (1/m)")
    forward.add_argument("--roll", type=float, default=0.0, help="Rolagem da base (rad)")
    forward.add_argument("--direction", type=_vector_arg("direction"), help="Direção do campo x,y,z")
    forward.add_argument("--extended", type=int)
    forward.add_argument("--insertion", type=float, help="Comprimento inserido do tubo (m)")
    forward.add_argument("--out")

    inverse = commands.add_parser("inverse", help="Cinemática inversa")
    inverse.add_argument("config")
    inverse.add_argument("--target", type=_vector_arg("target"), required=True, help="Alvo x,y,z (m)")
    inverse.add_argument("--direction", type=_vector_arg("direction"), required=True,
                         help="Direção de aproximação x,y,z (normalizada)")
    inverse.add_argument("--fixed-bend", type=float, help="Mantém o ângulo de flexão fixo (rad)")
    inverse.add_argument("--out")

    workspace = commands.add_parser("workspace", help="Tabela do espaço de trabalho destro")
    workspace.add_argument("config")
    workspace.add_argument("--samples", type=int, required=True)
    workspace.add_argument("--r-min", type=float)
    workspace.add_argument("--r-max", type=float)
    workspace.add_argument("--out", required=True)

    check = commands.add_parser("check", help="Suíte de verificação embutida")
    check.add_argument("config")
    return parser


def _emit(payload, out: Optional[str]) -> None:
    if out:
        write_json(payload, out)
    else:
        print(json.dumps(payload, ensure_ascii=False, indent=2))


def cmd_solve(service: RobotService, args) -> int:
    robot = RobotConfig.load(args.config)
    magnet = MagnetConfig.load(args.magnet) if args.magnet else MagnetConfig.none()
    actuation = service.actuation(robot, magnet, tension=args.tension, load_mass=args.load_kg,
                                  roll=args.roll, extended=args.extended)
    sidecar = diagnostics_path_for(args.out)
    try:
        shape = service.solve(robot, actuation, coupled=args.coupled)
    except ConvergenceError as e:
        write_json(service.failure_report(robot, actuation, e, magnet), sidecar)
        logger.error("Solver não convergiu: %s", e)
        print(f"Erro: {e}", file=sys.stderr)
        return EXIT_CONVERGENCE
    write_shape_csv(shape_table(shape), args.out)
    write_json(service.solve_report(robot, actuation, shape, magnet), sidecar)
    return EXIT_OK


def cmd_forward(service: RobotService, args) -> int:
    robot = RobotConfig.load(args.config)
    if args.from_ik:
        try:
            solution = IKSolution.from_dict(read_json(args.from_ik))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(args.from_ik, f"solução inválida: {e}")
        payload = service.forward_from_ik(robot, solution)
    else:
        payload = service.forward(robot, tension=args.tension, kappa=args.kappa, roll=args.roll,
                                  direction=args.direction, extended=args.extended, insertion=args.insertion)
    _emit(payload, args.out)
    return EXIT_OK


def cmd_inverse(service: RobotService, args) -> int:
    robot = RobotConfig.load(args.config)
    try:
        solution = service.inverse(robot, args.target, args.direction, fixed_bend=args.fixed_bend)
    except InfeasibleTargetError as e:
        report = dict(e.details)
        report.update({"feasible": False, "reason": e.reason})
        _emit(report, args.out)
        print(f"Erro: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _emit(solution.to_dict(), args.out)
    return EXIT_OK


def cmd_workspace(service: RobotService, args) -> int:
    robot = RobotConfig.load(args.config)
    entries = service.workspace(robot, args.samples, args.r_min, args.r_max)
    write_workspace_csv(workspace_table(entries), args.out)
    return EXIT_OK


def cmd_check(service: RobotService, args) -> int:
    robot = RobotConfig.load(args.config)
    report = service.check(robot)
    print(report.to_markdown_table())
    return EXIT_OK if report.passed else EXIT_CHECK


COMMANDS = {
    "solve": cmd_solve,
    "forward": cmd_forward,
    "inverse": cmd_inverse,
    "workspace": cmd_workspace,
    "check": cmd_check,
}


def main(argv: Optional[List[str]] = None, service: Optional[RobotService] = None) -> int:
    """
    Executa um comando.

    Args:
        argv: Argumentos (padrão: sys.argv[1:])
        service: Serviço usado pelos comandos

    Returns:
        Código de saída
    """
    try:
        args = build_parser().parse_args(argv)
        setup_logging(args.log_level)
        return COMMANDS[args.command](service or RobotService(), args)
    except ConfigError as e:
        logger.error("Configuração inválida: %s", e)
        print(f"Erro de configuração: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleTargetError as e:
        logger.error("Alvo inviável: %s", e)
        print(f"Erro: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ConvergenceError as e:
        logger.error("Solver não convergiu: %s", e)
        print(f"Erro: {e}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except HybridKinError as e:
        # Geometria ou parâmetros inválidos detectados pelos modelos (tubo curto demais, singularidade)
        logger.error("Entrada inválida: %s", e)
        print(f"Erro de configuração: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
