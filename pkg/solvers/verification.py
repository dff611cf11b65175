"""
Suíte de verificação embutida: limites analíticos, oráculos e
comparações por diferenças finitas contra uma configuração do robô.
"""

import logging
import time
from dataclasses import replace
from typing import Callable, List, Optional, Tuple

import numpy as np

from models.chain import ChainConfig, ChainConstraints
from models.errors import HybridKinError, InfeasibleTargetError
from models.field import Dipole, ExternalDipole, FieldSource, UniformField
from models.kinematics import CCParams
from models.report import CheckResult, VerificationReport
from models.robot_config import MagnetConfig, RobotConfig
from solvers.chain_solver import ChainSolver, brute_force_min, init_chain_guess, reference_energy
from solvers.closedform import (alpha_max, beta_max, check_feasibility, forward_from_ik, forward_tube_cc,
                                inverse_kinematics)
from solvers.cosserat_solver import CosseratSolver, force_balance_residual
from solvers.hybrid_solver import HybridSolver
from utils.geom import E2, E3, Pose, unit
from utils.magnetics import chain_energy, chain_energy_gradient, dipole_field, dipole_field_gradient

import config

logger = logging.getLogger(__name__)

SEED = 20240521
IK_SAMPLES = 1000
GRADIENT_SAMPLES = 100
BRUTE_FORCE_PLACEMENTS = 10
ALIGNMENT_EXTENDED = (4, 8)
ALIGNMENT_TOLERANCE_DEG = 2.0
FULL_CONFIGURATION_SECONDS = 10.0


def _random_directions(rng: np.random.Generator, count: int) -> np.ndarray:
    return unit(rng.normal(size=(count, 3)))


def check_workspace_identities(robot: RobotConfig, rng: np.random.Generator) -> CheckResult:
    """α_M(r_d) = β_M(r_d) = π, 2π na faixa destra e 0 no alcance máximo."""
    params = robot.cc_params()
    rd, reach, dc = params.max_deflection, params.reach, params.ball_diameter
    errors = [
        abs(alpha_max(rd, params) - np.pi),
        abs(beta_max(rd, params) - np.pi),
        abs(alpha_max(rd + reach, params)),
        abs(beta_max(rd + reach, params)),
    ]
    if rd - dc >= dc:
        for r in np.linspace(dc, rd - dc, 50):
            errors.append(abs(alpha_max(r, params) - 2.0 * np.pi))
            errors.append(abs(beta_max(r, params) - 2.0 * np.pi))
    # O ramo da lei dos cossenos tende a π em r_d⁺ com erro O(√ε)
    continuity = abs(beta_max(rd + 1e-12 * rd, params) - np.pi)
    worst = max(errors)
    return CheckResult("workspace_identities", worst <= 1e-12 and continuity <= 1e-4, worst, 1e-12,
                       f"continuidade de β_M em r_d: {continuity:.1e} rad")


def check_tip_moment_arc(robot: RobotConfig, rng: np.random.Generator) -> CheckResult:
    """Momento puro na ponta: o tubo forma um arco de curvatura M/(EI)."""
    tube = replace(robot.tube, u0=np.zeros(3), base=Pose.identity())
    params = CCParams(tube.length, tube.bending_stiffness, tube.diameter, robot.chain.count,
                      robot.chain.ball.diameter)
    solver = CosseratSolver(tube, steps=robot.settings.rod_steps)
    worst = 0.0
    for degrees in (5.0, 30.0, 60.0, 90.0):
        kappa = np.deg2rad(degrees) / tube.length
        moment = kappa * tube.bending_stiffness
        shape = solver.solve(0.0, tip_wrench=(np.zeros(3), moment * E2))
        expected = forward_tube_cc(params, 0.0, kappa).position
        worst = max(worst, float(np.linalg.norm(shape.tip.position - expected)) / tube.length)
    return CheckResult("tip_moment_arc", worst < 1e-3, worst, 1e-3, "erro da ponta / l_t, flexões de 5° a 90°")


def check_dipole_gradient(robot: RobotConfig, rng: np.random.Generator) -> CheckResult:
    """Jacobiano analítico do campo de dipolo contra diferenças centrais."""
    step = 1e-6
    worst = 0.0
    moment = max(robot.chain.ball.dipole_moment, 1e-3)
    for _ in range(20):
        r = 0.05 * _random_directions(rng, 1)[0]
        mu = moment * _random_directions(rng, 1)[0]
        analytic = dipole_field_gradient(r, mu)
        numeric = np.zeros((3, 3))
        for b in range(3):
            shift = np.zeros(3)
            shift[b] = step
            numeric[:, b] = (dipole_field(r + shift, mu) - dipole_field(r - shift, mu)) / (2.0 * step)
        worst = max(worst, float(np.linalg.norm(analytic - numeric) / np.linalg.norm(analytic)))
    return CheckResult("dipole_gradient_fd", worst < 1e-6, worst, 1e-6, "‖∂B/∂r − DF‖/‖∂B/∂r‖ em ‖r‖ = 0,05 m")


def _random_chain(rng: np.random.Generator, count: int, diameter: float, moment: float) -> ChainConfig:
    """Cadeia aleatória sem interpenetração de esferas não adjacentes."""
    while True:
        links = unit(E3 + 0.8 * rng.normal(size=(count - 1, 3)))
        positions = np.vstack([np.zeros(3), diameter * np.cumsum(links, axis=0)])
        i, j = np.triu_indices(count, k=2)
        if len(i) == 0 or np.all(np.linalg.norm(positions[i] - positions[j], axis=1) >= diameter):
            return ChainConfig(positions, moment * _random_directions(rng, count))


def check_chain_gradient(robot: RobotConfig, rng: np.random.Generator) -> CheckResult:
    """Gradiente da energia da corrente contra diferenças centrais."""
    ball = robot.chain.ball
    if ball.dipole_moment == 0.0:
        ball = replace(ball, dipole_moment=1e-2)
    d = ball.diameter
    src = ExternalDipole(Dipole([0.0, 0.12, 0.0], [0.0, 200.0, 0.0]))
    gravity = robot.gravity
    sleeve = max(robot.chain.sleeve_ei, 1e-6)
    count = max(robot.chain.count, 2)
    step_p, step_m = 1e-9 * d / 3.175e-3, 1e-6 * ball.dipole_moment
    worst = 0.0
    for _ in range(GRADIENT_SAMPLES):
        chain = _random_chain(rng, count, d, ball.dipole_moment)
        grad_p, grad_m = chain_energy_gradient(chain, src, ball, gravity, sleeve, count)
        analytic = np.concatenate([grad_p.ravel(), grad_m.ravel()])
        numeric = np.zeros_like(analytic)
        for k in range(analytic.size):
            index, axis = divmod(k % (3 * count), 3)
            on_position = k < 3 * count
            plus, minus = chain.copy(), chain.copy()
            step = step_p if on_position else step_m
            target_plus = plus.positions if on_position else plus.dipoles
            target_minus = minus.positions if on_position else minus.dipoles
            target_plus[index, axis] += step
            target_minus[index, axis] -= step
            numeric[k] = (chain_energy(plus, src, ball, gravity, sleeve, count).total
                          - chain_energy(minus, src, ball, gravity, sleeve, count).total) / (2.0 * step)
        scale = np.concatenate([np.full(3 * count, d), np.full(3 * count, ball.dipole_moment)])
        error = np.linalg.norm((analytic - numeric) * scale) / np.linalg.norm(analytic * scale)
        worst = max(worst, float(error))
    return CheckResult("chain_gradient_fd", worst < 1e-5, worst, 1e-5,
                       f"{GRADIENT_SAMPLES} configurações aleatórias, ímã dipolar, gravidade e luva")


def _oracle_sources(rng: np.random.Generator, ball_moment: float) -> List[FieldSource]:
    """Fontes cujo campo na âncora (origem) forma no máximo 90° com e_3."""
    sources: List[FieldSource] = []
    for k in range(BRUTE_FORCE_PLACEMENTS):
        if k % 2 == 0:
            direction = unit(E3 + rng.normal(size=3))
            direction[2] = abs(direction[2])
            sources.append(UniformField(rng.uniform(0.01, 0.03) * direction))
        else:
            position = 0.1 * _random_directions(rng, 1)[0]
            moment = 200.0 * _random_directions(rng, 1)[0]
            if dipole_field(-position, moment)[2] < 0.0:
                moment = -moment
            sources.append(ExternalDipole(Dipole(position, moment)))
    return sources


def check_brute_force(robot: RobotConfig, rng: np.random.Generator) -> CheckResult:
    """
    A minimização nunca fica acima do mínimo da busca exaustiva (1 e 2 esferas livres).
    """
    ball = robot.chain.ball
    d = ball.diameter
    fixed = 2
    fixed_p = np.array([[0.0, 0.0, -d], [0.0, 0.0, 0.0]])
    fixed_m = ball.dipole_moment * np.tile(E3, (fixed, 1))
    constraints = ChainConstraints(fixed, fixed_p, fixed_m, np.zeros(3), E3)
    solver = ChainSolver(ball, robot.chain.sleeve_ei, robot.settings.chain)
    worst = -np.inf
    for k, src in enumerate(_oracle_sources(rng, ball.dipole_moment)):
        free = 1 if k < BRUTE_FORCE_PLACEMENTS // 2 else 2
        resolution = np.deg2rad(1.0)
        guess = ChainConfig(
            np.vstack([fixed_p, [[0.0, 0.0, (j + 1) * d] for j in range(free)]]),
            np.vstack([fixed_m, np.tile(ball.dipole_moment * E3, (free, 1))]),
        )
        solution = solver.minimize(guess, constraints, src, robot.gravity)
        oracle = brute_force_min(constraints, src, robot.gravity, resolution, ball, free, robot.chain.sleeve_ei)
        oracle_energy = chain_energy(oracle, src, ball, robot.gravity, robot.chain.sleeve_ei, free).total
        u_ref = reference_energy(constraints, src, ball, robot.gravity, robot.chain.sleeve_ei)
        worst = max(worst, (solution.energy.total - oracle_energy) / u_ref)
    return CheckResult("brute_force_oracle", worst <= 1e-9, worst, 1e-9,
                       "(U_min − U_grade)/U_ref; grade de 1° com 1 e 2 esferas livres")


def _sample_target(params: CCParams, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    bend = rng.uniform(1e-3, 0.9 * np.pi / 2.0)
    phi = rng.uniform(0.0, 2.0 * np.pi)
    tube_tip = forward_tube_cc(params, phi, bend / params.length)
    direction = unit(tube_tip.orientation[:, 2] + 1.5 * rng.normal(size=3))
    extended = int(rng.integers(0, params.count + 1))
    return tube_tip.position + extended * params.ball_diameter * direction, direction


def check_ik_round_trip(robot: RobotConfig, rng: np.random.Generator) -> CheckResult:
    """IK seguida da cinemática direta reproduz alvos viáveis aleatórios."""
    params = robot.cc_params()
    worst_position, worst_direction = 0.0, 0.0
    accepted = attempts = 0
    while accepted < IK_SAMPLES and attempts < 50 * IK_SAMPLES:
        attempts += 1
        target, direction = _sample_target(params, rng)
        if not check_feasibility(target, direction, params).feasible:
            continue
        solution = inverse_kinematics(target, direction, params)
        tip, tangent = forward_from_ik(params, solution)
        worst_position = max(worst_position, float(np.linalg.norm(tip - target)) / params.length)
        cos = np.clip(float(tangent @ direction), -1.0, 1.0)
        worst_direction = max(worst_direction, float(np.arccos(cos)))
        accepted += 1

    rejected = 0
    far_targets = 50
    radius = params.max_deflection + params.reach + 1e-3
    for phi in np.linspace(0.0, 2.0 * np.pi, far_targets, endpoint=False):
        target = params.base.transform_point([radius * np.cos(phi), radius * np.sin(phi), params.length])
        try:
            inverse_kinematics(target, params.base.transform_vector(E3), params)
        except InfeasibleTargetError as e:
            rejected += e.reason == "radial reach exceeded"

    passed = (accepted == IK_SAMPLES and worst_position < 1e-6 and worst_direction < 1e-6
              and rejected == far_targets)
    return CheckResult("ik_round_trip", passed, worst_position, 1e-6,
                       f"{accepted} alvos, erro angular {worst_direction:.1e} rad, "
                       f"{rejected}/{far_targets} fora de alcance rejeitados")


def check_zero_coupling(robot: RobotConfig, rng: np.random.Generator) -> CheckResult:
    """Sem dipolo e sem massa das esferas, o acoplado converge em uma iteração e coincide com o desacoplado."""
    chain = robot.chain.with_ball(robot.chain.ball.scaled(0.0, 0.0))
    solver = HybridSolver(robot.tube, chain, robot.settings)
    actuation = robot.actuation(source=UniformField(0.03 * E2))
    decoupled = solver.solve_decoupled(actuation)
    coupled = solver.solve_coupled(actuation)
    difference = float(np.linalg.norm(coupled.tip - decoupled.tip))
    passed = coupled.diagnostics.iterations == 1 and difference < 1e-9
    return CheckResult("zero_coupling", passed, difference, 1e-9,
                       f"{coupled.diagnostics.iterations} iteração(ões) externa(s)")


def check_force_balance(robot: RobotConfig, rng: np.random.Generator) -> CheckResult:
    """Reação na base igual à soma das cargas aplicadas."""
    tension = robot.tension if robot.tension > 0.0 else 5.0
    tip_force = 0.05 * E2
    solver = CosseratSolver(robot.tube, steps=robot.settings.rod_steps, tol=robot.settings.rod_tolerance,
                            max_iter=robot.settings.rod_max_iter)
    shape = solver.solve(tension, gravity=robot.gravity, tip_force=tip_force)
    residual = float(np.linalg.norm(force_balance_residual(shape, robot.tube, robot.gravity,
                                                           tip_force=tip_force)))
    return CheckResult("rod_force_balance", residual < 1e-6, residual, 1e-6,
                       f"λ = {tension:.4g} N, gravidade e força na ponta")


def _angle_to(directions: np.ndarray, target: np.ndarray) -> float:
    """Maior ângulo (graus) entre as linhas de directions e target."""
    cosines = unit(directions) @ unit(target)
    return float(np.rad2deg(np.max(np.arccos(np.clip(cosines, -1.0, 1.0)))))


def check_field_alignment(robot: RobotConfig, rng: np.random.Generator) -> CheckResult:
    """
    Campo uniforme de 30 mT dominante, sem gravidade: dipolos estendidos e
    elos entre esferas estendidas alinhados com o campo.
    """
    field = 0.03 * E2
    ball = robot.chain.ball.scaled(1e-3, 0.0)
    rod = CosseratSolver(robot.tube, steps=robot.settings.rod_steps, tol=robot.settings.rod_tolerance,
                         max_iter=robot.settings.rod_max_iter).solve(0.0)
    solver = ChainSolver(ball, robot.chain.sleeve_ei, robot.settings.chain)
    worst = 0.0
    for extended in ALIGNMENT_EXTENDED:
        chainp = robot.chain.with_ball(ball).with_extended(min(extended, robot.chain.count))
        fixed = chainp.fixed_count
        guess = init_chain_guess(rod, chainp)
        constraints = ChainConstraints.from_guess(guess, fixed, rod.tip.position, rod.tip.tangent)
        chain = solver.minimize(guess, constraints, UniformField(field), None).config
        worst = max(worst, _angle_to(chain.dipoles[fixed:], field),
                    _angle_to(chain.link_directions()[fixed:], field))
    return CheckResult("field_alignment", worst < ALIGNMENT_TOLERANCE_DEG, worst, ALIGNMENT_TOLERANCE_DEG,
                       f"graus; n_e ∈ {list(ALIGNMENT_EXTENDED)}, μ × 1e-3, elos entre esferas estendidas")


def check_full_configuration(robot: RobotConfig, rng: np.random.Generator) -> CheckResult:
    """Configuração do documento com o ímã dipolar padrão: acoplado converge dentro do prazo."""
    magnet = MagnetConfig.load(config.DEFAULT_MAGNET_CONFIG)
    solver = HybridSolver(robot.tube, robot.chain, robot.settings)
    started = time.perf_counter()
    shape = solver.solve_coupled(robot.actuation(source=magnet.source))
    elapsed = time.perf_counter() - started
    diagnostics = shape.diagnostics
    passed = (diagnostics.converged and diagnostics.iterations <= robot.settings.max_outer
              and diagnostics.load_residual < robot.settings.tolerance
              and elapsed < FULL_CONFIGURATION_SECONDS)
    return CheckResult("full_configuration", passed, diagnostics.load_residual, robot.settings.tolerance,
                       f"{diagnostics.iterations} iterações externas em {elapsed:.2f} s "
                       f"(limite {FULL_CONFIGURATION_SECONDS:.0f} s), λ = {robot.tension:.4g} N")


CHECKS: List[Callable[[RobotConfig, np.random.Generator], CheckResult]] = [
    check_workspace_identities,
    check_tip_moment_arc,
    check_dipole_gradient,
    check_chain_gradient,
    check_brute_force,
    check_field_alignment,
    check_ik_round_trip,
    check_zero_coupling,
    check_force_balance,
    check_full_configuration,
]


def run_verification(robot: RobotConfig, checks: Optional[List[Callable]] = None,
                     seed: int = SEED) -> VerificationReport:
    """
    Executa as verificações; uma exceção conta como falha da verificação.

    Args:
        robot: Configuração verificada
        checks: Subconjunto das verificações (padrão: todas)
        seed: Semente do gerador aleatório

    Returns:
        Relatório com uma linha por verificação
    """
    report = VerificationReport(config_path=robot.source_path)
    for check in checks or CHECKS:
        rng = np.random.default_rng(seed)
        name = check.__name__.replace("check_", "")
        started = time.perf_counter()
        try:
            result = check(robot, rng)
        except HybridKinError as e:
            logger.error("Verificação %s levantou %s: %s", name, type(e).__name__, e)
            result = CheckResult(name, False, np.inf, 0.0, f"{type(e).__name__}: {e}")
        result.elapsed = time.perf_counter() - started
        logger.info("Verificação %s: %s (%.3e)", result.name, "OK" if result.passed else "FALHOU", result.value)
        report.add(result)
    return report
