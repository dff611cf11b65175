"""
Solver do robô híbrido: passo único desacoplado e iteração acoplada
tubo/corrente com cargas amortecidas.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from models.chain import ChainConfig, ChainConstraints, ChainParams, ChainSolution
from models.errors import CouplingConvergenceError
from models.field import FieldSource
from models.hybrid import (ActuationInput, ChainLoads, HybridDiagnostics, HybridShape, ModelComparison,
                           SolverSettings)
from models.rod import PointLoad, RodShape, TubeParams
from solvers.chain_solver import ChainSolver, init_chain_guess
from solvers.cosserat_solver import CosseratSolver
from utils.magnetics import ball_loads

logger = logging.getLogger(__name__)


def load_locations(tube_length: float, chainp: ChainParams) -> List[float]:
    """Abscissas nominais s_i = l_t − (n − n_e − i)·d_c das esferas internas (i = 1..n − n_e)."""
    fixed = chainp.fixed_count
    return [tube_length - (fixed - i) * chainp.ball.diameter for i in range(1, fixed + 1)]


def chain_loads_on_tube(rod: RodShape, chain: ChainConfig, src: FieldSource, gravity: Optional[np.ndarray],
                        chainp: ChainParams) -> ChainLoads:
    """
    Cargas que a corrente transmite ao tubo.

    Cada esfera interna aplica a projeção no plano da seção de (força
    magnética + peso) mais a força transversal τ × t/d_c derivada do
    torque. As estendidas somam suas forças numa carga na ponta, também
    projetada no plano da seção.

    Args:
        rod: Forma do tubo
        chain: Configuração da corrente (internas sobre o tubo)
        src: Fonte de campo externa
        gravity: Aceleração da gravidade (m/s²) ou None
        chainp: Parâmetros da corrente

    Returns:
        Cargas pontuais globais e força na ponta
    """
    forces, torques = ball_loads(chain, src)
    weight = np.zeros(3) if gravity is None else chainp.ball.mass * np.asarray(gravity, dtype=float)
    fixed = chainp.fixed_count
    d = chainp.ball.diameter
    eye = np.eye(3)

    point_loads = []
    for j, s in enumerate(load_locations(rod.length, chainp)):
        tangent = rod.rotation_at(s)[:, 2]
        projector = eye - np.outer(tangent, tangent)
        force = projector @ (forces[j] + weight) + np.cross(torques[j], tangent) / d
        point_loads.append(PointLoad(s, force))

    tangent = rod.tip.tangent / np.linalg.norm(rod.tip.tangent)
    projector = eye - np.outer(tangent, tangent)
    extended = forces[fixed:].sum(axis=0) + (chain.count - fixed) * weight
    return ChainLoads(point_loads, projector @ extended)


def carry_free_chain(guess: ChainConfig, constraints: ChainConstraints, previous: ChainConfig,
                     previous_origin: np.ndarray) -> ChainConfig:
    """
    Chute de partida a quente: esferas internas de guess e subcorrente livre
    de previous, transladada para a nova origem com os mesmos elos e
    dipolos globais.
    """
    fixed = constraints.fixed_count
    warm = guess.copy()
    links = np.diff(np.vstack([previous_origin, previous.positions[fixed:]]), axis=0)
    warm.positions[fixed:] = constraints.origin + np.cumsum(links, axis=0)
    first_dipole = fixed + (1 if fixed == 0 else 0)
    warm.dipoles[first_dipole:] = previous.dipoles[first_dipole:]
    return warm


class HybridSolver:
    """
    Coordena os solvers do tubo e da corrente.
    """

    def __init__(self, tube: TubeParams, chain: ChainParams, settings: Optional[SolverSettings] = None):
        """
        Inicializa o solver.

        Args:
            tube: Parâmetros do tubo (pose da base antes da rolagem)
            chain: Parâmetros da corrente
            settings: Configurações dos solvers
        """
        self.tube = tube
        self.chain = chain
        self.settings = settings or SolverSettings()

    def _setup(self, actuation: ActuationInput) -> Tuple[TubeParams, ChainParams]:
        tube = self.tube.with_base(self.tube.base.rolled(actuation.roll))
        chainp = self.chain if actuation.extended is None else self.chain.with_extended(actuation.extended)
        return tube, chainp

    def _rod_solver(self, tube: TubeParams) -> CosseratSolver:
        return CosseratSolver(tube, steps=self.settings.rod_steps, tol=self.settings.rod_tolerance,
                              max_iter=self.settings.rod_max_iter)

    def _solve_rod(self, solver: CosseratSolver, actuation: ActuationInput, loads: Optional[ChainLoads],
                   guess: Optional[np.ndarray] = None) -> RodShape:
        if loads is None:
            return solver.solve(actuation.tension, gravity=actuation.gravity, initial_guess=guess)
        return solver.solve(actuation.tension, gravity=actuation.gravity, point_loads=loads.point_loads,
                            tip_force=loads.tip_force, initial_guess=guess,
                            reuse_jacobian=guess is not None)

    def _solve_chain(self, rod: RodShape, chainp: ChainParams, actuation: ActuationInput,
                     previous: Optional[Tuple[ChainConfig, np.ndarray]] = None) -> ChainSolution:
        """
        Minimiza a corrente sobre o tubo. Com previous (configuração e origem
        da iteração anterior) parte a quente, sem reinicializações.
        """
        guess = init_chain_guess(rod, chainp)
        constraints = ChainConstraints.from_guess(guess, chainp.fixed_count, rod.tip.position, rod.tip.tangent)
        solver = ChainSolver(chainp.ball, chainp.sleeve_ei, self.settings.chain)
        if previous is None:
            return solver.minimize(guess, constraints, actuation.source, actuation.gravity)
        warm = carry_free_chain(guess, constraints, *previous)
        return solver.minimize(warm, constraints, actuation.source, actuation.gravity, restarts=False)

    def _diagnostics(self, mode: str, iterations: int, residual: float, converged: bool, rod: RodShape,
                     chain: ChainSolution, history: List[float]) -> HybridDiagnostics:
        return HybridDiagnostics(
            iterations=iterations, load_residual=residual, converged=converged, mode=mode,
            rod_residual=rod.residual, rod_iterations=rod.iterations,
            chain_gradient_norm=chain.gradient_norm, chain_iterations=chain.iterations,
            history=history,
        )

    def solve_decoupled(self, actuation: ActuationInput) -> HybridShape:
        """
        Passo único: tubo sem cargas magnéticas, depois a corrente sobre ele.

        load_residual informa a maior carga desprezada.
        """
        tube, chainp = self._setup(actuation)
        rod = self._solve_rod(self._rod_solver(tube), actuation, None)
        chain = self._solve_chain(rod, chainp, actuation)
        loads = chain_loads_on_tube(rod, chain.config, actuation.source, actuation.gravity, chainp)
        neglected = float(np.max(np.abs(loads.as_vector())))
        diagnostics = self._diagnostics("decoupled", 1, neglected, chain.converged, rod, chain, [neglected])
        logger.info("Solução desacoplada: ponta do tubo %s, carga desprezada %.3e N",
                    np.round(rod.tip.position, 6).tolist(), neglected)
        return HybridShape(rod=rod, chain=chain.config, diagnostics=diagnostics, chain_solution=chain, loads=loads)

    def solve_coupled(self, actuation: ActuationInput) -> HybridShape:
        """
        Iteração de ponto fixo entre o tubo e a corrente.

        A cada iteração externa o tubo é resolvido sob as cargas atuais, a
        corrente é minimizada sobre o novo tubo e as cargas são recalculadas
        e misturadas com amortecimento α. Para quando a variação das cargas
        (norma do máximo) fica abaixo de ε.

        A partir da segunda iteração o shooting parte das cargas de base e do
        Jacobiano anteriores, e a corrente parte da configuração livre
        anterior sem reinicializações.

        Raises:
            CouplingConvergenceError: Após max_outer iterações; carrega a última iteração
        """
        tube, chainp = self._setup(actuation)
        rod_solver = self._rod_solver(tube)
        loads = ChainLoads.zeros(load_locations(tube.length, chainp))
        guess = None
        previous = None
        history: List[float] = []
        rod = chain = None
        change = np.inf

        for iteration in range(1, self.settings.max_outer + 1):
            rod = self._solve_rod(rod_solver, actuation, loads, guess)
            chain = self._solve_chain(rod, chainp, actuation, previous)
            new_loads = chain_loads_on_tube(rod, chain.config, actuation.source, actuation.gravity, chainp)
            change = loads.change(new_loads)
            history.append(change)
            logger.debug("Iteração externa %d: variação das cargas %.3e N", iteration, change)

            if change < self.settings.tolerance:
                logger.info("Solução acoplada convergiu em %d iterações (variação %.2e N)", iteration, change)
                diagnostics = self._diagnostics("coupled", iteration, change, True, rod, chain, history)
                return HybridShape(rod=rod, chain=chain.config, diagnostics=diagnostics,
                                   chain_solution=chain, loads=loads)

            loads = loads.blend(new_loads, self.settings.damping)
            guess = np.concatenate([rod.forces[0], rod.moments[0]])
            fixed = chainp.fixed_count
            origin = chain.config.positions[fixed - 1] if fixed > 0 else rod.tip.position
            previous = (chain.config, origin)

        diagnostics = self._diagnostics("coupled", self.settings.max_outer, change, False, rod, chain, history)
        last = HybridShape(rod=rod, chain=chain.config, diagnostics=diagnostics, chain_solution=chain, loads=loads)
        raise CouplingConvergenceError("Iteração acoplada não convergiu", self.settings.max_outer, change, last)

    def solve(self, actuation: ActuationInput, coupled: bool = True) -> HybridShape:
        return self.solve_coupled(actuation) if coupled else self.solve_decoupled(actuation)

    def compare_models(self, actuation: ActuationInput) -> ModelComparison:
        """Resolve os dois modelos e mede a discrepância entre as pontas."""
        comparison = ModelComparison(self.solve_decoupled(actuation), self.solve_coupled(actuation))
        logger.info("Discrepância entre modelos: %.3e m na ponta", comparison.tip_distance)
        return comparison


def solve_decoupled(tube: TubeParams, chainp: ChainParams, actuation: ActuationInput,
                    settings: Optional[SolverSettings] = None) -> HybridShape:
    return HybridSolver(tube, chainp, settings).solve_decoupled(actuation)


def solve_coupled(tube: TubeParams, chainp: ChainParams, actuation: ActuationInput,
                  settings: Optional[SolverSettings] = None) -> HybridShape:
    return HybridSolver(tube, chainp, settings).solve_coupled(actuation)
