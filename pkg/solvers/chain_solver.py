"""
Equilíbrio da corrente de esferas por minimização da energia potencial.

As restrições de contato e de módulo do dipolo são eliminadas pela
parametrização: cada direção livre (elo ou dipolo) é descrita por dois
ângulos de rotação no plano tangente a uma direção âncora, reancorada a
cada ciclo de BFGS.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize

from models.chain import (BallParams, ChainConfig, ChainConstraints, ChainParams, ChainSolution,
                          ChainSolverSettings, EnergyBreakdown)
from models.errors import ChainConvergenceError, RodTooShortError, SingularityError, TooManyFreeBallsError
from models.field import FieldSource
from models.rod import RodShape
from utils.geom import exp_so3, orthonormal_frame, unit
from utils.magnetics import (DIPOLE_CONSTANT, SINGULAR_DISTANCE, chain_energy, chain_energy_gradient,
                             dipole_field, external_energy, gravity_energy, pair_energy, sleeve_energy)

logger = logging.getLogger(__name__)

BRUTE_FORCE_CHUNK = 16384
# Acima deste número de pares a grade de duas esferas é refinada a partir de uma grade grossa
BRUTE_FORCE_EXHAUSTIVE = 2_000_000
BRUTE_FORCE_COARSE_FACTOR = 10
BRUTE_FORCE_CANDIDATES = 4

# Rigidez da penalidade de contato, em unidades da energia característica
CONTACT_STIFFNESS = 1.0e4
SINGULAR_ENERGY = 1.0e30


def init_chain_guess(rod: RodShape, params: ChainParams) -> ChainConfig:
    """
    Chute inicial da corrente sobre a forma do tubo.

    As esferas internas são reamostradas pela corda a partir da ponta (a
    última coincide com a ponta do tubo); as estendidas seguem em linha reta
    ao longo da tangente da ponta. Dipolos alinhados à tangente local.

    Args:
        rod: Forma do tubo
        params: Parâmetros da corrente

    Returns:
        Configuração inicial

    Raises:
        RodTooShortError: Se o tubo não comporta as esferas internas
    """
    d = params.ball.diameter
    mu = params.ball.dipole_moment
    fixed = params.fixed_count
    if fixed * d > rod.length + 1e-12:
        raise RodTooShortError(
            f"Tubo de {rod.length:.4g} m não comporta {fixed} esferas de {d:.4g} m"
        )

    positions: List[np.ndarray] = []
    dipoles: List[np.ndarray] = []
    if fixed > 0:
        s_prev = rod.length
        center = rod.position_at(s_prev)
        positions.append(center)
        dipoles.append(mu * rod.rotation_at(s_prev)[:, 2])
        for _ in range(fixed - 1):
            def gap(s, target=center):
                return np.linalg.norm(rod.position_at(s) - target) - d

            lower = max(0.0, s_prev - 2.0 * d)
            if gap(lower) < 0.0:
                raise RodTooShortError("Reamostragem pela corda saiu da base do tubo")
            s_prev = brentq(gap, lower, s_prev, xtol=1e-15)
            center = rod.position_at(s_prev)
            positions.append(center)
            dipoles.append(mu * rod.rotation_at(s_prev)[:, 2])
        positions.reverse()
        dipoles.reverse()

    tip = rod.tip
    tangent = tip.tangent / np.linalg.norm(tip.tangent)
    start = tip.position
    for j in range(params.extended):
        positions.append(start + (j + 1) * d * tangent)
        dipoles.append(mu * tangent)
    return ChainConfig(np.array(positions), np.array(dipoles))


def _chart(frames: np.ndarray, angles: np.ndarray):
    """
    Direções cos ρ q1 + sinc(ρ)(a q2 + b q3) e suas derivadas em a e b.
    """
    a, b = angles[:, 0], angles[:, 1]
    rho = np.hypot(a, b)
    sinc = np.sinc(rho / np.pi)
    small = rho < 1e-4
    safe = np.where(small, 1.0, rho)
    curve = np.where(small, -1.0 / 3.0 + rho ** 2 / 30.0,
                     (safe * np.cos(safe) - np.sin(safe)) / safe ** 3)
    q1, q2, q3 = frames[:, :, 0], frames[:, :, 1], frames[:, :, 2]
    w = a[:, None] * q2 + b[:, None] * q3
    directions = np.cos(rho)[:, None] * q1 + sinc[:, None] * w
    d_a = -(sinc * a)[:, None] * q1 + sinc[:, None] * q2 + (curve * a)[:, None] * w
    d_b = -(sinc * b)[:, None] * q1 + sinc[:, None] * q3 + (curve * b)[:, None] * w
    return directions, d_a, d_b


def contact_penalty(positions: np.ndarray, diameter: float) -> Tuple[float, np.ndarray]:
    """
    Penalidade ½ Σ (1 − ‖p_i − p_j‖/d)² sobre pares não adjacentes que se
    interpenetram, e seu gradiente em relação às posições (1/m).

    Nula em toda configuração admissível.
    """
    grad = np.zeros_like(positions)
    i, j = np.triu_indices(len(positions), k=2)
    if not len(i):
        return 0.0, grad
    r = positions[i] - positions[j]
    dist = np.linalg.norm(r, axis=1)
    overlap = 1.0 - dist / diameter
    hit = overlap > 0.0
    if not np.any(hit):
        return 0.0, grad
    i, j, r, dist, overlap = i[hit], j[hit], r[hit], dist[hit], overlap[hit]
    pull = -(overlap / (diameter * np.maximum(dist, SINGULAR_DISTANCE)))[:, None] * r
    np.add.at(grad, i, pull)
    np.add.at(grad, j, -pull)
    return 0.5 * float(np.sum(overlap ** 2)), grad


class EnergyLandscape:
    """
    Energia da corrente em função dos ângulos livres, ancorada numa configuração.
    """

    def __init__(self, anchor: ChainConfig, constraints: ChainConstraints, src: FieldSource,
                 ball: BallParams, gravity: Optional[np.ndarray] = None, sleeve_ei: float = 0.0,
                 reference_energy: float = 1.0):
        """
        Inicializa a paisagem.

        Args:
            anchor: Configuração em que todos os ângulos valem zero
            constraints: Esferas congeladas e âncora na ponta do tubo
            src: Fonte de campo externa
            ball: Parâmetros das esferas
            gravity: Aceleração da gravidade (m/s²) ou None
            sleeve_ei: Rigidez à flexão da luva (N·m²)
            reference_energy: Energia característica usada na escala
        """
        self.constraints = constraints
        self.src = src
        self.ball = ball
        self.gravity = gravity
        self.sleeve_ei = sleeve_ei
        self.reference_energy = reference_energy
        self.count = anchor.count
        self.fixed = constraints.fixed_count
        self.free = self.count - self.fixed
        self.frozen_dipole = self.fixed == 0

        previous = np.vstack([constraints.origin, anchor.positions[self.fixed:-1]])
        link_dirs = unit(anchor.positions[self.fixed:] - previous)
        first_dipole = self.fixed + (1 if self.frozen_dipole else 0)
        dipole_dirs = unit(anchor.dipoles[first_dipole:])
        missing = np.linalg.norm(dipole_dirs, axis=1) < 0.5
        dipole_dirs[missing] = link_dirs[first_dipole - self.fixed:][missing]
        self.link_frames = orthonormal_frame(link_dirs)
        self.dipole_frames = orthonormal_frame(dipole_dirs) if len(dipole_dirs) else np.zeros((0, 3, 3))

    @property
    def size(self) -> int:
        return 2 * (len(self.link_frames) + len(self.dipole_frames))

    def _split(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        half = 2 * len(self.link_frames)
        return x[:half].reshape(-1, 2), x[half:].reshape(-1, 2)

    def config(self, x: np.ndarray) -> ChainConfig:
        """Configuração correspondente aos ângulos x."""
        link_angles, dipole_angles = self._split(np.asarray(x, dtype=float))
        links = _chart(self.link_frames, link_angles)[0]
        free_positions = self.constraints.origin + self.ball.diameter * np.cumsum(links, axis=0)
        dipoles = [self.constraints.fixed_dipoles]
        if self.frozen_dipole:
            dipoles.append(self.ball.dipole_moment * self.constraints.anchor_tangent[None])
        if len(self.dipole_frames):
            dipoles.append(self.ball.dipole_moment * _chart(self.dipole_frames, dipole_angles)[0])
        return ChainConfig(
            np.vstack([self.constraints.fixed_positions, free_positions]),
            np.vstack(dipoles),
        )

    def breakdown(self, x: np.ndarray) -> EnergyBreakdown:
        """Parcelas físicas da energia (sem a penalidade de contato)."""
        return chain_energy(self.config(x), self.src, self.ball, self.gravity, self.sleeve_ei, self.free)

    def _contact(self, config: ChainConfig) -> Tuple[float, np.ndarray]:
        energy, grad = contact_penalty(config.positions, self.ball.diameter)
        weight = CONTACT_STIFFNESS * self.reference_energy
        return weight * energy, weight * grad

    def energy(self, x: np.ndarray) -> float:
        config = self.config(x)
        physical = chain_energy(config, self.src, self.ball, self.gravity, self.sleeve_ei, self.free)
        return physical.total + self._contact(config)[0]

    def evaluate(self, x: np.ndarray) -> Tuple[float, np.ndarray]:
        """Energia (J) e gradiente (J/rad) a partir de uma única configuração."""
        x = np.asarray(x, dtype=float)
        config = self.config(x)
        penalty, penalty_grad = self._contact(config)
        physical = chain_energy(config, self.src, self.ball, self.gravity, self.sleeve_ei, self.free)
        grad_p, grad_m = chain_energy_gradient(config, self.src, self.ball, self.gravity,
                                               self.sleeve_ei, self.free)
        return physical.total + penalty, self._to_angles(x, grad_p + penalty_grad, grad_m)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Gradiente analítico ∂U/∂x (J/rad), pela regra da cadeia."""
        return self.evaluate(x)[1]

    def _to_angles(self, x: np.ndarray, grad_p: np.ndarray, grad_m: np.ndarray) -> np.ndarray:
        link_angles, dipole_angles = self._split(x)
        free_grad = grad_p[self.fixed:]
        link_grad = self.ball.diameter * np.cumsum(free_grad[::-1], axis=0)[::-1]
        _, d_a, d_b = _chart(self.link_frames, link_angles)
        parts = [np.stack([np.sum(link_grad * d_a, axis=1), np.sum(link_grad * d_b, axis=1)], axis=1)]
        if len(self.dipole_frames):
            first_dipole = self.fixed + (1 if self.frozen_dipole else 0)
            dipole_grad = self.ball.dipole_moment * grad_m[first_dipole:]
            _, d_a, d_b = _chart(self.dipole_frames, dipole_angles)
            parts.append(np.stack([np.sum(dipole_grad * d_a, axis=1),
                                   np.sum(dipole_grad * d_b, axis=1)], axis=1))
        return np.concatenate([part.ravel() for part in parts])

    def numerical_gradient(self, x: np.ndarray, step: float = 1e-6) -> np.ndarray:
        """Gradiente por diferenças centrais."""
        x = np.asarray(x, dtype=float)
        grad = np.zeros_like(x)
        for i in range(x.size):
            shift = np.zeros_like(x)
            shift[i] = step
            grad[i] = (self.energy(x + shift) - self.energy(x - shift)) / (2.0 * step)
        return grad

    def scaled(self, x: np.ndarray, finite_difference: bool = False,
               fd_step: float = 1e-6) -> Tuple[float, np.ndarray]:
        """
        (U/U_ref, ∇U/U_ref) para o BFGS.

        Um passo de busca linear que leva duas esferas ao mesmo ponto recebe
        energia SINGULAR_ENERGY, o que força o recuo do passo.
        """
        x = np.asarray(x, dtype=float)
        try:
            if finite_difference:
                energy, grad = self.energy(x), self.numerical_gradient(x, fd_step)
            else:
                energy, grad = self.evaluate(x)
        except SingularityError:
            logger.debug("Passo de busca linear sobrepôs duas esferas")
            return SINGULAR_ENERGY, np.zeros(x.size)
        return energy / self.reference_energy, grad / self.reference_energy

    def reanchored(self, anchor: ChainConfig) -> 'EnergyLandscape':
        return EnergyLandscape(anchor, self.constraints, self.src, self.ball, self.gravity,
                               self.sleeve_ei, self.reference_energy)


def reference_energy(constraints: ChainConstraints, src: FieldSource, ball: BallParams,
                     gravity: Optional[np.ndarray] = None, sleeve_ei: float = 0.0) -> float:
    """
    Energia característica max(μ0μ²/(4πd³), μ‖B(âncora)‖, m‖g‖d, EI_s/d).
    """
    d = ball.diameter
    mu = ball.dipole_moment
    g = 0.0 if gravity is None else float(np.linalg.norm(gravity))
    b = float(np.linalg.norm(src.field_at(constraints.anchor_position)))
    return max(DIPOLE_CONSTANT * mu ** 2 / d ** 3, mu * b, ball.mass * g * d, sleeve_ei / d, 1e-30)


class ChainSolver:
    """
    Minimizador da energia da corrente com reinicializações determinísticas.
    """

    def __init__(self, ball: BallParams, sleeve_ei: float = 0.0,
                 settings: Optional[ChainSolverSettings] = None):
        """
        Inicializa o solver.

        Args:
            ball: Parâmetros das esferas
            sleeve_ei: Rigidez à flexão da luva (N·m²)
            settings: Configurações da minimização
        """
        self.ball = ball
        self.sleeve_ei = sleeve_ei
        self.settings = settings or ChainSolverSettings()

    def _restart_rotation(self, guess: ChainConfig, constraints: ChainConstraints, src: FieldSource,
                          gravity: Optional[np.ndarray]) -> Optional[np.ndarray]:
        """Eixo das reinicializações: t × B̂ (ou a direção da gravidade sem campo)."""
        target = src.direction_at(guess.tip)
        if not np.linalg.norm(target) > 0.0:
            if gravity is None or not np.linalg.norm(gravity) > 0.0:
                return None
            target = unit(np.asarray(gravity, dtype=float))
        tangent = constraints.anchor_tangent
        axis = np.cross(tangent, target)
        if np.linalg.norm(axis) < 1e-9:
            axis = orthonormal_frame(tangent)[:, 1]
        return unit(axis)

    def _starts(self, guess: ChainConfig, constraints: ChainConstraints, src: FieldSource,
                gravity: Optional[np.ndarray], restarts: bool = True) -> List[ChainConfig]:
        starts = [guess.copy()]
        if not restarts:
            return starts
        axis = self._restart_rotation(guess, constraints, src, gravity)
        if axis is None or self.settings.restart_angle == 0.0:
            return starts
        fixed = constraints.fixed_count
        origin = constraints.origin
        for sign in (1.0, -1.0):
            rotation = exp_so3(sign * self.settings.restart_angle * axis)
            start = guess.copy()
            start.positions[fixed:] = origin + (guess.positions[fixed:] - origin) @ rotation.T
            first_dipole = fixed + (1 if fixed == 0 else 0)
            start.dipoles[first_dipole:] = guess.dipoles[first_dipole:] @ rotation.T
            starts.append(start)
        return starts

    def _descend(self, start: ChainConfig, constraints: ChainConstraints, src: FieldSource,
                 gravity: Optional[np.ndarray], u_ref: float) -> ChainSolution:
        """Ciclos de BFGS reancorados a partir de uma configuração."""
        settings = self.settings
        landscape = EnergyLandscape(start, constraints, src, self.ball, gravity, self.sleeve_ei, u_ref)
        current = start
        energy = landscape.energy(np.zeros(landscape.size))
        iterations = 0
        cycles = 0
        while True:
            remaining = settings.max_iter - iterations
            if remaining <= 0:
                break
            result = minimize(
                landscape.scaled, np.zeros(landscape.size), jac=True, method='BFGS',
                args=(settings.finite_difference, settings.fd_step),
                options={'gtol': settings.inner_gtol, 'maxiter': remaining},
            )
            iterations += int(result.nit)
            cycles += 1
            new_energy = float(result.fun) * u_ref
            stalled = result.nit == 0 or not new_energy < energy
            if new_energy <= energy:
                current = landscape.config(result.x)
                energy = new_energy
                landscape = landscape.reanchored(current)
            scaled_grad = np.max(np.abs(landscape.gradient(np.zeros(landscape.size)))) / u_ref
            logger.debug("Ciclo BFGS %d: U=%.12e, ‖g‖/U_ref=%.3e, nit=%d",
                         cycles, energy, scaled_grad, result.nit)
            if stalled or scaled_grad < settings.inner_gtol:
                break

        zero = np.zeros(landscape.size)
        grad_norm = float(np.linalg.norm(landscape.gradient(zero)))
        converged = grad_norm <= max(settings.tol, settings.rel_tol * u_ref)
        return ChainSolution(
            config=current,
            energy=landscape.breakdown(zero),
            gradient_norm=grad_norm,
            iterations=iterations,
            converged=converged,
        )

    def minimize(self, guess: ChainConfig, constraints: ChainConstraints, src: FieldSource,
                 gravity: Optional[np.ndarray] = None, restarts: bool = True) -> ChainSolution:
        """
        Minimiza a energia com as esferas internas congeladas.

        Roda a partir do chute e de duas rotações de ±restart_angle da
        subcorrente livre; vence a menor energia convergida (empate: a
        primeira). Se a partida do chute terminar com energia menor que a
        vencedora, ela é mantida mesmo sem convergir, de modo que a energia
        final nunca excede a do chute.

        Args:
            guess: Configuração inicial que satisfaz os invariantes
            constraints: Esferas congeladas e âncora
            src: Fonte de campo externa
            gravity: Aceleração da gravidade (m/s²) ou None
            restarts: False para partir apenas do chute (partida a quente)

        Returns:
            Solução de menor energia

        Raises:
            ChainConvergenceError: Se nenhuma partida convergir; carrega a melhor solução
        """
        free = guess.count - constraints.fixed_count
        if free == 0:
            energy = chain_energy(guess, src, self.ball, gravity, self.sleeve_ei, 0)
            return ChainSolution(config=guess.copy(), energy=energy, gradient_norm=0.0, iterations=0,
                                 start_energies=[energy.total])

        u_ref = reference_energy(constraints, src, self.ball, gravity, self.sleeve_ei)
        solutions = [self._descend(start, constraints, src, gravity, u_ref)
                     for start in self._starts(guess, constraints, src, gravity, restarts)]
        energies = [solution.energy.total for solution in solutions]

        best = None
        for solution in solutions:
            if solution.converged and (best is None or solution.energy.total < best.energy.total):
                best = solution
        if best is None:
            fallback = min(solutions, key=lambda item: item.energy.total)
            fallback.start_energies = energies
            raise ChainConvergenceError("Minimização da corrente não convergiu",
                                        fallback.iterations, fallback.gradient_norm, fallback)
        failed = sum(1 for solution in solutions if not solution.converged)
        if failed:
            logger.warning("%d partida(s) da corrente não convergiram; usando a melhor convergida", failed)
        if solutions[0].energy.total < best.energy.total:
            logger.warning("Partida do chute abaixo da melhor convergida (%.6e < %.6e J); mantida",
                           solutions[0].energy.total, best.energy.total)
            best = solutions[0]

        best.start_energies = energies
        best.iterations = sum(solution.iterations for solution in solutions)
        logger.info("Corrente: U=%.6e J, ‖g‖=%.2e, %d iterações", best.energy.total,
                    best.gradient_norm, best.iterations)
        return best


def minimize_energy(guess: ChainConfig, constraints: ChainConstraints, src: FieldSource,
                    gravity: Optional[np.ndarray] = None, settings: Optional[ChainSolverSettings] = None,
                    ball: Optional[BallParams] = None, sleeve_ei: float = 0.0) -> ChainConfig:
    """
    Atalho funcional que retorna apenas a configuração de equilíbrio.

    Sem ball, o diâmetro e o dipolo são lidos do chute e a massa é zero.
    """
    if ball is None:
        diameter = float(np.linalg.norm(guess.positions[-1] - (
            guess.positions[-2] if guess.count > 1 else constraints.anchor_position)))
        ball = BallParams(diameter=diameter, mass=0.0,
                          dipole_moment=float(np.linalg.norm(guess.dipoles[-1])))
    return ChainSolver(ball, sleeve_ei, settings).minimize(guess, constraints, src, gravity).config


class DirectionGrid:
    """
    Grade (polar, azimute) de passo fixo num referencial; a primeira coluna
    do referencial é o polo. Os pontos são endereçados por pares de índices.
    """

    def __init__(self, resolution: float, frame: np.ndarray):
        self.resolution = resolution
        self.frame = frame
        self.polar_count = int(np.floor(np.pi / resolution + 1e-9)) + 1
        self.azimuth_count = int(np.ceil(2.0 * np.pi / resolution - 1e-9))

    @property
    def size(self) -> int:
        return self.polar_count * self.azimuth_count

    def directions(self, polar: np.ndarray, azimuth: np.ndarray) -> np.ndarray:
        theta = np.asarray(polar) * self.resolution
        phi = np.asarray(azimuth) * self.resolution
        local = np.stack([np.cos(theta), np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi)], axis=-1)
        return local @ self.frame.T

    def indices(self, stride: int = 1) -> Tuple[np.ndarray, np.ndarray]:
        """Índices da subgrade de passo stride (o polo oposto sempre incluído)."""
        polar = np.arange(0, self.polar_count, stride)
        if polar[-1] != self.polar_count - 1:
            polar = np.append(polar, self.polar_count - 1)
        azimuth = np.arange(0, self.azimuth_count, stride)
        p, a = np.meshgrid(polar, azimuth, indexing='ij')
        return p.ravel(), a.ravel()

    def window(self, polar: int, azimuth: int, half_width: int) -> Tuple[np.ndarray, np.ndarray]:
        """Índices a até half_width passos de (polar, azimute); o azimute é periódico."""
        p_range = np.arange(max(0, polar - half_width), min(self.polar_count - 1, polar + half_width) + 1)
        a_range = np.unique(np.arange(azimuth - half_width, azimuth + half_width + 1) % self.azimuth_count)
        p, a = np.meshgrid(p_range, a_range, indexing='ij')
        return p.ravel(), a.ravel()


def _field_from(points: np.ndarray, positions: np.ndarray, dipoles: np.ndarray) -> np.ndarray:
    """Campo em points (..., 3) gerado por dipolos pontuais (k, 3)."""
    total = np.zeros(points.shape)
    for position, dipole in zip(positions, dipoles):
        total += dipole_field(points - position, dipole)
    return total


def brute_force_min(constraints: ChainConstraints, src: FieldSource, gravity: Optional[np.ndarray],
                    resolution: float, ball: BallParams, free_count: int,
                    sleeve_ei: float = 0.0) -> ChainConfig:
    """
    Busca sobre uma grade de direções dos elos livres.

    Os dipolos livres são alinhados ao campo local (três varreduras
    alternadas com duas esferas livres); pontos da grade em que esferas não
    adjacentes se interpenetram são descartados. Com uma esfera livre a
    grade é varrida inteira. Com duas, se o produto das grades passa de
    BRUTE_FORCE_EXHAUSTIVE pares, varre-se a subgrade de passo
    BRUTE_FORCE_COARSE_FACTOR vezes maior e os BRUTE_FORCE_CANDIDATES
    melhores pares são refinados na grade fina, em janelas de um passo
    grosso em torno de cada ângulo.

    Args:
        constraints: Esferas congeladas e âncora
        src: Fonte de campo externa
        gravity: Aceleração da gravidade (m/s²) ou None
        resolution: Passo angular da grade (rad)
        ball: Parâmetros das esferas
        free_count: Número de esferas livres (≤ 2)
        sleeve_ei: Rigidez à flexão da luva (N·m²)

    Returns:
        Minimizador da grade

    Raises:
        TooManyFreeBallsError: Se free_count > 2
    """
    if free_count > 2:
        raise TooManyFreeBallsError(f"Busca exaustiva limitada a 2 esferas livres (recebido {free_count})")
    fixed_p, fixed_m = constraints.fixed_positions, constraints.fixed_dipoles
    if free_count == 0:
        return ChainConfig(fixed_p.copy(), fixed_m.copy())

    d, mu = ball.diameter, ball.dipole_moment
    origin = constraints.origin
    frozen = constraints.fixed_count == 0
    grid = DirectionGrid(resolution, orthonormal_frame(constraints.anchor_tangent))
    far_i, far_j = np.triu_indices(constraints.fixed_count + free_count, k=2)

    def align(points, others_p=None, others_m=None):
        field = src.field_at(points) + _field_from(points, fixed_p, fixed_m)
        if others_p is not None:
            field = field + dipole_field(points - others_p, others_m)
        return mu * unit(field)

    def evaluate(first: np.ndarray, second: Optional[np.ndarray]):
        """Energias (inf onde há interpenetração), posições e dipolos de um lote."""
        count = len(first)
        p0 = origin + d * first
        free_p = p0[:, None, :] if second is None else np.stack([p0, p0 + d * second], axis=1)
        positions = np.concatenate([np.broadcast_to(fixed_p, (count,) + fixed_p.shape), free_p], axis=1)
        dipoles = np.zeros_like(positions)
        energy = np.full(count, np.inf)

        valid = np.ones(count, dtype=bool)
        if len(far_i):
            gaps = np.linalg.norm(positions[:, far_i] - positions[:, far_j], axis=-1)
            valid = np.all(gaps >= d * (1.0 - 1e-9), axis=1)
        if not np.any(valid):
            return energy, positions, dipoles
        free_p = free_p[valid]

        if free_count == 1:
            free_m = (mu * constraints.anchor_tangent)[None, None].repeat(len(free_p), 0) if frozen \
                else align(free_p[:, 0])[:, None, :]
        else:
            m0 = (mu * np.broadcast_to(constraints.anchor_tangent, free_p[:, 0].shape)) if frozen \
                else align(free_p[:, 0])
            m1 = align(free_p[:, 1])
            for _ in range(3):
                if not frozen:
                    m0 = align(free_p[:, 0], free_p[:, 1], m1)
                m1 = align(free_p[:, 1], free_p[:, 0], m0)
            free_m = np.stack([m0, m1], axis=1)

        dipoles[valid] = np.concatenate([np.broadcast_to(fixed_m, (len(free_p),) + fixed_m.shape), free_m], axis=1)
        batch_p, batch_m = positions[valid], dipoles[valid]
        energy[valid] = (external_energy(batch_p, batch_m, src) + pair_energy(batch_p, batch_m)
                         + gravity_energy(batch_p, ball.mass, gravity)
                         + sleeve_energy(batch_p, sleeve_ei, d, free_count))
        return energy, positions, dipoles

    def scan(first_idx, second_idx=None, keep: int = 0):
        """
        Varre o produto das listas de índices em blocos; os índices de cada
        bloco saem de range(início, fim), sem materializar o produto.
        """
        first_dirs = grid.directions(*first_idx)
        second_dirs = None if second_idx is None else grid.directions(*second_idx)
        width = 1 if second_dirs is None else len(second_dirs)
        total = len(first_dirs) * width
        best_energy, best_config = np.inf, None
        kept_energy, kept_rows = np.zeros(0), np.zeros(0, dtype=np.int64)
        for start in range(0, total, BRUTE_FORCE_CHUNK):
            rows = np.arange(start, min(start + BRUTE_FORCE_CHUNK, total), dtype=np.int64)
            a, b = np.divmod(rows, width)
            energy, positions, dipoles = evaluate(first_dirs[a], None if second_dirs is None else second_dirs[b])
            index = int(np.argmin(energy))
            if energy[index] < best_energy:
                best_energy = float(energy[index])
                best_config = ChainConfig(positions[index].copy(), dipoles[index].copy())
            if keep:
                kept_energy = np.concatenate([kept_energy, energy])
                kept_rows = np.concatenate([kept_rows, rows])
                order = np.argsort(kept_energy, kind='stable')[:keep]
                kept_energy, kept_rows = kept_energy[order], kept_rows[order]
        candidates = []
        for energy, row in zip(kept_energy, kept_rows):
            if np.isfinite(energy):
                a, b = divmod(int(row), width)
                candidates.append((first_idx[0][a], first_idx[1][a], second_idx[0][b], second_idx[1][b]))
        return best_energy, best_config, candidates

    fine = grid.indices()
    if free_count == 1:
        best_energy, best_config, _ = scan(fine)
    elif grid.size ** 2 <= BRUTE_FORCE_EXHAUSTIVE:
        best_energy, best_config, _ = scan(fine, fine)
    else:
        stride = BRUTE_FORCE_COARSE_FACTOR
        coarse = grid.indices(stride)
        best_energy, best_config, candidates = scan(coarse, coarse, BRUTE_FORCE_CANDIDATES)
        for p0, a0, p1, a1 in candidates:
            energy, config, _ = scan(grid.window(p0, a0, stride), grid.window(p1, a1, stride))
            if energy < best_energy:
                best_energy, best_config = energy, config

    logger.debug("Busca exaustiva (%d esferas livres, resolução %.3g rad): U=%.6e",
                 free_count, resolution, best_energy)
    return best_config
