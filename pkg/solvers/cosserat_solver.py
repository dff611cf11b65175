"""
Solver Cosserat do tubo atuado por tendão.

Contém a lei constitutiva, o carregamento distribuído do tendão, o lado
direito das EDOs, a integração RK4 sobre SO(3) e o método de shooting para
as condições de contorno na ponta.

Convenção: n e m são a força e o momento internos exercidos pela parte
distal sobre a proximal, expressos no referencial do corpo.
"""

import logging
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import simpson

from models.errors import ConfigError, DegenerateTangentError, RodConvergenceError
from models.rod import PointLoad, RodShape, RodState, TubeParams
from utils.geom import cross, exp_so3, skew

import config

logger = logging.getLogger(__name__)

MIN_STEPS = 16
DEGENERATE_TANGENT = 1e-9
LM_INITIAL_DAMPING = 1e-3


def constitutive(u: np.ndarray, v: np.ndarray, params: TubeParams) -> Tuple[np.ndarray, np.ndarray]:
    """
    (n; m) = K (v − v0; u − u0).

    Args:
        u: Deformação angular (..., 3)
        v: Deformação linear (..., 3)
        params: Parâmetros do tubo

    Returns:
        Força e momento internos no referencial do corpo
    """
    n = params.shear_extension_stiffness * (np.asarray(v, dtype=float) - params.v0)
    m = params.bending_torsion_stiffness * (np.asarray(u, dtype=float) - params.u0)
    return n, m


def strains(n: np.ndarray, m: np.ndarray, params: TubeParams) -> Tuple[np.ndarray, np.ndarray]:
    """Inversa da lei constitutiva: (u, v) a partir de (n, m)."""
    v = params.v0 + np.asarray(n, dtype=float) / params.shear_extension_stiffness
    u = params.u0 + np.asarray(m, dtype=float) / params.bending_torsion_stiffness
    return u, v


def tendon_path(state: RodState, params: TubeParams) -> np.ndarray:
    """p_t = p_c + (d_t/2) R_c e_1."""
    return state.position + state.rotation @ params.tendon_offset


def tendon_distributed_load(pt_dot: np.ndarray, pt_ddot: np.ndarray, arm: np.ndarray,
                            tension: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Força e momento distribuídos que o tendão tensionado aplica ao tubo.

    f_t = −λ (ṗ_t×)² p̈_t/‖ṗ_t‖³ e τ_t = (p_t − p_c) × f_t.

    Args:
        pt_dot: Tangente do tendão ṗ_t (..., 3)
        pt_ddot: Segunda derivada p̈_t (..., 3)
        arm: Braço p_t − p_c (..., 3)
        tension: Tensão λ (N)

    Returns:
        (f_t em N/m, τ_t em N·m/m)
    """
    pt_dot = np.asarray(pt_dot, dtype=float)
    pt_ddot = np.asarray(pt_ddot, dtype=float)
    speed = np.linalg.norm(pt_dot, axis=-1)
    if np.any(speed < DEGENERATE_TANGENT):
        raise DegenerateTangentError("Tangente do tendão com norma < 1e-9")
    hat = skew(pt_dot)
    force = -tension * np.einsum('...ij,...jk,...k->...i', hat, hat, pt_ddot) / speed[..., None] ** 3
    return force, np.cross(arm, force)


def _rotate_into_body(rotations: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    return np.einsum('bji,bj->bi', rotations, np.broadcast_to(vectors, rotations.shape[:-1]))


class RhsCoefficients(NamedTuple):
    """Constantes do lado direito, calculadas uma vez por integração."""

    k_se: np.ndarray
    k_bt: np.ndarray
    u0: np.ndarray
    v0: np.ndarray
    arm: np.ndarray
    arm_hat: np.ndarray
    weight: Optional[np.ndarray]

    @classmethod
    def of(cls, params: TubeParams, gravity: Optional[np.ndarray]) -> 'RhsCoefficients':
        weight = None
        if gravity is not None and params.linear_density > 0.0:
            weight = params.linear_density * np.asarray(gravity, dtype=float)
        arm = params.tendon_offset
        return cls(params.shear_extension_stiffness, params.bending_torsion_stiffness,
                   np.asarray(params.u0, dtype=float), np.asarray(params.v0, dtype=float),
                   arm, skew(arm), weight)


def _rhs_batch(rotations: np.ndarray, n: np.ndarray, m: np.ndarray, tension: float,
               params: TubeParams, gravity: Optional[np.ndarray],
               distributed: Optional[Tuple[np.ndarray, np.ndarray]] = None,
               coefficients: Optional[RhsCoefficients] = None):
    """
    Lado direito vetorizado sobre um lote de estados (B, ...).

    O carregamento do tendão depende de u̇ e v̇, por isso (ṅ, ṁ) saem de um
    sistema linear 6×6 por estado quando λ > 0.

    Returns:
        (ṗ global, u no corpo, ṅ, ṁ), cada um (B, 3)
    """
    c = RhsCoefficients.of(params, gravity) if coefficients is None else coefficients
    u = c.u0 + m / c.k_bt
    v = c.v0 + n / c.k_se
    p_dot = np.einsum('bij,bj->bi', rotations, v)

    rhs_n = -cross(u, n)
    rhs_m = -cross(u, m) - cross(v, n)
    if c.weight is not None:
        rhs_n -= _rotate_into_body(rotations, c.weight)
    if distributed is not None:
        rhs_n -= _rotate_into_body(rotations, distributed[0])
        rhs_m -= _rotate_into_body(rotations, distributed[1])

    if tension == 0.0:
        return p_dot, u, rhs_n, rhs_m

    arm = c.arm
    pb = v + cross(u, arm)
    speed = np.linalg.norm(pb, axis=-1)
    if np.any(speed < DEGENERATE_TANGENT):
        raise DegenerateTangentError("Tangente do tendão com norma < 1e-9")
    eye = np.eye(3)
    outer = pb[:, :, None] * pb[:, None, :]
    a_mat = tension * ((speed ** 2)[:, None, None] * eye - outer) / (speed ** 3)[:, None, None]
    w = np.einsum('bij,bj->bi', a_mat, cross(u, pb))

    c_se = 1.0 / c.k_se
    c_bt = 1.0 / c.k_bt
    arm_hat = c.arm_hat
    count = rotations.shape[0]
    system = np.empty((count, 6, 6))
    system[:, :3, :3] = eye + a_mat * c_se
    system[:, :3, 3:] = -(a_mat @ arm_hat) * c_bt
    system[:, 3:, :3] = (arm_hat @ a_mat) * c_se
    system[:, 3:, 3:] = eye - (arm_hat @ a_mat @ arm_hat) * c_bt
    rhs = np.concatenate([rhs_n - w, rhs_m - cross(arm, w)], axis=1)
    solution = np.linalg.solve(system, rhs[:, :, None])[:, :, 0]
    return p_dot, u, solution[:, :3], solution[:, 3:]


def ode_rhs(state: RodState, params: TubeParams, tension: float = 0.0,
            gravity: Optional[np.ndarray] = None,
            distributed: Optional[Tuple[np.ndarray, np.ndarray]] = None):
    """
    Derivada do estado do tubo em relação a s.

    Args:
        state: Estado (p_c, R_c, n, m)
        params: Parâmetros do tubo
        tension: Tensão do tendão λ (N)
        gravity: Aceleração da gravidade (m/s²) ou None
        distributed: Carga externa distribuída adicional (f, τ) global

    Returns:
        (ṗ_c, Ṙ_c, ṅ, ṁ)
    """
    p_dot, u, n_dot, m_dot = _rhs_batch(
        state.rotation[None], np.asarray(state.force, dtype=float)[None],
        np.asarray(state.moment, dtype=float)[None], tension, params, gravity, distributed,
    )
    r_dot = state.rotation @ skew(u[0])
    return p_dot[0], r_dot, n_dot[0], m_dot[0]


def _dexp_inverse(theta: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inversa da diferencial da exponencial, truncada no segundo comutador."""
    first = cross(theta, u)
    return u + 0.5 * first + cross(theta, first) / 12.0


def _jump_nodes(point_loads: Sequence[PointLoad], step: float, steps: int) -> Dict[int, np.ndarray]:
    """Nó da grade (o primeiro com s ≥ s_i) e força total aplicada nele."""
    jumps: Dict[int, np.ndarray] = {}
    for load in point_loads:
        node = int(np.clip(np.ceil(load.s / step - 1e-9), 0, steps))
        jumps[node] = jumps.get(node, np.zeros(3)) + load.force
    return jumps


def _integrate_batch(positions: np.ndarray, rotations: np.ndarray, n: np.ndarray, m: np.ndarray,
                     tension: float, params: TubeParams, gravity: Optional[np.ndarray],
                     point_loads: Sequence[PointLoad], steps: int):
    """
    RK4 de Munthe-Kaas de s = 0 a l_t para um lote de condições iniciais.

    Returns:
        (s, posições (B, N+1, 3), rotações (B, N+1, 3, 3), n (B, N+1, 3), m (B, N+1, 3))
    """
    if steps < MIN_STEPS:
        raise ConfigError("solver.rod_steps", f"deve ser pelo menos {MIN_STEPS}")
    h = params.length / steps
    s = np.linspace(0.0, params.length, steps + 1)
    jumps = _jump_nodes(point_loads, h, steps)
    coefficients = RhsCoefficients.of(params, gravity)

    count = positions.shape[0]
    out_p = np.empty((count, steps + 1, 3))
    out_r = np.empty((count, steps + 1, 3, 3))
    out_n = np.empty((count, steps + 1, 3))
    out_m = np.empty((count, steps + 1, 3))

    p, rot, n, m = positions.copy(), rotations.copy(), n.copy(), m.copy()
    if 0 in jumps:
        n = n - _rotate_into_body(rot, jumps[0])
    out_p[:, 0], out_r[:, 0], out_n[:, 0], out_m[:, 0] = p, rot, n, m

    def rhs(r_stage, n_stage, m_stage):
        return _rhs_batch(r_stage, n_stage, m_stage, tension, params, gravity, coefficients=coefficients)

    for k in range(1, steps + 1):
        dp1, u1, dn1, dm1 = rhs(rot, n, m)
        k1 = u1

        theta = 0.5 * h * k1
        dp2, u2, dn2, dm2 = rhs(rot @ exp_so3(theta), n + 0.5 * h * dn1, m + 0.5 * h * dm1)
        k2 = _dexp_inverse(theta, u2)

        theta = 0.5 * h * k2
        dp3, u3, dn3, dm3 = rhs(rot @ exp_so3(theta), n + 0.5 * h * dn2, m + 0.5 * h * dm2)
        k3 = _dexp_inverse(theta, u3)

        theta = h * k3
        dp4, u4, dn4, dm4 = rhs(rot @ exp_so3(theta), n + h * dn3, m + h * dm3)
        k4 = _dexp_inverse(theta, u4)

        p = p + h / 6.0 * (dp1 + 2.0 * dp2 + 2.0 * dp3 + dp4)
        n = n + h / 6.0 * (dn1 + 2.0 * dn2 + 2.0 * dn3 + dn4)
        m = m + h / 6.0 * (dm1 + 2.0 * dm2 + 2.0 * dm3 + dm4)
        rot = rot @ exp_so3(h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))

        if k in jumps:
            n = n - _rotate_into_body(rot, jumps[k])
        out_p[:, k], out_r[:, k], out_n[:, k], out_m[:, k] = p, rot, n, m

    return s, out_p, out_r, out_n, out_m


def integrate_rod(initial: RodState, tension: float, params: TubeParams,
                  gravity: Optional[np.ndarray] = None, point_loads: Sequence[PointLoad] = (),
                  steps: int = 200) -> RodShape:
    """
    Integra o tubo da base à ponta a partir de um estado inicial.

    Args:
        initial: Estado em s = 0
        tension: Tensão do tendão λ (N)
        params: Parâmetros do tubo
        gravity: Aceleração da gravidade (m/s²) ou None para desligar
        point_loads: Cargas pontuais ao longo do tubo
        steps: Número de passos (≥ 16)

    Returns:
        Forma amostrada (sem resíduo de shooting)
    """
    s, p, r, n, m = _integrate_batch(
        initial.position[None], initial.rotation[None],
        np.asarray(initial.force, dtype=float)[None], np.asarray(initial.moment, dtype=float)[None],
        tension, params, gravity, point_loads, steps,
    )
    return RodShape(s=s, positions=p[0], rotations=r[0], forces=n[0], moments=m[0], tension=tension)


def tendon_tip_force(rotation: np.ndarray, force: np.ndarray, tension: float,
                     params: TubeParams) -> np.ndarray:
    """F = −λ ṗ_c/‖ṗ_c‖ avaliada com o estado da ponta."""
    _, v = strains(force, np.zeros(3), params)
    tangent = rotation @ v
    return -tension * tangent / np.linalg.norm(tangent)


class CosseratSolver:
    """
    Solver de shooting do tubo: encontra n(0) e m(0) que satisfazem as
    condições de contorno na ponta.
    """

    def __init__(self, params: TubeParams, steps: Optional[int] = None, tol: Optional[float] = None,
                 max_iter: Optional[int] = None, fd_step: Optional[float] = None):
        """
        Inicializa o solver.

        Args:
            params: Parâmetros do tubo
            steps: Passos de integração (padrão: config.ROD_STEPS)
            tol: Tolerância do resíduo escalado (padrão: config.ROD_TOLERANCE)
            max_iter: Máximo de iterações (padrão: config.ROD_MAX_ITER)
            fd_step: Passo das diferenças finitas do Jacobiano (padrão: config.ROD_FD_STEP)
        """
        self.params = params
        self.steps = steps or config.ROD_STEPS
        self.tol = tol or config.ROD_TOLERANCE
        self.max_iter = max_iter or config.ROD_MAX_ITER
        self.fd_step = fd_step or config.ROD_FD_STEP
        # Jacobiano do resíduo na última solução, reaproveitável numa partida a quente
        self.jacobian: Optional[np.ndarray] = None

    def _tip_targets(self, rotations: np.ndarray, forces: np.ndarray, tension: float,
                     tip_force: np.ndarray, tip_wrench: Optional[Tuple[np.ndarray, np.ndarray]]):
        """Força e momento internos exigidos na ponta, lote (B, 3)."""
        if tip_wrench is not None:
            target_f = np.broadcast_to(np.asarray(tip_wrench[0], dtype=float), forces.shape).copy()
            target_m = np.broadcast_to(np.asarray(tip_wrench[1], dtype=float), forces.shape).copy()
        else:
            _, v = strains(forces, np.zeros_like(forces), self.params)
            tangent = np.einsum('bij,bj->bi', rotations, v)
            target_f = -tension * tangent / np.linalg.norm(tangent, axis=1, keepdims=True)
            arm = rotations @ self.params.tendon_offset
            target_m = np.cross(arm, target_f)
        return target_f + tip_force, target_m

    def _residuals(self, unknowns: np.ndarray, tension: float, gravity, point_loads,
                   tip_force: np.ndarray, tip_wrench) -> Tuple[np.ndarray, tuple]:
        """Resíduos da ponta para um lote de incógnitas (B, 6)."""
        count = unknowns.shape[0]
        base = self.params.base
        trajectory = _integrate_batch(
            np.broadcast_to(base.position, (count, 3)).copy(),
            np.broadcast_to(base.orientation, (count, 3, 3)).copy(),
            unknowns[:, :3], unknowns[:, 3:],
            tension, self.params, gravity, point_loads, self.steps,
        )
        _, _, rotations, forces, moments = trajectory
        tip_r, tip_n, tip_m = rotations[:, -1], forces[:, -1], moments[:, -1]
        target_f, target_m = self._tip_targets(tip_r, tip_n, tension, tip_force, tip_wrench)
        residual = np.concatenate([
            np.einsum('bij,bj->bi', tip_r, tip_n) - target_f,
            np.einsum('bij,bj->bi', tip_r, tip_m) - target_m,
        ], axis=1) / (tension + 1.0)
        return residual, trajectory

    def solve(self, tension: float, gravity: Optional[np.ndarray] = None,
              point_loads: Sequence[PointLoad] = (), tip_force: Optional[np.ndarray] = None,
              tip_wrench: Optional[Tuple[np.ndarray, np.ndarray]] = None,
              initial_guess: Optional[np.ndarray] = None, reuse_jacobian: bool = False) -> RodShape:
        """
        Resolve o problema de contorno por shooting com Levenberg-Marquardt.

        O Jacobiano vem de diferenças finitas em lote a cada iteração. Com
        reuse_jacobian, as primeiras iterações partem do Jacobiano da solução
        anterior com atualizações de Broyden; o primeiro passo rejeitado volta
        às diferenças finitas.

        Args:
            tension: Tensão do tendão λ (N)
            gravity: Aceleração da gravidade (m/s²) ou None
            point_loads: Cargas pontuais (globais) das esferas internas
            tip_force: Força adicional na ponta (N, global), por exemplo a das esferas estendidas
            tip_wrench: (F, M) globais que substituem a condição do tendão na ponta
            initial_guess: [n(0), m(0)] no corpo para partida a quente
            reuse_jacobian: Parte do Jacobiano guardado em self.jacobian

        Returns:
            Forma convergida

        Raises:
            RodConvergenceError: Se o resíduo não cair abaixo da tolerância
        """
        if tension < 0.0:
            raise ConfigError("actuation.tension", "deve ser não negativa")
        tip_force = np.zeros(3) if tip_force is None else np.asarray(tip_force, dtype=float)
        x = np.zeros(6) if initial_guess is None else np.asarray(initial_guess, dtype=float).copy()
        args = (tension, gravity, point_loads, tip_force, tip_wrench)

        residual, trajectory = self._residuals(x[None], *args)
        residual = residual[0]
        norm = float(np.linalg.norm(residual))
        damping = LM_INITIAL_DAMPING
        iterations = 0
        logger.debug("Shooting λ=%.4g: iter=0 ‖E‖=%.3e", tension, norm)
        jacobian = self.jacobian if reuse_jacobian else None
        finite_difference = jacobian is None

        while norm >= self.tol:
            if iterations >= self.max_iter:
                shape = self._shape(trajectory, 0, tension, norm, iterations)
                raise RodConvergenceError("Shooting do tubo não convergiu", iterations, norm, shape)
            iterations += 1

            if finite_difference:
                batch = np.vstack([x, x + self.fd_step * np.eye(6)])
                values, _ = self._residuals(batch, *args)
                jacobian = (values[1:] - values[0]).T / self.fd_step
            jtj = jacobian.T @ jacobian
            gradient = jacobian.T @ residual
            scale = np.diag(np.maximum(np.diag(jtj), 1e-12))

            accepted = False
            for _ in range(5):
                try:
                    delta = np.linalg.solve(jtj + damping * scale, gradient)
                except np.linalg.LinAlgError:
                    damping *= 10.0
                    continue
                predicted = float(gradient @ delta - 0.5 * delta @ jtj @ delta)
                trial, trial_trajectory = self._residuals((x - delta)[None], *args)
                trial_norm = float(np.linalg.norm(trial[0]))
                actual = 0.5 * (norm ** 2 - trial_norm ** 2)
                ratio = actual / predicted if abs(predicted) > 1e-300 else 0.0
                if ratio > 0.0:
                    if not finite_difference:
                        step = -delta
                        jacobian = jacobian + np.outer(trial[0] - residual - jacobian @ step, step) / (step @ step)
                        # Progresso fraco com o Jacobiano aproximado: volta às diferenças finitas
                        finite_difference = ratio < 0.25
                    x, residual, norm, trajectory = x - delta, trial[0], trial_norm, trial_trajectory
                    damping = max(damping * (0.3 if ratio > 0.75 else 0.5 if ratio > 0.25 else 1.0), 1e-12)
                    accepted = True
                    break
                damping = min(damping * 3.0, 1e10)

            if not accepted:
                if not finite_difference:
                    logger.debug("Jacobiano reaproveitado rejeitado; voltando às diferenças finitas")
                    finite_difference = True
                damping = LM_INITIAL_DAMPING
            logger.debug("Shooting λ=%.4g: iter=%d ‖E‖=%.3e amortecimento=%.1e",
                         tension, iterations, norm, damping)

        if jacobian is not None:
            self.jacobian = jacobian
        logger.info("Shooting convergiu: λ=%.4g N, %d iterações, resíduo %.2e", tension, iterations, norm)
        return self._shape(trajectory, 0, tension, norm, iterations)

    def _shape(self, trajectory, index: int, tension: float, residual: float, iterations: int) -> RodShape:
        s, p, r, n, m = trajectory
        return RodShape(s=s, positions=p[index], rotations=r[index], forces=n[index], moments=m[index],
                        tension=tension, residual=residual, iterations=iterations)

    def sweep_tension(self, tensions: Iterable[float], gravity: Optional[np.ndarray] = None,
                      point_loads: Sequence[PointLoad] = ()) -> List[RodShape]:
        """
        Resolve uma sequência de tensões, cada uma partindo das cargas de base da anterior.
        """
        shapes: List[RodShape] = []
        guess = None
        for tension in tensions:
            shape = self.solve(tension, gravity=gravity, point_loads=point_loads, initial_guess=guess)
            guess = np.concatenate([shape.forces[0], shape.moments[0]])
            shapes.append(shape)
        return shapes


def solve_bvp_shooting(params: TubeParams, tension: float, gravity: Optional[np.ndarray] = None,
                       point_loads: Sequence[PointLoad] = (), **kwargs) -> RodShape:
    """
    Atalho funcional para CosseratSolver(params).solve(...).

    Aceita também steps, tol, max_iter e fd_step, repassados ao construtor.
    """
    options = {key: kwargs.pop(key) for key in ("steps", "tol", "max_iter", "fd_step") if key in kwargs}
    return CosseratSolver(params, **options).solve(tension, gravity=gravity, point_loads=point_loads, **kwargs)


def tendon_load_profile(shape: RodShape, params: TubeParams,
                        gravity: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Carga distribuída do tendão (global) em cada nó da forma.

    Returns:
        (f_t (N+1, 3), τ_t (N+1, 3))
    """
    rotations, forces, moments = shape.rotations, shape.forces, shape.moments
    _, u, n_dot, m_dot = _rhs_batch(rotations, forces, moments, shape.tension, params, gravity)
    _, v = strains(forces, moments, params)
    arm = params.tendon_offset
    pb = v + np.cross(u, arm)
    c_se = 1.0 / params.shear_extension_stiffness
    c_bt = 1.0 / params.bending_torsion_stiffness
    accel = np.cross(u, pb) + n_dot * c_se + np.cross(m_dot * c_bt, arm)
    pt_dot = np.einsum('kij,kj->ki', rotations, pb)
    pt_ddot = np.einsum('kij,kj->ki', rotations, accel)
    arm_global = np.einsum('kij,j->ki', rotations, arm)
    return tendon_distributed_load(pt_dot, pt_ddot, arm_global, shape.tension)


def force_balance_residual(shape: RodShape, params: TubeParams, gravity: Optional[np.ndarray] = None,
                           point_loads: Sequence[PointLoad] = (),
                           tip_force: Optional[np.ndarray] = None) -> np.ndarray:
    """
    R n(0) − (força do tendão na ponta + f_e + ∫f_t + ∫m g + Σ cargas pontuais).

    A integral do tendão usa a regra de Simpson sobre a grade da forma.
    """
    tip = shape.tip
    applied = tendon_tip_force(tip.rotation, tip.force, shape.tension, params)
    if tip_force is not None:
        applied = applied + np.asarray(tip_force, dtype=float)
    if shape.tension > 0.0:
        f_t, _ = tendon_load_profile(shape, params, gravity)
        applied = applied + simpson(f_t, x=shape.s, axis=0)
    if gravity is not None:
        applied = applied + params.linear_density * params.length * np.asarray(gravity, dtype=float)
    for load in point_loads:
        applied = applied + load.force
    return shape.rotations[0] @ shape.forces[0] - applied
