"""
Cinemática em forma fechada: tubo de curvatura constante, corrente reta,
cinemática inversa e fórmulas do espaço de trabalho destro.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from models.errors import ConfigError, InfeasibleTargetError
from models.kinematics import CCParams, FeasibilityReport, IKSolution, WorkspaceEntry
from utils.geom import E3, Pose, rot_about_axis, to_cylindrical

logger = logging.getLogger(__name__)

ANGLE_TOLERANCE = 1e-12
SNAP = 1e-12


def _arccos(x: float) -> float:
    """arccos com argumentos a menos de 1e-12 de ±1 fixados em ±1."""
    if abs(x - 1.0) < SNAP:
        x = 1.0
    elif abs(x + 1.0) < SNAP:
        x = -1.0
    return float(np.arccos(np.clip(x, -1.0, 1.0)))


def forward_tube_cc(params: CCParams, phi: float, kappa: float, length: Optional[float] = None,
                    base_advance: float = 0.0) -> Pose:
    """
    Pose da ponta do tubo sob curvatura constante.

    Args:
        params: Parâmetros do modelo
        phi: Rolagem da base (rad)
        kappa: Curvatura (1/m), κ ≥ 0
        length: Comprimento inserido (padrão: l_t)
        base_advance: Avanço axial da base (m)

    Returns:
        Pose global da ponta
    """
    if kappa < 0.0:
        raise ConfigError("kappa", "a curvatura deve ser não negativa")
    length = params.length if length is None else length
    if kappa == 0.0:
        local = np.array([0.0, 0.0, length])
        bend = np.eye(3)
    else:
        rho = 1.0 / kappa
        theta = length * kappa
        local = rho * np.array([2.0 * np.sin(0.5 * theta) ** 2, 0.0, np.sin(theta)])
        bend = rot_about_axis(2, theta)
    roll = rot_about_axis(3, phi)
    base = params.base
    position = base.position + base.orientation @ (roll @ local + base_advance * E3)
    orientation = base.orientation @ roll @ bend @ roll.T
    return Pose(position, orientation)


def forward_chain_line(base: Pose, b_hat: np.ndarray, n_extended: int,
                       ball_diameter: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Corrente reta alinhada ao campo: ponta = base + n_e d_c B̂.

    Returns:
        (posição da ponta, tangente da ponta)
    """
    b_hat = np.asarray(b_hat, dtype=float)
    return base.position + n_extended * ball_diameter * b_hat, b_hat.copy()


def forward_hybrid_cc(params: CCParams, phi: float, kappa: float, b_hat: np.ndarray, n_extended: int,
                      length: Optional[float] = None,
                      base_advance: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """Composição do tubo de curvatura constante com a corrente reta."""
    tube_tip = forward_tube_cc(params, phi, kappa, length, base_advance)
    return forward_chain_line(tube_tip, b_hat, n_extended, params.ball_diameter)


def forward_from_ik(params: CCParams, solution: IKSolution) -> Tuple[np.ndarray, np.ndarray]:
    """Cinemática direta a partir de uma solução da inversa."""
    return forward_hybrid_cc(params, solution.phi, solution.kappa, solution.b_hat, solution.n_extended,
                             length=solution.insertion_length, base_advance=solution.base_advance)


def tendon_force_for_bend(bending_stiffness: float, tube_diameter: float, radial: float, bend: float) -> float:
    """
    F = 2 EI (1 − cos k)/(d_t r_i), reportada como tensão positiva.
    """
    if not radial > 0.0:
        raise InfeasibleTargetError("degenerate bend", {"r_i": radial})
    return 2.0 * bending_stiffness * (1.0 - np.cos(bend)) / (tube_diameter * radial)


def curvature_for_tension(tension: float, bending_stiffness: float, tube_diameter: float) -> float:
    """Inversa de tendon_force_for_bend: κ = F d_t/(2 EI)."""
    if tension < 0.0:
        raise ConfigError("tension", "deve ser não negativa")
    return tension * tube_diameter / (2.0 * bending_stiffness)


def line_cylinder_interval(p: np.ndarray, v: np.ndarray, radius: float,
                           reach: float) -> Optional[Tuple[float, float]]:
    """
    Intervalo de s ∈ [0, reach] em que p − v s está dentro do cilindro de raio r_d.

    Resolve a s² − 2 b s + c ≤ 0 com a = v_x² + v_y², b = p_x v_x + p_y v_y,
    c = p_x² + p_y² − r_d² (referencial da base).
    """
    a = v[0] ** 2 + v[1] ** 2
    b = p[0] * v[0] + p[1] * v[1]
    c = p[0] ** 2 + p[1] ** 2 - radius ** 2
    if a < 1e-300:
        return (0.0, reach) if c <= 0.0 else None
    disc = b * b - a * c
    if disc < 0.0:
        return None
    root = np.sqrt(disc)
    lower = max((b - root) / a, 0.0)
    upper = min((b + root) / a, reach)
    if lower > upper:
        return None
    return float(lower), float(upper)


def approach_deviation_angles(p: np.ndarray, v: np.ndarray) -> Tuple[float, float]:
    """
    Desvios de aproximação (α_g, β_g) de v nos planos lateral e frontal no ponto p.

    α_g = 2|atan2(v·e_3, v·e_r)| e β_g = 2|atan2(v·e_φ, v·e_r)|, com os
    versores cilíndricos no alvo (φ = 0 sobre o eixo).
    """
    _, phi, _ = to_cylindrical(p)
    e_r = np.array([np.cos(phi), np.sin(phi), 0.0])
    e_phi = np.array([-np.sin(phi), np.cos(phi), 0.0])
    radial = float(v @ e_r)
    alpha = 2.0 * abs(np.arctan2(float(v @ E3), radial))
    beta = 2.0 * abs(np.arctan2(float(v @ e_phi), radial))
    return alpha, beta


def alpha_max(r: float, params: CCParams) -> float:
    """
    Amplitude máxima de aproximação no plano lateral no raio r.
    """
    rd, reach, dc = params.max_deflection, params.reach, params.ball_diameter
    if r > rd + reach:
        return 0.0
    if r > rd:
        return 2.0 * _arccos((r - rd) / reach)
    if r > rd - dc:
        return np.pi
    if r >= dc:
        return 2.0 * np.pi
    return np.pi


def beta_max(r: float, params: CCParams, telescoping: bool = True) -> float:
    """
    Amplitude máxima de aproximação no plano frontal no raio r.

    Fora de r_d usa a lei dos cossenos; com telescoping=True o comprimento
    da corrente é o que maximiza a amplitude, L* = clip(√(r² − r_d²), r − r_d, n d_c).
    """
    rd, reach = params.max_deflection, params.reach
    if r > rd + reach:
        return 0.0
    if r > rd:
        length = reach
        if telescoping:
            length = float(np.clip(np.sqrt(r * r - rd * rd), r - rd, reach))
        return 2.0 * _arccos((r * r + length * length - rd * rd) / (2.0 * r * length))
    return alpha_max(r, params)


def classify_radius(r: float, params: CCParams) -> str:
    """Região do espaço de trabalho no raio r."""
    rd, reach, dc = params.max_deflection, params.reach, params.ball_diameter
    if r < dc:
        return "axial"
    if r <= rd - dc:
        return "dexterous"
    if r <= rd:
        return "hemispherical"
    if r <= rd + reach:
        return "partial"
    return "unreachable"


def workspace_sweep(params: CCParams, r_min: float, r_max: float, samples: int,
                    telescoping: bool = True) -> List[WorkspaceEntry]:
    """
    Tabela uniforme (r, α_M, β_M, região) entre r_min e r_max.
    """
    if not r_min < r_max:
        raise ConfigError("r_min", "deve ser menor que r_max")
    if r_min < 0.0:
        raise ConfigError("r_min", "deve ser não negativo")
    if samples < 2:
        raise ConfigError("samples", "deve ser pelo menos 2")
    return [
        WorkspaceEntry(float(r), alpha_max(r, params), beta_max(r, params, telescoping), classify_radius(r, params))
        for r in np.linspace(r_min, r_max, samples)
    ]


def check_feasibility(p_g: np.ndarray, v_g: np.ndarray, params: CCParams) -> FeasibilityReport:
    """
    Testa alcance radial, ângulos de aproximação e interseção com o cilindro.

    Args:
        p_g: Alvo (global)
        v_g: Direção de aproximação unitária (global)
        params: Parâmetros do modelo

    Returns:
        Relatório com o primeiro motivo de rejeição, ou viável
    """
    p = params.base.inverse_point(p_g)
    v = params.base.inverse_vector(v_g)
    r = float(np.hypot(p[0], p[1]))
    alpha_g, beta_g = approach_deviation_angles(p, v)
    a_max, b_max = alpha_max(r, params), beta_max(r, params)
    report = FeasibilityReport(True, None, r, alpha_g, beta_g, a_max, b_max)

    if r > params.max_deflection + params.reach:
        report.feasible, report.reason = False, "radial reach exceeded"
        return report
    if alpha_g > a_max + ANGLE_TOLERANCE or beta_g > b_max + ANGLE_TOLERANCE:
        report.feasible, report.reason = False, "approach angle out of range"
        return report
    interval = line_cylinder_interval(p, v, params.max_deflection, params.reach)
    if interval is None:
        report.feasible, report.reason = False, "no cylinder intersection"
        return report
    report.s_interval = interval
    return report


def _bend_from_point(radial: float, axial: float, fixed_bend: Optional[float]) -> Tuple[float, float, float, float]:
    """
    (k, ρ, comprimento inserido, avanço da base) que levam a ponta do tubo a (r_i, z_i).
    """
    if radial == 0.0:
        return 0.0, np.inf, axial, 0.0
    if fixed_bend is not None:
        rho = radial / (1.0 - np.cos(fixed_bend))
        return fixed_bend, rho, rho * fixed_bend, axial - rho * np.sin(fixed_bend)
    bend = 2.0 * np.arctan2(radial, axial)
    rho = (radial * radial + axial * axial) / (2.0 * radial)
    return bend, rho, rho * bend, 0.0


def inverse_kinematics(p_g: np.ndarray, v_g: np.ndarray, params: CCParams,
                       fixed_bend: Optional[float] = None) -> IKSolution:
    """
    Entradas (F, φ, B̂, n_e) que levam a ponta do robô a p_g aproximando por v_g.

    A corrente é a reta que parte de p_g na direção −v_g; o ponto p_i em
    que ela cruza o cilindro de raio r_d é a ponta do tubo. Entre os
    múltiplos de d_c no intervalo viável, escolhe-se o que deixa o
    comprimento de arco do tubo mais próximo de l_t (empate: o menor s).

    Args:
        p_g: Alvo (global)
        v_g: Direção de aproximação unitária (global)
        params: Parâmetros do modelo
        fixed_bend: Mantém k fixo e compensa com o avanço axial da base

    Returns:
        Solução da cinemática inversa

    Raises:
        InfeasibleTargetError: Com o motivo da rejeição
    """
    p_g = np.asarray(p_g, dtype=float)
    v_g = np.asarray(v_g, dtype=float)
    if abs(np.linalg.norm(v_g) - 1.0) > 1e-9:
        raise ConfigError("direction", "a direção de aproximação deve ser unitária")
    if fixed_bend is not None and not 0.0 < fixed_bend < 2.0 * np.pi:
        raise ConfigError("fixed_bend", "deve estar em (0, 2π)")

    report = check_feasibility(p_g, v_g, params)
    if not report.feasible:
        raise InfeasibleTargetError(report.reason, report.to_dict())

    p = params.base.inverse_point(p_g)
    v = params.base.inverse_vector(v_g)
    d = params.ball_diameter
    lower, upper = report.s_interval
    first = int(np.ceil(lower / d - 1e-9))
    last = int(np.floor(upper / d + 1e-9))
    candidates = [k for k in range(max(first, 0), min(last, params.count) + 1)]
    if not candidates:
        raise InfeasibleTargetError("chain length insufficient", report.to_dict())

    best = None
    for k in candidates:
        s = k * d
        point = p - v * s
        radial, _, axial = to_cylindrical(point)
        if radial == 0.0 and axial <= 0.0:
            continue
        bend, rho, insertion, advance = _bend_from_point(radial, axial, fixed_bend)
        score = abs(insertion - params.length)
        if best is None or score < best[0]:
            best = (score, k, s, point, radial, bend, rho, insertion, advance)
    if best is None:
        raise InfeasibleTargetError("degenerate bend", report.to_dict())

    _, k, s, point, radial, bend, rho, insertion, advance = best
    phi = to_cylindrical(point)[1]
    tension = 0.0 if radial == 0.0 else tendon_force_for_bend(
        params.bending_stiffness, params.tube_diameter, radial, bend)
    solution = IKSolution(
        tension=tension, phi=phi, b_hat=v_g.copy(), bend=bend, rho=rho, n_extended=k,
        intersection=params.base.transform_point(point), s_star=s,
        insertion_length=insertion, base_advance=advance,
    )
    logger.debug("IK: F=%.4g N, φ=%.4g rad, k=%.4g rad, n_e=%d", tension, phi, bend, k)
    return solution
