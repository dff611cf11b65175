"""
Campo, gradiente, força e torque de dipolos pontuais, e as parcelas de
energia potencial da corrente de esferas.

Fontes de campo seguem o protocolo de models.field: field_at(pontos) e
gradient_at(pontos), ambos vetorizados sobre (..., 3).
"""

import logging
from typing import Optional, Tuple

import numpy as np

from models.chain import BallParams, ChainConfig, EnergyBreakdown
from models.errors import SingularityError

logger = logging.getLogger(__name__)

MU0 = 4.0e-7 * np.pi
DIPOLE_CONSTANT = MU0 / (4.0 * np.pi)
SINGULAR_DISTANCE = 1e-12


def sphere_volume(diameter: float) -> float:
    return np.pi * diameter ** 3 / 6.0


def cylinder_volume(diameter: float, length: float) -> float:
    return np.pi * diameter ** 2 * length / 4.0


def dipole_moment_from_remanence(remanence: float, volume: float) -> float:
    """μ = B_r V / μ0."""
    return remanence * volume / MU0


def magnet_moment_from_cylinder(diameter: float, length: float, remanence: float) -> float:
    """Dipolo equivalente de um ímã cilíndrico magnetizado axialmente."""
    return dipole_moment_from_remanence(remanence, cylinder_volume(diameter, length))


def _distances(r: np.ndarray) -> np.ndarray:
    dist = np.linalg.norm(r, axis=-1)
    if np.any(dist < SINGULAR_DISTANCE):
        raise SingularityError("Campo de dipolo avaliado na origem (‖r‖ < 1e-12 m)")
    return dist


def dipole_field(r: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """
    B = μ0/(4π‖r‖³)(3 r̂ r̂ᵀ − I) μ.

    Args:
        r: Vetor do dipolo ao ponto de campo (..., 3), em metros
        mu: Momento de dipolo (..., 3), em A·m²

    Returns:
        Campo (..., 3) em tesla
    """
    r = np.asarray(r, dtype=float)
    mu = np.asarray(mu, dtype=float)
    dist = _distances(r)[..., None]
    rhat = r / dist
    proj = np.sum(rhat * mu, axis=-1, keepdims=True)
    return DIPOLE_CONSTANT / dist ** 3 * (3.0 * rhat * proj - mu)


def dipole_field_gradient(r: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """
    Jacobiano ∂B/∂r (simétrico e de traço nulo fora da origem).

    Returns:
        Matriz (..., 3, 3) em T/m, índice [a, b] = ∂B_a/∂r_b
    """
    r = np.asarray(r, dtype=float)
    mu = np.asarray(mu, dtype=float)
    r, mu = np.broadcast_arrays(r, mu)
    dist = _distances(r)
    rm = np.sum(r * mu, axis=-1)
    coef = 3.0 * DIPOLE_CONSTANT / dist ** 5
    eye = np.eye(3)
    grad = (
        rm[..., None, None] * eye
        + r[..., :, None] * mu[..., None, :]
        + mu[..., :, None] * r[..., None, :]
        - 5.0 * (rm / dist ** 2)[..., None, None] * r[..., :, None] * r[..., None, :]
    )
    return coef[..., None, None] * grad


def magnetic_force(mu: np.ndarray, grad_b: np.ndarray) -> np.ndarray:
    """f = (∂B/∂r)ᵀ μ, o gradiente de μ·B a μ fixo."""
    return np.einsum('...ji,...j->...i', grad_b, mu)


def magnetic_torque(mu: np.ndarray, b: np.ndarray) -> np.ndarray:
    """τ = μ × B."""
    return np.cross(mu, b)


def bend_indices(count: int, n_extended: Optional[int] = None) -> np.ndarray:
    """
    Esferas (índice base 0) onde se mede a flexão da luva elástica.

    Sem n_extended, todas as esferas interiores; caso contrário só as
    estendidas que possuem elo de entrada e de saída.
    """
    first = 1 if n_extended is None else max(1, count - n_extended)
    return np.arange(first, max(first, count - 1))


def pair_energy(positions: np.ndarray, dipoles: np.ndarray) -> np.ndarray:
    """
    U_b = −Σ_{i<j} μ_i·B_j(p_i), vetorizada sobre lotes (..., n, 3).
    """
    count = positions.shape[-2]
    if count < 2:
        return np.zeros(positions.shape[:-2])
    i, j = np.triu_indices(count, k=1)
    r = positions[..., i, :] - positions[..., j, :]
    b = dipole_field(r, dipoles[..., j, :])
    return -np.sum(dipoles[..., i, :] * b, axis=(-2, -1))


def external_energy(positions: np.ndarray, dipoles: np.ndarray, src) -> np.ndarray:
    """U_e = −Σ μ_i·B_src(p_i)."""
    return -np.sum(dipoles * src.field_at(positions), axis=(-2, -1))


def gravity_energy(positions: np.ndarray, mass: float, gravity: Optional[np.ndarray]) -> np.ndarray:
    """U_g = −Σ m g·p_i (cresce com a altura)."""
    if gravity is None:
        return np.zeros(positions.shape[:-2])
    return -mass * np.sum(positions @ np.asarray(gravity, dtype=float), axis=-1)


def _bend_vectors(positions: np.ndarray, indices: np.ndarray):
    a = positions[..., indices, :] - positions[..., indices - 1, :]
    b = positions[..., indices + 1, :] - positions[..., indices, :]
    na = np.linalg.norm(a, axis=-1)
    nb = np.linalg.norm(b, axis=-1)
    ahat = a / na[..., None]
    bhat = b / nb[..., None]
    cos = np.sum(ahat * bhat, axis=-1)
    sin = np.linalg.norm(np.cross(ahat, bhat), axis=-1)
    theta = np.arctan2(sin, cos)
    return ahat, bhat, na, nb, cos, sin, theta


def sleeve_energy(positions: np.ndarray, sleeve_ei: float, diameter: float,
                  n_extended: Optional[int] = None) -> np.ndarray:
    """U_s = ½ Σ EI_s θ_i² / d_c."""
    indices = bend_indices(positions.shape[-2], n_extended)
    if sleeve_ei == 0.0 or indices.size == 0:
        return np.zeros(positions.shape[:-2])
    theta = _bend_vectors(positions, indices)[-1]
    return 0.5 * sleeve_ei / diameter * np.sum(theta ** 2, axis=-1)


def chain_energy(chain: ChainConfig, src, ball: BallParams, gravity: Optional[np.ndarray] = None,
                 sleeve_ei: float = 0.0, n_extended: Optional[int] = None) -> EnergyBreakdown:
    """
    Energia total da corrente decomposta em U_e, U_b, U_g e U_s.

    Args:
        chain: Configuração da corrente
        src: Fonte de campo externa
        ball: Parâmetros das esferas (massa e diâmetro)
        gravity: Aceleração da gravidade (m/s²) ou None
        sleeve_ei: Rigidez à flexão da luva (N·m²)
        n_extended: Esferas estendidas; define onde U_s é somada
    """
    return EnergyBreakdown(
        external=float(external_energy(chain.positions, chain.dipoles, src)),
        pair=float(pair_energy(chain.positions, chain.dipoles)),
        gravity=float(gravity_energy(chain.positions, ball.mass, gravity)),
        sleeve=float(sleeve_energy(chain.positions, sleeve_ei, ball.diameter, n_extended)),
    )


def chain_energy_gradient(chain: ChainConfig, src, ball: BallParams, gravity: Optional[np.ndarray] = None,
                          sleeve_ei: float = 0.0,
                          n_extended: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gradiente cartesiano da energia total.

    Returns:
        (∂U/∂p, ∂U/∂μ), ambos (n, 3)
    """
    positions, dipoles = chain.positions, chain.dipoles
    count = chain.count
    grad_p = np.zeros((count, 3))
    grad_m = -src.field_at(positions)
    grad_p -= magnetic_force(dipoles, src.gradient_at(positions))

    if count >= 2:
        i, j = np.triu_indices(count, k=1)
        r = positions[i] - positions[j]
        np.add.at(grad_m, i, -dipole_field(r, dipoles[j]))
        np.add.at(grad_m, j, -dipole_field(r, dipoles[i]))
        force_on_i = magnetic_force(dipoles[i], dipole_field_gradient(r, dipoles[j]))
        np.add.at(grad_p, i, -force_on_i)
        np.add.at(grad_p, j, force_on_i)

    if gravity is not None:
        grad_p -= ball.mass * np.asarray(gravity, dtype=float)

    indices = bend_indices(count, n_extended)
    if sleeve_ei != 0.0 and indices.size > 0:
        ahat, bhat, na, nb, cos, sin, theta = _bend_vectors(positions, indices)
        ratio = np.where(sin > 1e-12, theta / np.where(sin > 1e-12, sin, 1.0), 1.0)
        coef = (sleeve_ei / ball.diameter * ratio)[:, None]
        d_a = -coef * (bhat - cos[:, None] * ahat) / na[:, None]
        d_b = -coef * (ahat - cos[:, None] * bhat) / nb[:, None]
        np.add.at(grad_p, indices, d_a - d_b)
        np.add.at(grad_p, indices - 1, -d_a)
        np.add.at(grad_p, indices + 1, d_b)

    return grad_p, grad_m


def ball_fields(positions: np.ndarray, dipoles: np.ndarray, src) -> np.ndarray:
    """
    Campo total em cada esfera (fonte externa + demais esferas), lote (..., n, 3).
    """
    count = positions.shape[-2]
    total = np.array(src.field_at(positions), dtype=float)
    if count < 2:
        return total
    i, j = np.where(~np.eye(count, dtype=bool))
    r = positions[..., i, :] - positions[..., j, :]
    contrib = dipole_field(r, dipoles[..., j, :])
    shape = contrib.shape[:-2] + (count, count - 1, 3)
    return total + contrib.reshape(shape).sum(axis=-2)


def ball_loads(chain: ChainConfig, src) -> Tuple[np.ndarray, np.ndarray]:
    """
    Força e torque magnéticos totais sobre cada esfera.

    Returns:
        (forças (n, 3) em N, torques (n, 3) em N·m)
    """
    positions, dipoles = chain.positions, chain.dipoles
    count = chain.count
    grad = np.array(src.gradient_at(positions), dtype=float)
    if count >= 2:
        i, j = np.where(~np.eye(count, dtype=bool))
        pair_grad = dipole_field_gradient(positions[i] - positions[j], dipoles[j])
        grad += pair_grad.reshape(count, count - 1, 3, 3).sum(axis=1)
    forces = magnetic_force(dipoles, grad)
    torques = magnetic_torque(dipoles, ball_fields(positions, dipoles, src))
    return forces, torques
