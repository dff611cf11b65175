"""
Álgebra cinemática: operador skew, exponencial de SO(3), rotações
principais, coordenadas cilíndricas e poses.

As funções aceitam vetores com dimensões de lote à esquerda, (..., 3).
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

import numpy as np


E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])

SMALL_ANGLE = 1e-6


def skew(u: np.ndarray) -> np.ndarray:
    """
    Matriz antissimétrica tal que skew(u) @ w = u × w.

    Args:
        u: Vetor (..., 3)

    Returns:
        Matriz (..., 3, 3)
    """
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape[:-1] + (3, 3))
    out[..., 0, 1] = -u[..., 2]
    out[..., 0, 2] = u[..., 1]
    out[..., 1, 0] = u[..., 2]
    out[..., 1, 2] = -u[..., 0]
    out[..., 2, 0] = -u[..., 1]
    out[..., 2, 1] = u[..., 0]
    return out


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Produto vetorial com broadcasting sobre (..., 3), mais barato que np.cross em lotes pequenos."""
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0], axis=-1)


def exp_so3(omega: np.ndarray) -> np.ndarray:
    """
    Fórmula de Rodrigues: rotação de ângulo ‖ω‖ em torno de ω̂.

    Abaixo de 1e-6 rad usa as séries de Taylor de sin(θ)/θ e
    (1 − cos θ)/θ².

    Args:
        omega: Vetor de rotação (..., 3)

    Returns:
        Matriz de rotação (..., 3, 3)
    """
    omega = np.asarray(omega, dtype=float)
    theta = np.linalg.norm(omega, axis=-1)
    theta2 = theta * theta
    small = theta < SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    a = np.where(small, 1.0 - theta2 / 6.0, np.sin(safe) / safe)
    b = np.where(small, 0.5 - theta2 / 24.0, (1.0 - np.cos(safe)) / (safe * safe))
    k = skew(omega)
    eye = np.broadcast_to(np.eye(3), k.shape)
    return eye + a[..., None, None] * k + b[..., None, None] * (k @ k)


def rot_about_axis(axis_index: int, delta: float) -> np.ndarray:
    """
    Rotação de um ângulo delta em torno do eixo principal e_i (i = 1, 2, 3).
    """
    if axis_index not in (1, 2, 3):
        raise ValueError(f"Eixo não suportado: {axis_index}")
    c, s = np.cos(delta), np.sin(delta)
    if axis_index == 1:
        return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    if axis_index == 2:
        return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def to_cylindrical(p: np.ndarray) -> Tuple[float, float, float]:
    """
    Converte um ponto para (r, φ, z); φ = 0 sobre o eixo.
    """
    x, y, z = (float(c) for c in p)
    r = float(np.hypot(x, y))
    phi = float(np.arctan2(y, x)) if r > 0.0 else 0.0
    return r, phi, z


def from_cylindrical(r: float, phi: float, z: float) -> np.ndarray:
    """Inversa de to_cylindrical."""
    return np.array([r * np.cos(phi), r * np.sin(phi), z])


def unit(v: np.ndarray, eps: float = 1e-300) -> np.ndarray:
    """Normaliza ao longo do último eixo; vetores nulos permanecem nulos."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / np.maximum(norm, eps)


def orthonormal_frame(direction: np.ndarray) -> np.ndarray:
    """
    Completa uma direção unitária numa base ortonormal direita.

    Args:
        direction: Vetores unitários (..., 3)

    Returns:
        Matrizes (..., 3, 3) cuja primeira coluna é a direção
    """
    q1 = unit(direction)
    helper = np.where(
        (np.abs(q1[..., 0]) < 0.9)[..., None],
        np.broadcast_to(E1, q1.shape),
        np.broadcast_to(E2, q1.shape),
    )
    q2 = unit(np.cross(helper, q1))
    q3 = np.cross(q1, q2)
    return np.stack([q1, q2, q3], axis=-1)


def rotation_error(rotation: np.ndarray) -> float:
    """Desvio de ortonormalidade ‖RᵀR − I‖ (máximo sobre o lote)."""
    rotation = np.asarray(rotation, dtype=float)
    gram = np.swapaxes(rotation, -1, -2) @ rotation
    return float(np.max(np.linalg.norm(gram - np.eye(3), axis=(-2, -1))))


@dataclass
class Pose:
    """
    Pose rígida (posição em metros, orientação em SO(3)).
    """

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orientation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.orientation = np.asarray(self.orientation, dtype=float).reshape(3, 3)
        if rotation_error(self.orientation) > 1e-10 or np.linalg.det(self.orientation) < 0.0:
            raise ValueError("Orientação da pose não é uma rotação própria")

    @classmethod
    def identity(cls) -> 'Pose':
        return cls()

    def transform_point(self, p: np.ndarray) -> np.ndarray:
        """Leva um ponto do referencial da pose para o global."""
        return self.position + np.asarray(p, dtype=float) @ self.orientation.T

    def transform_vector(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(v, dtype=float) @ self.orientation.T

    def inverse_point(self, p: np.ndarray) -> np.ndarray:
        """Leva um ponto global para o referencial da pose."""
        return (np.asarray(p, dtype=float) - self.position) @ self.orientation

    def inverse_vector(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(v, dtype=float) @ self.orientation

    def compose(self, other: 'Pose') -> 'Pose':
        """Retorna self ∘ other."""
        return Pose(self.transform_point(other.position), self.orientation @ other.orientation)

    def rolled(self, phi: float) -> 'Pose':
        """Pose girada de phi em torno do próprio eixo e_3."""
        return Pose(self.position, self.orientation @ rot_about_axis(3, phi))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "position": self.position.tolist(),
            "orientation": self.orientation.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Pose':
        return cls(
            position=data.get("position", [0.0, 0.0, 0.0]),
            orientation=data.get("orientation", np.eye(3).tolist()),
        )
