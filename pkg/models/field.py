"""
Fontes de campo magnético externas: ímã dipolar ou campo uniforme ideal.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from models.errors import ConfigError
from utils.magnetics import dipole_field, dipole_field_gradient


@dataclass(frozen=True)
class Dipole:
    """
    Dipolo pontual: posição (m) e momento (A·m²).
    """

    position: np.ndarray
    moment: np.ndarray

    def __post_init__(self):
        position = np.asarray(self.position, dtype=float).reshape(3)
        moment = np.asarray(self.moment, dtype=float).reshape(3)
        if not (np.all(np.isfinite(position)) and np.all(np.isfinite(moment))):
            raise ConfigError("magnet", "dipolo com componentes não finitas")
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "moment", moment)


class FieldSource(ABC):
    """
    Fonte de campo com avaliação vetorizada.
    """

    kind = ""

    @abstractmethod
    def field_at(self, points: np.ndarray) -> np.ndarray:
        """Campo B (T) nos pontos (..., 3)."""

    @abstractmethod
    def gradient_at(self, points: np.ndarray) -> np.ndarray:
        """Jacobiano ∂B/∂r (T/m) nos pontos, (..., 3, 3)."""

    @abstractmethod
    def rotated(self, rotation: np.ndarray) -> 'FieldSource':
        """Mesma fonte após uma rotação rígida em torno da origem."""

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        pass

    def direction_at(self, point: np.ndarray) -> np.ndarray:
        """B̂ no ponto; vetor nulo quando o campo é nulo."""
        b = self.field_at(np.asarray(point, dtype=float))
        norm = np.linalg.norm(b)
        return b / norm if norm > 0.0 else np.zeros(3)

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> 'FieldSource':
        """
        Cria a fonte a partir de um dicionário com a chave "kind".
        """
        kind = data.get("kind")
        if kind == ExternalDipole.kind:
            return ExternalDipole(Dipole(data["position"], data["moment"]))
        if kind == UniformField.kind:
            return UniformField(data["field"])
        raise ConfigError("magnet.kind", f"tipo de fonte não suportado: {kind}")


class ExternalDipole(FieldSource):
    """
    Ímã externo modelado como dipolo pontual.
    """

    kind = "external_dipole"

    def __init__(self, dipole: Dipole):
        self.dipole = dipole

    def field_at(self, points: np.ndarray) -> np.ndarray:
        return dipole_field(np.asarray(points, dtype=float) - self.dipole.position, self.dipole.moment)

    def gradient_at(self, points: np.ndarray) -> np.ndarray:
        return dipole_field_gradient(np.asarray(points, dtype=float) - self.dipole.position,
                                     self.dipole.moment)

    def rotated(self, rotation: np.ndarray) -> 'ExternalDipole':
        return ExternalDipole(Dipole(rotation @ self.dipole.position, rotation @ self.dipole.moment))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "position": self.dipole.position.tolist(),
            "moment": self.dipole.moment.tolist(),
        }


class UniformField(FieldSource):
    """
    Campo uniforme ideal (limite de campo forte).
    """

    kind = "uniform"

    def __init__(self, field: np.ndarray):
        field = np.asarray(field, dtype=float).reshape(3)
        if not np.all(np.isfinite(field)):
            raise ConfigError("magnet.field", "campo uniforme com componentes não finitas")
        self.field = field

    @classmethod
    def zero(cls) -> 'UniformField':
        return cls(np.zeros(3))

    def field_at(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return np.broadcast_to(self.field, points.shape).copy()

    def gradient_at(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return np.zeros(points.shape + (3,))

    def rotated(self, rotation: np.ndarray) -> 'UniformField':
        return UniformField(rotation @ self.field)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "field": self.field.tolist()}
