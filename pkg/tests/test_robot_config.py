"""
Testes para os documentos de configuração (models/robot_config.py).
"""

import sys
import os
import copy
import json
import tempfile
import unittest
from pathlib import Path

import numpy as np
import yaml

# Adiciona o diretório raiz ao path para importar os módulos
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from models.errors import ConfigError
from models.field import ExternalDipole, UniformField
from models.robot_config import MagnetConfig, RobotConfig
from utils.magnetics import magnet_moment_from_cylinder

import config


def default_document():
    with open(config.DEFAULT_ROBOT_CONFIG, 'r', encoding='utf-8') as f:
        return json.load(f)


class TestRobotConfig(unittest.TestCase):
    """
    Testes para a classe RobotConfig.
    """

    def setUp(self):
        """
        Configura o ambiente de teste.
        """
        self.document = default_document()

    def test_default_prototype(self):
        """
        Testa os valores do protótipo e os derivados.
        """
        # Executa o método a ser testado
        robot = RobotConfig.default()

        # Verifica os resultados
        self.assertEqual(robot.chain.count, 10)
        self.assertEqual(robot.chain.extended, 4)
        self.assertAlmostEqual(robot.tube.length, 0.1016)
        self.assertAlmostEqual(robot.tension, 1.4 * 9.81)
        self.assertAlmostEqual(robot.chain.ball.remanence, 1.32)
        self.assertAlmostEqual(robot.chain.ball.dipole_moment, 0.0176, delta=2e-4)
        np.testing.assert_allclose(robot.gravity, [-9.81, 0.0, 0.0])
        self.assertEqual(robot.settings.rod_steps, 200)
        self.assertTrue(robot.source_path.endswith("robot_default.json"))
        self.assertAlmostEqual(robot.cc_params().max_deflection, 2.0 * 0.1016 / np.pi)

    def test_unknown_key_is_rejected(self):
        """
        Testa a rejeição de chaves desconhecidas com o caminho completo.
        """
        self.document["chain"]["ball"]["color"] = "red"
        with self.assertRaises(ConfigError) as context:
            RobotConfig.from_dict(self.document)
        self.assertEqual(context.exception.key, "chain.ball.color")

        with self.assertRaises(ConfigError) as context:
            RobotConfig.from_dict({**default_document(), "extra": 1})
        self.assertEqual(context.exception.key, "extra")

    def test_ball_needs_exactly_one_moment_source(self):
        """
        Testa remanence e dipole_moment mutuamente exclusivos.
        """
        both = copy.deepcopy(self.document)
        both["chain"]["ball"]["dipole_moment"] = 0.02
        neither = copy.deepcopy(self.document)
        del neither["chain"]["ball"]["remanence"]
        for document in (both, neither):
            with self.assertRaises(ConfigError) as context:
                RobotConfig.from_dict(document)
            self.assertEqual(context.exception.key, "chain.ball")

        self.document["chain"]["ball"] = {"diameter": 3.175e-3, "mass": 1.3e-4, "dipole_moment": 0.02}
        self.assertEqual(RobotConfig.from_dict(self.document).chain.ball.dipole_moment, 0.02)

    def test_tension_or_load_mass(self):
        """
        Testa a exclusividade entre tension e load_mass.
        """
        self.document["actuation"] = {"tension": 5.0, "load_mass": 0.5}
        with self.assertRaises(ConfigError) as context:
            RobotConfig.from_dict(self.document)
        self.assertEqual(context.exception.key, "actuation")

        self.document["actuation"] = {"tension": 5.0, "roll": 0.2}
        robot = RobotConfig.from_dict(self.document)
        self.assertEqual(robot.tension, 5.0)
        self.assertEqual(robot.roll, 0.2)

    def test_invalid_values(self):
        """
        Testa valores inválidos e chaves obrigatórias ausentes.
        """
        cases = [
            (("tube", "length"), -0.1, "tube.length"),
            (("chain", "count"), 2.5, "chain.count"),
            (("chain", "extended"), 11, "chain.extended"),
            (("solver", "rod_steps"), 8, "solver.rod_steps"),
        ]
        for (block, key), value, expected in cases:
            with self.subTest(key=expected):
                document = copy.deepcopy(self.document)
                document[block][key] = value
                with self.assertRaises(ConfigError) as context:
                    RobotConfig.from_dict(document)
                self.assertEqual(context.exception.key, expected)

        del self.document["tube"]["youngs_modulus"]
        with self.assertRaises(ConfigError) as context:
            RobotConfig.from_dict(self.document)
        self.assertEqual(context.exception.key, "tube.youngs_modulus")

    def test_invalid_base_orientation(self):
        """
        Testa orientações da base não numéricas, mal formadas ou impróprias.
        """
        cases = [
            [[1.0, 0.0, 0.0], [0.0, "x", 0.0], [0.0, 0.0, 1.0]],
            [[1.0, 0.0, 0.0], [0.0, 1.0, None], [0.0, 0.0, 1.0]],
            [[1.0, 0.0], [0.0, 1.0]],
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]],
            "identidade",
        ]
        for orientation in cases:
            with self.subTest(orientation=orientation):
                document = copy.deepcopy(self.document)
                document["tube"]["base"]["orientation"] = orientation
                with self.assertRaises(ConfigError) as context:
                    RobotConfig.from_dict(document)
                self.assertEqual(context.exception.key, "tube.base.orientation")

    def test_gravity_null_disables_gravity(self):
        """
        Testa gravity: null.
        """
        self.document["gravity"] = None
        robot = RobotConfig.from_dict(self.document)
        self.assertIsNone(robot.gravity)
        self.assertIsNone(robot.actuation().gravity)

    def test_precurvature_assumption(self):
        """
        Testa a pré-curvatura ativada pelas suposições.
        """
        self.document["assumptions"]["precurvature_enabled"] = True
        robot = RobotConfig.from_dict(self.document)
        self.assertAlmostEqual(np.linalg.norm(robot.tube.u0), 1.0 / 0.0564)

    def test_actuation_overrides(self):
        """
        Testa as entradas de atuação com padrões do documento e sobrescritas.
        """
        robot = RobotConfig.from_dict(self.document)
        actuation = robot.actuation(tension=3.0, extended=2)
        self.assertEqual(actuation.tension, 3.0)
        self.assertEqual(actuation.extended, 2)
        self.assertEqual(actuation.roll, 0.0)
        self.assertIsInstance(actuation.source, UniformField)

    def test_load_yaml(self):
        """
        Testa a leitura de um documento YAML.
        """
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "robot.yaml"
            with open(path, 'w', encoding='utf-8') as f:
                yaml.safe_dump(self.document, f)
            robot = RobotConfig.load(path)
        self.assertEqual(robot.chain.count, 10)
        self.assertEqual(robot.source_path, str(path))

    def test_to_dict(self):
        """
        Testa as chaves do dicionário de eco.
        """
        data = RobotConfig.from_dict(self.document).to_dict()
        self.assertEqual(data["chain"]["count"], 10)
        self.assertIn("assumptions", data)
        self.assertIsNone(data["source_path"])


class TestMagnetConfig(unittest.TestCase):
    """
    Testes para a classe MagnetConfig.
    """

    def test_dipole_from_cylinder(self):
        """
        Testa o ímã cilíndrico do documento padrão.
        """
        magnet = MagnetConfig.load(config.DEFAULT_MAGNET_CONFIG)
        expected = magnet_moment_from_cylinder(0.0762, 0.0381, 1.48)
        self.assertEqual(magnet.kind, "external_dipole")
        self.assertIsInstance(magnet.source, ExternalDipole)
        self.assertAlmostEqual(magnet.moment, expected)
        np.testing.assert_allclose(magnet.source.dipole.moment, [0.0, expected, 0.0])
        self.assertIn("moment_magnitude", magnet.to_dict())

    def test_direction_is_normalized(self):
        """
        Testa a normalização da direção com momento explícito.
        """
        magnet = MagnetConfig.from_dict({"kind": "external_dipole", "position": [0.0, 0.1, 0.1],
                                         "direction": [0.0, 0.0, 2.0], "moment": 100.0})
        np.testing.assert_allclose(magnet.source.dipole.moment, [0.0, 0.0, 100.0])

    def test_uniform(self):
        """
        Testa o campo uniforme e a rejeição de chaves de ímã dipolar.
        """
        magnet = MagnetConfig.from_dict({"kind": "uniform", "field": [0.0, 0.03, 0.0]})
        np.testing.assert_allclose(magnet.source.field_at(np.array([1.0, 2.0, 3.0])), [0.0, 0.03, 0.0])
        with self.assertRaises(ConfigError) as context:
            MagnetConfig.from_dict({"kind": "uniform", "field": [0.0, 0.03, 0.0], "moment": 1.0})
        self.assertEqual(context.exception.key, "magnet.moment")

    def test_invalid_documents(self):
        """
        Testa tipo desconhecido, momento ambíguo e direção nula.
        """
        base = {"kind": "external_dipole", "position": [0.0, 0.1, 0.1], "direction": [0.0, 1.0, 0.0]}
        cases = [
            ({"kind": "coil"}, "magnet.kind"),
            ({**base, "moment": 1.0, "remanence": 1.4}, "magnet.remanence"),
            ({**base, "remanence": 1.4}, "magnet"),
            ({**base, "direction": [0.0, 0.0, 0.0], "moment": 1.0}, "magnet.direction"),
        ]
        for document, key in cases:
            with self.subTest(key=key):
                with self.assertRaises(ConfigError) as context:
                    MagnetConfig.from_dict(document)
                self.assertEqual(context.exception.key, key)

    def test_none(self):
        """
        Testa a ausência de fonte externa.
        """
        magnet = MagnetConfig.none()
        np.testing.assert_allclose(magnet.source.field_at(np.zeros(3)), np.zeros(3))
        self.assertIsNone(magnet.moment)


if __name__ == '__main__':
    unittest.main()
