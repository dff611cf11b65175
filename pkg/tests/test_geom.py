"""
Testes para a álgebra cinemática (utils/geom.py).
"""

import sys
import os
import unittest

import numpy as np

# Adiciona o diretório raiz ao path para importar os módulos
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from utils.geom import (E1, E2, E3, Pose, exp_so3, from_cylindrical, orthonormal_frame, rot_about_axis,
                        rotation_error, skew, to_cylindrical)


class TestRotations(unittest.TestCase):
    """
    Testes para skew, exp_so3 e rotações principais.
    """

    def setUp(self):
        """
        Configura o ambiente de teste.
        """
        self.rng = np.random.default_rng(7)

    def test_skew_matches_cross_product(self):
        """
        Testa se skew(u) @ w reproduz u × w.
        """
        u, w = self.rng.normal(size=3), self.rng.normal(size=3)
        np.testing.assert_allclose(skew(u) @ w, np.cross(u, w), atol=1e-14)
        np.testing.assert_allclose(skew(u), -skew(u).T)

    def test_exp_so3_is_rotation(self):
        """
        Testa ortonormalidade e determinante de exp_so3 para ângulos grandes e pequenos.
        """
        for scale in (1e-9, 1e-7, 1e-3, 1.0, 3.0):
            omega = scale * self.rng.normal(size=3)
            rotation = exp_so3(omega)
            self.assertLess(rotation_error(rotation), 1e-12)
            self.assertAlmostEqual(np.linalg.det(rotation), 1.0, places=12)

    def test_exp_so3_matches_principal_rotation(self):
        """
        Testa exp_so3(δ e_i) contra rot_about_axis(i, δ).
        """
        for index, axis in ((1, E1), (2, E2), (3, E3)):
            # Executa o método a ser testado
            rotation = exp_so3(0.7 * axis)

            # Verifica os resultados
            np.testing.assert_allclose(rotation, rot_about_axis(index, 0.7), atol=1e-14)

    def test_exp_so3_small_angle_branch_is_continuous(self):
        """
        Testa a continuidade entre a série de Taylor e a forma fechada em 1e-6 rad.
        """
        axis = np.array([0.3, -0.4, 0.5]) / np.linalg.norm([0.3, -0.4, 0.5])
        theta = 1e-6 * (1.0 - 1e-9)
        k = skew(theta * axis)
        closed = np.eye(3) + np.sin(theta) / theta * k + (1.0 - np.cos(theta)) / theta ** 2 * (k @ k)
        np.testing.assert_allclose(exp_so3(theta * axis), closed, atol=1e-14)

    def test_exp_so3_batch(self):
        """
        Testa a avaliação em lote.
        """
        omegas = self.rng.normal(size=(4, 5, 3))
        rotations = exp_so3(omegas)
        self.assertEqual(rotations.shape, (4, 5, 3, 3))
        np.testing.assert_allclose(rotations[2, 3], exp_so3(omegas[2, 3]), atol=1e-14)

    def test_rot_about_axis_invalid(self):
        """
        Testa a rejeição de um índice de eixo inválido.
        """
        with self.assertRaises(ValueError):
            rot_about_axis(4, 0.1)

    def test_orthonormal_frame(self):
        """
        Testa se a base completada é ortonormal e começa pela direção dada.
        """
        directions = np.vstack([E1, E2, E3, self.rng.normal(size=3)])
        directions = directions / np.linalg.norm(directions, axis=1, keepdims=True)
        frames = orthonormal_frame(directions)
        self.assertLess(rotation_error(frames), 1e-12)
        np.testing.assert_allclose(frames[:, :, 0], directions, atol=1e-14)
        np.testing.assert_allclose(np.linalg.det(frames), np.ones(4), atol=1e-12)


class TestCylindrical(unittest.TestCase):
    """
    Testes para coordenadas cilíndricas.
    """

    def test_round_trip(self):
        """
        Testa from_cylindrical(to_cylindrical(p)) = p.
        """
        p = np.array([-0.02, 0.031, 0.07])
        r, phi, z = to_cylindrical(p)
        self.assertAlmostEqual(r, np.hypot(-0.02, 0.031))
        np.testing.assert_allclose(from_cylindrical(r, phi, z), p, atol=1e-15)

    def test_axis_has_zero_azimuth(self):
        """
        Testa φ = 0 sobre o eixo.
        """
        self.assertEqual(to_cylindrical(np.array([0.0, 0.0, 0.5])), (0.0, 0.0, 0.5))


class TestPose(unittest.TestCase):
    """
    Testes para a classe Pose.
    """

    def setUp(self):
        """
        Configura o ambiente de teste.
        """
        self.pose = Pose(np.array([0.1, -0.2, 0.3]), exp_so3(np.array([0.2, 0.5, -0.1])))

    def test_transform_and_inverse(self):
        """
        Testa se inverse_point desfaz transform_point.
        """
        p = np.array([0.01, 0.02, 0.03])
        np.testing.assert_allclose(self.pose.inverse_point(self.pose.transform_point(p)), p, atol=1e-15)
        np.testing.assert_allclose(self.pose.inverse_vector(self.pose.transform_vector(E2)), E2, atol=1e-15)

    def test_compose(self):
        """
        Testa a composição de poses.
        """
        other = Pose(np.array([0.0, 0.0, 0.1]), rot_about_axis(1, 0.3))
        composed = self.pose.compose(other)
        p = np.array([0.3, 0.1, -0.2])
        np.testing.assert_allclose(composed.transform_point(p),
                                   self.pose.transform_point(other.transform_point(p)), atol=1e-15)

    def test_rolled_keeps_axis(self):
        """
        Testa se a rolagem preserva a posição e o eixo e_3 da pose.
        """
        rolled = self.pose.rolled(1.2)
        np.testing.assert_allclose(rolled.position, self.pose.position)
        np.testing.assert_allclose(rolled.orientation[:, 2], self.pose.orientation[:, 2], atol=1e-15)

    def test_improper_orientation_rejected(self):
        """
        Testa a rejeição de uma reflexão como orientação.
        """
        with self.assertRaises(ValueError):
            Pose(np.zeros(3), np.diag([1.0, 1.0, -1.0]))

    def test_dict_round_trip(self):
        """
        Testa to_dict e from_dict.
        """
        restored = Pose.from_dict(self.pose.to_dict())
        np.testing.assert_allclose(restored.position, self.pose.position)
        np.testing.assert_allclose(restored.orientation, self.pose.orientation)
        self.assertTrue(np.allclose(Pose.from_dict({}).orientation, np.eye(3)))


if __name__ == '__main__':
    unittest.main()
