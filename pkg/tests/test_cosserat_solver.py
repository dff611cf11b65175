"""
Testes para o solver Cosserat do tubo (solvers/cosserat_solver.py).
"""

import sys
import os
import unittest
from dataclasses import replace

import numpy as np

# Adiciona o diretório raiz ao path para importar os módulos
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from models.errors import ConfigError, DegenerateTangentError, RodConvergenceError
from models.kinematics import CCParams
from models.rod import PointLoad, RodShape, RodState, TubeParams
from solvers.closedform import curvature_for_tension, forward_tube_cc
from solvers.cosserat_solver import (CosseratSolver, constitutive, force_balance_residual, integrate_rod,
                                     solve_bvp_shooting, strains, tendon_distributed_load,
                                     tendon_load_profile)
from utils.geom import E1, E2, E3, Pose, rotation_error

GRAVITY = np.array([-9.81, 0.0, 0.0])


def make_tube(**kwargs):
    """Tubo do protótipo (nitinol, 101,6 mm)."""
    values = dict(length=0.1016, outer_diameter=4.7e-3, inner_diameter=3.4e-3,
                  youngs_modulus=4.10e9, shear_modulus=34.13e6, linear_density=0.0099)
    values.update(kwargs)
    return TubeParams.annulus(**values)


class TestConstitutive(unittest.TestCase):
    """
    Testes para a lei constitutiva e o carregamento do tendão.
    """

    def setUp(self):
        """
        Configura o ambiente de teste.
        """
        self.tube = make_tube()

    def test_strains_invert_constitutive(self):
        """
        Testa se strains desfaz constitutive.
        """
        u = np.array([0.5, -1.0, 0.1])
        v = np.array([0.01, 0.0, 0.999])
        n, m = constitutive(u, v, self.tube)
        u2, v2 = strains(n, m, self.tube)
        np.testing.assert_allclose(u2, u, atol=1e-12)
        np.testing.assert_allclose(v2, v, atol=1e-12)

    def test_annulus_properties(self):
        """
        Testa área, momentos de área e pré-curvatura do tubo anular.
        """
        ro, ri = 2.35e-3, 1.7e-3
        self.assertAlmostEqual(self.tube.area, np.pi * (ro ** 2 - ri ** 2), places=15)
        self.assertAlmostEqual(self.tube.bending_stiffness, 4.10e9 * np.pi * (ro ** 4 - ri ** 4) / 4.0, places=12)
        self.assertAlmostEqual(self.tube.j_zz, 2.0 * self.tube.i_xx)
        curved = make_tube(precurvature_radius=0.0564)
        self.assertAlmostEqual(np.linalg.norm(curved.u0), 1.0 / 0.0564)

    def test_invalid_tube(self):
        """
        Testa a rejeição de parâmetros não positivos.
        """
        with self.assertRaises(ConfigError) as context:
            make_tube(youngs_modulus=0.0)
        self.assertEqual(context.exception.key, "tube.youngs_modulus")
        with self.assertRaises(ConfigError):
            make_tube(inner_diameter=5e-3)

    def test_straight_tendon_applies_no_distributed_force(self):
        """
        Testa f_t = 0 para um tendão reto.
        """
        force, torque = tendon_distributed_load(E3, np.zeros(3), 0.5 * self.tube.diameter * E1, 10.0)
        np.testing.assert_allclose(force, np.zeros(3))
        np.testing.assert_allclose(torque, np.zeros(3))

    def test_degenerate_tendon_tangent(self):
        """
        Testa a rejeição de uma tangente do tendão degenerada.
        """
        with self.assertRaises(DegenerateTangentError):
            tendon_distributed_load(np.zeros(3), E1, E1, 1.0)


class TestCosseratSolver(unittest.TestCase):
    """
    Testes para o método de shooting.
    """

    def setUp(self):
        """
        Configura o ambiente de teste.
        """
        self.tube = make_tube()
        self.solver = CosseratSolver(self.tube, steps=100)

    def test_unloaded_tube_is_straight(self):
        """
        Testa o tubo reto sem tensão nem gravidade.
        """
        # Executa o método a ser testado
        shape = self.solver.solve(0.0)

        # Verifica os resultados
        self.assertIsInstance(shape, RodShape)
        np.testing.assert_allclose(shape.tip.position, self.tube.length * E3, atol=1e-12)
        np.testing.assert_allclose(shape.tip.rotation, np.eye(3), atol=1e-12)
        self.assertEqual(shape.iterations, 0)
        self.assertEqual(shape.positions.shape, (101, 3))

    def test_tip_moment_gives_circular_arc(self):
        """
        Testa o arco de curvatura M/EI sob momento puro na ponta.
        """
        params = CCParams(self.tube.length, self.tube.bending_stiffness, self.tube.diameter, 10, 3.175e-3)
        for degrees in (30.0, 90.0):
            kappa = np.deg2rad(degrees) / self.tube.length
            moment = kappa * self.tube.bending_stiffness

            # Executa o método a ser testado
            shape = self.solver.solve(0.0, tip_wrench=(np.zeros(3), moment * E2))

            # Verifica os resultados
            expected = forward_tube_cc(params, 0.0, kappa).position
            self.assertLess(np.linalg.norm(shape.tip.position - expected), 1e-3 * self.tube.length)
            self.assertLess(rotation_error(shape.rotations), 1e-10)

    def test_tendon_bends_toward_tendon_side(self):
        """
        Testa a flexão no plano do tendão com curvatura próxima de F d_t/(2 EI).
        """
        tension = 14.0
        shape = self.solver.solve(tension)
        kappa = curvature_for_tension(tension, self.tube.bending_stiffness, self.tube.diameter)
        params = CCParams(self.tube.length, self.tube.bending_stiffness, self.tube.diameter, 10, 3.175e-3)
        expected = forward_tube_cc(params, 0.0, kappa).position

        self.assertGreater(shape.tip.position[0], 0.0)
        self.assertLess(abs(shape.tip.position[1]), 1e-9)
        self.assertAlmostEqual(shape.tip.position[0] / expected[0], 1.0, delta=0.02)
        self.assertLess(shape.residual, self.solver.tol)

    def test_force_balance(self):
        """
        Testa a reação na base contra a soma das cargas aplicadas.
        """
        tip_force = 0.05 * E2
        loads = [PointLoad(0.06, np.array([0.0, -0.02, 0.0])), PointLoad(0.09, np.array([0.01, 0.0, 0.0]))]
        shape = self.solver.solve(5.0, gravity=GRAVITY, point_loads=loads, tip_force=tip_force)
        residual = force_balance_residual(shape, self.tube, GRAVITY, point_loads=loads, tip_force=tip_force)
        self.assertLess(np.linalg.norm(residual), 1e-5)

    def test_warm_start_reuses_jacobian(self):
        """
        Testa a partida a quente com o Jacobiano anterior: mesma forma que a partida a frio.
        """
        loads = [PointLoad(0.09, np.array([0.0, -0.02, 0.0]))]
        first = self.solver.solve(5.0, gravity=GRAVITY, point_loads=loads)
        self.assertIsNotNone(self.solver.jacobian)
        self.assertEqual(self.solver.jacobian.shape, (6, 6))

        moved = [PointLoad(0.09, np.array([0.0, -0.025, 0.005]))]
        guess = np.concatenate([first.forces[0], first.moments[0]])
        warm = self.solver.solve(5.0, gravity=GRAVITY, point_loads=moved, initial_guess=guess,
                                 reuse_jacobian=True)
        cold = CosseratSolver(self.tube, steps=100).solve(5.0, gravity=GRAVITY, point_loads=moved)

        self.assertLess(warm.residual, self.solver.tol)
        np.testing.assert_allclose(warm.tip.position, cold.tip.position, atol=1e-6 * self.tube.length)

    def test_gravity_sags_unactuated_tube(self):
        """
        Testa a deflexão do tubo sem tensão no sentido da gravidade.
        """
        shape = self.solver.solve(0.0, gravity=GRAVITY)
        self.assertLess(shape.tip.position[0], 0.0)

    def test_roll_rotates_bending_plane(self):
        """
        Testa a rolagem da base: o plano de flexão gira com ela.
        """
        rolled = CosseratSolver(self.tube.with_base(Pose.identity().rolled(np.pi / 2.0)), steps=100)
        shape = rolled.solve(14.0)
        reference = self.solver.solve(14.0)
        np.testing.assert_allclose(shape.tip.position[[1, 0, 2]] * [1.0, -1.0, 1.0],
                                   reference.tip.position, atol=1e-8)

    def test_convergence_error_carries_last_iterate(self):
        """
        Testa RodConvergenceError ao esgotar as iterações.
        """
        solver = CosseratSolver(self.tube, steps=50, tol=1e-30, max_iter=1)
        with self.assertRaises(RodConvergenceError) as context:
            solver.solve(10.0, gravity=GRAVITY)
        self.assertEqual(context.exception.iterations, 1)
        self.assertIsInstance(context.exception.result, RodShape)

    def test_negative_tension(self):
        """
        Testa a rejeição de tensão negativa.
        """
        with self.assertRaises(ConfigError):
            self.solver.solve(-1.0)

    def test_too_few_steps(self):
        """
        Testa a rejeição de uma grade com menos de 16 passos.
        """
        with self.assertRaises(ConfigError):
            CosseratSolver(self.tube, steps=8).solve(0.0)

    def test_sweep_tension_is_monotonic(self):
        """
        Testa a deflexão crescente com a tensão numa varredura com partida a quente.
        """
        shapes = self.solver.sweep_tension([0.0, 5.0, 10.0, 20.0])
        deflections = [shape.tip.position[0] for shape in shapes]
        self.assertEqual(len(shapes), 4)
        self.assertTrue(all(a < b for a, b in zip(deflections, deflections[1:])))

    def test_functional_shortcut(self):
        """
        Testa solve_bvp_shooting contra o solver.
        """
        shape = solve_bvp_shooting(self.tube, 8.0, steps=100)
        np.testing.assert_allclose(shape.tip.position, self.solver.solve(8.0).tip.position, atol=1e-12)

    def test_integration_from_solved_base_reproduces_shape(self):
        """
        Testa integrate_rod a partir das cargas de base convergidas.
        """
        shape = self.solver.solve(10.0)
        initial = RodState.at_base(self.tube, shape.forces[0], shape.moments[0])
        again = integrate_rod(initial, 10.0, self.tube, steps=100)
        np.testing.assert_allclose(again.positions, shape.positions, atol=1e-14)

    def test_interpolation(self):
        """
        Testa spline e Slerp da forma nos nós e entre eles.
        """
        shape = self.solver.solve(10.0)
        np.testing.assert_allclose(shape.position_at(shape.s[37]), shape.positions[37], atol=1e-15)
        np.testing.assert_allclose(shape.rotation_at(shape.s[37]), shape.rotations[37], atol=1e-12)
        self.assertLess(rotation_error(shape.rotation_at(0.0503)), 1e-12)

    def test_tendon_load_profile_shape(self):
        """
        Testa as dimensões do carregamento do tendão ao longo da forma.
        """
        shape = self.solver.solve(10.0)
        f_t, tau_t = tendon_load_profile(shape, self.tube)
        self.assertEqual(f_t.shape, (101, 3))
        self.assertEqual(tau_t.shape, (101, 3))

    def test_precurved_tube_bends_without_tension(self):
        """
        Testa que a pré-curvatura deflete o tubo sem carga.
        """
        tube = replace(self.tube, u0=np.array([0.0, 1.0 / 0.0564, 0.0]))
        shape = CosseratSolver(tube, steps=100).solve(0.0)
        self.assertGreater(shape.tip.position[0], 0.01)


if __name__ == '__main__':
    unittest.main()
