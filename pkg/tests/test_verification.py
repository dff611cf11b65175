"""
Testes para a suíte de verificação embutida (solvers/verification.py).
"""

import sys
import os
import unittest
from unittest.mock import MagicMock, patch

import numpy as np

# Adiciona o diretório raiz ao path para importar os módulos
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from models.errors import InfeasibleTargetError
from models.field import ExternalDipole
from models.hybrid import HybridDiagnostics
from models.report import CheckResult, VerificationReport
from models.robot_config import RobotConfig
from solvers.verification import (CHECKS, check_dipole_gradient, check_field_alignment, check_full_configuration,
                                 check_workspace_identities, run_verification)


def check_always_fails(robot, rng):
    raise InfeasibleTargetError("radial reach exceeded")


class TestVerification(unittest.TestCase):
    """
    Testes para run_verification e o relatório.
    """

    def setUp(self):
        """
        Configura o ambiente de teste.
        """
        self.robot = RobotConfig.default()

    def test_fast_checks_pass_on_prototype(self):
        """
        Testa as identidades do espaço de trabalho e o gradiente do dipolo no protótipo.
        """
        # Executa o método a ser testado
        report = run_verification(self.robot, checks=[check_workspace_identities, check_dipole_gradient])

        # Verifica os resultados
        self.assertTrue(report.passed, report.to_markdown_table())
        self.assertEqual([check.name for check in report.checks], ["workspace_identities", "dipole_gradient_fd"])
        self.assertTrue(report.config_path.endswith("robot_default.json"))
        self.assertIn("2/2 verificações passaram.", report.to_markdown_table())

    def test_exception_counts_as_failure(self):
        """
        Testa que uma exceção do domínio vira uma linha com falha.
        """
        report = run_verification(self.robot, checks=[check_workspace_identities, check_always_fails])
        self.assertFalse(report.passed)
        self.assertEqual(len(report.failures), 1)
        failure = report.failures[0]
        self.assertEqual(failure.name, "always_fails")
        self.assertTrue(np.isinf(failure.value))
        self.assertIn("InfeasibleTargetError", failure.detail)
        self.assertIn("| always_fails | FALHOU |", report.to_markdown_table())

    def test_seed_makes_checks_reproducible(self):
        """
        Testa o mesmo valor com a mesma semente.
        """
        first = run_verification(self.robot, checks=[check_dipole_gradient], seed=3)
        second = run_verification(self.robot, checks=[check_dipole_gradient], seed=3)
        self.assertEqual(first.checks[0].value, second.checks[0].value)

    def test_all_checks_registered(self):
        """
        Testa a lista completa de verificações.
        """
        self.assertEqual(len(CHECKS), 10)
        self.assertIn(check_workspace_identities, CHECKS)
        self.assertIn(check_field_alignment, CHECKS)
        self.assertIn(check_full_configuration, CHECKS)

    def test_field_alignment_on_prototype(self):
        """
        Testa o alinhamento com o campo dentro de 2° para 4 e 8 esferas estendidas.
        """
        result = check_field_alignment(self.robot, np.random.default_rng(0))
        self.assertTrue(result.passed, result.detail)
        self.assertLess(result.value, 2.0)

    def test_full_configuration_reports_iterations_and_time(self):
        """
        Testa o critério de convergência e de prazo da configuração completa.
        """
        shape = MagicMock()
        shape.diagnostics = HybridDiagnostics(iterations=7, load_residual=3e-5, converged=True, mode="coupled")

        with patch('solvers.verification.HybridSolver') as solver_cls, \
                patch('solvers.verification.time.perf_counter', side_effect=[0.0, 2.5]):
            solver_cls.return_value.solve_coupled.return_value = shape
            result = check_full_configuration(self.robot, np.random.default_rng(0))

        self.assertTrue(result.passed)
        self.assertEqual(result.value, 3e-5)
        self.assertIn("7 iterações externas", result.detail)
        source = solver_cls.return_value.solve_coupled.call_args.args[0].source
        self.assertIsInstance(source, ExternalDipole)

        with patch('solvers.verification.HybridSolver') as solver_cls, \
                patch('solvers.verification.time.perf_counter', side_effect=[0.0, 12.0]):
            solver_cls.return_value.solve_coupled.return_value = shape
            slow = check_full_configuration(self.robot, np.random.default_rng(0))

        self.assertFalse(slow.passed)


class TestVerificationReport(unittest.TestCase):
    """
    Testes para a classe VerificationReport.
    """

    def test_dict_round_trip(self):
        """
        Testa to_dict e from_dict.
        """
        report = VerificationReport(config_path="robot.json")
        report.add(CheckResult("a", True, 1e-13, 1e-12, "ok"))
        report.add(CheckResult("b", False, 0.5, 1e-6))

        restored = VerificationReport.from_dict(report.to_dict())

        self.assertFalse(restored.passed)
        self.assertEqual(restored.config_path, "robot.json")
        self.assertEqual(restored.creation_date, report.creation_date)
        self.assertEqual([check.name for check in restored.failures], ["b"])
        self.assertIn("1/2 verificações passaram.", restored.to_markdown_table())


if __name__ == '__main__':
    unittest.main()
