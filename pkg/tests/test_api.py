"""
Testes para a API REST.
"""

import sys
import os
import json
import unittest
from unittest.mock import patch, MagicMock

# Adiciona o diretório raiz ao path para importar os módulos
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import app
from models.errors import CouplingConvergenceError, RodTooShortError
from models.robot_config import RobotConfig
from solvers.robot_service import RobotService


class TestAPI(unittest.TestCase):
    """
    Testes para a API REST.
    """

    def setUp(self):
        """
        Configura o ambiente de teste.
        """
        app.app.testing = True
        self.client = app.app.test_client()
        self.service = RobotService(RobotConfig.default())
        app.service = self.service

    def test_health_check(self):
        """
        Testa o endpoint de verificação de saúde.
        """
        response = self.client.get('/health')
        data = json.loads(response.data)

        self.assertEqual(response.status_code, 200)
        self.assertEqual(data["status"], "ok")

    def test_forward(self):
        """
        Testa o endpoint da cinemática direta.
        """
        # Executa a requisição
        response = self.client.post('/forward', json={"kappa": 0.0, "extended": 2})
        result = json.loads(response.data)

        # Verifica os resultados
        self.assertEqual(response.status_code, 200)
        self.assertEqual(result["n_extended"], 2)
        self.assertAlmostEqual(result["tip"][2], 0.1016 + 2 * 3.175e-3, places=12)

    def test_forward_rejects_tension_and_kappa(self):
        """
        Testa o erro 400 com a chave ofensiva.
        """
        response = self.client.post('/forward', json={"kappa": 1.0, "tension": 2.0})
        result = json.loads(response.data)

        self.assertEqual(response.status_code, 400)
        self.assertEqual(result["key"], "kappa")

    def test_inverse(self):
        """
        Testa o endpoint da cinemática inversa com vetores em lista e em texto.
        """
        response = self.client.post('/inverse', json={"target": [0.0, 0.0, 0.11], "direction": "0,0,1"})
        result = json.loads(response.data)

        self.assertEqual(response.status_code, 200)
        self.assertEqual(result["tension"], 0.0)
        self.assertIsNone(result["rho"])

    def test_inverse_infeasible(self):
        """
        Testa o relatório de viabilidade no erro 400.
        """
        response = self.client.post('/inverse', json={"target": [0.2, 0.0, 0.1], "direction": [1.0, 0.0, 0.0]})
        result = json.loads(response.data)

        self.assertEqual(response.status_code, 400)
        self.assertFalse(result["report"]["feasible"])
        self.assertEqual(result["report"]["reason"], "radial reach exceeded")

    def test_inverse_missing_target(self):
        """
        Testa o campo obrigatório ausente.
        """
        response = self.client.post('/inverse', json={"direction": [0.0, 0.0, 1.0]})
        result = json.loads(response.data)

        self.assertEqual(response.status_code, 400)
        self.assertEqual(result["key"], "target")

    def test_workspace(self):
        """
        Testa o endpoint do espaço de trabalho.
        """
        response = self.client.post('/workspace', json={"samples": 4, "r_max": 0.05})
        result = json.loads(response.data)

        self.assertEqual(response.status_code, 200)
        self.assertEqual(len(result["entries"]), 4)
        self.assertEqual(result["entries"][-1]["r"], 0.05)
        self.assertEqual(result["entries"][-1]["region"], "dexterous")

    def test_workspace_invalid_samples(self):
        """
        Testa samples não inteiro.
        """
        response = self.client.post('/workspace', json={"samples": "muitos"})
        self.assertEqual(response.status_code, 400)

    def test_solve(self):
        """
        Testa o endpoint de solução com o solver simulado.
        """
        shape = MagicMock()
        shape.rod.to_dict.return_value = {"tip": [0.0, 0.0, 0.1]}
        with patch.object(self.service, 'solve', return_value=shape) as solve_mock, \
                patch.object(self.service, 'solve_report', return_value={"converged": True}):
            response = self.client.post('/solve', json={"tension": 5.0, "coupled": False,
                                                        "magnet": {"kind": "uniform", "field": [0.0, 0.03, 0.0]}})
        result = json.loads(response.data)

        self.assertEqual(response.status_code, 200)
        self.assertTrue(result["converged"])
        self.assertEqual(result["rod"], {"tip": [0.0, 0.0, 0.1]})
        _, actuation = solve_mock.call_args.args
        self.assertEqual(actuation.tension, 5.0)
        self.assertFalse(solve_mock.call_args.kwargs["coupled"])

    def test_solve_convergence_failure(self):
        """
        Testa o erro 500 com o diagnóstico de falha.
        """
        error = CouplingConvergenceError("Iteração acoplada não convergiu", 20, 0.1)
        with patch.object(self.service, 'solve', side_effect=error):
            response = self.client.post('/solve', json={"tension": 5.0})
        result = json.loads(response.data)

        self.assertEqual(response.status_code, 500)
        self.assertFalse(result["diagnostics"]["converged"])
        self.assertEqual(result["diagnostics"]["error_type"], "CouplingConvergenceError")

    def test_solve_invalid_config(self):
        """
        Testa um documento de configuração com chave desconhecida.
        """
        response = self.client.post('/solve', json={"config": {"tube": {}, "wheels": 4}})
        result = json.loads(response.data)

        self.assertEqual(response.status_code, 400)
        self.assertEqual(result["key"], "wheels")

    def test_solve_rejected_geometry(self):
        """
        Testa o erro 400 quando o modelo rejeita a geometria do tubo.
        """
        with patch.object(self.service, 'solve', side_effect=RodTooShortError("Tubo não comporta as esferas")):
            response = self.client.post('/solve', json={"tension": 5.0})
        result = json.loads(response.data)

        self.assertEqual(response.status_code, 400)
        self.assertEqual(result["error_type"], "RodTooShortError")


if __name__ == '__main__':
    unittest.main()
