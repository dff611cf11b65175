"""
Testes para a interface de linha de comando (cli.py).
"""

import sys
import os
import json
import tempfile
import unittest
from pathlib import Path
from unittest.mock import MagicMock, patch

import pandas as pd

# Adiciona o diretório raiz ao path para importar os módulos
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import cli
import config
from models.errors import CouplingConvergenceError, RodTooShortError, SingularityError
from models.report import CheckResult, VerificationReport
from utils.file_handler import WORKSPACE_SCHEMA, read_json, read_table_csv


class TestCLI(unittest.TestCase):
    """
    Testes para os comandos e os códigos de saída.
    """

    def setUp(self):
        """
        Configura o ambiente de teste.
        """
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.config = str(config.DEFAULT_ROBOT_CONFIG)

    def tearDown(self):
        """
        Remove o diretório temporário.
        """
        self.tmp.cleanup()

    def test_workspace_writes_csv_with_schema(self):
        """
        Testa a tabela do espaço de trabalho com a linha de esquema.
        """
        out = self.dir / "ws.csv"

        # Executa o método a ser testado
        code = cli.main(["workspace", self.config, "--samples", "5", "--out", str(out)])

        # Verifica os resultados
        self.assertEqual(code, cli.EXIT_OK)
        with open(out, 'r', encoding='utf-8') as f:
            self.assertEqual(f.readline().strip(), WORKSPACE_SCHEMA)
        table = read_table_csv(out)
        self.assertEqual(list(table.columns), ["r", "alpha_max", "beta_max", "region"])
        self.assertEqual(len(table), 5)
        self.assertEqual(table["r"][0], 0.0)

    def test_inverse_infeasible_exit_code(self):
        """
        Testa o código 3 e o relatório de viabilidade para um alvo fora de alcance.
        """
        out = self.dir / "ik.json"
        code = cli.main(["inverse", self.config, "--target", "0.2,0,0.1", "--direction", "1,0,0",
                         "--out", str(out)])
        self.assertEqual(code, cli.EXIT_INFEASIBLE)
        report = read_json(out)
        self.assertFalse(report["feasible"])
        self.assertEqual(report["reason"], "radial reach exceeded")

    def test_inverse_then_forward(self):
        """
        Testa a solução da inversa lida de volta pela direta.
        """
        ik_out, fk_out = self.dir / "ik.json", self.dir / "fk.json"
        code = cli.main(["inverse", self.config, "--target", "0,0,0.11", "--direction", "0,0,2",
                         "--out", str(ik_out)])
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(read_json(ik_out)["tension"], 0.0)

        code = cli.main(["forward", self.config, "--from-ik", str(ik_out), "--out", str(fk_out)])
        self.assertEqual(code, cli.EXIT_OK)
        tip = read_json(fk_out)["tip"]
        self.assertAlmostEqual(tip[2], 0.11, places=12)

    def test_forward_straight_tube(self):
        """
        Testa a direta com curvatura nula: a corrente segue o eixo.
        """
        out = self.dir / "fk.json"
        code = cli.main(["forward", self.config, "--kappa", "0", "--out", str(out)])
        self.assertEqual(code, cli.EXIT_OK)
        result = read_json(out)
        self.assertEqual(result["n_extended"], 4)
        self.assertAlmostEqual(result["tip"][2], 0.1016 + 4 * 3.175e-3, places=12)

    def test_config_errors(self):
        """
        Testa o código 1 para arquivo ausente, argumentos inválidos e opções exclusivas.
        """
        cases = [
            ["workspace", str(self.dir / "missing.json"), "--samples", "5", "--out", str(self.dir / "x.csv")],
            ["inverse", self.config, "--target", "0,0", "--direction", "0,0,1"],
            ["solve", self.config, "--tension", "1", "--load-kg", "0.1", "--out", str(self.dir / "s.csv")],
            ["workspace", self.config, "--samples", "1", "--out", str(self.dir / "x.csv")],
            [],
        ]
        for argv in cases:
            with self.subTest(argv=argv):
                self.assertEqual(cli.main(argv), cli.EXIT_CONFIG)

    def test_solve_writes_shape_and_diagnostics(self):
        """
        Testa o CSV da forma e o diagnóstico ao lado dele.
        """
        service = MagicMock()
        service.solve_report.return_value = {"converged": True}
        out = self.dir / "shape.csv"
        frame = pd.DataFrame({"kind": ["rod"], "index": [0], "x": [0.0]})

        with patch('cli.shape_table', return_value=frame):
            code = cli.main(["solve", self.config, "--tension", "5", "--decoupled", "--out", str(out)],
                            service=service)

        self.assertEqual(code, cli.EXIT_OK)
        self.assertTrue(out.exists())
        self.assertEqual(read_json(self.dir / "shape.diagnostics.json"), {"converged": True})
        self.assertFalse(service.solve.call_args.kwargs["coupled"])
        self.assertEqual(service.actuation.call_args.kwargs["tension"], 5.0)

    def test_solve_convergence_failure(self):
        """
        Testa o código 2 e o diagnóstico de falha.
        """
        service = MagicMock()
        service.solve.side_effect = CouplingConvergenceError("Iteração acoplada não convergiu", 20, 0.1)
        service.failure_report.return_value = {"converged": False}
        out = self.dir / "shape.csv"

        code = cli.main(["solve", self.config, "--out", str(out)], service=service)

        self.assertEqual(code, cli.EXIT_CONVERGENCE)
        self.assertFalse(out.exists())
        self.assertEqual(read_json(self.dir / "shape.diagnostics.json"), {"converged": False})

    def test_check_failure_exit_code(self):
        """
        Testa o código 4 quando alguma verificação falha.
        """
        service = MagicMock()
        report = VerificationReport()
        report.add(CheckResult("workspace_identities", True, 0.0, 1e-12))
        report.add(CheckResult("zero_coupling", False, 1e-3, 1e-9))
        service.check.return_value = report

        with patch('builtins.print'):
            code = cli.main(["check", self.config], service=service)

        self.assertEqual(code, cli.EXIT_CHECK)


    def test_solve_model_errors_exit_with_config_code(self):
        """
        Testa o código 1 quando o modelo rejeita a geometria ou encontra uma singularidade.
        """
        for error in (RodTooShortError("Tubo não comporta as esferas internas"),
                      SingularityError("Campo avaliado sobre o próprio dipolo")):
            with self.subTest(error=type(error).__name__):
                service = MagicMock()
                service.solve.side_effect = error
                code = cli.main(["solve", self.config, "--out", str(self.dir / "s.csv")], service=service)
                self.assertEqual(code, cli.EXIT_CONFIG)

    def test_solve_short_tube_exit_code(self):
        """
        Testa o código 1 com um tubo curto demais para as esferas internas.
        """
        document = read_json(self.config)
        document["tube"]["length"] = 0.01
        short = self.dir / "short.json"
        with open(short, 'w', encoding='utf-8') as f:
            json.dump(document, f)

        code = cli.main(["solve", str(short), "--tension", "0", "--decoupled", "--out", str(self.dir / "s.csv")])

        self.assertEqual(code, cli.EXIT_CONFIG)
        self.assertFalse((self.dir / "s.csv").exists())

    def test_bad_orientation_exit_code(self):
        """
        Testa o código 1 para uma orientação da base com entrada não numérica.
        """
        document = read_json(self.config)
        document["tube"]["base"]["orientation"][1][1] = "um"
        bad = self.dir / "bad.json"
        with open(bad, 'w', encoding='utf-8') as f:
            json.dump(document, f)

        code = cli.main(["workspace", str(bad), "--samples", "5", "--out", str(self.dir / "x.csv")])

        self.assertEqual(code, cli.EXIT_CONFIG)

    def test_solve_is_deterministic(self):
        """
        Testa que duas execuções de solve geram CSV e diagnóstico idênticos byte a byte.
        """
        magnet = str(config.TEMPLATES_DIR / "magnet_uniform.json")
        outputs = []
        for run in ("a", "b"):
            out = self.dir / f"shape_{run}.csv"
            code = cli.main(["solve", self.config, "--tension", "0", "--magnet", magnet, "--decoupled",
                             "--out", str(out)])
            self.assertEqual(code, cli.EXIT_OK)
            outputs.append((out.read_bytes(), (self.dir / f"shape_{run}.diagnostics.json").read_bytes()))

        self.assertEqual(outputs[0][0], outputs[1][0])
        self.assertEqual(outputs[0][1], outputs[1][1])

    def test_workspace_is_deterministic(self):
        """
        Testa que duas execuções de workspace geram o mesmo CSV byte a byte.
        """
        contents = []
        for run in ("a", "b"):
            out = self.dir / f"ws_{run}.csv"
            self.assertEqual(cli.main(["workspace", self.config, "--samples", "50", "--out", str(out)]),
                             cli.EXIT_OK)
            contents.append(out.read_bytes())

        self.assertEqual(contents[0], contents[1])


if __name__ == '__main__':
    unittest.main()
