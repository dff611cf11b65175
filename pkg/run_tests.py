#!/usr/bin/env python3
"""
Script para executar todos os testes do hybridkin.

Uso: python run_tests.py [padrão]   (padrão: test_*.py, ex.: test_closedform.py)
"""

import unittest
import sys
import os

# Adiciona o diretório raiz ao path para importar os módulos
sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))


def run_tests(pattern: str = 'test_*.py') -> int:
    """
    Descobre e executa os testes de tests/.

    Args:
        pattern: Padrão dos arquivos de teste

    Returns:
        Código de saída (0 se todos passaram)
    """
    suite = unittest.TestLoader().discover('tests', pattern=pattern)
    result = unittest.TextTestRunner(verbosity=2).run(suite)
    return 0 if result.wasSuccessful() else 1


if __name__ == '__main__':
    sys.exit(run_tests(*sys.argv[1:2]))
