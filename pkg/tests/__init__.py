"""
Pacote de testes do hybridkin.
"""
