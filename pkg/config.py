"""
Configurações do hybridkin.

Todas as configurações são opcionais e podem ser sobrescritas por
variáveis de ambiente (ou por um arquivo .env na raiz do projeto).
"""

import os
from pathlib import Path

from dotenv import load_dotenv


load_dotenv()


def _env_float(name: str, default: float) -> float:
    return float(os.environ.get(name, default))


def _env_int(name: str, default: int) -> int:
    return int(os.environ.get(name, default))


# Diretórios
BASE_DIR = Path(__file__).resolve().parent
DATA_DIR = BASE_DIR / "data"
OUTPUT_DIR = Path(os.environ.get("OUTPUT_DIR", DATA_DIR / "output"))
TEMPLATES_DIR = BASE_DIR / "templates"

# Documentos padrão
DEFAULT_ROBOT_CONFIG = TEMPLATES_DIR / "robot_default.json"
DEFAULT_MAGNET_CONFIG = TEMPLATES_DIR / "magnet_dipole.json"

# Configurações do servidor
HOST = os.environ.get("HOST", "0.0.0.0")
PORT = int(os.environ.get("PORT", 5000))
DEBUG = os.environ.get("DEBUG", "False").lower() == "true"

# Configurações de logging
LOG_LEVEL = os.environ.get("LOG_LEVEL", "INFO")
LOG_TO_FILE = os.environ.get("LOG_TO_FILE", "False").lower() == "true"
LOG_FILE = BASE_DIR / "logs" / "hybridkin.log"

# Solver do tubo (shooting)
ROD_STEPS = _env_int("ROD_STEPS", 200)
ROD_TOLERANCE = _env_float("ROD_TOLERANCE", 1e-8)
ROD_MAX_ITER = _env_int("ROD_MAX_ITER", 100)
ROD_FD_STEP = _env_float("ROD_FD_STEP", 1e-6)

# Minimização da corrente
CHAIN_TOLERANCE = _env_float("CHAIN_TOLERANCE", 1e-8)
CHAIN_MAX_ITER = _env_int("CHAIN_MAX_ITER", 2000)

# Iteração acoplada
COUPLING_TOLERANCE = _env_float("COUPLING_TOLERANCE", 1e-4)
COUPLING_MAX_OUTER = _env_int("COUPLING_MAX_OUTER", 20)
COUPLING_DAMPING = _env_float("COUPLING_DAMPING", 0.5)

# Aceleração da gravidade padrão (m/s²); o tendão aponta para +x
STANDARD_GRAVITY = 9.81
