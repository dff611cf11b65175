"""
Configuração do logging da aplicação.
"""

import logging
import sys
from pathlib import Path
from typing import Optional, Union

import config
from utils.file_handler import ensure_dir


LOG_FORMAT = "%(asctime)s %(levelname)s [%(name)s] %(message)s"

_configured = False


def setup_logging(level: Optional[str] = None, log_file: Optional[Union[str, Path]] = None) -> None:
    """
    Configura o logger raiz uma única vez.

    Args:
        level: Nível de log (padrão: config.LOG_LEVEL)
        log_file: Arquivo de log adicional (padrão: config.LOG_FILE se LOG_TO_FILE)
    """
    global _configured
    if _configured:
        return

    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file is None and config.LOG_TO_FILE:
        log_file = config.LOG_FILE
    if log_file is not None:
        ensure_dir(Path(log_file).parent)
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))

    logging.basicConfig(
        level=(level or config.LOG_LEVEL).upper(),
        format=LOG_FORMAT,
        handlers=handlers,
    )
    _configured = True
