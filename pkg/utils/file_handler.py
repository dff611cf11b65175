"""
Utilitários para manipulação de arquivos.
"""

import json
import logging
import shutil
from pathlib import Path
from typing import Any, Dict, Optional, Union

import pandas as pd
import yaml

from models.errors import ConfigError

logger = logging.getLogger(__name__)

SHAPE_SCHEMA = "# hybridkin-shape v1"
WORKSPACE_SCHEMA = "# hybridkin-workspace v1"
FLOAT_FORMAT = "%.12e"


def ensure_dir(directory: Union[str, Path]) -> Path:
    """
    Garante que o diretório existe, criando-o se necessário.

    Args:
        directory: Caminho do diretório

    Returns:
        Objeto Path do diretório
    """
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    return path


def read_json(file_path: Union[str, Path]) -> Dict[str, Any]:
    """
    Lê um arquivo JSON.

    Args:
        file_path: Caminho do arquivo

    Returns:
        Dicionário com o conteúdo do arquivo

    Raises:
        ConfigError: Se o arquivo não existe ou não é um JSON válido
    """
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError:
        raise ConfigError(str(file_path), "arquivo não encontrado")
    except json.JSONDecodeError as e:
        raise ConfigError(str(file_path), f"JSON inválido na linha {e.lineno}: {e.msg}")


def read_config_document(file_path: Union[str, Path]) -> Dict[str, Any]:
    """
    Lê um documento de configuração JSON ou YAML (pela extensão).

    Args:
        file_path: Caminho do arquivo

    Returns:
        Dicionário com o conteúdo do documento
    """
    file_path = Path(file_path)
    if file_path.suffix.lower() not in (".yaml", ".yml"):
        data = read_json(file_path)
    else:
        try:
            with open(file_path, 'r', encoding='utf-8') as f:
                data = yaml.safe_load(f)
        except FileNotFoundError:
            raise ConfigError(str(file_path), "arquivo não encontrado")
        except yaml.YAMLError as e:
            raise ConfigError(str(file_path), f"YAML inválido: {e}")
    if not isinstance(data, dict):
        raise ConfigError(str(file_path), "o documento deve ser um objeto")
    return data


def write_json(data: Dict[str, Any], file_path: Union[str, Path], backup: bool = False) -> Path:
    """
    Escreve dados em um arquivo JSON.

    Args:
        data: Dados a serem escritos
        file_path: Caminho do arquivo
        backup: Se True, cria um backup do arquivo existente

    Returns:
        Caminho do arquivo escrito
    """
    file_path = Path(file_path)

    # Cria o diretório se não existir
    ensure_dir(file_path.parent)

    # Cria backup se solicitado e o arquivo existir
    if backup and file_path.exists():
        backup_path = file_path.with_suffix(f"{file_path.suffix}.bak")
        shutil.copy2(file_path, backup_path)

    with open(file_path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(data, f, ensure_ascii=False, indent=2)
        f.write("\n")
    logger.debug("JSON escrito em %s", file_path)
    return file_path


def write_table_csv(frame: pd.DataFrame, file_path: Union[str, Path], schema: Optional[str] = None) -> Path:
    """
    Escreve uma tabela em CSV com formato de ponto flutuante fixo.

    Args:
        frame: Tabela a ser escrita
        file_path: Caminho do arquivo
        schema: Linha de comentário inicial com a versão do esquema

    Returns:
        Caminho do arquivo escrito
    """
    file_path = Path(file_path)
    ensure_dir(file_path.parent)
    with open(file_path, 'w', encoding='utf-8', newline='') as f:
        if schema:
            f.write(schema + "\n")
        frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug("CSV com %d linhas escrito em %s", len(frame), file_path)
    return file_path


def write_shape_csv(frame: pd.DataFrame, file_path: Union[str, Path]) -> Path:
    """Escreve a tabela da forma do robô (tubo + esferas)."""
    return write_table_csv(frame, file_path, SHAPE_SCHEMA)


def write_workspace_csv(frame: pd.DataFrame, file_path: Union[str, Path]) -> Path:
    """Escreve a tabela do espaço de trabalho."""
    return write_table_csv(frame, file_path, WORKSPACE_SCHEMA)


def read_table_csv(file_path: Union[str, Path]) -> pd.DataFrame:
    """Lê uma tabela escrita por write_table_csv, ignorando a linha de esquema."""
    return pd.read_csv(file_path, comment="#")


def diagnostics_path_for(csv_path: Union[str, Path]) -> Path:
    """
    Caminho do arquivo de diagnóstico ao lado do CSV: <nome>.diagnostics.json.
    """
    csv_path = Path(csv_path)
    return csv_path.with_name(f"{csv_path.stem}.diagnostics.json")
