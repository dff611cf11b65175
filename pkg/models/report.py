"""
Modelo para representar o relatório da suíte de verificação.
"""

from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional


@dataclass
class CheckResult:
    """
    Resultado de uma verificação.

    Attributes:
        name: Identificador da verificação
        passed: Se a verificação passou
        value: Maior erro observado
        tolerance: Limite aceito para value
        detail: Descrição curta do que foi medido
        elapsed: Tempo gasto (s)
    """

    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""
    elapsed: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "tolerance": self.tolerance,
            "detail": self.detail,
            "elapsed": self.elapsed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'CheckResult':
        return cls(
            name=data["name"],
            passed=bool(data["passed"]),
            value=float(data["value"]),
            tolerance=float(data["tolerance"]),
            detail=data.get("detail", ""),
            elapsed=float(data.get("elapsed", 0.0)),
        )


@dataclass
class VerificationReport:
    """
    Conjunto de verificações executadas contra uma configuração.
    """

    checks: List[CheckResult] = field(default_factory=list)
    config_path: Optional[str] = None
    creation_date: str = field(default_factory=lambda: datetime.now().isoformat())

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def add(self, check: CheckResult) -> None:
        self.checks.append(check)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "config_path": self.config_path,
            "creation_date": self.creation_date,
            "checks": [check.to_dict() for check in self.checks],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'VerificationReport':
        report = cls(
            checks=[CheckResult.from_dict(item) for item in data.get("checks", [])],
            config_path=data.get("config_path"),
        )
        report.creation_date = data.get("creation_date", report.creation_date)
        return report

    def to_markdown_table(self) -> str:
        """
        Converte o relatório para uma tabela Markdown.

        Returns:
            String em formato Markdown
        """
        md = "| Verificação | Resultado | Erro | Tolerância | Tempo (s) | Detalhe |\n"
        md += "|---|---|---|---|---|---|\n"
        for check in self.checks:
            status = "OK" if check.passed else "FALHOU"
            md += (f"| {check.name} | {status} | {check.value:.3e} | {check.tolerance:.1e} "
                   f"| {check.elapsed:.2f} | {check.detail} |\n")
        total = len(self.checks)
        md += f"\n{total - len(self.failures)}/{total} verificações passaram.\n"
        return md
