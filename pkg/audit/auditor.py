"""
audit/auditor.py
Runs every conformance check over a workbook and collects the findings
into one deterministic report.
"""

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from audit.checks import (
    CHECKS, Finding, check_absolute_references, check_block_structure,
    check_complexity, check_copy_consistency, check_cross_references,
    check_locality, check_name_placement, check_recompute, check_tier_separation,
    read_workbook_state, sort_key,
)
from core.model import Model, Severity
from workbook.cells import Workbook

logger = logging.getLogger(__name__)

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["findings", "verdict", "summary"],
    "properties": {
        "findings": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["check", "severity", "sheet", "cell", "message"],
                "additionalProperties": False,
                "properties": {
                    "check": {"enum": sorted(CHECKS)},
                    "severity": {"enum": [s.value for s in Severity]},
                    "sheet": {"type": ["string", "null"]},
                    "cell": {"type": ["string", "null"]},
                    "message": {"type": "string"},
                },
            },
        },
        "verdict": {"enum": ["pass", "fail"]},
        "summary": {
            "type": "object",
            "propertyNames": {"enum": sorted(CHECKS)},
            "additionalProperties": {"type": "integer", "minimum": 1},
        },
    },
}


@dataclass
class AuditReport:
    findings: list = field(default_factory=list)

    @property
    def summary(self) -> dict:
        """check id -> number of findings, for the checks that found anything."""
        return dict(sorted(Counter(f.check_id for f in self.findings).items()))

    @property
    def errors(self) -> list:
        return [f for f in self.findings if f.severity is Severity.ERROR]

    @property
    def passed(self) -> bool:
        return not self.errors

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def of(self, check_id: str) -> list:
        return [f for f in self.findings if f.check_id == check_id]

    def to_dict(self) -> dict:
        return {
            "findings": [
                {
                    "check": f.check_id,
                    "severity": f.severity.value,
                    "sheet": f.sheet,
                    "cell": f.cell,
                    "message": f.message,
                }
                for f in self.findings
            ],
            "verdict": self.verdict,
            "summary": self.summary,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        """Findings grouped per sheet, then one summary line."""
        if not self.findings:
            return "No findings.\nverdict: pass"
        lines = []
        current = object()
        for f in self.findings:
            if f.sheet != current:
                current = f.sheet
                lines.append(f"[{f.sheet if f.sheet is not None else 'workbook'}]")
            where = f.cell or "-"
            lines.append(f"  {where:<7} {f.check_id} {f.severity.value:<5} {f.message}")
        counts = ", ".join(f"{check} {n}" for check, n in self.summary.items())
        lines.append(f"summary: {counts}")
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines)


def audit(wb: Workbook, model: Optional[Model] = None, strict: bool = False) -> AuditReport:
    """
    Run A1..A8 over the workbook, and A9 when the model it was built from is
    supplied. Unparseable formulas come back as A1 findings.
    """
    state = read_workbook_state(wb)
    findings = []
    findings += check_block_structure(wb, state)
    findings += check_name_placement(wb, state)
    findings += check_locality(wb, state)
    findings += check_cross_references(wb, state)
    findings += check_complexity(wb, state, strict=strict)
    findings += check_absolute_references(wb, state)
    findings += check_copy_consistency(wb, state)
    findings += check_tier_separation(wb, state)
    if model is not None:
        findings += check_recompute(wb, state, model)

    report = AuditReport(sorted(findings, key=sort_key(wb)))
    logger.info("audit: %d finding(s), verdict %s", len(report.findings), report.verdict)
    return report
