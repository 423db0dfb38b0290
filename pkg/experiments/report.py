"""
Experiment reports: pass/fail criteria, measurement tables and their files.

Every criterion keeps the numeric comparison that decided it. Reports are
written as report.txt (human summary), criteria.csv, measurements.csv, one
CSV per table, and report.xlsx when openpyxl is installed.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import pandas as pd

from utils import ensure_dir, sanitize_filename

try:
    from openpyxl.styles import Alignment, Font, PatternFill
    OPENPYXL_AVAILABLE = True
except ImportError:
    OPENPYXL_AVAILABLE = False

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


# ============================================================================
# CRITERIA
# ============================================================================

@dataclass
class Criterion:
    name: str
    passed: bool
    measured: float
    target: str
    detail: str

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"


def at_most(name: str, value: float, bound: float) -> Criterion:
    ok = math.isfinite(value) and value <= bound
    return Criterion(name, bool(ok), float(value), f"<= {bound:g}",
                     f"{value:.6g} {'<=' if ok else '>'} {bound:g}")


def at_least(name: str, value: float, bound: float) -> Criterion:
    ok = math.isfinite(value) and value >= bound
    return Criterion(name, bool(ok), float(value), f">= {bound:g}",
                     f"{value:.6g} {'>=' if ok else '<'} {bound:g}")


def within(name: str, value: float, expected: float, rel: float) -> Criterion:
    """|value - expected| <= rel |expected|."""
    gap = abs(value - expected)
    allowed = rel * abs(expected)
    ok = math.isfinite(value) and gap <= allowed
    return Criterion(name, bool(ok), float(value), f"{expected:.6g} +/- {100 * rel:g}%",
                     f"|{value:.6g} - {expected:.6g}| = {gap:.3g} {'<=' if ok else '>'} {allowed:.3g}")


def close_to(name: str, value: float, expected: float, tol: float) -> Criterion:
    """|value - expected| <= tol."""
    gap = abs(value - expected)
    ok = math.isfinite(value) and gap <= tol
    return Criterion(name, bool(ok), float(value), f"{expected:.6g} +/- {tol:g}",
                     f"|{value:.6g} - {expected:.6g}| = {gap:.3g} {'<=' if ok else '>'} {tol:g}")


def holds(name: str, flag: bool, detail: str, measured: float = float("nan")) -> Criterion:
    return Criterion(name, bool(flag), float(measured), "true", detail)


# ============================================================================
# REPORT
# ============================================================================

@dataclass
class ExperimentReport:
    name: str
    claim: str = ""
    criteria: List[Criterion] = field(default_factory=list)
    measurements: Dict[str, float] = field(default_factory=dict)
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    config_text: str = ""
    code_version: str = ""
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.criteria) and all(c.passed for c in self.criteria)

    def add(self, criterion: Criterion) -> Criterion:
        self.criteria.append(criterion)
        level = logging.INFO if criterion.passed else logging.WARNING
        logger.log(level, f"[REPORT] [{'OK' if criterion.passed else 'FAIL'}] {self.name}/{criterion.name}: "
                          f"{criterion.detail}")
        return criterion

    def measure(self, name: str, value: float):
        self.measurements[name] = float(value)

    def table(self, name: str, frame: pd.DataFrame):
        self.tables[name] = frame.reset_index(drop=True)

    def note(self, text: str):
        self.notes.append(text)

    def criteria_frame(self) -> pd.DataFrame:
        return pd.DataFrame([{"criterion": c.name, "status": c.status, "measured": c.measured,
                              "target": c.target, "comparison": c.detail} for c in self.criteria],
                            columns=["criterion", "status", "measured", "target", "comparison"])

    def measurements_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"quantity": list(self.measurements),
                             "value": list(self.measurements.values())})

    def summary(self) -> str:
        lines = ["=" * 70, f"EXPERIMENT {self.name}", "=" * 70]
        if self.claim:
            lines.append(f"Claim: {self.claim}")
        lines.append(f"Verdict: {'PASS' if self.passed else 'FAIL'}  "
                     f"({sum(c.passed for c in self.criteria)}/{len(self.criteria)} criteria)")
        lines.append("")
        for c in self.criteria:
            lines.append(f"  [{c.status}] {c.name:<32} {c.detail}")
        if self.measurements:
            lines.append("")
            lines.append("Measurements:")
            for key, value in self.measurements.items():
                lines.append(f"  {key:<34} {value:.10g}")
        if self.notes:
            lines.append("")
            lines.extend(f"Note: {n}" for n in self.notes)
        return "\n".join(lines)


# ============================================================================
# FILES
# ============================================================================

def _apply_formatting(sheet, headers):
    """Header styling and column widths."""
    header_fill = PatternFill(start_color="4472C4", end_color="4472C4", fill_type="solid")
    header_font = Font(bold=True, color="FFFFFF")
    for col_num, _ in enumerate(headers, 1):
        cell = sheet.cell(row=1, column=col_num)
        cell.fill = header_fill
        cell.font = header_font
        cell.alignment = Alignment(horizontal="center", vertical="center")
    for column in sheet.columns:
        width = max(len(str(cell.value)) for cell in column if cell.value is not None) if column else 8
        sheet.column_dimensions[column[0].column_letter].width = min(width + 2, 50)


def _sheet_title(name: str, used: set) -> str:
    title = sanitize_filename(name)[:31] or "table"
    base, k = title, 1
    while title in used:
        suffix = f"_{k}"
        title = base[:31 - len(suffix)] + suffix
        k += 1
    used.add(title)
    return title


def write_excel(report: ExperimentReport, path: Union[str, Path]) -> Optional[Path]:
    """Formatted workbook with the same sheets as the CSV files; None without openpyxl."""
    if not OPENPYXL_AVAILABLE:
        logger.info("[REPORT] openpyxl not installed; skipping report.xlsx")
        return None
    path = Path(path)
    sheets = {"Criteria": report.criteria_frame(), "Measurements": report.measurements_frame()}
    sheets.update(report.tables)
    used: set = set()
    with pd.ExcelWriter(path, engine="openpyxl") as writer:
        for name, frame in sheets.items():
            title = _sheet_title(name, used)
            frame.to_excel(writer, sheet_name=title, index=False)
            _apply_formatting(writer.sheets[title], frame.columns)
    return path


def write_report(report: ExperimentReport, directory: Union[str, Path]) -> List[Path]:
    """
    Write the report files into `directory`.

    CSV files hold only deterministic content (no timings), so the same
    config and seed reproduce them byte for byte.
    """
    directory = ensure_dir(directory)
    written = []

    text = report.summary()
    text += f"\n\nWall time: {report.wall_time:.2f} s\nCode version: {report.code_version}\n"
    if report.config_text:
        text += "\nConfig:\n" + report.config_text
    path = directory / "report.txt"
    path.write_text(text, encoding="utf-8")
    written.append(path)

    for name, frame in (("criteria", report.criteria_frame()),
                        ("measurements", report.measurements_frame())):
        path = directory / f"{name}.csv"
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
        written.append(path)
    for name, frame in report.tables.items():
        path = directory / f"{sanitize_filename(name)}.csv"
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
        written.append(path)

    xlsx = write_excel(report, directory / "report.xlsx")
    if xlsx is not None:
        written.append(xlsx)
    logger.info(f"[REPORT] [OK] {report.name}: {len(written)} file(s) in {directory}")
    return written
