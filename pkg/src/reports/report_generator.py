"""
Writes comparison results as CSV, JSON and Excel files.
"""

import logging
from datetime import datetime
from pathlib import Path
from typing import Dict, Optional, Union

import pandas as pd

from src.config import get_settings
from src.tools.serialization import write_json
from src.workflows.comparison import ComparisonResult

logger = logging.getLogger(__name__)


class ReportGenerator:
    """
    Generate result files for a strategy comparison.

    The CSV holds one row per run with fixed columns; the JSON mirrors it and
    adds the per-(strategy, K) summary; the workbook has ``runs`` and ``summary`` sheets.
    """

    def __init__(self, output_dir: Optional[Union[str, Path]] = None):
        self.output_dir = Path(output_dir or get_settings().output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def _path(self, base_filename: Optional[str], suffix: str) -> Path:
        if base_filename is None:
            base_filename = f"comparison_{datetime.now().strftime('%Y%m%d_%H%M%S')}"
        return self.output_dir / f"{base_filename}{suffix}"

    def generate_csv_report(self, result: ComparisonResult, base_filename: Optional[str] = None) -> str:
        path = self._path(base_filename, ".csv")
        result.table().to_csv(path, index=False, lineterminator="\n")
        logger.info("Wrote %s", path)
        return str(path)

    def generate_json_report(self, result: ComparisonResult, base_filename: Optional[str] = None) -> str:
        path = write_json(result.to_dict(), self._path(base_filename, ".json"))
        logger.info("Wrote %s", path)
        return str(path)

    def generate_excel_report(self, result: ComparisonResult, base_filename: Optional[str] = None) -> str:
        path = self._path(base_filename, ".xlsx")
        with pd.ExcelWriter(path, engine="openpyxl") as writer:
            result.table().to_excel(writer, sheet_name="runs", index=False)
            result.summary().to_excel(writer, sheet_name="summary", index=False)
        logger.info("Wrote %s", path)
        return str(path)

    def generate_reports(
        self,
        result: ComparisonResult,
        base_filename: Optional[str] = None,
        excel: bool = True,
    ) -> Dict[str, str]:
        """
        Write every report format under one base name.

        Returns:
            Mapping of format name to file path, plus ``base_filename``
        """
        if base_filename is None:
            base_filename = f"comparison_{datetime.now().strftime('%Y%m%d_%H%M%S')}"
        paths = {
            "csv": self.generate_csv_report(result, base_filename),
            "json": self.generate_json_report(result, base_filename),
        }
        if excel:
            paths["excel"] = self.generate_excel_report(result, base_filename)
        paths["base_filename"] = base_filename
        return paths
