from __future__ import annotations
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Sequence
import csv
import logging
import math

import numpy as np
import orjson

from ..constants import OutputFormat
from ..enums import SummaryKey, TableName
from ..helpers.timing import StageTimer


def format_value(value: Any) -> str:
    """Fixed text form: 17 significant digits for floats, lower-case booleans"""
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, f".{OutputFormat.SIGNIFICANT_DIGITS}g")
    if value is None:
        return "none"
    return str(value)


@dataclass
class Table:
    header: List[str]
    rows: Sequence[Sequence[Any]]


@dataclass
class ScenarioOutcome:
    """Everything a scenario produced; nothing touches the disk until it is complete"""
    summary: Dict[SummaryKey, Any] = field(default_factory=dict)
    tables: Dict[TableName, Table] = field(default_factory=dict)
    exit_code: int = 0


class CsvTableWriter:
    def write(self, path: Path, table: Table) -> None:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator=OutputFormat.LINE_TERMINATOR)
            writer.writerow(table.header)
            for row in table.rows:
                writer.writerow([format_value(x) for x in row])


class SummaryWriter:
    def render(self, summary: Dict[SummaryKey, Any]) -> str:
        lines = [f"{key.value} = {format_value(value)}" for key, value in summary.items()]
        return "".join(line + OutputFormat.LINE_TERMINATOR for line in sorted(lines))

    def write(self, path: Path, summary: Dict[SummaryKey, Any]) -> None:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(self.render(summary))


class ConfigManifestWriter:
    def write(self, path: Path, content: Dict[str, Any]) -> None:
        payload = orjson.dumps(
            content, option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY
        )
        path.write_bytes(payload + OutputFormat.LINE_TERMINATOR.encode())


class OutputWriter:
    """Writes summary, resolved config and CSV tables of one finished run"""

    def __init__(self):
        self._tables = CsvTableWriter()
        self._summary = SummaryWriter()
        self._manifest = ConfigManifestWriter()
        self._logger = logging.getLogger(self.__class__.__name__)

    def write(self, directory: Path, outcome: ScenarioOutcome, config: Dict[str, Any]) -> List[Path]:
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        with StageTimer("output.write", self._logger):
            for name in sorted(outcome.tables, key=lambda x: x.value):
                path = directory / f"{name.value}{OutputFormat.CSV_SUFFIX}"
                self._tables.write(path, outcome.tables[name])
                written.append(path)
            summary_path = directory / OutputFormat.SUMMARY_FILE
            self._summary.write(summary_path, outcome.summary)
            config_path = directory / OutputFormat.CONFIG_FILE
            self._manifest.write(config_path, config)
            written += [summary_path, config_path]
        self._logger.info(f"wrote {len(written)} file(s) to {directory}")
        return written
