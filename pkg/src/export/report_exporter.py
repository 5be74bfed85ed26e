"""CSV and JSON writers for verification outputs.

CSV files have fixed columns, one row per sample, floats written with the
configured printf format so reruns are byte-identical. JSON records are the
pydantic models dumped with their aliases; their JSON Schemas are generated
from the same models.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Type, Union

import pandas as pd
from pydantic import BaseModel

from src.config import config
from src.models.schemas import (
    BlowupPrediction,
    CurvatureMaxima,
    ErrorScalingReport,
    ExpansionConstants,
    ExperimentConfig,
    InvariantReport,
    ScalingScan,
    to_plain,
)

logger = logging.getLogger(__name__)

# Every record the CLI writes as JSON, plus the experiment config it reads
SCHEMA_MODELS: Dict[str, Type[BaseModel]] = {
    "experiment_config": ExperimentConfig,
    "invariant_report": InvariantReport,
    "curvature_maxima": CurvatureMaxima,
    "scaling_scan": ScalingScan,
    "error_scaling_report": ErrorScalingReport,
    "expansion_constants": ExpansionConstants,
    "blowup_prediction": BlowupPrediction,
}

CURVATURE_COLUMNS = [
    "omega_1", "omega_2", "omega_3", "omega_4",
    "xi_1", "xi_2", "xi_3", "xi_4",
    "H",
]


class ReportExporter:
    """Write CSV tables and JSON records into one output directory."""

    def __init__(self, output_dir: Optional[Union[str, Path]] = None, float_format: Optional[str] = None):
        self.output_dir = Path(output_dir or config.output_directory)
        self.float_format = float_format or config.float_format

    def _path(self, name: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir / name

    def write_csv(self, rows: Sequence[Dict[str, Any]], name: str,
                  columns: Optional[List[str]] = None) -> Path:
        """Write rows as a CSV table with a header line.

        Args:
            rows: One dict per sample.
            name: File name inside the output directory.
            columns: Column order; defaults to the keys of the first row.

        Returns:
            Path of the written file.
        """
        if columns is None:
            columns = list(rows[0].keys()) if rows else []
        frame = pd.DataFrame(list(rows), columns=columns)
        path = self._path(name)
        frame.to_csv(path, index=False, float_format=self.float_format, lineterminator="\n", encoding="utf-8")
        logger.info("Saved %d rows to %s", len(frame), path)
        return path

    def write_json(self, record: Union[BaseModel, Dict[str, Any]], name: str) -> Path:
        """Write a record as UTF-8 JSON (model aliases, two-space indent)."""
        data = to_plain(record) if isinstance(record, BaseModel) else record
        path = self._path(name)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(data, f, indent=2, ensure_ascii=False)
            f.write("\n")
        logger.info("Saved %s", path)
        return path

    def write_schemas(self, directory: Optional[Union[str, Path]] = None) -> List[Path]:
        """Write the JSON Schema of every emitted record as ``<name>.schema.json``."""
        target = ReportExporter(directory or self.output_dir, self.float_format)
        paths = []
        for name, model in SCHEMA_MODELS.items():
            schema = model.model_json_schema(by_alias=True)
            paths.append(target.write_json(schema, f"{name}.schema.json"))
        return paths

    def write_curvature(self, omega, xi, h) -> Path:
        """Boundary scan table with the fixed curvature columns."""
        rows = [
            dict(zip(CURVATURE_COLUMNS, list(map(float, w)) + list(map(float, x)) + [float(v)]))
            for w, x, v in zip(omega, xi, h)
        ]
        return self.write_csv(rows, "curvature.csv", CURVATURE_COLUMNS)


def load_record(path: Union[str, Path], model: Type[BaseModel]) -> BaseModel:
    """Read a JSON record back and validate it against its model."""
    with open(path, 'r', encoding='utf-8') as f:
        return model.model_validate_json(f.read())
