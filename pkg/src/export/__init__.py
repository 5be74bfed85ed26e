"""CSV and JSON export of verification results."""
from src.export.report_exporter import CURVATURE_COLUMNS, SCHEMA_MODELS, ReportExporter, load_record

__all__ = ["CURVATURE_COLUMNS", "SCHEMA_MODELS", "ReportExporter", "load_record"]
