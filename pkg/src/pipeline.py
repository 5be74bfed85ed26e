"""Verification pipeline behind the CLI commands."""
import json
import logging
import math
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from pydantic import ValidationError

from src.asymptotics import (
    constants_from_values,
    expansion_tolerance,
    extract_constants,
    predict_blowup,
    require_expansion,
    scan_quantity,
)
from src.config import config
from src.exceptions import ConfigError
from src.export.report_exporter import ReportExporter
from src.geometry import as_domain, boundary_point, find_curvature_maxima, scan_curvature
from src.models.schemas import (
    BlowupPrediction,
    BoundaryPoint,
    CurvatureMaxima,
    DomainKind,
    DomainSpec,
    ExpansionConstants,
    ExperimentConfig,
    InvariantReport,
    ScalingScan,
    Tolerance,
)
from src.validation.validator import AnsatzValidator, SpecialFunctionValidator

logger = logging.getLogger(__name__)

DEFAULT_DIRECTIONS = [[1.0, 0.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0]]


def load_experiment(path: Union[str, Path]) -> ExperimentConfig:
    """Read and validate an experiment config.

    Raises:
        ConfigError: missing file, malformed JSON (with line and column) or
            a document that does not validate.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"experiment config not found: {path}")
    text = path.read_text(encoding='utf-8')
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"{path}: invalid experiment config: {e}") from e


class VerificationPipeline:
    """
    Runs one experiment config through the verification commands.

    Every command writes its outputs into ``output_dir`` (flag, then the
    experiment's ``output_dir``, then config.yaml) and returns the record it
    wrote. Outputs carry no timestamps, so reruns are byte-identical.
    """

    def __init__(
        self,
        experiment: Optional[ExperimentConfig] = None,
        output_dir: Optional[Union[str, Path]] = None,
        tol_rel: Optional[float] = None,
        lambda_grid: Optional[Sequence[float]] = None,
        threads: Optional[int] = None,
    ):
        """Initialize pipeline.

        Args:
            experiment: Parsed experiment config; commands needing a domain fail without it.
            output_dir: Output directory override.
            tol_rel: Relative quadrature tolerance override.
            lambda_grid: Lambda grid override.
            threads: Worker count override (falls back to BLOWUPLAB_THREADS).
        """
        self.experiment = experiment
        self.tol_rel = tol_rel
        self.workers = config.get_threads(threads)
        if lambda_grid is not None:
            if not lambda_grid or any(not v > math.e for v in lambda_grid):
                raise ConfigError("lambda grid must be nonempty with every lambda > e")
            self.lambda_grid = sorted(float(v) for v in lambda_grid)
        elif experiment is not None:
            self.lambda_grid = list(experiment.lambda_grid)
        else:
            self.lambda_grid = config.lambda_grid
        out = output_dir or (experiment.output_dir if experiment else None)
        self.exporter = ReportExporter(out)

    @classmethod
    def from_file(cls, path: Union[str, Path], **kwargs) -> "VerificationPipeline":
        return cls(load_experiment(path), **kwargs)

    @property
    def output_dir(self) -> Path:
        return self.exporter.output_dir

    def _require_experiment(self) -> ExperimentConfig:
        if self.experiment is None:
            raise ConfigError("this command needs an experiment config (--config)")
        return self.experiment

    def _domain(self):
        return as_domain(self._require_experiment().domain)

    def _tolerance(self, base: Optional[Tolerance] = None) -> Optional[Tolerance]:
        """Experiment overrides, then the flag, layered over ``base``."""
        exp = self._require_experiment()
        rel = self.tol_rel or exp.tolerance.rel
        if rel is None and exp.tolerance.abs is None:
            return base
        base = base or Tolerance(rel=config.rel_tol_energy, abs=config.get('quadrature.abs_tol', 1e-12))
        return Tolerance(rel=rel or base.rel, abs=exp.tolerance.abs if exp.tolerance.abs is not None else base.abs)

    def _scan_points(self) -> Tuple[BoundaryPoint, BoundaryPoint]:
        dom = self._domain()
        directions = self._require_experiment().xi_directions or DEFAULT_DIRECTIONS
        return boundary_point(dom, directions[0]), boundary_point(dom, directions[1])

    # -- commands -----------------------------------------------------------

    def verify_specialfn(self, rmin: Optional[float] = None, rmax: Optional[float] = None) -> InvariantReport:
        """Special-function invariant suite; writes ``specialfn_report.json``."""
        report = SpecialFunctionValidator().validate(rmin, rmax)
        self.exporter.write_json(report, "specialfn_report.json")
        return report

    def verify_ansatz(self) -> InvariantReport:
        """Ansatz identity suite on the experiment domain (unit ball without one)."""
        if self.experiment is not None:
            domain = self.experiment.domain
            directions = self.experiment.xi_directions or DEFAULT_DIRECTIONS
            d = self.experiment.d_defaults
        else:
            domain, directions, d = DomainSpec(kind=DomainKind.BALL), DEFAULT_DIRECTIONS, (1.0, 1.0)
        report = AnsatzValidator().validate(as_domain(domain), directions=directions, d=d)
        self.exporter.write_json(report, "ansatz_report.json")
        return report

    def curvature(self, n_points: Optional[int] = None) -> CurvatureMaxima:
        """Boundary scan to ``curvature.csv`` and strict maxima to ``curvature_maxima.json``."""
        dom = self._domain()
        omega, xi, h = scan_curvature(dom, n_points)
        self.exporter.write_curvature(omega, xi, h)
        maxima = find_curvature_maxima(dom)
        self.exporter.write_json(maxima, "curvature_maxima.json")
        logger.info("Curvature: H in [%.6g, %.6g], %d strict maxima", maxima.h_min, maxima.h_max,
                    len(maxima.maxima))
        return maxima

    def scaling(self, quantity: str) -> ScalingScan:
        """Scaling scan along the grid; ``scaling_<quantity>.csv`` and ``.json``."""
        exp = self._require_experiment()
        scan = scan_quantity(
            quantity,
            self._domain(),
            self._scan_points(),
            lambda_grid=self.lambda_grid,
            beta=exp.beta,
            d=exp.d_defaults,
            eta=exp.eta,
            tol=self._tolerance(),
            workers=self.workers,
        )
        self.exporter.write_csv(scan.rows, f"scaling_{quantity}.csv")
        self.exporter.write_json(scan, f"scaling_{quantity}.json")
        return scan

    def _constant_points(self) -> List[BoundaryPoint]:
        exp = self._require_experiment()
        if len(exp.boundary_points) < 1:
            raise ConfigError("fit-constants needs boundary_points in the experiment config")
        dom = self._domain()
        return [boundary_point(dom, w) for w in exp.boundary_points]

    def fit_constants(self) -> ExpansionConstants:
        """Fit (c0, c1, c2) on the experiment's boundary points; ``constants.json``."""
        exp = self._require_experiment()
        constants = extract_constants(
            self._domain(),
            self._constant_points(),
            lambda_grid=self.lambda_grid,
            d=exp.d_defaults[0],
            tol=self._tolerance(expansion_tolerance()),
            workers=self.workers,
        )
        self.exporter.write_json(constants, "constants.json")
        return constants

    def predict(self, lam: Optional[float] = None) -> BlowupPrediction:
        """Blow-up prediction at lam (largest grid value by default); ``prediction.json``.

        Uses the experiment's constants when given, otherwise fits them first
        and requires the fit to pass.
        """
        exp = self._require_experiment()
        if exp.constants is not None:
            constants = constants_from_values(exp.constants.c0, exp.constants.c1, exp.constants.c2)
        else:
            logger.info("No constants in the experiment config; fitting them first")
            constants = require_expansion(self.fit_constants())
        prediction = predict_blowup(
            self._domain(),
            lam or self.lambda_grid[-1],
            exp.beta,
            constants,
            eta=exp.eta,
            tol=self._tolerance(expansion_tolerance()),
            workers=self.workers,
        )
        self.exporter.write_json(prediction, "prediction.json")
        return prediction

    def schemas(self) -> List[Path]:
        """JSON Schemas of every emitted record."""
        return self.exporter.write_schemas()
