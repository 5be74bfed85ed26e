"""Pydantic models for every record the library produces or ingests."""
import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Bubble normalization constant, alpha = 2*sqrt(2)
ALPHA = 2.0 * math.sqrt(2.0)

# Monomials x_i x_j x_l with i <= j <= l, in lexicographic order (0-based).
CUBIC_INDEX: List[Tuple[int, int, int]] = [
    (i, j, l) for i in range(3) for j in range(i, 3) for l in range(j, 3)
]


def _check_vector(values: List[float], size: int, name: str) -> List[float]:
    if len(values) != size:
        raise ValueError(f"{name} must have {size} components, got {len(values)}")
    if not all(math.isfinite(v) for v in values):
        raise ValueError(f"{name} must be finite")
    return [float(v) for v in values]


# ---------------------------------------------------------------------------
# specialfn
# ---------------------------------------------------------------------------

class BesselEval(BaseModel):
    """K1 and its first two derivatives at a radius."""
    r: float = Field(gt=0.0)
    k1: float
    k1_prime: float
    k1_second: float
    underflow: bool = False


class CorrectionEval(BaseModel):
    """Correction profile W(r) = 1/r^2 - K1(r)/r with derivatives."""
    r: float = Field(gt=0.0)
    w: float
    w_prime: float
    w_second: float
    underflow: bool = False

    def ode_residual(self) -> float:
        """Relative residual of -W'' - 3W'/r + W - 1/r^2, scaled by 1/r^2."""
        r = self.r
        raw = -self.w_second - 3.0 * self.w_prime / r + self.w - 1.0 / r ** 2
        return abs(raw) * r ** 2


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

class DomainKind(str, Enum):
    """Supported star-shaped profiles."""
    BALL = "ball"
    ELLIPSOID = "ellipsoid"
    PROTRUSION = "protrusion"


class DomainSpec(BaseModel):
    """Star-shaped domain {r*omega : r < rho(omega)} given by its radial profile."""
    model_config = ConfigDict(frozen=True)

    kind: DomainKind
    radius: float = Field(default=1.0, gt=0.0)
    semi_axes: Optional[List[float]] = None
    base: float = Field(default=1.0, gt=0.0)
    amplitude: float = 0.0
    frequency: int = Field(default=1, ge=1)
    axis: Optional[List[float]] = None
    # Orthogonal 4x4 matrix applied to the whole domain
    rotation: Optional[List[List[float]]] = None
    smoothness_check: bool = True

    @model_validator(mode="after")
    def _check_kind(self) -> "DomainSpec":
        if self.kind == DomainKind.ELLIPSOID:
            if self.semi_axes is None:
                raise ValueError("ellipsoid requires semi_axes")
            _check_vector(self.semi_axes, 4, "semi_axes")
            if min(self.semi_axes) <= 0.0:
                raise ValueError("semi_axes must be positive")
        if self.kind == DomainKind.PROTRUSION:
            if not 0.0 <= abs(self.amplitude) < 1.0:
                raise ValueError("protrusion amplitude must satisfy |amplitude| < 1")
            axis = _check_vector(self.axis or [0.0, 0.0, 0.0, 1.0], 4, "axis")
            if np.linalg.norm(axis) == 0.0:
                raise ValueError("protrusion axis must be nonzero")
        if self.rotation is not None:
            rot = np.asarray(self.rotation, dtype=float)
            if rot.shape != (4, 4):
                raise ValueError("rotation must be a 4x4 matrix")
            if np.max(np.abs(rot @ rot.T - np.eye(4))) > 1e-10:
                raise ValueError("rotation must be orthogonal")
        return self

    def rotated(self, rotation: np.ndarray) -> "DomainSpec":
        """DomainSpec of R(Omega), composing with any existing rotation."""
        rot = np.asarray(rotation, dtype=float)
        if self.rotation is not None:
            rot = rot @ np.asarray(self.rotation, dtype=float)
        return self.model_copy(update={"rotation": rot.tolist()})


class BoundaryPoint(BaseModel):
    """A boundary point with inward normal, tangent frame and local graph data."""
    omega: List[float]
    xi: List[float]
    normal: List[float]
    tangent_frame: List[List[float]]
    graph_g: Optional[List[float]] = None
    # Coefficients of x_i x_j x_l ordered as CUBIC_INDEX
    graph_cubic: Optional[List[float]] = None
    fit_residual: Optional[float] = None
    chart_radius: Optional[float] = None

    @field_validator("omega", "xi", "normal")
    @classmethod
    def _four_vector(cls, v: List[float]) -> List[float]:
        return _check_vector(v, 4, "vector")

    @field_validator("tangent_frame")
    @classmethod
    def _frame_shape(cls, v: List[List[float]]) -> List[List[float]]:
        if len(v) != 3:
            raise ValueError("tangent_frame must hold three vectors")
        return [_check_vector(t, 4, "tangent vector") for t in v]

    @property
    def xi_array(self) -> np.ndarray:
        return np.asarray(self.xi, dtype=float)

    @property
    def normal_array(self) -> np.ndarray:
        return np.asarray(self.normal, dtype=float)

    @property
    def frame_array(self) -> np.ndarray:
        """Tangent frame as a (3, 4) array, one vector per row."""
        return np.asarray(self.tangent_frame, dtype=float)

    def cubic(self, i: int, j: int, l: int) -> float:
        """Cubic graph coefficient g_{ijl} (0-based indices, any order)."""
        if self.graph_cubic is None:
            raise ValueError("graph coefficients not computed for this point")
        key = tuple(sorted((i, j, l)))
        return self.graph_cubic[CUBIC_INDEX.index(key)]


class CurvatureEval(BaseModel):
    """Mean curvature (average principal curvature) and its tangential gradient."""
    h: float
    h_grad: List[float]
    h_fd: Optional[float] = None
    h_grad_fd: Optional[List[float]] = None


class CurvatureMaximum(BaseModel):
    """A strict local maximum of the mean curvature."""
    point: BoundaryPoint
    h: float


class CurvatureMaxima(BaseModel):
    """Result of the multi-start curvature ascent."""
    maxima: List[CurvatureMaximum] = []
    constant_curvature: bool = False
    h_min: float
    h_max: float
    n_seeds: int


# ---------------------------------------------------------------------------
# ansatz
# ---------------------------------------------------------------------------

class ConcentrationConfig(BaseModel):
    """Parameters (lambda, beta, d, xi, eta) of the two-bubble ansatz."""
    model_config = ConfigDict(populate_by_name=True, frozen=True)

    lam: float = Field(alias="lambda")
    beta: float = 0.0
    d: Tuple[float, float]
    xi: Tuple[BoundaryPoint, BoundaryPoint]
    eta: float = Field(gt=0.0)

    @model_validator(mode="after")
    def _admissible(self) -> "ConcentrationConfig":
        if not self.lam > math.e:
            raise ValueError(f"lambda must exceed e so that ln(lambda) > 1, got {self.lam}")
        for d_i in self.d:
            if not self.eta < d_i < 1.0 / self.eta:
                raise ValueError(
                    f"d={d_i} outside the admissible window ({self.eta}, {1.0 / self.eta})"
                )
        gap = float(np.linalg.norm(self.xi[0].xi_array - self.xi[1].xi_array))
        if gap < 2.0 * self.eta:
            raise ValueError(f"|xi1 - xi2| = {gap:.6g} is below 2*eta = {2.0 * self.eta:.6g}")
        return self

    @property
    def delta(self) -> Tuple[float, float]:
        """Concentration scales delta_i = d_i / (lambda ln lambda)."""
        scale = self.lam * math.log(self.lam)
        return (self.d[0] / scale, self.d[1] / scale)

    def swapped(self) -> "ConcentrationConfig":
        """Same configuration with the two components exchanged."""
        return self.model_copy(update={"d": (self.d[1], self.d[0]), "xi": (self.xi[1], self.xi[0])})


class FieldEval(BaseModel):
    """Value and gradient of a scalar field at a point of R^4."""
    value: float
    gradient: List[float]


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

class QuadResult(BaseModel):
    """Integral value with nested-rule error estimate."""
    value: float
    err_est: float = Field(ge=0.0)
    n_evals: int = Field(ge=0)
    converged: bool
    order: int = 0


class SingularityHint(BaseModel):
    """Concentration points toward which the node sets are graded."""
    centers: List[List[float]] = []
    grading_ratio: float = Field(default=0.5, gt=0.0, lt=1.0)
    min_panel: float = Field(default=1e-3, gt=0.0)

    @field_validator("centers")
    @classmethod
    def _sorted_centers(cls, v: List[List[float]]) -> List[List[float]]:
        # Canonical order keeps node sets independent of component labelling.
        return sorted(_check_vector(c, 4, "center") for c in v)

    @classmethod
    def for_bubbles(
        cls,
        centers: List[np.ndarray],
        deltas: List[float],
        min_panel_factor: float = 0.1,
        grading_ratio: float = 0.5,
    ) -> "SingularityHint":
        """Hint graded to a fraction of the smallest bubble scale."""
        if min_panel_factor < 1e-3:
            raise ValueError("min_panel must stay above 1e-3 of the smallest bubble scale")
        delta_min = min(deltas) if deltas else 1.0
        return cls(
            centers=[list(map(float, c)) for c in centers],
            grading_ratio=grading_ratio,
            min_panel=min_panel_factor * delta_min,
        )


class Tolerance(BaseModel):
    """Quadrature tolerances."""
    rel: float = Field(default=1e-6, gt=0.0)
    abs: float = Field(default=1e-12, ge=0.0)


# ---------------------------------------------------------------------------
# energy
# ---------------------------------------------------------------------------

class EnergyBreakdown(BaseModel):
    """The four integrals of E(u1, u2) and their sum."""
    dirichlet: float = Field(ge=0.0)
    mass: float = Field(ge=0.0)
    quartic: float
    coupling: float
    total: float
    single: List[float] = []
    err_est: Dict[str, float] = {}
    converged: Dict[str, bool] = {}

    @property
    def all_converged(self) -> bool:
        return all(self.converged.values())


class ErrorNormReport(BaseModel):
    """Dual norms of the six error terms for one component."""
    component: int
    lam: float
    delta: float
    norms: List[float]
    predicted: List[float]
    ratios: List[float]
    total_bound: float = Field(ge=0.0)
    e1_split: Dict[str, float] = {}
    e6_split: Dict[str, float] = {}
    converged: bool = True

    @field_validator("norms", "predicted")
    @classmethod
    def _nonnegative(cls, v: List[float]) -> List[float]:
        if len(v) != 6:
            raise ValueError("six error terms expected")
        if any(x < 0.0 for x in v):
            raise ValueError("norms and predicted scalings are nonnegative")
        return v


class QDecomposition(BaseModel):
    """Q = lambda * int V U split into the ball part, its correction and the far part."""
    q: float
    q1: float
    q2: float
    q3: float
    m1: float
    m2: float
    m3: float
    scale: float
    q1_ratio: float
    q2_ratio: float
    q3_ratio: float
    bounds: Dict[str, float] = {}
    consistency: float
    converged: bool = True


class ReducedEnergySample(BaseModel):
    """psi-free reduced energy with the predicted size of the neglected term."""
    model_config = ConfigDict(populate_by_name=True)

    lam: float = Field(alias="lambda")
    beta: float
    d: List[float]
    delta: List[float]
    value: float
    breakdown: EnergyBreakdown
    psi_margin: float
    regime: str


class EnergySampleRecord(BaseModel):
    """Per-sample record emitted by the scaling and fitting commands."""
    model_config = ConfigDict(populate_by_name=True)

    lam: float = Field(alias="lambda")
    beta: float
    d: List[float]
    xi_spherical: List[List[float]]
    H_values: List[float]
    breakdown: Optional[EnergyBreakdown] = None
    error_report: Optional[ErrorNormReport] = None
    q_decomposition: Optional[QDecomposition] = None


# ---------------------------------------------------------------------------
# asymptotics
# ---------------------------------------------------------------------------

class ScalingModel(str, Enum):
    """Regression models for scaling laws."""
    PURE_POWER = "pure-power"
    POWER_WITH_LOG = "power-with-log"
    AFFINE_IN_BASIS = "affine-in-basis"


class ScalingFit(BaseModel):
    """Regression result with residual diagnostics."""
    model: ScalingModel
    coefficients: List[float]
    r_squared: float = Field(ge=0.0, le=1.0)
    residuals: List[float]
    grid: List[Tuple[float, float]]
    slope: Optional[float] = None
    flat: Optional[bool] = None

    @model_validator(mode="after")
    def _lengths(self) -> "ScalingFit":
        if len(self.residuals) != len(self.grid):
            raise ValueError("residuals length must equal grid length")
        return self


class ExpansionConstants(BaseModel):
    """Fitted c0, c1, c2 of I(V) = c0 - c1 H delta + c2 lambda delta^2 |ln delta|."""
    c0: float
    c1: float
    c2: float
    r_squared: float = Field(ge=0.0, le=1.0)
    residuals: List[float] = []
    n_samples: int = 0
    c0_reference: float = 4.0 * math.pi ** 2 / 3.0
    c2_reference: float = 2.0 * math.pi ** 2
    split: Dict[str, List[float]] = {}
    stability: Dict[str, float] = {}
    passed: bool = False
    diagnostics: List[str] = []


class TermScaling(BaseModel):
    """Ratio band of one error term along the lambda grid."""
    term: str
    criterion: str
    ratios: List[float]
    fit: Optional[ScalingFit] = None
    passed: bool
    offending: List[float] = []
    notice: Optional[str] = None


class ErrorScalingReport(BaseModel):
    """Outcome of the error-norm scaling verification."""
    lambda_grid: List[float]
    beta: float
    terms: List[TermScaling]
    e5_dominant: List[bool]
    passed: bool
    reports: List[ErrorNormReport] = []


class ScalingScan(BaseModel):
    """One quantity sampled along the lambda grid with its band verdicts.

    ``rows`` holds one flat record per grid point; the keys are the CSV
    columns of the quantity. ``samples`` carries the full per-sample records.
    """
    quantity: str
    lambda_grid: List[float]
    beta: float
    rows: List[Dict[str, float]]
    terms: List[TermScaling]
    passed: bool
    samples: List[EnergySampleRecord] = []


class BlowupPrediction(BaseModel):
    """Predicted concentration points and rates."""
    model_config = ConfigDict(populate_by_name=True)

    lam: float = Field(alias="lambda")
    beta: float
    xi_star: List[BoundaryPoint]
    d_star: List[float]
    d_leading: List[float] = []
    delta_star: List[float]
    H_values: List[float]
    energy_at_min: Optional[float] = None
    d_direct: Optional[List[float]] = None
    agreement: Optional[float] = None
    consistent: Optional[bool] = None
    n_maxima: int
    pair_count: int
    pairs: List[Tuple[int, int]] = []
    constants: ExpansionConstants

    @model_validator(mode="after")
    def _positive(self) -> "BlowupPrediction":
        if any(d <= 0.0 for d in self.d_star):
            raise ValueError("d_star must be strictly positive")
        if any(h <= 0.0 for h in self.H_values):
            raise ValueError("blow-up points need positive mean curvature")
        return self


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

class InvariantCheck(BaseModel):
    """One invariant evaluated by a verification suite."""
    name: str
    passed: bool
    value: float
    threshold: float
    severity: str = "high"
    description: str = ""


class InvariantReport(BaseModel):
    """Complete verification suite report."""
    suite: str
    checks: List[InvariantCheck] = []
    window_constants: Dict[str, Dict[str, float]] = {}
    is_valid: bool

    def failed(self) -> List[InvariantCheck]:
        return [c for c in self.checks if not c.passed]


# ---------------------------------------------------------------------------
# cli
# ---------------------------------------------------------------------------

class ToleranceOverrides(BaseModel):
    """Per-experiment quadrature tolerance overrides."""
    rel: Optional[float] = Field(default=None, gt=0.0)
    abs: Optional[float] = Field(default=None, ge=0.0)


class ConstantsInput(BaseModel):
    """Previously fitted expansion constants supplied by the user."""
    c0: float
    c1: float = Field(gt=0.0)
    c2: float = Field(gt=0.0)


class ExperimentConfig(BaseModel):
    """Experiment definition read from a JSON document."""
    name: str = "experiment"
    domain: DomainSpec
    xi_directions: Optional[List[List[float]]] = None
    boundary_points: List[List[float]] = []
    lambda_grid: List[float] = Field(
        default_factory=lambda: [1e2, 10 ** 2.5, 1e3, 10 ** 3.5, 1e4]
    )
    beta: float = 1.0
    d_defaults: Tuple[float, float] = (1.0, 1.0)
    eta: float = Field(default=0.5, gt=0.0)
    tolerance: ToleranceOverrides = ToleranceOverrides()
    output_dir: Optional[str] = None
    seed: int = 0
    constants: Optional[ConstantsInput] = None

    @field_validator("lambda_grid")
    @classmethod
    def _grid(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("lambda_grid must be nonempty")
        if any(not lam > math.e for lam in v):
            raise ValueError("every lambda must exceed e")
        return sorted(float(lam) for lam in v)

    @field_validator("xi_directions")
    @classmethod
    def _pair(cls, v: Optional[List[List[float]]]) -> Optional[List[List[float]]]:
        if v is None:
            return v
        if len(v) != 2:
            raise ValueError("xi_directions must list exactly two directions")
        return [_check_vector(w, 4, "direction") for w in v]

    @field_validator("boundary_points")
    @classmethod
    def _directions(cls, v: List[List[float]]) -> List[List[float]]:
        return [_check_vector(w, 4, "direction") for w in v]


def to_plain(model: BaseModel) -> Dict[str, Any]:
    """JSON-ready dict using field aliases (e.g. ``lambda``)."""
    return model.model_dump(mode="json", by_alias=True)
