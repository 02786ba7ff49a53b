"""
Pydantic schemas for experiment configuration and request/response validation
"""
import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import get_settings
from .digraph import DirectedGraph, build_graph
from .protocol import ProtocolKind
from .quaternion import UnitQuaternion
from .transform import TransformMode

settings = get_settings()

Quad = tuple[float, float, float, float]


def _check_unit(quad: Quad, label: str) -> Quad:
    if not all(math.isfinite(c) for c in quad):
        raise ValueError(f"{label} has non-finite components")
    defect = abs(sum(c * c for c in quad) - 1.0)
    if defect > settings.CONFIG_UNITY_TOL:
        raise ValueError(f"{label} is not unit (defect {defect:.3g} > {settings.CONFIG_UNITY_TOL:g})")
    return quad


def _check_run_name(name: str) -> str:
    """Run names become directory names under the output directory"""
    if name in (".", "..") or not all(c.isalnum() or c in "-_." for c in name):
        raise ValueError(f"run name '{name}' may contain only letters, digits, '-', '_' and '.'")
    return name


class EdgeSpec(BaseModel):
    """Directed edge: information flows from j to i with weight a_ij"""

    model_config = ConfigDict(frozen=True)

    j: int = Field(..., ge=1, description="Sending node")
    i: int = Field(..., ge=1, description="Receiving node")
    weight: float = Field(..., gt=0, description="a_ij")

    def as_tuple(self) -> tuple[int, int, float]:
        return (self.j, self.i, self.weight)


class IntegratorSettings(BaseModel):
    """Fixed-step RK4 settings"""

    model_config = ConfigDict(frozen=True)

    dt: float = Field(default_factory=lambda: settings.DEFAULT_DT, gt=0, description="Step size in seconds")
    t_final: float = Field(default_factory=lambda: settings.DEFAULT_T_FINAL, description="Horizon in seconds")
    record_every: int = Field(default_factory=lambda: settings.DEFAULT_RECORD_EVERY, ge=1)
    renormalize: bool = True
    protocol: ProtocolKind = ProtocolKind.MULTIPLICATIVE

    @field_validator("dt")
    @classmethod
    def validate_dt(cls, v):
        if not math.isfinite(v) or v > settings.MAX_DT:
            raise ValueError(f"dt must be in (0, {settings.MAX_DT:g}]")
        return v

    @model_validator(mode="after")
    def validate_horizon(self):
        if not math.isfinite(self.t_final) or self.t_final < self.dt:
            raise ValueError(f"t_final must be finite and >= dt, got {self.t_final}")
        return self

    @property
    def n_steps(self) -> int:
        return math.ceil(self.t_final / self.dt - 1e-9)


class SimConfig(BaseModel):
    """Complete experiment description"""

    name: str = Field("run", min_length=1, max_length=100)
    n: int = Field(..., ge=1, description="Number of agents")
    edges: list[EdgeSpec] = Field(default_factory=list)
    initial: list[Quad] = Field(..., description="Scalar-first initial attitudes, one per agent")
    canonicalize_init: bool = True
    integrator: IntegratorSettings = Field(default_factory=IntegratorSettings)
    transform_mode: TransformMode = TransformMode.AUTO
    transform_v: Optional[Quad] = None
    output_path: Optional[str] = None
    emit_svg: bool = False

    @field_validator("name")
    @classmethod
    def validate_name(cls, v):
        return _check_run_name(v)

    @field_validator("initial")
    @classmethod
    def validate_initial(cls, v):
        for k, quad in enumerate(v, start=1):
            _check_unit(quad, f"initial quaternion of agent {k}")
        return v

    @field_validator("transform_v")
    @classmethod
    def validate_transform_v(cls, v):
        if v is not None:
            _check_unit(v, "transform quaternion")
        return v

    @model_validator(mode="after")
    def validate_sizes(self):
        if len(self.initial) != self.n:
            raise ValueError(f"expected {self.n} initial quaternions, got {len(self.initial)}")
        if self.transform_mode is TransformMode.EXPLICIT and self.transform_v is None:
            raise ValueError("transform mode 'explicit' needs a transform quaternion")
        return self

    def graph(self) -> DirectedGraph:
        return build_graph(self.n, [e.as_tuple() for e in self.edges])

    def initial_quaternions(self) -> list[UnitQuaternion]:
        return [UnitQuaternion.from_components(*q, max_defect=settings.CONFIG_UNITY_TOL) for q in self.initial]

    def transform_quaternion(self) -> Optional[UnitQuaternion]:
        if self.transform_v is None:
            return None
        return UnitQuaternion.from_components(*self.transform_v, max_defect=settings.CONFIG_UNITY_TOL)


# ----- HTTP payloads and reports -----


class CheckRequest(BaseModel):
    """Config text to analyze without simulating"""

    config: str = Field(..., min_length=1, description="Config file contents")


class RunRequest(BaseModel):
    """Config text to simulate"""

    config: str = Field(..., min_length=1, description="Config file contents")
    name: Optional[str] = Field(None, min_length=1, max_length=100, description="Overrides the config's name")
    svg: bool = Field(False, description="Also render SVG plots")

    @field_validator("name")
    @classmethod
    def validate_name(cls, v):
        return v if v is None else _check_run_name(v)


class VerdictModel(BaseModel):
    passed: bool
    message: str
    first_violation: Optional[tuple[float, float]] = None
    c1_estimate: Optional[float] = None


class CheckReport(BaseModel):
    """Connectivity and initial-condition analysis of a config"""

    case: str
    n: int
    strong: bool
    quasi_strong: bool
    roots: list[int]
    non_roots: list[int]
    root_subgraph_strong: Optional[bool] = None
    degrees: list[float]
    subspaces: list[str]
    initial_class: Optional[str] = None
    transform_v: Optional[list[float]] = None
    transformed_scalars: Optional[list[float]] = None
    transform_constants: dict[str, float] = Field(default_factory=dict)


class RunSummary(BaseModel):
    """Outcome of one simulation"""

    case: str
    strong: bool
    quasi_strong: bool
    roots: list[int]
    initial_class: Optional[str] = None
    transform_v: Optional[list[float]] = None
    protocol: ProtocolKind = ProtocolKind.MULTIPLICATIVE
    steps: int
    samples: int
    final_disagreement: float
    final_eps_star: float
    follower_gap: float
    max_omega_observed: float
    omega_weight_bound: float
    omega_root_count_bound: int
    monotone: VerdictModel
    convergence: VerdictModel
    wall_time: float
    files: list[str] = Field(default_factory=list)


class CaseOutcome(BaseModel):
    case: str
    passed: bool
    reasons: list[str] = Field(default_factory=list)
    summary: Optional[RunSummary] = None


class GoldensReport(BaseModel):
    passed: bool
    cases: list[CaseOutcome]


class SweepTrial(BaseModel):
    trial: int
    n: int
    edges: int
    roots: list[int]
    passed: bool
    final_disagreement: float
    message: str


class SweepReport(BaseModel):
    seed: int
    trials: list[SweepTrial]

    @property
    def pass_rate(self) -> float:
        return sum(t.passed for t in self.trials) / len(self.trials) if self.trials else 0.0
