"""Request and response models of the solver service."""

from typing import List, Optional

from pydantic import BaseModel, Field


class MeshModel(BaseModel):
    dim: int = Field(ge=1, le=2)
    nodes: List[List[float]]
    elements: List[List[int]]
    boundary: List[int]


class DomainSpec(BaseModel):
    """Either an interval (dim 1) or a disk (dim 2)."""

    dim: int = Field(1, ge=1, le=2)
    a: float = -1.0
    b: float = 1.0
    nodes: int = Field(64, ge=3)
    radius: float = Field(1.0, gt=0)
    level: int = Field(2, ge=0, le=6)


class MeshRequest(BaseModel):
    domain: DomainSpec


class AssembleRequest(BaseModel):
    mesh: Optional[MeshModel] = None
    domain: Optional[DomainSpec] = None
    s: float = Field(gt=0, lt=1)
    v_const: float = 0.0


class SystemModel(BaseModel):
    mesh: MeshModel
    s: float
    S: List[float]
    M: List[float]


class EigenRequest(BaseModel):
    mesh: Optional[MeshModel] = None
    domain: Optional[DomainSpec] = None
    s: float = Field(gt=0, lt=1)
    v_const: float = 0.0
    k: int = Field(2, ge=1)
    tol: float = 1e-10


class EigenResponse(BaseModel):
    lambdas: List[float]
    residuals: List[float]
    phis: List[List[float]]
    second_eigenvalue_multiple: bool
    mesh: MeshModel


class LinearSolveRequest(BaseModel):
    mesh: Optional[MeshModel] = None
    domain: Optional[DomainSpec] = None
    s: float = Field(gt=0, lt=1)
    v_const: float = 0.0
    f_const: float = 1.0


class SolutionModel(BaseModel):
    mesh: MeshModel
    coefficients: List[float]
    p: Optional[float] = None
    s: float
    energy: Optional[float] = None
    grad_norm: Optional[float] = None
    iterations: Optional[int] = None
    wall_time: Optional[float] = None
    max: Optional[float] = None
    min: Optional[float] = None


class NonlinearSolveRequest(BaseModel):
    mesh: Optional[MeshModel] = None
    domain: Optional[DomainSpec] = None
    s: float = Field(gt=0, lt=1)
    p: float = Field(4.0, gt=2)
    v_const: float = 0.0
    lam: float = Field(1.0, gt=0)
    tol: float = Field(1e-2, gt=0)
    max_iter: int = Field(2000, ge=1)


class ConvergeRequest(BaseModel):
    s: float = Field(gt=0, lt=1)
    sizes: List[int] = [32, 64, 128, 256, 512, 1024]


class ConvergeRow(BaseModel):
    m: int
    err_h: float
    err_l2: float


class ConvergeResponse(BaseModel):
    s: float
    rows: List[ConvergeRow]
    slope_h: float
    slope_l2: float


class LimitRequest(BaseModel):
    mesh: Optional[MeshModel] = None
    domain: Optional[DomainSpec] = None
    s: float = Field(gt=0, lt=1)
    which: int = Field(1, ge=1, le=2)
    p_sequence: List[float] = [3.0, 2.5, 2.1, 2.05]
    v_const: float = 0.0
    tol: float = 1e-2
    max_iter: int = 2000


class LimitRow(BaseModel):
    p: float
    energy: float
    angle_degrees: float
    limit_residual: Optional[float] = None
    norm: float
    ratio: Optional[List[float]] = None


class LimitResponse(BaseModel):
    eigen_index: int
    eigenvalue: float
    degenerate: bool
    mesh: MeshModel
    rows: List[LimitRow]
    csv: str


class SymmetryRequest(BaseModel):
    solution: SolutionModel
    axis: str = "x"


class SymmetryResponse(BaseModel):
    axis: str
    classification: str
    residual: float
    rho_plus: Optional[float] = None
    rho_minus: Optional[float] = None


class TableRequest(BaseModel):
    s_values: List[float]
    p: float = Field(4.0, gt=2)
    nodes: int = Field(512, ge=3)
    tol: float = 1e-2
    max_iter: int = 2000


class TableRow(BaseModel):
    s: float
    energy_ground: float
    max_ground: float
    energy_nodal: float
    max_nodal: float
    min_nodal: float


class TableResponse(BaseModel):
    p: float
    nodes: int
    rows: List[TableRow]


class ErrorPayload(BaseModel):
    error: str
    message: str
