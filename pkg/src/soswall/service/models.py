"""Pydantic request/response models for the service endpoints."""

from __future__ import annotations

from pydantic import BaseModel, Field


class ChalkerRequest(BaseModel):
    J: float = Field(gt=0)
    K: float
    beta: float = Field(gt=0)


class ChalkerResponse(BaseModel):
    classification: str
    u: float
    partial_threshold: float
    complete_threshold: float


class WindowsRequest(BaseModel):
    t: float = Field(gt=0, lt=1)
    epsilon: float = 0.5
    n_max: int = Field(default=4, ge=0)


class Window(BaseModel):
    n: int
    u_lo: float
    u_hi: float


class WindowsResponse(BaseModel):
    windows: list[Window]


class FreeEnergyRequest(BaseModel):
    level: int = Field(ge=0)
    k: int = Field(default=8, ge=8)
    order: int = Field(ge=2)
    t: float | None = None
    u: float | None = None


class SeriesTerm(BaseModel):
    t_power2: int  # twice the power of t (dump format)
    u_power: int
    numerator: int
    denominator: int


class FreeEnergyResponse(BaseModel):
    level: int
    k: int
    order: int
    u_linear_numerator: int
    u_linear_denominator: int
    terms: list[SeriesTerm]
    dump: str
    value: float | None = None


class VerifyRequest(BaseModel):
    k: int = Field(default=8, ge=8)
    order: int = Field(default=7, ge=2)


class VerifyRow(BaseModel):
    name: str
    level: int
    expected: str
    computed: str | None
    ok: bool


class VerifyResponse(BaseModel):
    rows: list[VerifyRow]
    all_ok: bool
    all_computed: bool
    exit_code: int
    table: str


class DominantRequest(BaseModel):
    t: float = Field(gt=0, lt=1)
    u: float
    J: float = 1.0
    k: int = Field(default=8, ge=8)
    order: int = Field(default=6, ge=2)
    h_max: int = Field(default=3, ge=1)


class DominantResponse(BaseModel):
    level: int
    margins: dict[int, float]
    series_trusted: bool


class ScanRequest(BaseModel):
    J: float = 1.0
    epsilon: float = 0.5
    k: int = 8
    order: int = 6
    h_max: int = 3
    n_max: int = 4
    t_min: float | None = None
    t_max: float | None = None
    t_count: int | None = None
    u_min: float | None = None
    u_max: float | None = None
    u_count: int | None = None
    K_min: float | None = None
    K_max: float | None = None
    K_count: int | None = None
    beta_min: float | None = None
    beta_max: float | None = None
    beta_count: int | None = None


class ScanResponse(BaseModel):
    n_points: int
    csv: str


class SimulateRequest(BaseModel):
    width: int = Field(ge=1)
    height: int = Field(ge=1)
    boundary: int = Field(default=0, ge=0)
    t: float = Field(gt=0, lt=1)
    u: float
    J: float = 1.0
    sweeps: int = Field(ge=2)
    burn_in: int = Field(default=0, ge=0)
    thin: int = Field(default=1, ge=1)
    seed: int = 0
    z_max: int | None = None
    sampler: str = "heat_bath"


class SimulateResponse(BaseModel):
    t: float
    u: float
    beta: float
    J: float
    K: float
    n_boundary: int
    L: int
    sweeps: int
    seed: int
    rho0: float
    rho0_se: float
    majority_level: int
    not_at_n: float
    not_at_n_se: float
    rho_z: list[float]
    csv: str


class OracleRequest(BaseModel):
    width: int = Field(ge=1)
    height: int = Field(ge=1)
    boundary: int = Field(default=0, ge=0)
    height_cap: int = Field(ge=0)
    cap_tolerance: float = 1e-9
    t: float = Field(gt=0, lt=1)
    u: float
    J: float = 1.0
    z_max: int = 4


class OracleResponse(BaseModel):
    log_z: float
    z: float
    level_distribution: list[float]
    rho_z: list[float]
