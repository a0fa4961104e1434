"""Request/response models for the experiment service.

These models are the canonical wire format: the CLI builds requests from
flags and renders responses to CSV, whether it dispatches in-process or to
a remote server.
"""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class WalkRequest(StrictModel):
    p1: float = Field(0.7, gt=0.0, lt=1.0)
    eps: float = Field(0.05, gt=0.0, lt=0.5)
    xcut: float = Field(6.0, gt=0.0)
    trials: int = Field(20000, ge=1, le=5_000_000)
    seed: int = 0
    x0: float | None = None


class MonotoneRequest(StrictModel):
    name: Literal["trace", "purity", "entropy", "phi_abc"]
    trials: int = Field(200, ge=1, le=100_000)
    seed: int = 0
    h: float = Field(1e-3, ge=1e-5, le=1e-1)


class SpinbathRequest(StrictModel):
    model: Literal["exact", "nz2", "nz3", "nz4", "tcl2", "tcl3", "tcl4", "pm", "cg"]
    n: int = Field(4, ge=1, le=10_000)
    beta: float = 1.0
    tmax: float = Field(2.0, gt=0.0)
    steps: int = Field(200, ge=2, le=100_000)
    seed: int = 0
    random: bool = False
    ensemble: int = Field(50, ge=1, le=10_000)
    g: float = Field(1.0, ge=-1.0, le=1.0)
    omega: float = Field(1.0, ge=-1.0, le=1.0)
    alpha: float = Field(1.0, gt=0.0)
    tau: float | None = Field(None, gt=0.0)
    vx0: float | None = None
    vy0: float | None = None


class CqecMarkovRequest(StrictModel):
    r: float = Field(10.0, ge=0.0)
    tmax: float = Field(20.0, gt=0.0)
    steps: int = Field(400, ge=2, le=100_000)


class CqecNonmarkovRequest(StrictModel):
    R: float = Field(100.0, gt=0.0)
    tmax: float = Field(1e4, gt=0.0)
    steps: int = Field(400, ge=2, le=100_000)
    log_grid: bool = False


class CqecSingleRequest(StrictModel):
    kind: Literal["markov", "nonmarkov"]
    ratio: float = Field(10.0, ge=0.0)
    tmax: float = Field(20.0, gt=0.0)
    steps: int = Field(400, ge=2, le=100_000)


class CqecEigenRequest(StrictModel):
    R: float = Field(100.0, gt=0.0)


class SubsysFaRequest(StrictModel):
    d_a: int = Field(2, ge=1, le=8)
    d_b: int = Field(2, ge=1, le=8)
    d_k: int = Field(2, ge=0, le=16)
    trials: int = Field(500, ge=1, le=100_000)
    seed: int = 0


class HolonomyRequest(StrictModel):
    gate: Literal["z", "x", "phase", "hadamard", "cnot"]
    T: float = Field(50.0, gt=0.0, description="duration per segment in units of T_d")
    schedule: Literal["linear", "trig", "smooth"] = "trig"
    steps: int = Field(4000, ge=10, le=2_000_000)


class TableResponse(StrictModel):
    header: list[str]
    rows: list[list[Any]]
    meta: dict[str, Any]


class Series(StrictModel):
    name: str
    header: list[str]
    rows: list[list[Any]]


class BundleResponse(StrictModel):
    figure: str
    series: list[Series]
