"""Request and response models for the experiment service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

DEFAULT_SEED = 0x5EEDF00D


class IdentitiesRequest(BaseModel):
    q: int = Field(ge=3, description="prime modulus")
    deep: bool = Field(False, description="run the full acceptance sweeps")
    seed: int = DEFAULT_SEED
    threads: Optional[int] = Field(None, ge=1)


class BoundsRequest(BaseModel):
    q: int = Field(ge=3)
    families: list[Literal["kl2", "legendre", "inverse_phase"]] = [
        "kl2", "legendre", "inverse_phase"]
    deep: bool = False
    seed: int = DEFAULT_SEED
    threads: Optional[int] = Field(None, ge=1)


class SatotateRequest(BaseModel):
    family: Literal["kl2", "salie", "birch", "gauss"]
    q_grid: list[int] = Field(min_length=1)
    seed: int = DEFAULT_SEED
    threads: Optional[int] = Field(None, ge=1)


class VdcRequest(BaseModel):
    pairs: list[tuple[int, int]] = Field(min_length=1)
    N_grid: Optional[list[float]] = Field(None,
        description="sum lengths; default one length (pq)^(2/3) per pair")
    seed: int = DEFAULT_SEED
    threads: Optional[int] = Field(None, ge=1)


class BurgessRequest(BaseModel):
    q: int = Field(ge=5)
    l: int = Field(2, ge=1)
    B: int = Field(10, ge=2)
    m: Optional[int] = Field(None, description="character index, default quadratic")
    box_lo: int = Field(1, ge=0)
    seed: int = DEFAULT_SEED
    threads: Optional[int] = Field(None, ge=1)


class AbShiftRequest(BaseModel):
    q: int = Field(ge=5)
    family: Literal["inv_plus_x", "kl3"] = "inv_plus_x"
    M: int = Field(10, ge=1)
    N: float = Field(100.0, gt=0)
    l: int = Field(2, ge=1)
    seed: int = DEFAULT_SEED
    threads: Optional[int] = Field(None, ge=1)


class DapRequest(BaseModel):
    k: Literal[2, 3]
    X: int = Field(ge=2)
    q: int = Field(ge=3)
    a: int = Field(ge=1)
    seed: int = DEFAULT_SEED


class PrimesumRequest(BaseModel):
    q: int = Field(ge=3)
    X: Optional[int] = None
    family: Literal["kl2", "inverse_phase"] = "kl2"
    seed: int = DEFAULT_SEED


class KhanNgoRequest(BaseModel):
    q: int = 499
    lmax: int = Field(8, ge=2)
    seed: int = DEFAULT_SEED


class HorizontalRequest(BaseModel):
    X: int = Field(ge=3, le=10**6)
    a: int = Field(1, ge=1)
    seed: int = DEFAULT_SEED


class CalibrateRequest(BaseModel):
    suites: list[str] = Field(min_length=1)
    seed: int = DEFAULT_SEED
    threads: Optional[int] = Field(None, ge=1)


class CheckModel(BaseModel):
    name: str
    value: float
    bound: float
    kind: str
    passed: bool
    reference: str = ""
    detail: Optional[dict] = None


class ReportResponse(BaseModel):
    command: str
    params: dict
    seed: int
    status: Literal["pass", "fail"]
    failures: list[str]
    checks: list[CheckModel]
    data: dict = {}


class ErrorResponse(BaseModel):
    error: Literal["usage", "capacity", "internal"]
    message: str
