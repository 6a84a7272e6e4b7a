"""FastAPI service wrapping the experiment suites.

Long-running suites benefit from a resident process: discrete-log
tables, sieves and Kloosterman tables built for one request are reused
by the next (the arithmetic layer caches arenas process-wide).  The CLI
is a thin client over these endpoints; see tracefn_lab.cli.
"""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import experiments
from ..errors import CapacityError, InvalidArgumentError, InvalidModulusError
from ..reporting import jsonable
from . import schemas

app = FastAPI(title="tracefn-lab", version="0.1.0")


@app.exception_handler(CapacityError)
async def _capacity_handler(request, exc):
    return JSONResponse(status_code=422,
                        content={"error": "capacity", "message": str(exc)})


@app.exception_handler(InvalidArgumentError)
@app.exception_handler(InvalidModulusError)
async def _usage_handler(request, exc):
    return JSONResponse(status_code=400,
                        content={"error": "usage", "message": str(exc)})


@app.get("/healthz")
def healthz() -> dict:
    return {"status": "ok"}


@app.get("/calibration")
def calibration_manifest() -> dict:
    from .. import calibration

    return calibration.load_manifest()


def _report(raw: dict) -> schemas.ReportResponse:
    return schemas.ReportResponse(**jsonable(raw))


@app.post("/identities", response_model=schemas.ReportResponse)
def identities(req: schemas.IdentitiesRequest):
    return _report(experiments.run_identities(req.q, req.seed, deep=req.deep,
                                              threads=req.threads))


@app.post("/bounds", response_model=schemas.ReportResponse)
def bounds(req: schemas.BoundsRequest):
    return _report(experiments.run_bounds(req.q, req.families, req.seed,
                                          deep=req.deep, threads=req.threads))


@app.post("/satotate", response_model=schemas.ReportResponse)
def satotate(req: schemas.SatotateRequest):
    return _report(experiments.run_satotate(req.family, req.q_grid, req.seed,
                                            threads=req.threads))


@app.post("/vdc", response_model=schemas.ReportResponse)
def vdc(req: schemas.VdcRequest):
    return _report(experiments.run_vdc([tuple(p) for p in req.pairs], req.seed,
                                       N_grid=req.N_grid, threads=req.threads))


@app.post("/burgess", response_model=schemas.ReportResponse)
def burgess(req: schemas.BurgessRequest):
    return _report(experiments.run_burgess(req.q, req.l, req.B, req.m,
                                           req.box_lo, req.seed,
                                           threads=req.threads))


@app.post("/abshift", response_model=schemas.ReportResponse)
def abshift(req: schemas.AbShiftRequest):
    return _report(experiments.run_abshift(req.q, req.family, req.M, req.N,
                                           req.l, req.seed, threads=req.threads))


@app.post("/khan-ngo", response_model=schemas.ReportResponse)
def khan_ngo(req: schemas.KhanNgoRequest):
    return _report(experiments.run_khan_ngo(req.q, req.lmax, req.seed))


@app.post("/dap", response_model=schemas.ReportResponse)
def dap(req: schemas.DapRequest):
    return _report(experiments.run_dap(req.k, req.X, req.q, req.a, req.seed))


@app.post("/horizontal", response_model=schemas.ReportResponse)
def horizontal(req: schemas.HorizontalRequest):
    return _report(experiments.run_horizontal(req.X, req.a, req.seed))


@app.post("/primesum", response_model=schemas.ReportResponse)
def primesum(req: schemas.PrimesumRequest):
    return _report(experiments.run_primesum(req.q, req.X, req.family, req.seed))


@app.post("/primesum/monotone", response_model=schemas.ReportResponse)
def primesum_monotone():
    return _report(experiments.run_monotone_primesum())


@app.post("/calibrate")
def calibrate(req: schemas.CalibrateRequest) -> dict:
    return jsonable(experiments.run_calibrate(req.suites, req.seed,
                                              threads=req.threads))
