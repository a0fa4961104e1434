"""FastAPI wrapper around the experiment runners.

Every endpoint is a stateless POST: validated request model in, table (or
series bundle) out.  The handlers are plain functions so the CLI can call
them in-process without a socket.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import experiments
from ..experiments import NumericFailure
from . import schemas as sch


def run_walk(req: sch.WalkRequest) -> sch.TableResponse:
    header, rows, meta = experiments.weakmeas_walk(
        req.p1, req.eps, req.xcut, req.trials, req.seed, req.x0
    )
    return sch.TableResponse(header=header, rows=rows, meta=meta)


def run_monotone(req: sch.MonotoneRequest) -> sch.TableResponse:
    header, rows, meta = experiments.monotone_check(req.name, req.trials, req.seed, req.h)
    return sch.TableResponse(header=header, rows=rows, meta=meta)


def run_spinbath(req: sch.SpinbathRequest) -> sch.TableResponse:
    header, rows, meta = experiments.spinbath_compare(
        req.model, req.n, req.beta, req.tmax, req.steps,
        seed=req.seed, random=req.random, ensemble=req.ensemble,
        g=req.g, omega=req.omega, alpha=req.alpha, tau=req.tau,
        vx0=req.vx0, vy0=req.vy0,
    )
    return sch.TableResponse(header=header, rows=rows, meta=meta)


def run_cqec_markov(req: sch.CqecMarkovRequest) -> sch.TableResponse:
    header, rows, meta = experiments.cqec_markov(req.r, req.tmax, req.steps)
    return sch.TableResponse(header=header, rows=rows, meta=meta)


def run_cqec_nonmarkov(req: sch.CqecNonmarkovRequest) -> sch.TableResponse:
    header, rows, meta = experiments.cqec_nonmarkov(
        req.R, req.tmax, req.steps, log_grid=req.log_grid
    )
    return sch.TableResponse(header=header, rows=rows, meta=meta)


def run_cqec_single(req: sch.CqecSingleRequest) -> sch.TableResponse:
    header, rows, meta = experiments.cqec_single(req.kind, req.ratio, req.tmax, req.steps)
    return sch.TableResponse(header=header, rows=rows, meta=meta)


def run_cqec_eigen(req: sch.CqecEigenRequest) -> sch.TableResponse:
    header, rows, meta = experiments.cqec_eigen(req.R)
    return sch.TableResponse(header=header, rows=rows, meta=meta)


def run_subsys_fa(req: sch.SubsysFaRequest) -> sch.TableResponse:
    header, rows, meta = experiments.subsys_fa(
        req.d_a, req.d_b, req.d_k, req.trials, req.seed
    )
    return sch.TableResponse(header=header, rows=rows, meta=meta)


def run_holonomy(req: sch.HolonomyRequest) -> sch.TableResponse:
    header, rows, meta = experiments.holonomy_run(req.gate, req.T, req.schedule, req.steps)
    return sch.TableResponse(header=header, rows=rows, meta=meta)


def run_reproduce(figure_id: str) -> sch.BundleResponse:
    series = experiments.reproduce(figure_id)
    return sch.BundleResponse(
        figure=figure_id,
        series=[sch.Series(name=n, header=h, rows=r) for n, h, r in series],
    )


HANDLERS = {
    "weakmeas/walk": (sch.WalkRequest, run_walk),
    "monotone/check": (sch.MonotoneRequest, run_monotone),
    "spinbath/compare": (sch.SpinbathRequest, run_spinbath),
    "cqec/markov": (sch.CqecMarkovRequest, run_cqec_markov),
    "cqec/nonmarkov": (sch.CqecNonmarkovRequest, run_cqec_nonmarkov),
    "cqec/single": (sch.CqecSingleRequest, run_cqec_single),
    "cqec/eigen": (sch.CqecEigenRequest, run_cqec_eigen),
    "subsys/fa": (sch.SubsysFaRequest, run_subsys_fa),
    "holonomy/run": (sch.HolonomyRequest, run_holonomy),
}


def create_app() -> FastAPI:
    app = FastAPI(title="oqslab", version="0.1.0")

    def _wrap(handler, req):
        try:
            return handler(req)
        except NumericFailure as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/weakmeas/walk", response_model=sch.TableResponse)
    def weakmeas_walk(req: sch.WalkRequest):
        return _wrap(run_walk, req)

    @app.post("/monotone/check", response_model=sch.TableResponse)
    def monotone_check(req: sch.MonotoneRequest):
        return _wrap(run_monotone, req)

    @app.post("/spinbath/compare", response_model=sch.TableResponse)
    def spinbath_compare(req: sch.SpinbathRequest):
        return _wrap(run_spinbath, req)

    @app.post("/cqec/markov", response_model=sch.TableResponse)
    def cqec_markov(req: sch.CqecMarkovRequest):
        return _wrap(run_cqec_markov, req)

    @app.post("/cqec/nonmarkov", response_model=sch.TableResponse)
    def cqec_nonmarkov(req: sch.CqecNonmarkovRequest):
        return _wrap(run_cqec_nonmarkov, req)

    @app.post("/cqec/single", response_model=sch.TableResponse)
    def cqec_single(req: sch.CqecSingleRequest):
        return _wrap(run_cqec_single, req)

    @app.post("/cqec/eigen", response_model=sch.TableResponse)
    def cqec_eigen(req: sch.CqecEigenRequest):
        return _wrap(run_cqec_eigen, req)

    @app.post("/subsys/fa", response_model=sch.TableResponse)
    def subsys_fa(req: sch.SubsysFaRequest):
        return _wrap(run_subsys_fa, req)

    @app.post("/holonomy/run", response_model=sch.TableResponse)
    def holonomy_run(req: sch.HolonomyRequest):
        return _wrap(run_holonomy, req)

    @app.post("/reproduce/{figure_id}", response_model=sch.BundleResponse)
    def reproduce(figure_id: str):
        try:
            return run_reproduce(figure_id)
        except ValueError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    return app
