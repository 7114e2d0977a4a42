"""FastAPI service wrapping the core package.

Handlers are plain synchronous functions so the CLI can call them
in-process; the FastAPI app registers the same functions as endpoints.
Catalogs and cluster enumerations are cached per process, which is the
point of running this as a resident service.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import phase
from ..errors import SoswallError
from ..clusters import dominant_level, free_energy
from ..lattice import Box, ExactOracleSettings, exact_level_distribution, exact_partition
from ..montecarlo import ChainConfig, run_chain
from ..params import ModelParams
from ..verify import format_table, run_verification
from . import models as m

SIM_COLUMNS = [
    "t", "u", "beta", "J", "K", "n_boundary", "L", "sweeps", "seed",
    "rho0", "rho0_se", "majority_level", "not_at_n", "not_at_n_se", "rho_z",
]


def handle_chalker(req: m.ChalkerRequest) -> m.ChalkerResponse:
    partial, complete = phase.chalker_thresholds(req.J, req.beta)
    return m.ChalkerResponse(
        classification=phase.chalker_classify(req.J, req.K, req.beta),
        u=2.0 * req.beta * (req.J - req.K),
        partial_threshold=partial,
        complete_threshold=complete,
    )


def handle_windows(req: m.WindowsRequest) -> m.WindowsResponse:
    rows = phase.layering_windows(req.t, req.epsilon, req.n_max)
    return m.WindowsResponse(
        windows=[m.Window(n=n, u_lo=lo, u_hi=hi) for n, lo, hi in rows]
    )


def handle_free_energy(req: m.FreeEnergyRequest) -> m.FreeEnergyResponse:
    s = free_energy(req.level, req.k, req.order)
    value = None
    if req.t is not None and req.u is not None:
        value = s.evaluate(req.t, req.u)
    return m.FreeEnergyResponse(
        level=req.level,
        k=req.k,
        order=req.order,
        u_linear_numerator=s.u_linear.numerator,
        u_linear_denominator=s.u_linear.denominator,
        terms=[
            m.SeriesTerm(
                t_power2=2 * p, u_power=q, numerator=c.numerator, denominator=c.denominator
            )
            for p, q, c in s.terms()
        ],
        dump=s.dump(),
        value=value,
    )


def handle_verify(req: m.VerifyRequest) -> m.VerifyResponse:
    res = run_verification(req.k, req.order)
    return m.VerifyResponse(
        rows=[
            m.VerifyRow(
                name=r.name, level=r.level, expected=r.expected, computed=r.computed, ok=r.ok
            )
            for r in res.rows
        ],
        all_ok=res.all_ok,
        all_computed=res.all_computed,
        exit_code=res.exit_code,
        table=format_table(res),
    )


def handle_dominant(req: m.DominantRequest) -> m.DominantResponse:
    rep = dominant_level(
        ModelParams(t=req.t, u=req.u, J=req.J), req.k, req.order, req.h_max
    )
    return m.DominantResponse(
        level=rep.level, margins=rep.margins, series_trusted=rep.series_trusted
    )


def _linspace(lo: float, hi: float, count: int) -> list[float]:
    if count == 1:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def handle_scan(req: m.ScanRequest) -> m.ScanResponse:
    tu = all(v is not None for v in (req.t_min, req.t_max, req.t_count, req.u_min, req.u_max, req.u_count))
    kb = all(
        v is not None
        for v in (req.K_min, req.K_max, req.K_count, req.beta_min, req.beta_max, req.beta_count)
    )
    if tu == kb:
        raise ValueError("give exactly one grid: (t,u) ranges or (K,beta) ranges")
    if tu:
        ts = _linspace(req.t_min, req.t_max, req.t_count)
        us = _linspace(req.u_min, req.u_max, req.u_count)
        points = phase.scan_grid(
            ts, us, J=req.J, epsilon=req.epsilon, k=req.k, order=req.order,
            h_max=req.h_max, n_max=req.n_max,
        )
    else:
        points = []
        for K in _linspace(req.K_min, req.K_max, req.K_count):
            for beta in _linspace(req.beta_min, req.beta_max, req.beta_count):
                p = ModelParams.from_couplings(J=req.J, K=K, beta=beta)
                points.append(
                    phase.classify_point(
                        p.t, p.u, req.J, req.epsilon, req.k, req.order, req.h_max, req.n_max
                    )
                )
        points.sort(key=lambda q: (q.t, q.u))
    return m.ScanResponse(n_points=len(points), csv=phase.points_to_csv(points))


def handle_simulate(req: m.SimulateRequest) -> m.SimulateResponse:
    params = ModelParams(t=req.t, u=req.u, J=req.J)
    chain = ChainConfig(
        box=Box(req.width, req.height, boundary_level=req.boundary),
        params=params,
        sweeps=req.sweeps,
        burn_in=req.burn_in,
        thin=req.thin,
        seed=req.seed,
        sampler=req.sampler,
        z_max=req.z_max,
    )
    obs = run_chain(chain)
    fields = dict(
        t=params.t,
        u=params.u,
        beta=params.beta,
        J=params.J,
        K=params.K,
        n_boundary=req.boundary,
        L=max(req.width, req.height),
        sweeps=req.sweeps,
        seed=req.seed,
        rho0=obs.rho0,
        rho0_se=obs.rho0_se,
        majority_level=obs.majority_level,
        not_at_n=obs.not_at_n,
        not_at_n_se=obs.not_at_n_se,
    )
    rho_z = [float(v) for v in obs.rho_z]
    row = [f"{fields[c]:.10g}" if isinstance(fields[c], float) else str(fields[c]) for c in SIM_COLUMNS[:-1]]
    row.append(";".join(f"{v:.10g}" for v in rho_z))
    csv = ",".join(SIM_COLUMNS) + "\n" + ",".join(row) + "\n"
    return m.SimulateResponse(**fields, rho_z=rho_z, csv=csv)


def handle_oracle(req: m.OracleRequest) -> m.OracleResponse:
    params = ModelParams(t=req.t, u=req.u, J=req.J)
    box = Box(req.width, req.height, boundary_level=req.boundary)
    settings = ExactOracleSettings(height_cap=req.height_cap, cap_tolerance=req.cap_tolerance)
    z, log_z = exact_partition(box, params, settings)
    dist = exact_level_distribution(box, params, settings, req.z_max)
    rho_z = dist.cumsum()
    return m.OracleResponse(
        log_z=log_z,
        z=z,
        level_distribution=[float(v) for v in dist],
        rho_z=[float(v) for v in rho_z],
    )


def build_app() -> FastAPI:
    app = FastAPI(title="soswall", version="0.1.0")

    def wrap(handler, req):
        try:
            return handler(req)
        except (SoswallError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/chalker", response_model=m.ChalkerResponse)
    def chalker(req: m.ChalkerRequest):
        return wrap(handle_chalker, req)

    @app.post("/windows", response_model=m.WindowsResponse)
    def windows(req: m.WindowsRequest):
        return wrap(handle_windows, req)

    @app.post("/free-energy", response_model=m.FreeEnergyResponse)
    def free_energy_ep(req: m.FreeEnergyRequest):
        return wrap(handle_free_energy, req)

    @app.post("/verify-coefficients", response_model=m.VerifyResponse)
    def verify(req: m.VerifyRequest):
        return wrap(handle_verify, req)

    @app.post("/dominant-level", response_model=m.DominantResponse)
    def dominant(req: m.DominantRequest):
        return wrap(handle_dominant, req)

    @app.post("/scan", response_model=m.ScanResponse)
    def scan(req: m.ScanRequest):
        return wrap(handle_scan, req)

    @app.post("/simulate", response_model=m.SimulateResponse)
    def simulate(req: m.SimulateRequest):
        return wrap(handle_simulate, req)

    @app.post("/oracle", response_model=m.OracleResponse)
    def oracle(req: m.OracleRequest):
        return wrap(handle_oracle, req)

    return app


app = build_app()
