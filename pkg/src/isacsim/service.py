"""HTTP estimation service.

Wraps the online part of the toolkit: draw a synthetic frame set, or
submit received frames and get a channel estimate back (least squares
always; the trained networks when a run directory with parameter files is
supplied).  Batch work — dataset generation, training, sweeps — stays in
the command-line interface, which is where multi-minute jobs belong.

Complex matrices travel as separate real/imaginary grids so payloads stay
plain JSON.
"""

from __future__ import annotations

import os

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .channel import draw_comm_channels, draw_sensing_channel
from .dataset import build_sensing_pair, build_user_pair
from .estimators import ls_comm, ls_sense
from .experiments import (ExperimentConfig, config_to_text, desk_profile,
                          paper_profile)
from .numerics import RngStream
from .protocol import (SensingFrames, UserFrames, build_pilots,
                       receive_sensing, receive_user, sensing_noise_var,
                       user_noise_var)

__all__ = ["create_app"]


class ComplexMatrix(BaseModel):
    re: list[list[float]]
    im: list[list[float]]

    def to_array(self) -> np.ndarray:
        re = np.asarray(self.re, dtype=np.float64)
        im = np.asarray(self.im, dtype=np.float64)
        if re.ndim != 2 or re.shape != im.shape or re.size == 0:
            raise HTTPException(422, "re/im must be equal-shape 2-D grids")
        return re + 1j * im

    @classmethod
    def from_array(cls, a: np.ndarray) -> "ComplexMatrix":
        a = np.atleast_2d(a)
        return cls(re=a.real.tolist(), im=a.imag.tolist())


class SimulateRequest(BaseModel):
    snr_db: float
    seed: int = Field(ge=0)
    user: int = 0


class SimulateSensingResponse(BaseModel):
    y: list[ComplexMatrix]          # one M x P block per reflection pattern
    a_true: ComplexMatrix
    snr_db: float


class SimulateUserResponse(BaseModel):
    z: ComplexMatrix                # C x P observations
    b_true: ComplexMatrix
    user: int
    snr_db: float


class EstimateSensingRequest(BaseModel):
    y: list[ComplexMatrix]
    method: str = "ls"


class EstimateUserRequest(BaseModel):
    z: ComplexMatrix
    method: str = "ls"
    user: int = 0


class EstimateResponse(BaseModel):
    estimate: ComplexMatrix
    method: str


class HealthResponse(BaseModel):
    status: str
    version: str
    dnn_loaded: bool


def _config_dict(cfg: ExperimentConfig) -> dict:
    out = {}
    for line in config_to_text(cfg).splitlines():
        key, val = (s.strip() for s in line.split("=", 1))
        out[key] = val
    return out


def _maybe_load_nets(cfg: ExperimentConfig, params_dir):
    """Load trained nets when the files are present; missing files just
    disable the dnn method (wrong-architecture files are a hard error)."""
    from .experiments import _ce_params_path, _Net, _se_params_path
    se_net = None
    ce_nets = None
    if params_dir:
        se_path = _se_params_path(params_dir)
        if os.path.exists(se_path):
            se_net = _Net(se_path, cfg.se_spec())
        if cfg.ce_per_user:
            paths = [_ce_params_path(params_dir, k)
                     for k in range(cfg.system.k_users)]
            if all(os.path.exists(p) for p in paths):
                ce_nets = [_Net(p, cfg.ce_spec()) for p in paths]
        elif os.path.exists(_ce_params_path(params_dir)):
            ce_nets = [_Net(_ce_params_path(params_dir), cfg.ce_spec())]
    return se_net, ce_nets


def create_app(cfg: ExperimentConfig | None = None,
               params_dir: str | None = None) -> FastAPI:
    cfg = cfg if cfg is not None else desk_profile()
    sysc = cfg.system
    pilots = build_pilots(sysc)
    se_net, ce_nets = _maybe_load_nets(cfg, params_dir)

    app = FastAPI(title="isacsim", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__,
                              dnn_loaded=se_net is not None)

    @app.get("/profiles")
    def profiles():
        return {"desk": _config_dict(desk_profile()),
                "paper": _config_dict(paper_profile())}

    @app.get("/config")
    def config():
        return _config_dict(cfg)

    @app.post("/simulate/sensing", response_model=SimulateSensingResponse)
    def simulate_sensing(req: SimulateRequest):
        rng = RngStream(req.seed)
        A, _ = draw_sensing_channel(sysc, rng)
        frames = receive_sensing(A, pilots, sensing_noise_var(sysc, req.snr_db), rng)
        return SimulateSensingResponse(
            y=[ComplexMatrix.from_array(frames.Y[c]) for c in range(sysc.c)],
            a_true=ComplexMatrix.from_array(A), snr_db=req.snr_db)

    @app.post("/simulate/user", response_model=SimulateUserResponse)
    def simulate_user(req: SimulateRequest):
        if not 0 <= req.user < sysc.k_users:
            raise HTTPException(422, f"user must be in [0, {sysc.k_users})")
        rng = RngStream(req.seed)
        _, _, b_list = draw_comm_channels(sysc, rng)
        frames = receive_user(b_list[req.user], pilots,
                              user_noise_var(sysc, req.snr_db), rng, user=req.user)
        return SimulateUserResponse(
            z=ComplexMatrix.from_array(frames.z),
            b_true=ComplexMatrix.from_array(b_list[req.user]),
            user=req.user, snr_db=req.snr_db)

    @app.post("/estimate/sensing", response_model=EstimateResponse)
    def estimate_sensing(req: EstimateSensingRequest):
        if len(req.y) != sysc.c:
            raise HTTPException(422, f"expected {sysc.c} frame blocks, got {len(req.y)}")
        Y = np.stack([cm.to_array() for cm in req.y])
        if Y.shape != (sysc.c, sysc.m, sysc.p):
            raise HTTPException(422, f"expected blocks of shape "
                                f"({sysc.m}, {sysc.p}), got {Y.shape[1:]}")
        frames = SensingFrames(Y=Y, sigma2=float("nan"))  # submitted, var unknown
        if req.method == "ls":
            a_hat = ls_sense(frames, pilots)
        elif req.method == "dnn":
            if se_net is None:
                raise HTTPException(409, "no trained parameters loaded; "
                                    "start the service with --params-dir")
            x = build_sensing_pair(frames, np.zeros((sysc.m, sysc.m))).input
            a_hat = se_net.estimate(x, (sysc.m, sysc.m))
        else:
            raise HTTPException(422, f"unknown method {req.method!r}")
        return EstimateResponse(estimate=ComplexMatrix.from_array(a_hat),
                                method=req.method)

    @app.post("/estimate/user", response_model=EstimateResponse)
    def estimate_user(req: EstimateUserRequest):
        if not 0 <= req.user < sysc.k_users:
            raise HTTPException(422, f"user must be in [0, {sysc.k_users})")
        z = req.z.to_array()
        if z.shape != (sysc.c, sysc.p):
            raise HTTPException(422, f"expected observations of shape "
                                f"({sysc.c}, {sysc.p}), got {z.shape}")
        frames = UserFrames(z=z, varsigma2=float("nan"), user=req.user)
        if req.method == "ls":
            b_hat = ls_comm(frames, pilots)
        elif req.method == "dnn":
            if ce_nets is None:
                raise HTTPException(409, "no trained parameters loaded; "
                                    "start the service with --params-dir")
            net = ce_nets[req.user if len(ce_nets) > 1 else 0]
            x = build_user_pair(frames, np.zeros((sysc.m, sysc.l))).input
            b_hat = net.estimate(x, (sysc.m, sysc.l))
        else:
            raise HTTPException(422, f"unknown method {req.method!r}")
        return EstimateResponse(estimate=ComplexMatrix.from_array(b_hat),
                                method=req.method)

    return app
