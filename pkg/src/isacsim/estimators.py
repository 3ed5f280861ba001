"""Least-squares benchmark estimators and the NMSE metric.

With the scaled-unitary pilots of this package both estimators are exact on
noiseless frames, and their Monte-Carlo NMSE admits closed forms under the
declared power convention:

    sensing:        NMSE_LS = 1 / (C * snr_linear)
    communication:  NMSE_LS ~ 1 / (L * snr_linear)

(the communication form carries a small Jensen gap of roughly L/(L-1)
because the per-realization ratio is averaged over random ||B||^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import fro_norm_sq, pinv_square
from .protocol import PilotConfig, SensingFrames, UserFrames

__all__ = ["EstimationReport", "ls_sense", "ls_comm", "nmse"]


@dataclass
class EstimationReport:
    estimate: np.ndarray
    truth: np.ndarray
    nmse: float
    method: str = "LS"


def ls_sense(frames: SensingFrames, pilots: PilotConfig) -> np.ndarray:
    r"""LS sensing estimate: mean over sub-frames of (Y_c X^\dag)^H.

    The expectation over noise is realized as the arithmetic mean of the C
    available sub-frames, the only data the receiver has.
    """
    Xd = pinv_square(pilots.X)
    Ybar = frames.Y.mean(axis=0)
    return (Ybar @ Xd).conj().T


def ls_comm(frames: UserFrames, pilots: PilotConfig) -> np.ndarray:
    r"""LS cascaded-channel estimate from the stacked user rows.

    Each row is first stripped of the pilot (z X^\dag), giving
    Z~ = V^H B^H + noise; the phase schedule is then inverted with
    V^\dag = V^H (V V^H)^{-1}, i.e. B-hat = Z~^H V^\dag for square V.
    """
    Xd = pinv_square(pilots.X)
    Vd = pinv_square(pilots.V)
    Zt = frames.z @ Xd        # (C, M), noiseless value V^H B^H
    return Zt.conj().T @ Vd   # (M, L):  Z~^H V^dag = B V V^dag = B


def nmse(estimate: np.ndarray, truth: np.ndarray) -> float:
    """||estimate - truth||_F^2 / ||truth||_F^2 for one realization."""
    denom = fro_norm_sq(truth)
    if denom <= 0.0:
        raise ValueError("truth has zero norm")
    return fro_norm_sq(np.asarray(estimate) - np.asarray(truth)) / denom
