"""Pilot-protocol simulation: training matrices and received frames.

One estimation round spans C sub-frames; the surface holds its phase vector
v_c constant for the P slots of sub-frame c while the BS transmits the pilot
matrix X.  The BS hears the echo

    Y_c = A^H X + N_c,            N_c i.i.d. CN(0, sigma^2),

and user k receives (row form across the P slots)

    z_{k,c} = v_c^H B_k^H X + w_{k,c},   w i.i.d. CN(0, varsigma^2).

Power convention (normative for every oracle in this package): the transmit
power P0 is carried entirely by X (each column has squared norm P0) and the
channels carry path loss, so the receive SNRs are P0*zeta_S/sigma^2 and
P0*zeta_BI*zeta_IU/varsigma^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import SystemConfig
from .numerics import db_to_linear, dft_matrix, randn_complex

__all__ = [
    "PilotConfig",
    "SensingFrames",
    "UserFrames",
    "build_pilots",
    "sensing_noise_var",
    "user_noise_var",
    "receive_sensing",
    "receive_user",
]


@dataclass(frozen=True)
class PilotConfig:
    X: np.ndarray          # M x P pilot matrix, X X^H = P0 I
    V: np.ndarray          # L x C phase matrix, unit-modulus entries, V V^H = L I
    p0_linear: float


@dataclass
class SensingFrames:
    Y: np.ndarray          # (C, M, P)
    sigma2: float


@dataclass
class UserFrames:
    z: np.ndarray          # (C, P)
    varsigma2: float
    user: int = 0


def build_pilots(cfg: SystemConfig) -> PilotConfig:
    """Power-scaled DFT pilot and unnormalized DFT phase schedule.

    X = sqrt(P0) * DFT_norm(M) so X X^H = P0 I; V = DFT(L) unnormalized so
    every entry has unit modulus (full reflection amplitude) and V V^H = L I.
    """
    p0 = cfg.p0_linear
    X = np.sqrt(p0) * dft_matrix(cfg.m, normalized=True)
    V = dft_matrix(cfg.l, normalized=False)
    return PilotConfig(X=X, V=V, p0_linear=p0)


def sensing_noise_var(cfg: SystemConfig, snr_db: float) -> float:
    """sigma^2 = P0 * zeta_S / 10^(snr/10) (mW per complex entry)."""
    denom = db_to_linear(snr_db)
    if denom == np.inf:
        return 0.0
    return cfg.p0_linear * cfg.zeta_s / denom


def user_noise_var(cfg: SystemConfig, snr_db: float) -> float:
    """varsigma^2 = P0 * zeta_BI * zeta_IU / 10^(snr/10)."""
    denom = db_to_linear(snr_db)
    if denom == np.inf:
        return 0.0
    return cfg.p0_linear * cfg.zeta_bi * cfg.zeta_iu / denom


def receive_sensing(A: np.ndarray, pilots: PilotConfig, sigma2: float,
                    rng, residual_si: np.ndarray | None = None) -> SensingFrames:
    """Echo frames Y_c = A^H X + N_c, c = 1..C.

    ``residual_si`` optionally injects an uncompensated self-interference
    term (added to every frame); the default models perfect compensation.
    """
    C = pilots.V.shape[1]
    M, P = A.shape[0], pilots.X.shape[1]
    S = A.conj().T @ pilots.X
    if residual_si is not None:
        S = S + residual_si
    noise = randn_complex(C * M, P, sigma2, rng).reshape(C, M, P)
    return SensingFrames(Y=S[None, :, :] + noise, sigma2=sigma2)


def receive_user(B_k: np.ndarray, pilots: PilotConfig, varsigma2: float,
                 rng, user: int = 0) -> UserFrames:
    """User-side rows z_{k,c} = v_c^H B_k^H X + w over the C sub-frames."""
    # stack all sub-frames: row c of (V^H B_k^H X) is v_c^H B_k^H X
    S = pilots.V.conj().T @ B_k.conj().T @ pilots.X        # (C, P)
    noise = randn_complex(S.shape[0], S.shape[1], varsigma2, rng)
    return UserFrames(z=S + noise, varsigma2=varsigma2, user=user)
