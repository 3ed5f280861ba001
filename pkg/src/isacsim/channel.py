"""Ground-truth channel generation: geometry, path loss, fading.

The base station senses a point target through a rank-1 echo channel A and
serves K single-antenna users through a reflecting surface of L elements:

    A   = sqrt(zeta_S) * alpha_S * a(theta_S) a(theta_S)^T        (M x M)
    G   = sqrt(zeta_BI) * Rician(K_BI, a(theta_B) a(theta_I)^H)   (M x L)
    f_k = sqrt(zeta_IU) * Rayleigh (K_IU = 0)                     (L,)
    B_k = G diag(f_k)                                             (M x L)

Path-loss amplitudes are folded into the channel coefficients so the target
scaling used by the learning stage acts on physically-scaled magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import RngStream, db_to_linear, randn_complex

__all__ = [
    "SystemConfig",
    "ChannelRealization",
    "steering_vector",
    "path_loss_linear",
    "draw_sensing_channel",
    "draw_rician",
    "draw_comm_channels",
    "draw_realization",
]


@dataclass(frozen=True)
class SystemConfig:
    """Physical and geometric parameters of the link.

    The pilot protocol fixes P = M (slots per sub-frame) and C = L
    (sub-frames), so both are exposed as read-only properties.
    """

    m: int = 4                    # BS antennas (tx = rx)
    l: int = 30                   # reflecting elements
    k_users: int = 3
    theta_s: float = -2.0 * np.pi / 3.0
    theta_b: float = np.pi / 3.0
    theta_i: float = np.pi / 3.0
    k_bi: float = 10.0            # Rician factor BS-IRS (linear)
    k_iu: float = 0.0             # Rician factor IRS-UE (0 = Rayleigh)
    d_s: float = 140.0            # BS-target distance (m)
    d_bi: float = 50.0
    d_iu: float = 2.0
    gamma_s: float = 3.0          # path-loss exponents
    gamma_bi: float = 2.3
    gamma_iu: float = 2.0
    zeta0_db: float = -30.0       # reference path loss at d0
    d0: float = 1.0
    p0_dbm: float = 20.0          # transmit power
    spacing_ratio: float = 0.5    # antenna/element spacing over wavelength

    def __post_init__(self):
        if self.m < 1 or self.l < 1 or self.k_users < 1:
            raise ValueError("m, l, k_users must be >= 1")
        if self.k_bi < 0 or self.k_iu < 0:
            raise ValueError("Rician factors must be >= 0")
        if min(self.d_s, self.d_bi, self.d_iu, self.d0) <= 0:
            raise ValueError("distances must be positive")

    @property
    def p(self) -> int:
        return self.m

    @property
    def c(self) -> int:
        return self.l

    @property
    def p0_linear(self) -> float:
        """Transmit power in mW."""
        return db_to_linear(self.p0_dbm)

    @property
    def zeta_s(self) -> float:
        return path_loss_linear(self.zeta0_db, self.d_s, self.d0, self.gamma_s)

    @property
    def zeta_bi(self) -> float:
        return path_loss_linear(self.zeta0_db, self.d_bi, self.d0, self.gamma_bi)

    @property
    def zeta_iu(self) -> float:
        return path_loss_linear(self.zeta0_db, self.d_iu, self.d0, self.gamma_iu)


@dataclass
class ChannelRealization:
    """One joint draw of the sensing and communication channels."""

    A: np.ndarray
    G: np.ndarray
    f: list = field(default_factory=list)    # K vectors, length L
    B: list = field(default_factory=list)    # K matrices, M x L
    alpha_s: complex = 1.0 + 0.0j


def steering_vector(theta: float, n: int, spacing_ratio: float = 0.5) -> np.ndarray:
    r"""Array response e^{j 2\pi (d/\lambda) m sin(theta)}, m = 0..n-1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.exp(2j * np.pi * spacing_ratio * np.arange(n) * np.sin(theta))


def path_loss_linear(zeta0_db: float, d: float, d0: float, gamma: float) -> float:
    """10^(zeta0_db/10) * (d/d0)^(-gamma), linear scale."""
    if d <= 0 or d0 <= 0:
        raise ValueError("distances must be positive")
    return db_to_linear(zeta0_db) * (d / d0) ** (-gamma)


def draw_sensing_channel(cfg: SystemConfig, rng: RngStream):
    """Rank-1 echo channel and its unit-modulus reflection coefficient.

    Returns (A, alpha_s) with A = sqrt(zeta_S) alpha_S a a^T (plain
    transpose, so A is exactly symmetric) and the phase of alpha_S uniform
    on [0, 2pi).
    """
    g = rng.generator if isinstance(rng, RngStream) else rng
    alpha = np.exp(1j * g.uniform(0.0, 2.0 * np.pi))
    a = steering_vector(cfg.theta_s, cfg.m, cfg.spacing_ratio)
    A = np.sqrt(cfg.zeta_s) * alpha * np.outer(a, a)
    return A, alpha


def draw_rician(rows: int, cols: int, k_factor: float, los: np.ndarray,
                zeta: float, rng) -> np.ndarray:
    r"""sqrt(zeta) ( sqrt(K/(K+1)) los + sqrt(1/(K+1)) W ), W i.i.d. CN(0,1)."""
    if k_factor < 0:
        raise ValueError("k_factor must be >= 0")
    if zeta <= 0:
        raise ValueError("zeta must be positive")
    los = np.asarray(los, dtype=complex)
    if los.shape != (rows, cols):
        raise ValueError(f"los shape {los.shape} != ({rows}, {cols})")
    nlos = randn_complex(rows, cols, 1.0, rng)
    return np.sqrt(zeta) * (
        np.sqrt(k_factor / (k_factor + 1.0)) * los
        + np.sqrt(1.0 / (k_factor + 1.0)) * nlos
    )


def draw_comm_channels(cfg: SystemConfig, rng: RngStream):
    """Draw (G, [f_k], [B_k]) for all users from one stream.

    The reflected-path LoS is a(theta_B) a(theta_I)^H; user links are
    Rayleigh for K_IU = 0 (the default), with an all-ones LoS placeholder
    otherwise.
    """
    a_b = steering_vector(cfg.theta_b, cfg.m, cfg.spacing_ratio)
    a_i = steering_vector(cfg.theta_i, cfg.l, cfg.spacing_ratio)
    los = np.outer(a_b, a_i.conj())
    G = draw_rician(cfg.m, cfg.l, cfg.k_bi, los, cfg.zeta_bi, rng)
    f_list, b_list = [], []
    ones = np.ones((cfg.l, 1), dtype=complex)
    for _ in range(cfg.k_users):
        f_k = draw_rician(cfg.l, 1, cfg.k_iu, ones, cfg.zeta_iu, rng).reshape(-1)
        f_list.append(f_k)
        b_list.append(G * f_k[None, :])   # G @ diag(f_k)
    return G, f_list, b_list


def draw_realization(cfg: SystemConfig, rng: RngStream) -> ChannelRealization:
    A, alpha = draw_sensing_channel(cfg, rng)
    G, f_list, b_list = draw_comm_channels(cfg, rng)
    return ChannelRealization(A=A, G=G, f=f_list, B=b_list, alpha_s=alpha)
