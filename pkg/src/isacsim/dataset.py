"""Training data construction: input/target pairs, augmentation, splits.

A sensing sample packs the C received frames into a real vector of length
2MPC ([Re; Im] of the column-stacked horizontal concatenation); its target
is the packed ground-truth channel (length 2M^2).  A user sample packs the C
received rows (length 2PC) against the packed cascaded channel (2ML).

Targets are stored **unscaled**; the trainer asks for a rho-scaled view.
The scale/unscale pair runs in 80-bit extended precision so that for the
default rho = 1e4 (and any modest power of ten) the round trip is exact to
the bit: a float64 mantissa (53 bits) times 5^4 needs at most 63 bits, which
extended precision holds without rounding.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .channel import SystemConfig, draw_comm_channels, draw_sensing_channel
from .numerics import RngStream, fro_norm_sq, pack_complex, randn_complex, vec
from .protocol import (SensingFrames, UserFrames, build_pilots, receive_sensing,
                       receive_user, sensing_noise_var, user_noise_var)

__all__ = [
    "Sample",
    "Dataset",
    "build_sensing_pair",
    "build_user_pair",
    "augment_channel",
    "generate_dataset",
    "preprocess",
    "split",
    "scale_targets",
    "unscale_targets",
    "save_dataset",
    "load_dataset",
    "STD_FLOOR",
]

STD_FLOOR = 1e-12

_MAGIC = "isacds1"


@dataclass
class Sample:
    input: np.ndarray
    target: np.ndarray
    snr_db: float
    v: int
    u: int


@dataclass
class Dataset:
    """Column-oriented sample container.

    ``inputs``/``targets`` are (count, len) float64 arrays; ``meta`` holds
    one (snr_db, v, u) row per sample.  ``feature_mean``/``feature_std`` are
    set once :func:`preprocess` has standardized the inputs.
    """

    kind: str                    # "sensing" | "user"
    m: int
    p: int
    c: int
    l: int
    inputs: np.ndarray
    targets: np.ndarray          # unscaled; see scale_targets
    meta: np.ndarray
    rho: float = 1e4
    role: str = "train"
    feature_mean: np.ndarray | None = None
    feature_std: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("sensing", "user"):
            raise ValueError(f"unknown dataset kind {self.kind!r}")
        if len(self.inputs) != len(self.targets) or len(self.inputs) != len(self.meta):
            raise ValueError("inputs/targets/meta length mismatch")

    def __len__(self) -> int:
        return len(self.inputs)

    def sample(self, i: int) -> Sample:
        s, v, u = self.meta[i]
        return Sample(self.inputs[i], self.targets[i], float(s), int(v), int(u))

    @property
    def input_len(self) -> int:
        return self.inputs.shape[1]

    @property
    def target_len(self) -> int:
        return self.targets.shape[1]

    def expected_input_len(self) -> int:
        if self.kind == "sensing":
            return 2 * self.m * self.p * self.c
        return 2 * self.p * self.c


def build_sensing_pair(frames: SensingFrames, A: np.ndarray) -> Sample:
    """[Re; Im] of vec[Y_1, ..., Y_C] against [Re; Im] of vec(A)."""
    stacked = np.concatenate(list(frames.Y), axis=1)      # M x (P*C)
    return Sample(
        input=pack_complex(vec(stacked)),
        target=pack_complex(vec(A)),
        snr_db=np.nan, v=0, u=0,
    )


def build_user_pair(frames: UserFrames, B_k: np.ndarray) -> Sample:
    """[Re; Im] of the concatenated rows [z_1, ..., z_C] against vec(B_k)."""
    return Sample(
        input=pack_complex(frames.z.reshape(-1)),
        target=pack_complex(vec(B_k)),
        snr_db=np.nan, v=0, u=0,
    )


def augment_channel(H: np.ndarray, snr_ch_db: float, rng) -> np.ndarray:
    """Channel-domain corruption H + N at perturbation SNR ``snr_ch_db``.

    N is i.i.d. CN(0, sigma_ch^2) with sigma_ch^2 = P_ch / 10^(snr_ch/10)
    and P_ch the mean per-entry power of H.
    """
    H = np.asarray(H)
    p_ch = fro_norm_sq(H) / H.size
    if p_ch <= 0.0:
        raise ValueError("cannot augment a zero channel")
    sigma_ch2 = p_ch / (10.0 ** (snr_ch_db / 10.0))
    return H + randn_complex(H.shape[0], H.shape[1], sigma_ch2, rng)


def generate_dataset(cfg: SystemConfig, kind: str, V: int, U: int,
                     snr_db_list, snr_ch_db: float, rng: RngStream,
                     user: int = 0, rho: float = 1e4, role: str = "train") -> Dataset:
    """V fresh channels x U copies per SNR point.

    Copy u=1 pairs the clean channel with its own frames; copies u>=2
    corrupt the channel via :func:`augment_channel`, simulate frames from
    the corrupted channel with fresh receiver noise, and keep the ORIGINAL
    channel as the target.  Per-(snr, v) substreams make generation order-
    independent and reproducible.
    """
    if V < 1 or U < 1:
        raise ValueError("V and U must be >= 1")
    pilots = build_pilots(cfg)
    inputs, targets, meta = [], [], []
    for si, snr_db in enumerate(snr_db_list):
        if kind == "sensing":
            nvar = sensing_noise_var(cfg, snr_db)
        else:
            nvar = user_noise_var(cfg, snr_db)
        for v in range(V):
            ch_rng = rng.child(si, v, 0)
            if kind == "sensing":
                H, _ = draw_sensing_channel(cfg, ch_rng)
            else:
                _, _, b_list = draw_comm_channels(cfg, ch_rng)
                H = b_list[user]
            for u in range(1, U + 1):
                fr_rng = rng.child(si, v, u)
                Hu = H if u == 1 else augment_channel(H, snr_ch_db, fr_rng)
                if kind == "sensing":
                    frames = receive_sensing(Hu, pilots, nvar, fr_rng)
                    pair = build_sensing_pair(frames, H)
                else:
                    frames = receive_user(Hu, pilots, nvar, fr_rng, user=user)
                    pair = build_user_pair(frames, H)
                inputs.append(pair.input)
                targets.append(pair.target)
                meta.append((snr_db, v, u))
    return Dataset(
        kind=kind, m=cfg.m, p=cfg.p, c=cfg.c, l=cfg.l,
        inputs=np.array(inputs), targets=np.array(targets),
        meta=np.array(meta, dtype=np.float64), rho=rho, role=role,
    )


def preprocess(train: Dataset, others: list[Dataset] | None = None,
               rho: float | None = None) -> None:
    """Standardize inputs in place using TRAINING statistics only.

    Features whose training standard deviation falls below ``STD_FLOOR``
    are mapped to exactly zero everywhere (they carry no information).
    The statistics are stored on every dataset for inference-time reuse.
    """
    if len(train) == 0:
        raise ValueError("empty training dataset")
    mean = train.inputs.mean(axis=0)
    std = train.inputs.std(axis=0)
    scale = np.where(std < STD_FLOOR, 0.0, 1.0 / np.where(std < STD_FLOOR, 1.0, std))
    for ds in [train] + list(others or []):
        ds.inputs = (ds.inputs - mean) * scale
        ds.feature_mean = mean.copy()
        ds.feature_std = std.copy()
        if rho is not None:
            ds.rho = float(rho)


def standardize_like(x: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    """Apply stored training statistics to fresh inputs (inference path)."""
    scale = np.where(std < STD_FLOOR, 0.0, 1.0 / np.where(std < STD_FLOOR, 1.0, std))
    return (np.asarray(x) - mean) * scale


def split(ds: Dataset, rng: RngStream, train_frac: float = 0.9,
          val_frac_of_train: float = 0.1):
    """Shuffled disjoint (train, validation, test) partition.

    The validation set is carved out of the training fraction, e.g. 10^4
    samples -> 8100 / 900 / 1000.
    """
    if not (0.0 < train_frac < 1.0 and 0.0 < val_frac_of_train < 1.0):
        raise ValueError("fractions must lie in (0, 1)")
    n = len(ds)
    perm = rng.generator.permutation(n)
    n_train_part = int(train_frac * n)
    n_val = int(val_frac_of_train * n_train_part)
    idx_val = perm[:n_val]
    idx_train = perm[n_val:n_train_part]
    idx_test = perm[n_train_part:]

    def take(idx, role):
        return Dataset(
            kind=ds.kind, m=ds.m, p=ds.p, c=ds.c, l=ds.l,
            inputs=ds.inputs[idx].copy(), targets=ds.targets[idx].copy(),
            meta=ds.meta[idx].copy(), rho=ds.rho, role=role,
            feature_mean=None if ds.feature_mean is None else ds.feature_mean.copy(),
            feature_std=None if ds.feature_std is None else ds.feature_std.copy(),
        )

    return take(idx_train, "train"), take(idx_val, "validation"), take(idx_test, "test")


# ---- exact rho codec ------------------------------------------------------

def scale_targets(targets: np.ndarray, rho: float) -> np.ndarray:
    """targets * rho in extended precision (see module docstring).

    Returns a longdouble array; cast to float64 for training, or feed back
    into :func:`unscale_targets` for a bit-exact inverse.
    """
    return np.asarray(targets, dtype=np.longdouble) * np.longdouble(rho)


def unscale_targets(scaled: np.ndarray, rho: float) -> np.ndarray:
    """Exact inverse of :func:`scale_targets`; returns float64."""
    return np.asarray(
        np.asarray(scaled, dtype=np.longdouble) / np.longdouble(rho),
        dtype=np.float64,
    )


# ---- serialization --------------------------------------------------------

def _header(ds: Dataset) -> str:
    has_stats = int(ds.feature_mean is not None)
    fields = [_MAGIC, ds.kind, ds.m, ds.p, ds.c, ds.l, len(ds),
              ds.input_len, ds.target_len, repr(float(ds.rho)), ds.role, has_stats]
    return ",".join(str(f) for f in fields) + "\n"


def save_dataset(ds: Dataset, path) -> None:
    """Flat binary container: one text header line, then little-endian
    float64 blocks — optional feature stats, samples (input then target,
    sample-major), then the (snr_db, v, u) metadata triples."""
    with open(path, "wb") as fh:
        fh.write(_header(ds).encode("ascii"))
        if ds.feature_mean is not None:
            fh.write(ds.feature_mean.astype("<f8").tobytes())
            fh.write(ds.feature_std.astype("<f8").tobytes())
        inter = np.concatenate([ds.inputs, ds.targets], axis=1)
        fh.write(inter.astype("<f8").tobytes())
        fh.write(ds.meta.astype("<f8").tobytes())


def load_dataset(path) -> Dataset:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").strip()
        parts = header.split(",")
        if len(parts) != 12 or parts[0] != _MAGIC:
            raise ValueError(f"not a dataset file: {path}")
        kind = parts[1]
        m, p, c, l, count, input_len, target_len = (int(x) for x in parts[2:9])
        rho = float(parts[9])
        role = parts[10]
        has_stats = bool(int(parts[11]))
        body = fh.read()
    need = (2 * input_len * has_stats + count * (input_len + target_len) + 3 * count) * 8
    if len(body) != need:
        raise ValueError(f"truncated dataset file: expected {need} payload bytes, "
                         f"got {len(body)}")
    buf = io.BytesIO(body)

    def block(n):
        return np.frombuffer(buf.read(8 * n), dtype="<f8").astype(np.float64)

    mean = std = None
    if has_stats:
        mean = block(input_len)
        std = block(input_len)
    inter = block(count * (input_len + target_len)).reshape(count, input_len + target_len)
    meta = block(3 * count).reshape(count, 3)
    return Dataset(
        kind=kind, m=m, p=p, c=c, l=l,
        inputs=inter[:, :input_len].copy(), targets=inter[:, input_len:].copy(),
        meta=meta, rho=rho, role=role, feature_mean=mean, feature_std=std,
    )
