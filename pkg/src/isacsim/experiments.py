"""Experiment harness: dataset generation, training, evaluation, sweeps.

Every run is a pure function of (config, master seed).  Randomness flows
from one root stream through fixed child ids:

    (1,)            sensing training pool        (2, k)   user-k training pool
    (3, si)         sensing test set, snr idx si (4, k, si) user-k test sets
    (10,), (11,)    SE-DNN init / shuffle        (12,), (13,)  CE-DNN init / shuffle
    (14, k), (15, k)  per-user CE init / shuffle
    (20,), (21,)    train/validation split shuffles (sensing / user pool)
    (30, si, r)     eval sensing realization r   (31, si, r)  eval comm realization
    (40, i), (41, i)  sub-roots for the i-th L-sweep / M-sweep point

CSV outputs use a header row, LF line endings and 17-significant-digit
floats, so byte-identical reruns are a meaningful determinism check.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import SystemConfig, draw_comm_channels, draw_sensing_channel
from .dataset import (Dataset, build_sensing_pair, build_user_pair,
                      generate_dataset, load_dataset, preprocess, save_dataset,
                      scale_targets, split)
from .estimators import ls_comm, ls_sense, nmse
from .neuralnet import (NetworkSpec, TrainConfig, build_ce_dnn, build_se_dnn,
                        forward, infer_channel, init_params, load_params,
                        save_params, train)
from .numerics import RngStream
from .protocol import (build_pilots, receive_sensing, receive_user,
                       sensing_noise_var, user_noise_var)

__all__ = [
    "ExperimentConfig", "desk_profile", "paper_profile", "load_config",
    "parse_config_text", "run_generate", "run_train", "run_eval",
    "run_sweep_l", "run_sweep_m", "write_csv", "render_line_chart",
    "config_to_text",
]


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    train_snrs_db: tuple = (10.0, 15.0, 20.0)
    test_snrs_db: tuple = tuple(np.arange(-10.0, 20.1, 2.5))
    v: int = 1000
    u: int = 10
    snr_ch_db: float = 30.0
    t_on: int = 1000
    rho: float = 1e4
    se_hidden: int = 256
    ce_filters1: int = 128
    ce_filters2: int = 64
    ce_kernel: int = 4
    ce_dense: int = 1024
    init_gain: float = 0.25
    ce_per_user: bool = False
    sweep_l_grid: tuple = (10, 15, 20, 25, 30)
    sweep_m_grid: tuple = (2, 4, 6, 8)
    sweep_snrs_db: tuple = (5.0, 15.0)
    seed: int = 1234
    out_dir: str = "runs"

    def __post_init__(self):
        if not self.train_snrs_db or not self.test_snrs_db:
            raise ValueError("SNR grids must be nonempty")
        if self.v * self.u < 1:
            raise ValueError("V*U must be >= 1")

    def se_spec(self) -> NetworkSpec:
        s = self.system
        return build_se_dnn(s.m, s.p, s.c, hidden=self.se_hidden)

    def ce_spec(self) -> NetworkSpec:
        s = self.system
        return build_ce_dnn(s.p, s.c, s.m, s.l, filters1=self.ce_filters1,
                            filters2=self.ce_filters2, kernel=self.ce_kernel,
                            dense=self.ce_dense)


def desk_profile() -> ExperimentConfig:
    """CPU-friendly default: every structural element of the full pipeline
    at a tractable size (smaller surface, fewer samples, smaller CE net)."""
    return ExperimentConfig(
        system=SystemConfig(l=16),
        train=TrainConfig(max_epochs=100),
        v=500, u=4,
        ce_filters1=32, ce_filters2=16, ce_dense=256,
    )


def paper_profile() -> ExperimentConfig:
    """Full-size configuration (L=30, V=1000, U=10, 300-epoch cap)."""
    return ExperimentConfig()


# ---- flat key=value config files -------------------------------------------

_SYSTEM_KEYS = {
    "m": int, "l": int, "k_users": int,
    "theta_s": float, "theta_b": float, "theta_i": float,
    "k_bi": float, "k_iu": float,
    "d_s": float, "d_bi": float, "d_iu": float,
    "gamma_s": float, "gamma_bi": float, "gamma_iu": float,
    "zeta0_db": float, "d0": float, "p0_dbm": float, "spacing_ratio": float,
}
_TRAIN_KEYS = {
    "lr": ("learning_rate", float), "batch": ("batch_size", int),
    "max_epochs": ("max_epochs", int), "patience": ("patience", int),
    "adam_beta1": ("beta1", float), "adam_beta2": ("beta2", float),
    "adam_epsilon": ("epsilon", float),
}


def _float_list(s: str) -> tuple:
    return tuple(float(x) for x in s.split(",") if x.strip())


def _int_list(s: str) -> tuple:
    return tuple(int(x) for x in s.split(",") if x.strip())


_EXP_KEYS = {
    "train_snrs_db": _float_list, "test_snrs_db": _float_list,
    "v": int, "u": int, "snr_ch_db": float, "t_on": int, "rho": float,
    "se_hidden": int, "ce_filters1": int, "ce_filters2": int,
    "ce_kernel": int, "ce_dense": int, "init_gain": float,
    "ce_per_user": lambda s: bool(int(s)),
    "sweep_l_grid": _int_list, "sweep_m_grid": _int_list,
    "sweep_snrs_db": _float_list,
    "seed": int, "out_dir": str,
}


def parse_config_text(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Apply ``key = value`` lines to a base profile; unknown keys are errors."""
    cfg = base if base is not None else desk_profile()
    sys_over: dict = {}
    train_over: dict = {}
    exp_over: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in _SYSTEM_KEYS:
            sys_over[key] = _SYSTEM_KEYS[key](val)
        elif key in _TRAIN_KEYS:
            attr, conv = _TRAIN_KEYS[key]
            train_over[attr] = conv(val)
        elif key in _EXP_KEYS:
            exp_over[key] = _EXP_KEYS[key](val)
        else:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
    if sys_over:
        exp_over["system"] = replace(cfg.system, **sys_over)
    if train_over:
        exp_over["train"] = replace(cfg.train, **train_over)
    return replace(cfg, **exp_over)


def load_config(path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), base=base)


def config_to_text(cfg: ExperimentConfig) -> str:
    """Serialize a config in the flat key=value schema (round-trippable)."""
    lines = []
    for key in _SYSTEM_KEYS:
        lines.append(f"{key} = {getattr(cfg.system, key)!r}")
    for key, (attr, _) in _TRAIN_KEYS.items():
        lines.append(f"{key} = {getattr(cfg.train, attr)!r}")
    for key in _EXP_KEYS:
        val = getattr(cfg, key)
        if isinstance(val, tuple):
            lines.append(f"{key} = {','.join(str(x) for x in val)}")
        elif isinstance(val, bool):
            lines.append(f"{key} = {int(val)}")
        elif isinstance(val, str):
            lines.append(f"{key} = {val}")
        else:
            lines.append(f"{key} = {val!r}")
    return "\n".join(lines) + "\n"


# ---- file layout ------------------------------------------------------------

def _sensing_train_path(out):
    return os.path.join(out, "sensing_train.ds")


def _user_train_path(out, k):
    return os.path.join(out, f"user{k}_train.ds")


def _se_params_path(out):
    return os.path.join(out, "se_params.bin")


def _ce_params_path(out, k=None):
    return os.path.join(out, "ce_params.bin" if k is None else f"ce_user{k}_params.bin")


def write_csv(path, header: str, rows) -> None:
    """Header + rows with 17-significant-digit floats, LF endings."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            cells = []
            for x in row:
                if isinstance(x, float):
                    cells.append(f"{x:.17g}")
                else:
                    cells.append(str(x))
            fh.write(",".join(cells) + "\n")


# ---- commands ----------------------------------------------------------------

def run_generate(cfg: ExperimentConfig) -> list[str]:
    """Write training pools and per-SNR test sets; returns the paths."""
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    root = RngStream(cfg.seed)
    paths = []

    ds = generate_dataset(cfg.system, "sensing", cfg.v, cfg.u, cfg.train_snrs_db,
                          cfg.snr_ch_db, root.child(1), rho=cfg.rho, role="train")
    save_dataset(ds, _sensing_train_path(out))
    paths.append(_sensing_train_path(out))

    for k in range(cfg.system.k_users):
        ds = generate_dataset(cfg.system, "user", cfg.v, cfg.u, cfg.train_snrs_db,
                              cfg.snr_ch_db, root.child(2, k), user=k,
                              rho=cfg.rho, role="train")
        save_dataset(ds, _user_train_path(out, k))
        paths.append(_user_train_path(out, k))

    for si, snr in enumerate(cfg.test_snrs_db):
        p = os.path.join(out, f"sensing_test_snr{snr:+.1f}.ds")
        ds = generate_dataset(cfg.system, "sensing", cfg.t_on, 1, [snr],
                              cfg.snr_ch_db, root.child(3, si), rho=cfg.rho, role="test")
        save_dataset(ds, p)
        paths.append(p)
        for k in range(cfg.system.k_users):
            p = os.path.join(out, f"user{k}_test_snr{snr:+.1f}.ds")
            ds = generate_dataset(cfg.system, "user", cfg.t_on, 1, [snr],
                                  cfg.snr_ch_db, root.child(4, k, si), user=k,
                                  rho=cfg.rho, role="test")
            save_dataset(ds, p)
            paths.append(p)
    return paths


def _concat(datasets: list[Dataset]) -> Dataset:
    first = datasets[0]
    return Dataset(
        kind=first.kind, m=first.m, p=first.p, c=first.c, l=first.l,
        inputs=np.concatenate([d.inputs for d in datasets]),
        targets=np.concatenate([d.targets for d in datasets]),
        meta=np.concatenate([d.meta for d in datasets]),
        rho=first.rho, role=first.role,
    )


def _fit(cfg: ExperimentConfig, spec: NetworkSpec, pool: Dataset,
         split_rng: RngStream, init_rng: RngStream, shuffle_rng: RngStream):
    """Split, standardize, scale and train one network on a sample pool."""
    tr, va, _ = split(pool, split_rng)
    preprocess(tr, [va], rho=cfg.rho)
    y_tr = np.asarray(scale_targets(tr.targets, cfg.rho), dtype=np.float64)
    y_va = np.asarray(scale_targets(va.targets, cfg.rho), dtype=np.float64)
    params = init_params(spec, init_rng, gain=cfg.init_gain)
    best, hist = train(spec, params, tr.inputs, y_tr, va.inputs, y_va,
                       cfg.train, shuffle_rng)
    return best, hist, tr.feature_mean, tr.feature_std


def _write_history(path, hist) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("epoch,train_loss,val_loss,is_best\n")
        for epoch, tl, vl, best in hist.epochs:
            fh.write(f"{epoch},{tl:.17g},{vl:.17g},{int(best)}\n")
        fh.write(f"# stop: {hist.stop_reason} (best epoch {hist.best_epoch})\n")


def run_train(cfg: ExperimentConfig) -> dict:
    """Train the echo-channel net on the sensing pool and the cascaded-
    channel net on the user pool (all users merged unless ``ce_per_user``);
    writes parameter files and per-epoch loss CSVs."""
    out = cfg.out_dir
    root = RngStream(cfg.seed)
    if not os.path.exists(_sensing_train_path(out)):
        raise FileNotFoundError(f"missing dataset {_sensing_train_path(out)}; "
                                "run generate first")
    results = {}

    pool = load_dataset(_sensing_train_path(out))
    se_spec = cfg.se_spec()
    if pool.input_len != se_spec.input_len:
        raise ValueError(f"dataset input length {pool.input_len} does not match "
                         f"network ({se_spec.input_len}); wrong config?")
    best, hist, mean, std = _fit(cfg, se_spec, pool, root.child(20),
                                 root.child(10), root.child(11))
    save_params(se_spec, best, _se_params_path(out), feature_mean=mean,
                feature_std=std, rho=cfg.rho)
    _write_history(os.path.join(out, "se_history.csv"), hist)
    results["se"] = hist

    user_pools = []
    for k in range(cfg.system.k_users):
        p = _user_train_path(out, k)
        if not os.path.exists(p):
            raise FileNotFoundError(f"missing dataset {p}; run generate first")
        user_pools.append(load_dataset(p))
    ce_spec = cfg.ce_spec()
    if cfg.ce_per_user:
        for k, pool in enumerate(user_pools):
            best, hist, mean, std = _fit(cfg, ce_spec, pool, root.child(21),
                                         root.child(14, k), root.child(15, k))
            save_params(ce_spec, best, _ce_params_path(out, k), feature_mean=mean,
                        feature_std=std, rho=cfg.rho)
            _write_history(os.path.join(out, f"ce_user{k}_history.csv"), hist)
            results[f"ce_user{k}"] = hist
    else:
        pool = _concat(user_pools)
        best, hist, mean, std = _fit(cfg, ce_spec, pool, root.child(21),
                                     root.child(12), root.child(13))
        save_params(ce_spec, best, _ce_params_path(out), feature_mean=mean,
                    feature_std=std, rho=cfg.rho)
        _write_history(os.path.join(out, "ce_history.csv"), hist)
        results["ce"] = hist
    return results


class _Net:
    """A loaded network plus the preprocessing it was trained with."""

    def __init__(self, path, spec: NetworkSpec):
        _, _, self.params, stats = load_params(path, expected_spec=spec)
        self.spec = spec
        self.mean = stats["feature_mean"]
        self.std = stats["feature_std"]
        self.rho = stats["rho"]

    def estimate(self, raw_inputs: np.ndarray, out_shape) -> np.ndarray:
        return infer_channel(self.spec, self.params, raw_inputs, self.mean,
                             self.std, self.rho, out_shape)


def _eval_point(cfg: ExperimentConfig, root: RngStream, si: int, snr: float,
                channels=("sensing", "communication"),
                se_net: "_Net | None" = None, ce_nets: "list[_Net] | None" = None):
    """NMSE rows for one test SNR: (channel, method, nmse, n) tuples."""
    sysc = cfg.system
    pilots = build_pilots(sysc)
    rows = []
    if "sensing" in channels:
        sigma2 = sensing_noise_var(sysc, snr)
        ls_r, inputs, truths = [], [], []
        for r in range(cfg.t_on):
            st = root.child(30, si, r)
            A, _ = draw_sensing_channel(sysc, st)
            fr = receive_sensing(A, pilots, sigma2, st)
            ls_r.append(nmse(ls_sense(fr, pilots), A))
            if se_net is not None:
                inputs.append(build_sensing_pair(fr, A).input)
                truths.append(A)
        rows.append(("sensing", "LS", float(np.mean(ls_r)), cfg.t_on))
        if se_net is not None:
            est = se_net.estimate(np.array(inputs), (sysc.m, sysc.m))
            dnn_r = [nmse(e, t) for e, t in zip(est, truths)]
            rows.append(("sensing", "SE-DNN", float(np.mean(dnn_r)), cfg.t_on))
    if "communication" in channels:
        vs2 = user_noise_var(sysc, snr)
        ls_r, per_user_inputs, per_user_truths = [], [], []
        for r in range(cfg.t_on):
            ct = root.child(31, si, r)
            _, _, b_list = draw_comm_channels(sysc, ct)
            for k in range(sysc.k_users):
                uf = receive_user(b_list[k], pilots, vs2, ct, user=k)
                ls_r.append(nmse(ls_comm(uf, pilots), b_list[k]))
                if ce_nets is not None:
                    per_user_inputs.append((k, build_user_pair(uf, b_list[k]).input))
                    per_user_truths.append(b_list[k])
        n = cfg.t_on * sysc.k_users
        rows.append(("communication", "LS", float(np.mean(ls_r)), n))
        if ce_nets is not None:
            dnn_r = []
            shape = (sysc.m, sysc.l)
            # batch per user-net (one shared net = single batch)
            by_net: dict[int, list[int]] = {}
            for i, (k, _) in enumerate(per_user_inputs):
                net_idx = k if len(ce_nets) > 1 else 0
                by_net.setdefault(net_idx, []).append(i)
            est_all: dict[int, np.ndarray] = {}
            for net_idx, idxs in by_net.items():
                batch = np.array([per_user_inputs[i][1] for i in idxs])
                est = ce_nets[net_idx].estimate(batch, shape)
                for j, i in enumerate(idxs):
                    est_all[i] = est[j]
            for i, truth in enumerate(per_user_truths):
                dnn_r.append(nmse(est_all[i], truth))
            rows.append(("communication", "CE-DNN", float(np.mean(dnn_r)), n))
    return rows


def _load_nets(cfg: ExperimentConfig, skip_dnn: bool):
    se_net = None
    ce_nets = None
    if not skip_dnn:
        se_net = _Net(_se_params_path(cfg.out_dir), cfg.se_spec())
        if cfg.ce_per_user:
            ce_nets = [_Net(_ce_params_path(cfg.out_dir, k), cfg.ce_spec())
                       for k in range(cfg.system.k_users)]
        else:
            ce_nets = [_Net(_ce_params_path(cfg.out_dir), cfg.ce_spec())]
    return se_net, ce_nets


def run_eval(cfg: ExperimentConfig, skip_dnn: bool = False,
             out_name: str = "eval.csv") -> str:
    """NMSE-versus-SNR table over the test grid; returns the CSV path."""
    root = RngStream(cfg.seed)
    se_net, ce_nets = _load_nets(cfg, skip_dnn)
    rows = []
    for si, snr in enumerate(cfg.test_snrs_db):
        for channel, method, val, n in _eval_point(cfg, root, si, snr,
                                                   se_net=se_net, ce_nets=ce_nets):
            rows.append((float(snr), channel, method, val, n))
    path = os.path.join(cfg.out_dir, out_name)
    os.makedirs(cfg.out_dir, exist_ok=True)
    write_csv(path, "snr_db,channel,method,nmse,n", rows)
    return path


def _sweep_point_cfg(cfg: ExperimentConfig, **system_over) -> ExperimentConfig:
    return replace(cfg, system=replace(cfg.system, **system_over))


def run_sweep_l(cfg: ExperimentConfig, skip_dnn: bool = False,
                out_name: str = "sweep_l.csv") -> str:
    """Retrain the cascaded-channel net for each surface size L and score it
    (plus LS) at the sweep SNRs.  Returns the CSV path."""
    rows = []
    for li, l_val in enumerate(sorted(cfg.sweep_l_grid)):
        pcfg = _sweep_point_cfg(cfg, l=int(l_val))
        sub = RngStream(cfg.seed).child(40, li)
        ce_net = None
        if not skip_dnn:
            ce_net = _train_in_memory(pcfg, "user", sub)
        for si, snr in enumerate(pcfg.sweep_snrs_db):
            point = _eval_point(pcfg, sub, si, snr, channels=("communication",),
                                ce_nets=None if ce_net is None else [ce_net])
            for channel, method, val, n in point:
                rows.append((int(l_val), float(snr), channel, method, val, n))
    path = os.path.join(cfg.out_dir, out_name)
    os.makedirs(cfg.out_dir, exist_ok=True)
    write_csv(path, "l,snr_db,channel,method,nmse,n", rows)
    return path


def run_sweep_m(cfg: ExperimentConfig, skip_dnn: bool = False,
                out_name: str = "sweep_m.csv",
                channels=("sensing", "communication")) -> str:
    """Retrain both nets for each antenna count M and score them at the
    sweep SNRs.  ``channels`` restricts the evaluation (and the training
    cost) to one channel kind when only one trend is of interest."""
    rows = []
    for mi, m_val in enumerate(sorted(cfg.sweep_m_grid)):
        pcfg = _sweep_point_cfg(cfg, m=int(m_val))
        sub = RngStream(cfg.seed).child(41, mi)
        se_net = ce_net = None
        if not skip_dnn:
            if "sensing" in channels:
                se_net = _train_in_memory(pcfg, "sensing", sub)
            if "communication" in channels:
                ce_net = _train_in_memory(pcfg, "user", sub)
        for si, snr in enumerate(pcfg.sweep_snrs_db):
            point = _eval_point(pcfg, sub, si, snr, channels=channels,
                                se_net=se_net,
                                ce_nets=None if ce_net is None else [ce_net])
            for channel, method, val, n in point:
                rows.append((int(m_val), float(snr), channel, method, val, n))
    path = os.path.join(cfg.out_dir, out_name)
    os.makedirs(cfg.out_dir, exist_ok=True)
    write_csv(path, "m,snr_db,channel,method,nmse,n", rows)
    return path


def _train_in_memory(cfg: ExperimentConfig, kind: str, sub_root: RngStream) -> _Net:
    """Generate + train one network without touching the filesystem.

    Sweep points retrain from scratch (input dimensions change with L and
    M); the user pool merges all K users as in :func:`run_train`.
    """
    if kind == "sensing":
        pool = generate_dataset(cfg.system, "sensing", cfg.v, cfg.u,
                                cfg.train_snrs_db, cfg.snr_ch_db,
                                sub_root.child(1), rho=cfg.rho)
        spec = cfg.se_spec()
        best, hist, mean, std = _fit(cfg, spec, pool, sub_root.child(20),
                                     sub_root.child(10), sub_root.child(11))
    else:
        pools = [generate_dataset(cfg.system, "user", cfg.v, cfg.u,
                                  cfg.train_snrs_db, cfg.snr_ch_db,
                                  sub_root.child(2, k), user=k, rho=cfg.rho)
                 for k in range(cfg.system.k_users)]
        pool = _concat(pools)
        spec = cfg.ce_spec()
        best, hist, mean, std = _fit(cfg, spec, pool, sub_root.child(21),
                                     sub_root.child(12), sub_root.child(13))
    net = _Net.__new__(_Net)
    net.spec = spec
    net.params = best
    net.mean = mean
    net.std = std
    net.rho = cfg.rho
    return net


# ---- minimal static chart ---------------------------------------------------

def render_line_chart(csv_path, svg_path, x_col: str, y_col: str = "nmse",
                      series_cols=("channel", "method")) -> str:
    """Tiny dependency-free SVG line chart of a results CSV (log-y)."""
    import csv as _csv
    import math as _math
    with open(csv_path, newline="") as fh:
        rows = [r for r in _csv.DictReader(fh) if not r[x_col].startswith("#")]
    series: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        key = "/".join(r[c] for c in series_cols)
        series.setdefault(key, []).append((float(r[x_col]), float(r[y_col])))
    W, H, PAD = 640, 420, 50
    xs = [p[0] for pts in series.values() for p in pts]
    ys = [_math.log10(max(p[1], 1e-300)) for pts in series.values() for p in pts]
    x0, x1 = min(xs), max(xs) or 1.0
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    def sx(x):
        return PAD + (x - x0) / (x1 - x0) * (W - 2 * PAD)
    def sy(y):
        return H - PAD - (y - y0) / (y1 - y0) * (H - 2 * PAD)
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">',
             f'<rect width="{W}" height="{H}" fill="white"/>',
             f'<text x="{W/2}" y="{H-10}" text-anchor="middle" font-size="12">{x_col}</text>',
             f'<text x="14" y="{H/2}" font-size="12" transform="rotate(-90 14 {H/2})" '
             f'text-anchor="middle">log10 {y_col}</text>']
    for i, (key, pts) in enumerate(sorted(series.items())):
        pts = sorted(pts)
        path = " ".join(f"{sx(x):.1f},{sy(_math.log10(max(y,1e-300))):.1f}" for x, y in pts)
        color = colors[i % len(colors)]
        parts.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{W-PAD+4}" y="{PAD+14*i}" font-size="10" fill="{color}">{key}</text>')
    parts.append("</svg>")
    with open(svg_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
    return svg_path
