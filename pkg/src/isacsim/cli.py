"""Command-line entry point.

Batch commands (generate/train/eval/sweep-l/sweep-m) run in-process so a
whole study is one deterministic artifact of (config, seed).  ``serve``
exposes the online estimation surface over HTTP and ``client`` is a thin
JSON passthrough for it.

BLAS thread counts default to 1 for run-to-run reproducibility; set
ISACSIM_THREADS (or the usual OMP/BLAS variables) to override.
"""

import argparse
import json
import os
import sys

_threads = os.environ.get("ISACSIM_THREADS", "1")
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
             "NUMEXPR_NUM_THREADS"):
    os.environ.setdefault(_var, _threads)

from . import experiments  # noqa: E402  (thread env must be set before numpy)


def _build_config(args) -> experiments.ExperimentConfig:
    from dataclasses import replace
    base = experiments.paper_profile() if args.profile == "paper" \
        else experiments.desk_profile()
    cfg = experiments.load_config(args.config, base=base) if args.config else base
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, out_dir=args.out)
    return cfg


def _add_common(p):
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--out", help="run directory (overrides config)")
    p.add_argument("--profile", choices=("desk", "paper"), default="desk",
                   help="base profile the config file patches (default desk)")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="isacsim",
        description="Channel simulation, estimation and learning experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write training pools and test sets")
    _add_common(p)

    p = sub.add_parser("train", help="train both networks on generated pools")
    _add_common(p)

    p = sub.add_parser("eval", help="NMSE-vs-SNR table for LS and the networks")
    _add_common(p)
    p.add_argument("--skip-dnn", action="store_true", help="LS baselines only")
    p.add_argument("--plot", action="store_true",
                   help="also render a static SVG line chart")

    p = sub.add_parser("sweep-l", help="retrain/evaluate across surface sizes")
    _add_common(p)
    p.add_argument("--skip-dnn", action="store_true")
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("sweep-m", help="retrain/evaluate across antenna counts")
    _add_common(p)
    p.add_argument("--skip-dnn", action="store_true")
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("serve", help="run the HTTP estimation service")
    _add_common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--params-dir",
                   help="run directory with trained parameter files "
                        "(enables the dnn method; defaults to the run dir)")

    p = sub.add_parser("client", help="JSON passthrough to a running service")
    p.add_argument("path", help="endpoint path, e.g. /health")
    p.add_argument("--url", default="http://127.0.0.1:8000",
                   help="service base URL")
    p.add_argument("--data", help="JSON body; its presence makes the call POST")

    args = parser.parse_args(argv)

    if args.command == "client":
        return _client(args)

    cfg = _build_config(args)

    if args.command == "generate":
        paths = experiments.run_generate(cfg)
        print(f"wrote {len(paths)} dataset files under {cfg.out_dir}")
        return 0

    if args.command == "train":
        hists = experiments.run_train(cfg)
        for name, h in hists.items():
            print(f"{name}: stopped by {h.stop_reason} after {len(h.epochs)} "
                  f"epochs (best val {h.best_val:.6g} at epoch {h.best_epoch})")
        return 0

    if args.command in ("eval", "sweep-l", "sweep-m"):
        run = {"eval": experiments.run_eval,
               "sweep-l": experiments.run_sweep_l,
               "sweep-m": experiments.run_sweep_m}[args.command]
        path = run(cfg, skip_dnn=args.skip_dnn)
        print(f"wrote {path}")
        if args.plot:
            x_col = {"eval": "snr_db", "sweep-l": "l", "sweep-m": "m"}[args.command]
            svg = experiments.render_line_chart(
                path, os.path.splitext(path)[0] + ".svg", x_col)
            print(f"wrote {svg}")
        return 0

    if args.command == "serve":
        import uvicorn

        from .service import create_app
        app = create_app(cfg, params_dir=args.params_dir or cfg.out_dir)
        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    parser.error(f"unknown command {args.command}")
    return 2


def _client(args) -> int:
    import urllib.error
    import urllib.request
    url = args.url.rstrip("/") + "/" + args.path.lstrip("/")
    body = args.data.encode("utf-8") if args.data else None
    req = urllib.request.Request(
        url, data=body,
        headers={"Content-Type": "application/json"} if body else {},
        method="POST" if body else "GET")
    try:
        with urllib.request.urlopen(req) as resp:
            payload = resp.read().decode("utf-8")
    except urllib.error.HTTPError as e:
        print(e.read().decode("utf-8", "replace"), file=sys.stderr)
        return 1
    except urllib.error.URLError as e:
        print(f"cannot reach {url}: {e.reason}", file=sys.stderr)
        return 1
    try:
        print(json.dumps(json.loads(payload), indent=2))
    except json.JSONDecodeError:
        print(payload)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
