import os
from dataclasses import replace

import pytest

from isacsim.experiments import (config_to_text, desk_profile, load_config,
                                 paper_profile, parse_config_text,
                                 render_line_chart, run_eval, run_generate,
                                 run_sweep_l, run_sweep_m, run_train)

MICRO = """
m = 2
l = 4
k_users = 2
v = 24
u = 2
max_epochs = 4
patience = 4
batch = 32
t_on = 12
train_snrs_db = 10,20
test_snrs_db = 0,10
se_hidden = 16
ce_filters1 = 4
ce_filters2 = 4
ce_dense = 16
sweep_l_grid = 4,6,8
sweep_m_grid = 2,3,4
seed = 7
"""


@pytest.fixture
def micro(tmp_path):
    cfg = parse_config_text(MICRO)
    return replace(cfg, out_dir=str(tmp_path / "run"))


def _read(path):
    with open(path, newline="") as fh:
        return fh.read()


class TestConfig:
    def test_profiles_differ_where_expected(self):
        desk, paper = desk_profile(), paper_profile()
        assert desk.system.l == 16 and paper.system.l == 30
        assert desk.v == 500 and paper.v == 1000
        assert desk.u == 4 and paper.u == 10
        assert desk.train.max_epochs == 100 and paper.train.max_epochs == 300
        assert desk.system.m == paper.system.m == 4

    def test_default_grids(self):
        paper = paper_profile()
        assert paper.sweep_l_grid == (10, 15, 20, 25, 30)
        assert paper.sweep_m_grid == (2, 4, 6, 8)
        assert paper.sweep_snrs_db == (5.0, 15.0)
        assert paper.test_snrs_db[0] == -10.0 and paper.test_snrs_db[-1] == 20.0
        assert len(paper.test_snrs_db) == 13

    def test_parse_overrides(self):
        cfg = parse_config_text("m = 6\nlr = 1e-3\nv = 77\n# comment\n\n")
        assert cfg.system.m == 6
        assert cfg.train.learning_rate == 1e-3
        assert cfg.v == 77
        # untouched keys keep the base profile values
        assert cfg.system.l == desk_profile().system.l

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown key"):
            parse_config_text("warp_factor = 9")

    def test_malformed_line_rejected(self):
        with pytest.raises(ValueError, match="key=value"):
            parse_config_text("just words")

    def test_text_roundtrip(self):
        cfg = parse_config_text(MICRO)
        again = parse_config_text(config_to_text(cfg), base=paper_profile())
        assert again == cfg

    def test_load_from_file(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("seed = 99\nout_dir = somewhere\n")
        cfg = load_config(p)
        assert cfg.seed == 99 and cfg.out_dir == "somewhere"


class TestGenerate:
    def test_writes_expected_files(self, micro):
        paths = run_generate(micro)
        # one sensing pool, K user pools, then (1 + K) per test SNR
        k = micro.system.k_users
        n_test_snrs = len(micro.test_snrs_db)
        assert len(paths) == 1 + k + n_test_snrs * (1 + k)
        for p in paths:
            assert os.path.exists(p)

    def test_pool_sizes(self, micro):
        from isacsim.dataset import load_dataset
        run_generate(micro)
        pool = load_dataset(os.path.join(micro.out_dir, "sensing_train.ds"))
        assert len(pool) == micro.v * micro.u * len(micro.train_snrs_db)
        test = load_dataset(os.path.join(micro.out_dir, "sensing_test_snr+0.0.ds"))
        assert len(test) == micro.t_on
        assert set(test.meta[:, 2]) == {1.0}          # no augmented copies


class TestTrainCommand:
    def test_requires_generated_pools(self, micro):
        with pytest.raises(FileNotFoundError, match="generate"):
            run_train(micro)

    def test_writes_params_and_history(self, micro):
        run_generate(micro)
        hists = run_train(micro)
        assert set(hists) == {"se", "ce"}
        for stem in ("se_params.bin", "ce_params.bin", "se_history.csv",
                     "ce_history.csv"):
            assert os.path.exists(os.path.join(micro.out_dir, stem))
        hist_lines = _read(os.path.join(micro.out_dir, "se_history.csv")).splitlines()
        assert hist_lines[0] == "epoch,train_loss,val_loss,is_best"
        assert hist_lines[-1].startswith("# stop: ")
        # data rows never exceed the epoch cap
        assert len(hist_lines) - 2 <= micro.train.max_epochs

    def test_per_user_flag_trains_one_net_each(self, micro):
        cfg = replace(micro, ce_per_user=True)
        run_generate(cfg)
        hists = run_train(cfg)
        assert set(hists) == {"se", "ce_user0", "ce_user1"}
        for k in range(cfg.system.k_users):
            assert os.path.exists(os.path.join(cfg.out_dir, f"ce_user{k}_params.bin"))

    def test_wrong_dimension_pool_rejected(self, micro):
        run_generate(micro)
        bigger = replace(micro, system=replace(micro.system, m=3))
        with pytest.raises(ValueError, match="input length"):
            run_train(bigger)


class TestEvalCommand:
    def test_csv_layout(self, micro):
        run_generate(micro)
        run_train(micro)
        path = run_eval(micro)
        lines = _read(path).splitlines()
        assert lines[0] == "snr_db,channel,method,nmse,n"
        # per SNR: LS + net for each of the two channel kinds
        assert len(lines) - 1 == len(micro.test_snrs_db) * 4
        cells = [l.split(",") for l in lines[1:]]
        assert {c[1] for c in cells} == {"sensing", "communication"}
        assert {c[2] for c in cells} == {"LS", "SE-DNN", "CE-DNN"}
        for c in cells:
            assert float(c[3]) > 0
            assert int(c[4]) in (micro.t_on, micro.t_on * micro.system.k_users)

    def test_skip_dnn_gives_ls_only(self, micro):
        path = run_eval(replace(micro, out_dir=str(micro.out_dir) + "_ls"),
                        skip_dnn=True)
        lines = _read(path).splitlines()
        assert len(lines) - 1 == len(micro.test_snrs_db) * 2
        assert all(l.split(",")[2] == "LS" for l in lines[1:])

    def test_line_endings_and_precision(self, micro):
        path = run_eval(replace(micro, out_dir=str(micro.out_dir) + "_fmt"),
                        skip_dnn=True)
        blob = open(path, "rb").read()
        assert b"\r" not in blob
        value = _read(path).splitlines()[1].split(",")[3]
        # 17 significant digits survive a float round trip
        assert float(value) == float(f"{float(value):.17g}")

    def test_rerun_is_byte_identical(self, micro):
        run_generate(micro)
        run_train(micro)
        p1 = run_eval(micro, out_name="one.csv")
        p2 = run_eval(micro, out_name="two.csv")
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_chart_rendering(self, micro):
        path = run_eval(replace(micro, out_dir=str(micro.out_dir) + "_plot"),
                        skip_dnn=True)
        svg = render_line_chart(path, path.replace(".csv", ".svg"), "snr_db")
        blob = _read(svg)
        assert blob.startswith("<svg") and "polyline" in blob


class TestSweeps:
    def test_surface_sweep_rows(self, micro):
        path = run_sweep_l(micro)
        lines = _read(path).splitlines()
        assert lines[0] == "l,snr_db,channel,method,nmse,n"
        # 3 L values x 2 SNRs x {LS, CE-DNN}
        assert len(lines) - 1 == 12
        assert all(l.split(",")[2] == "communication" for l in lines[1:])

    def test_antenna_sweep_rows(self, micro):
        path = run_sweep_m(micro)
        lines = _read(path).splitlines()
        assert lines[0] == "m,snr_db,channel,method,nmse,n"
        # 3 M values x 2 SNRs x 2 channels x 2 methods
        assert len(lines) - 1 == 24

    def test_antenna_sweep_single_channel(self, micro):
        path = run_sweep_m(micro, channels=("sensing",), out_name="sm_sense.csv")
        lines = _read(path).splitlines()
        assert len(lines) - 1 == 12
        assert all(l.split(",")[1 + 1] == "sensing" for l in lines[1:])

    def test_sweep_skip_dnn(self, micro):
        path = run_sweep_l(micro, skip_dnn=True, out_name="sl_ls.csv")
        lines = _read(path).splitlines()
        assert len(lines) - 1 == 6
        assert all(l.split(",")[3] == "LS" for l in lines[1:])


class TestCli:
    def test_full_cycle_via_argv(self, tmp_path, capsys):
        from isacsim.cli import main
        cfg_file = tmp_path / "micro.cfg"
        cfg_file.write_text(MICRO)
        out = str(tmp_path / "cli_run")
        assert main(["generate", "--config", str(cfg_file), "--out", out]) == 0
        assert main(["train", "--config", str(cfg_file), "--out", out]) == 0
        assert main(["eval", "--config", str(cfg_file), "--out", out,
                     "--plot"]) == 0
        printed = capsys.readouterr().out
        assert "eval.csv" in printed and "eval.svg" in printed
        assert os.path.exists(os.path.join(out, "eval.csv"))
        assert os.path.exists(os.path.join(out, "eval.svg"))

    def test_seed_override_changes_output(self, tmp_path):
        from isacsim.cli import main
        cfg_file = tmp_path / "micro.cfg"
        cfg_file.write_text(MICRO)
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        main(["eval", "--config", str(cfg_file), "--out", out1, "--skip-dnn"])
        main(["eval", "--config", str(cfg_file), "--out", out2, "--skip-dnn",
              "--seed", "8"])
        a = open(os.path.join(out1, "eval.csv")).read()
        b = open(os.path.join(out2, "eval.csv")).read()
        assert a != b

    def test_unknown_command_exits(self):
        from isacsim.cli import main
        with pytest.raises(SystemExit):
            main(["bogus-command"])
