"""Configuration format, orchestration, CSV determinism, CLI surface."""

import numpy as np
import pytest

from kgpml.cli import main as cli_main
from kgpml.config import SolverConfig, parse_config, serialize_config
from kgpml.errors import ConfigurationError
from kgpml.runner import observed_orders, run_convergence, run_single, run_sweep, simulate

BASIC = """
# a small classical run
formulation = pml2
profile = bermudez
bermudez_k = 2
sigma0 = 3.0
delta = 0.5
r_policy = fixed
r_value = 1.0
lambda = 1.0
L = 4.0
N = 72
tau = 0.02
T_final = 0.4
preset = gaussian_sech
reference_enlargement = 4
snapshot_stride = 10
"""


class TestConfigParsing:
    def test_parse_basic(self):
        cfg = parse_config(BASIC)
        assert cfg.formulation == "pml2"
        assert cfg.profile == "bermudez"
        assert cfg.lam == 1.0
        assert cfg.t_final == 0.4
        assert cfg.N == 72

    def test_round_trip_idempotent(self):
        cfg = parse_config(BASIC)
        text1 = serialize_config(cfg)
        cfg2 = parse_config(text1)
        assert cfg2 == cfg
        assert serialize_config(cfg2) == text1

    def test_sweep_section(self):
        cfg = parse_config(BASIC + "\n[sweep]\nsigma0 = 2, 4, 6\ndelta = 0.375, 0.75\n")
        assert cfg.sweep == {"sigma0": (2.0, 4.0, 6.0), "delta": (0.375, 0.75)}
        rt = parse_config(serialize_config(cfg))
        assert rt == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigurationError):
            parse_config("frobnicate = 3\n")

    def test_unsweepable_parameter_rejected(self):
        with pytest.raises(ConfigurationError):
            parse_config(BASIC + "\n[sweep]\nN = 72, 144\n")

    def test_complex_shift_parsing(self):
        cfg = parse_config(
            BASIC.replace("r_value = 1.0", "r_value = 0.7071067811865476+0.7071067811865475j")
            + "demo_stability = true\n"
        )
        assert cfg.r_value.imag != 0.0
        assert parse_config(serialize_config(cfg)) == cfg

    def test_rule_pml1_needs_polynomial(self):
        with pytest.raises(ConfigurationError, match="pml1"):
            parse_config(BASIC.replace("formulation = pml2", "formulation = pml1"))

    def test_rule_nonrel_needs_eps(self):
        with pytest.raises(ConfigurationError, match="nonrel"):
            SolverConfig(scaling="nonrel", eps=1.0)

    def test_rule_complex_r_needs_demo(self):
        with pytest.raises(ConfigurationError, match="demo"):
            SolverConfig(r_value=1j)

    def test_resolved_shift_policy(self):
        cfg = SolverConfig(scaling="nonrel", eps=0.5, r_policy="inverse_eps2", r_value=2.0)
        assert cfg.resolved_shift() == pytest.approx(8.0)
        assert SolverConfig(r_value=2.0).resolved_shift() == pytest.approx(2.0)


def small_cfg(**kw):
    base = parse_config(BASIC)
    return base.with_updates(**kw)


class TestSimulate:
    def test_snapshot_indices(self):
        cfg = small_cfg(t_final=0.4, tau=0.02, snapshot_stride=10)
        samples = simulate(cfg)
        assert [s.index for s in samples] == [0, 10, 20]
        np.testing.assert_allclose([s.t for s in samples], [0.0, 0.2, 0.4])

    def test_pml1_and_pml2_agree_on_resolved_run(self):
        # both schemes approximate the same layer-free interior dynamics
        c1 = small_cfg(formulation="pml1", profile="polynomial", sigma0=8.0, tau=0.005, t_final=0.5)
        c2 = small_cfg(formulation="pml2", profile="polynomial", sigma0=8.0, tau=0.005, t_final=0.5)
        s1 = simulate(c1)[-1]
        s2 = simulate(c2)[-1]
        d = np.max(np.abs(s1.u.values - s2.u.values)) / np.max(np.abs(s1.u.values))
        assert d < 5e-3

    def test_centered_velocity_consistency(self):
        # the pml2 velocity snapshot approximates the pml1 velocity field
        c1 = small_cfg(formulation="pml1", profile="polynomial", tau=0.004, t_final=0.2)
        c2 = small_cfg(formulation="pml2", profile="polynomial", tau=0.004, t_final=0.2)
        v1 = simulate(c1)[-1].u_dot.values
        v2 = simulate(c2)[-1].u_dot.values
        assert np.max(np.abs(v1 - v2)) / np.max(np.abs(v1)) < 5e-3


class TestRunSingle:
    def test_csv_written_and_deterministic(self, tmp_path):
        cfg = small_cfg(output=str(tmp_path / "a"))
        m1 = run_single(cfg)
        data1 = (tmp_path / "a" / "run.csv").read_bytes()
        m2 = run_single(cfg, out_dir=tmp_path / "b")
        data2 = (tmp_path / "b" / "run.csv").read_bytes()
        assert data1 == data2
        assert (tmp_path / "a" / "manifest.json").exists()

    def test_header_only_for_zero_horizon(self, tmp_path):
        cfg = small_cfg(t_final=0.0)
        run_single(cfg, out_dir=tmp_path)
        lines = (tmp_path / "run.csv").read_text().splitlines()
        data = [ln for ln in lines if not ln.startswith("#")]
        assert data == ["t,e2_pml,einf_pml,HI_pml,HI_ref,gmres_iters,umax"]

    def test_error_columns_populated(self, tmp_path):
        cfg = small_cfg(t_final=0.2, tau=0.02, snapshot_stride=5)
        run_single(cfg, out_dir=tmp_path)
        lines = [ln for ln in (tmp_path / "run.csv").read_text().splitlines() if not ln.startswith("#")]
        header, *rows = lines
        assert header.split(",") == ["t", "e2_pml", "einf_pml", "HI_pml", "HI_ref", "gmres_iters", "umax"]
        first = rows[0].split(",")
        assert float(first[0]) == 0.0
        assert float(first[1]) < 1e-12  # identical initial data
        last = rows[-1].split(",")
        assert 0.0 < float(last[1]) < 0.2  # small but nonzero layer error
        assert float(last[3]) > 0.0 and float(last[4]) > 0.0

    def test_no_reference_gives_nan_columns(self, tmp_path):
        cfg = small_cfg(reference_enlargement=0, t_final=0.1, tau=0.02)
        run_single(cfg, out_dir=tmp_path)
        rows = [ln for ln in (tmp_path / "run.csv").read_text().splitlines() if not ln.startswith("#")][1:]
        assert "nan" in rows[-1]

    def test_demo_stability_probe_csv(self, tmp_path):
        cfg = small_cfg(
            profile="polynomial",
            sigma0=8.0,
            r_value=complex(np.cos(np.pi / 4), np.sin(np.pi / 4)),
            demo_stability=True,
            tau=0.05,
            t_final=1.0,
        )
        run_single(cfg, out_dir=tmp_path)
        rows = [ln for ln in (tmp_path / "run.csv").read_text().splitlines() if not ln.startswith("#")][1:]
        assert len(rows) >= 2
        umax0 = float(rows[0].split(",")[-1])
        assert umax0 == pytest.approx(5.0, rel=1e-6)


class TestRunConvergence:
    def test_tau_axis_second_order(self, tmp_path):
        cfg = small_cfg(
            profile="polynomial", sigma0=8.0, N=144, tau=0.05, t_final=0.5,
            reference_enlargement=0,
        )
        run_convergence(cfg, "tau", 3, out_dir=tmp_path, reference_tau=1e-3)
        rows = [
            ln.split(",")
            for ln in (tmp_path / "convergence_tau.csv").read_text().splitlines()
            if not ln.startswith("#")
        ][1:]
        errors = [float(r[1]) for r in rows]
        orders = observed_orders(errors)
        assert all(1.5 < o < 2.5 for o in orders)

    def test_single_level_degenerate(self, tmp_path):
        cfg = small_cfg(N=72, tau=0.05, t_final=0.2)
        run_convergence(cfg, "tau", 1, out_dir=tmp_path, reference_tau=5e-3)
        rows = [
            ln for ln in (tmp_path / "convergence_tau.csv").read_text().splitlines()
            if not ln.startswith("#")
        ][1:]
        assert len(rows) == 1
        assert rows[0].split(",")[-1] == "nan"

    def test_bad_axis_rejected(self, tmp_path):
        with pytest.raises(ConfigurationError):
            run_convergence(small_cfg(), "time", 2, out_dir=tmp_path)


class TestRunSweep:
    def test_empty_grid_rejected(self, tmp_path):
        with pytest.raises(ConfigurationError):
            run_sweep(small_cfg(), out_dir=tmp_path)

    def test_rows_and_determinism(self, tmp_path):
        cfg = small_cfg(t_final=0.2, tau=0.02, sweep={"sigma0": (2.0, 6.0)})
        run_sweep(cfg, out_dir=tmp_path / "a")
        run_sweep(cfg, out_dir=tmp_path / "b")
        a = (tmp_path / "a" / "sweep.csv").read_bytes()
        b = (tmp_path / "b" / "sweep.csv").read_bytes()
        assert a == b
        rows = [ln for ln in a.decode().splitlines() if not ln.startswith("#")]
        assert rows[0] == "sigma0,e2_pml,einf_pml"
        assert len(rows) == 3

    def test_parallel_equals_serial(self, tmp_path):
        cfg = small_cfg(t_final=0.2, tau=0.02, sweep={"sigma0": (2.0, 6.0), "delta": (0.375, 0.5)})
        run_sweep(cfg, out_dir=tmp_path / "serial", workers=1)
        run_sweep(cfg, out_dir=tmp_path / "par", workers=2)
        assert (tmp_path / "serial" / "sweep.csv").read_bytes() == (tmp_path / "par" / "sweep.csv").read_bytes()


class TestCli:
    def test_run_command(self, tmp_path, capsys):
        cfg_file = tmp_path / "case.cfg"
        cfg_file.write_text(BASIC + f"output = {tmp_path / 'out'}\n")
        rc = cli_main(["run", str(cfg_file)])
        assert rc == 0
        assert (tmp_path / "out" / "run.csv").exists()
        assert "run.csv" in capsys.readouterr().out

    def test_run_out_flag_and_seedless(self, tmp_path):
        cfg_file = tmp_path / "case.cfg"
        cfg_file.write_text(BASIC)
        rc = cli_main(["run", str(cfg_file), "--out", str(tmp_path / "o2"), "--seedless"])
        assert rc == 0
        assert (tmp_path / "o2" / "run.csv").exists()

    def test_converge_command(self, tmp_path):
        cfg_file = tmp_path / "case.cfg"
        cfg_file.write_text(BASIC.replace("T_final = 0.4", "T_final = 0.2"))
        rc = cli_main([
            "converge", str(cfg_file), "--axis", "tau", "--levels", "2",
            "--out", str(tmp_path / "conv"),
        ])
        assert rc == 0
        assert (tmp_path / "conv" / "convergence_tau.csv").exists()

    def test_sweep_command(self, tmp_path):
        cfg_file = tmp_path / "case.cfg"
        cfg_file.write_text(BASIC + "T_final = 0.1\n[sweep]\nsigma0 = 3, 6\n")
        rc = cli_main(["sweep", str(cfg_file), "--out", str(tmp_path / "sw")])
        assert rc == 0
        assert (tmp_path / "sw" / "sweep.csv").exists()

    def test_invalid_config_exit_code(self, tmp_path, capsys):
        cfg_file = tmp_path / "bad.cfg"
        cfg_file.write_text("formulation = pml1\nprofile = bermudez\n")
        rc = cli_main(["run", str(cfg_file)])
        assert rc == 2
        assert "error" in capsys.readouterr().err

    def test_demo_stability_flag(self, tmp_path):
        cfg_file = tmp_path / "case.cfg"
        cfg_file.write_text(
            BASIC.replace("profile = bermudez", "profile = polynomial")
            .replace("r_value = 1.0", "r_value = 0.9238795325112867+0.3826834323650898j")
            + "T_final = 0.2\n"
        )
        rc = cli_main(["run", str(cfg_file), "--out", str(tmp_path / "d"), "--demo-stability"])
        assert rc == 0
