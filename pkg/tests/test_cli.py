"""Scenario parsing, CSV/JSON outputs, exit codes, and the subcommands."""

import json
import math
import types

import numpy as np
import pytest

from conftest import reference_config
from tadgame.cli import (
    ScenarioFile,
    ScenarioError,
    SummaryRecord,
    _rel_err,
    _resolve_scenario,
    main,
    parse_scenario,
    read_trajectory_csv,
    write_trajectory_csv,
)
from tadgame.game import propagate_analytical
from tadgame.winning import g1 as g1_scalar
from tadgame.winning import g2 as g2_scalar

H_F = 0.006283185307179587

DEFAULTS = {
    "mu": "398603.0",
    "p": "10000.0",
    "e": "0.1",
    "f0": "0.0",
    "ff": repr(2.0 * math.pi),
    "h_f": repr(math.pi / 500.0),
    "r_a": "5e9",
    "r_d": "3e9",
    "s_ar": "1.0",
    "s_av": "1.0",
    "s_dar": "0.001",
    "s_dav": "0.001",
    "xa0": "0.0, 20.0, 0.0, 0.0, 0.0, 0.0",
    "xda0": "-2.0, -20.0, 0.0, 0.0, 0.0, 0.0",
    "R1": "0.01",
    "R2": "0.01",
}


def scenario_file(tmp_path, name="case.cfg", drop=(), **overrides):
    values = {**DEFAULTS, **overrides}
    lines = [f"{k} = {v}" for k, v in values.items() if k not in drop]
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestParseScenario:
    def test_reads_reference_values(self, tmp_path):
        sc = parse_scenario(scenario_file(tmp_path))
        assert isinstance(sc, ScenarioFile)
        assert sc.mu == 398603.0 and sc.e == 0.1
        assert np.array_equal(sc.xda0, [-2.0, -20.0, 0.0, 0.0, 0.0, 0.0])
        cfg = sc.to_config()
        ref = reference_config()
        assert cfg.ff == ref.ff and cfg.h_f == ref.h_f
        assert np.array_equal(cfg.grid, ref.grid)

    def test_comments_and_blanks_ignored(self, tmp_path):
        path = tmp_path / "c.cfg"
        body = "\n".join(f"{k} = {v}  # unit note" for k, v in DEFAULTS.items())
        path.write_text("# header\n\n" + body + "\n", encoding="utf-8")
        assert parse_scenario(str(path)).p == 10000.0

    @pytest.mark.parametrize("mutation, needle", [
        (lambda p: scenario_file(p, mu="398603.0\njunk line"), "line 2"),
        (lambda p: scenario_file(p, bogus="1.0"), "unknown key"),
        (lambda p: scenario_file(p, mu="398603.0\nmu = 1.0"), "duplicate"),
        (lambda p: scenario_file(p, p="ten thousand"), "not numeric"),
        (lambda p: scenario_file(p, xa0="1, 2, 3"), "6 comma-separated"),
        (lambda p: scenario_file(p, drop=("R1", "R2")), "missing keys: R1, R2"),
    ])
    def test_errors_carry_location(self, tmp_path, mutation, needle):
        with pytest.raises(ScenarioError, match=needle):
            parse_scenario(mutation(tmp_path))

    def test_unreadable_path(self, tmp_path):
        with pytest.raises(ScenarioError, match="cannot read"):
            parse_scenario(str(tmp_path / "absent.cfg"))


class TestResolve:
    def test_packaged_name(self):
        sc = parse_scenario(_resolve_scenario("reference"))
        assert sc.mu == 398603.0
        assert sc.h_f == H_F

    def test_unknown_name(self):
        with pytest.raises(ScenarioError, match="not found"):
            _resolve_scenario("no-such-scenario")


class TestRecords:
    def test_summary_fields(self):
        rec = SummaryRecord(
            method="analytical", dist_at=1.0, dist_da=2.0, J=3.0,
            wall_seconds=0.1, outcome="NobodyWins", f_capture=None, f_intercept=None,
        )
        assert list(rec.to_dict()) == [
            "method", "dist_at", "dist_da", "J", "wall_seconds",
            "outcome", "f_capture", "f_intercept",
        ]

    def test_rel_err_identity(self):
        assert _rel_err(0.5091, 0.5091) == 0.0


class TestTrajectoryCsv:
    def test_round_trip(self, tmp_path):
        cfg = reference_config(ff=math.pi / 4.0)
        traj = propagate_analytical(cfg)
        p1 = tmp_path / "t1.csv"
        write_trajectory_csv(str(p1), traj)
        header, data = read_trajectory_csv(str(p1))
        assert header[:2] == ["f", "xa1"] and header[-2:] == ["dist_at", "dist_da"]
        assert len(header) == 21
        assert data.shape == (len(cfg.grid), 21)
        assert np.allclose(data[:, 1:7], traj.x_a, rtol=1e-12, atol=0.0)
        assert np.allclose(data[:, 19], traj.dist_at, rtol=1e-12, atol=0.0)
        # 15-significant-digit decimals round-trip exactly through float()
        fake = types.SimpleNamespace(
            grid=data[:, 0], x_a=data[:, 1:7], x_da=data[:, 7:13],
            u_a=data[:, 13:16], u_d=data[:, 16:19],
            dist_at=data[:, 19], dist_da=data[:, 20],
        )
        p2 = tmp_path / "t2.csv"
        write_trajectory_csv(str(p2), fake)
        assert p1.read_bytes() == p2.read_bytes()


class TestExitCodes:
    def test_bad_scenario(self, tmp_path, capsys):
        path = scenario_file(tmp_path, drop=("mu",))
        code, _, err = run(["simulate", path], capsys)
        assert code == 2
        assert err.startswith("cli.ScenarioError:")

    def test_unknown_scenario_name(self, capsys):
        code, _, err = run(["simulate", "no-such-scenario"], capsys)
        assert code == 2 and "not found" in err

    def test_singular_factor(self, tmp_path, capsys):
        path = scenario_file(tmp_path, r_d="1.0", s_dar="100.0", s_dav="100.0")
        code, _, err = run(["simulate", path, "--method", "analytical"], capsys)
        assert code == 3
        assert err.startswith("riccati.SingularFactor:")
        assert "f=0" in err

    def test_numerical_blowup(self, tmp_path, capsys):
        path = scenario_file(tmp_path, r_d="1.0", s_dar="100.0", s_dav="100.0")
        code, _, err = run(["simulate", path, "--method", "numerical"], capsys)
        assert code == 3
        assert err.startswith("numerical_baseline.NumericalBlowup:")

    def test_wincheck_requires_hovering(self, tmp_path, capsys):
        path = scenario_file(tmp_path, xa0="0.0, 20.0, 0.0, 0.001, 0.0, 0.0")
        code, _, err = run(["wincheck", path], capsys)
        assert code == 4
        assert "PreconditionError" in err

    def test_wincheck_rejects_captured_placement(self, tmp_path, capsys):
        path = scenario_file(tmp_path)
        code, _, err = run(["wincheck", path, "--rd0", "0,20,0"], capsys)
        assert code == 4
        assert "PreconditionError" in err

    def test_wincheck_malformed_rd0(self, tmp_path, capsys):
        path = scenario_file(tmp_path)
        code, _, err = run(["wincheck", path, "--rd0", "1,2"], capsys)
        assert code == 2

    def test_bench_too_few_reps(self, tmp_path, capsys):
        path = scenario_file(tmp_path)
        code, _, err = run(["bench", path, "--reps", "1"], capsys)
        assert code == 2
        assert "at least 3" in err

    def test_help(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["--help"])
        assert info.value.code == 0

    def test_missing_subcommand(self, capsys):
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == 2


class TestSimulate:
    def test_short_horizon_summary_and_csv(self, tmp_path, capsys):
        path = scenario_file(tmp_path, ff=repr(math.pi / 4.0))
        traj_path = tmp_path / "traj.csv"
        sum_path = tmp_path / "summary.json"
        code, out, _ = run(
            ["simulate", path, "--out-traj", str(traj_path), "--out-summary", str(sum_path)],
            capsys,
        )
        assert code == 0
        payload = json.loads(out)
        assert list(payload) == [
            "method", "dist_at", "dist_da", "J", "wall_seconds",
            "outcome", "f_capture", "f_intercept",
        ]
        assert payload["method"] == "analytical"
        assert payload["outcome"] == "NobodyWins"
        assert payload["f_capture"] is None
        assert json.loads(sum_path.read_text()) == payload
        header, data = read_trajectory_csv(str(traj_path))
        assert data.shape == (126, 21)

    def test_zero_eccentricity_runs(self, tmp_path, capsys):
        path = scenario_file(tmp_path, e="0.0", ff=repr(math.pi / 4.0))
        code, out, _ = run(["simulate", path], capsys)
        assert code == 0
        assert json.loads(out)["outcome"] == "NobodyWins"


class TestWincheck:
    def test_reference_verdict(self, tmp_path, capsys):
        out_path = tmp_path / "g.csv"
        code, out, _ = run(["wincheck", "reference", "--out", str(out_path)], capsys)
        assert code == 0
        v = json.loads(out)
        assert v["attacker_wins"] is True
        assert v["f_a"] == 984 * H_F
        assert v["f_an"] == 983 * H_F
        lines = out_path.read_text().strip().splitlines()
        assert lines[0] == "f,g1,g2"
        assert len(lines) == 1001

    def test_relocated_defender_blocks(self, capsys):
        code, out, _ = run(["wincheck", "reference", "--rd0", "0,20.012,0"], capsys)
        assert code == 0
        v = json.loads(out)
        assert v["attacker_wins"] is False
        assert v["f_a"] is None and v["f_an"] is None


class TestCompare:
    def test_errors_shrink_with_grid_refinement(self, tmp_path, capsys):
        errs = []
        for div in (1, 2, 4):
            path = scenario_file(
                tmp_path, name=f"h{div}.cfg",
                ff=repr(math.pi / 10.0), h_f=repr(math.pi / 500.0 / div),
            )
            code, out, _ = run(["compare", path], capsys)
            assert code == 0
            payload = json.loads(out)
            if div == 1:
                assert set(payload) == {
                    "analytical", "numerical", "rel_err_dist_at",
                    "rel_err_dist_da", "rel_err_J", "time_ratio",
                }
                assert payload["analytical"]["method"] == "analytical"
                assert payload["time_ratio"] > 0.0
            errs.append(
                (payload["rel_err_dist_at"], payload["rel_err_dist_da"], payload["rel_err_J"])
            )
        for i in range(2):
            for j in range(3):
                assert errs[i + 1][j] < errs[i][j] / 4.0


class TestSweepE:
    def test_two_eccentricities(self, tmp_path, capsys):
        out_path = tmp_path / "sweep.csv"
        code, out, _ = run(
            ["sweep-e", "reference", "--e-list", "0,0.3", "--out", str(out_path)], capsys
        )
        assert code == 0
        lines = out_path.read_text().strip().splitlines()
        assert lines[0] == "e,attacker_wins,f_a,min_g1,min_g2,error"
        assert len(lines) == 3
        for line in lines[1:]:
            e, wins, f_a, min_g1, min_g2, error = line.split(",")
            assert wins == "true" and error == ""
            assert float(f_a) > 6.0
            assert float(min_g1) <= 0.0 and float(min_g2) > 0.0

    def test_empty_list_writes_header_only(self, tmp_path, capsys):
        out_path = tmp_path / "sweep.csv"
        code, _, _ = run(
            ["sweep-e", "reference", "--e-list", "", "--out", str(out_path)], capsys
        )
        assert code == 0
        assert out_path.read_text().strip().splitlines() == [
            "e,attacker_wins,f_a,min_g1,min_g2,error"
        ]

    def test_invalid_eccentricity_recorded_and_sweep_continues(self, tmp_path, capsys):
        out_path = tmp_path / "sweep.csv"
        code, _, _ = run(
            ["sweep-e", "reference", "--e-list", "0.1,0.9", "--out", str(out_path)], capsys
        )
        assert code == 0
        lines = out_path.read_text().strip().splitlines()
        assert len(lines) == 3
        good = lines[1].split(",")
        bad = lines[2].split(",", 5)
        assert good[1] == "true" and good[5] == ""
        assert bad[1] == "" and "ValueError" in bad[5]


class TestEllipsoids:
    @staticmethod
    def parse_rows(path):
        lines = path.read_text().strip().splitlines()
        fields = lines[0].split(",")
        return [dict(zip(fields, line.split(",", len(fields) - 1))) for line in lines[1:]]

    def test_capture_set_flip_and_center_identity(self, tmp_path, capsys):
        out_path = tmp_path / "ell.csv"
        f_list = f"{983 * H_F!r},{984 * H_F!r}"
        code, _, _ = run(
            ["ellipsoids", "reference", "--f-list", f_list, "--out", str(out_path)], capsys
        )
        assert code == 0
        rows = self.parse_rows(out_path)
        assert [r["set"] for r in rows] == ["S1", "S2", "S1", "S2"]

        def q_from_row(row, x):
            g = np.array([[float(row[f"g{i}{j}"]) for j in (1, 2, 3)] for i in (1, 2, 3)])
            c = np.array([float(row["cx"]), float(row["cy"]), float(row["cz"])])
            r = float(row["radius"])
            return x @ g @ x - 2.0 * c @ g @ x + c @ g @ c - r**2

        rd0 = np.array([-2.0, 0.0, 0.0])
        assert q_from_row(rows[0], rd0) > 0.0
        assert q_from_row(rows[2], rd0) <= 0.0
        for row in rows:
            g = np.array([[float(row[f"g{i}{j}"]) for j in (1, 2, 3)] for i in (1, 2, 3)])
            c = np.array([float(row["cx"]), float(row["cy"]), float(row["cz"])])
            r = float(row["radius"])
            assert abs(q_from_row(row, c) + r**2) <= 1e-9 * max(1.0, abs(c @ g @ c))

    def test_exported_numbers_reproduce_quadratics(self, tmp_path, capsys):
        out_path = tmp_path / "ell.csv"
        f = 400 * H_F
        code, _, _ = run(
            ["ellipsoids", "reference", "--f-list", repr(f), "--out", str(out_path)], capsys
        )
        assert code == 0
        rows = self.parse_rows(out_path)
        cfg = reference_config()
        rng = np.random.default_rng(113)
        pts = np.array([-2.0, 0.0, 0.0]) + rng.uniform(-3.0, 3.0, size=(100, 3))
        for row, scalar in ((rows[0], g1_scalar), (rows[1], g2_scalar)):
            g = np.array([[float(row[f"g{i}{j}"]) for j in (1, 2, 3)] for i in (1, 2, 3)])
            c = np.array([float(row["cx"]), float(row["cy"]), float(row["cz"])])
            r = float(row["radius"])
            for x in pts:
                q = x @ g @ x - 2.0 * c @ g @ x + c @ g @ c - r**2
                want = scalar(cfg, f, x)
                assert abs(q - want) <= 1e-9 * max(1.0, abs(want))

    def test_start_anomaly_records_singular_capture_row(self, tmp_path, capsys):
        out_path = tmp_path / "ell.csv"
        code, _, _ = run(
            ["ellipsoids", "reference", "--f-list", "0", "--out", str(out_path)], capsys
        )
        assert code == 0
        rows = self.parse_rows(out_path)
        assert rows[0]["set"] == "S1" and rows[0]["error"].startswith("SingularBlock:")
        assert rows[1]["set"] == "S2" and rows[1]["error"] == ""


class TestBench:
    def test_three_reps(self, tmp_path, capsys):
        path = scenario_file(tmp_path, ff=repr(math.pi / 10.0))
        out_path = tmp_path / "bench.json"
        code, out, _ = run(["bench", path, "--reps", "3", "--out", str(out_path)], capsys)
        assert code == 0
        payload = json.loads(out)
        assert set(payload) == {"analytical", "numerical", "speedup_median", "speedup_min"}
        for method in ("analytical", "numerical"):
            assert payload[method]["reps"] == 3
            assert payload[method]["min_s"] > 0.0
            assert payload[method]["min_s"] <= payload[method]["median_s"]
        assert payload["speedup_median"] > 1.0
        assert json.loads(out_path.read_text()) == payload
