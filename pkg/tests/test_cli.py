import json

import pytest

from powersched.cli import main

TRI = {
    "alpha": 3.0,
    "processors": 1,
    "jobs": [
        {"release": 0.0, "work": 5.0},
        {"release": 5.0, "work": 2.0},
        {"release": 6.0, "work": 1.0},
    ],
}
FLOW3 = {
    "alpha": 3.0,
    "processors": 1,
    "jobs": [
        {"release": 0.0, "work": 1.0},
        {"release": 0.0, "work": 1.0},
        {"release": 1.0, "work": 1.0},
    ],
}


@pytest.fixture
def tri_path(tmp_path):
    p = tmp_path / "tri.json"
    p.write_text(json.dumps(TRI))
    return str(p)


@pytest.fixture
def flow3_path(tmp_path):
    p = tmp_path / "flow3.json"
    p.write_text(json.dumps(FLOW3))
    return str(p)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestMakespan:
    def test_known_value_and_roundtrip(self, capsys, tri_path):
        code, out, _ = run_cli(capsys, "makespan", "--instance", tri_path, "--energy", "17")
        assert code == 0
        payload = json.loads(out)
        assert payload["makespan"] == pytest.approx(6.5, rel=1e-9)
        assert payload["energy"] == pytest.approx(17.0, rel=1e-9)
        # recompute every metric from the emitted rows alone
        works = {i + 1: j["work"] for i, j in enumerate(TRI["jobs"])}
        releases = {i + 1: j["release"] for i, j in enumerate(TRI["jobs"])}
        rows = [row for proc in payload["processors"] for row in proc]
        energy = sum(works[r["job"]] * r["speed"] ** 2 for r in rows)
        finish = max(r["completion"] for r in rows)
        flow = sum(r["completion"] - releases[r["job"]] for r in rows)
        assert energy == pytest.approx(payload["energy"], rel=1e-12)
        assert finish == pytest.approx(payload["makespan"], rel=1e-12)
        assert flow == pytest.approx(payload["total_flow"], rel=1e-12)
        for r in rows:
            assert r["start"] >= releases[r["job"]]

    def test_starved_budget(self, capsys, tri_path):
        code, out, _ = run_cli(capsys, "makespan", "--instance", tri_path, "--energy", "2")
        assert code == 0
        assert json.loads(out)["makespan"] == pytest.approx(16.0, rel=1e-9)

    def test_processors_override_adds_common_finish(self, capsys, flow3_path):
        code, out, _ = run_cli(
            capsys, "makespan", "--instance", flow3_path, "--energy", "9",
            "--processors", "2",
        )
        assert code == 0
        payload = json.loads(out)
        assert len(payload["processors"]) == 2
        assert payload["makespan"] == pytest.approx(payload["common_finish"], rel=1e-9)

    def test_out_file(self, capsys, tri_path, tmp_path):
        target = tmp_path / "schedule.json"
        code, out, _ = run_cli(
            capsys, "makespan", "--instance", tri_path, "--energy", "17",
            "--out", str(target),
        )
        assert code == 0
        assert out == ""
        assert json.loads(target.read_text())["makespan"] == pytest.approx(6.5)


class TestEnergyForDeadline:
    def test_inverts_the_frontier(self, capsys, tri_path):
        code, out, _ = run_cli(
            capsys, "energy-for-deadline", "--instance", tri_path, "--deadline", "6.5"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["energy"] == pytest.approx(17.0, rel=1e-9)

    def test_infeasible_deadline_exits_3(self, capsys, tri_path):
        code, _, err = run_cli(
            capsys, "energy-for-deadline", "--instance", tri_path, "--deadline", "5.0"
        )
        assert code == 3
        assert "infeasible" in err


class TestCurve:
    def test_csv_has_breakpoint_rows(self, capsys, tri_path):
        code, out, _ = run_cli(
            capsys, "curve", "--instance", tri_path,
            "--from", "1", "--to", "30", "--samples", "200", "--format", "csv",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "energy,makespan,d1,d2,segment"
        energies = [float(line.split(",")[0]) for line in lines[1:]]
        assert 8.0 in energies
        assert 17.0 in energies
        values = [float(line.split(",")[1]) for line in lines[1:]]
        assert values == sorted(values, reverse=True)

    def test_json_format(self, capsys, tri_path):
        code, out, _ = run_cli(
            capsys, "curve", "--instance", tri_path,
            "--from", "6", "--to", "20", "--samples", "10", "--format", "json",
        )
        assert code == 0
        rows = json.loads(out)
        assert all({"energy", "makespan", "d1", "d2", "segment"} <= set(r) for r in rows)

    def test_byte_identical_runs(self, capsys, tri_path):
        args = ("curve", "--instance", tri_path, "--from", "1", "--to", "30",
                "--samples", "50", "--format", "csv")
        _, first, _ = run_cli(capsys, *args)
        _, second, _ = run_cli(capsys, *args)
        assert first == second

    def test_plot_dir_renders_figures(self, capsys, tri_path, tmp_path):
        plots = tmp_path / "plots"
        code, out, _ = run_cli(
            capsys, "curve", "--instance", tri_path,
            "--from", "1", "--to", "30", "--samples", "40",
            "--plot-dir", str(plots),
        )
        assert code == 0
        names = {p.name for p in plots.iterdir()}
        assert names == {
            "energy_makespan.png",
            "energy_dmakespan.png",
            "energy_d2makespan.png",
        }
        for p in plots.iterdir():
            assert p.stat().st_size > 1000

    def test_bad_range_exits_2(self, capsys, tri_path):
        code, _, err = run_cli(
            capsys, "curve", "--instance", tri_path,
            "--from", "30", "--to", "1", "--samples", "10",
        )
        assert code == 2
        assert err


class TestFlow:
    def test_relations_report(self, capsys, flow3_path):
        code, out, _ = run_cli(capsys, "flow", "--instance", flow3_path, "--energy", "9")
        assert code == 0
        payload = json.loads(out)
        assert payload["sigma_n"] == pytest.approx(1.3886084223859099, rel=1e-7)
        assert payload["total_flow"] == pytest.approx(2.3612678706070507, rel=1e-7)
        assert len(payload["relations"]) == 2
        for row in payload["relations"]:
            assert row["residual"] <= 1e-6

    def test_multiprocessor_flow(self, capsys, flow3_path):
        code, out, _ = run_cli(
            capsys, "flow", "--instance", flow3_path, "--energy", "6",
            "--processors", "2",
        )
        assert code == 0
        payload = json.loads(out)
        assert len(payload["processors"]) == 2

    def test_unreachable_tolerance_exits_4(self, capsys, flow3_path):
        code, _, err = run_cli(
            capsys, "flow", "--instance", flow3_path, "--energy", "11.1",
            "--epsilon", "1e-18",
        )
        assert code == 4
        assert "converge" in err


class TestPinnedRange:
    def test_three_job_window(self, capsys, flow3_path):
        code, out, _ = run_cli(capsys, "pinned-range", "--instance", flow3_path)
        assert code == 0
        lo, hi = json.loads(out)["regime"]
        assert lo == pytest.approx(10.321455738067383, abs=1e-3)
        assert hi == pytest.approx(11.541966305589218, abs=1e-3)

    def test_no_regime_is_null(self, capsys, tri_path):
        code, out, _ = run_cli(capsys, "pinned-range", "--instance", tri_path)
        assert code == 0
        assert json.loads(out)["regime"] is None


class TestPartitionDemo:
    def test_balanced_with_witness(self, capsys):
        code, out, _ = run_cli(capsys, "partition-demo", "--values", "1,2,3,4")
        assert code == 0
        payload = json.loads(out)
        assert payload["balanced"] is True
        assert payload["best_makespan"] == pytest.approx(payload["target"], rel=1e-7)
        left, right = payload["witness"]
        assert sum(left) == sum(right)
        assert sorted(left + right) == [1, 2, 3, 4]

    def test_unbalanced_has_no_witness(self, capsys):
        code, out, _ = run_cli(capsys, "partition-demo", "--values", "2,2,2")
        assert code == 0
        payload = json.loads(out)
        assert payload["balanced"] is False
        assert payload["witness"] is None

    def test_too_many_values_exit_2(self, capsys):
        code, _, err = run_cli(
            capsys, "partition-demo", "--values", ",".join(["1"] * 17)
        )
        assert code == 2
        assert err


class TestVerify:
    def test_agreement_and_determinism(self, capsys):
        code, first, _ = run_cli(capsys, "verify", "--seed", "7", "--count", "5")
        assert code == 0
        payload = json.loads(first)
        assert payload["disagreements"] == 0
        assert payload["max_rel_error"] <= 1e-4
        assert len(payload["checks"]) == 5
        code2, second, _ = run_cli(capsys, "verify", "--seed", "7", "--count", "5")
        assert code2 == 0
        assert first == second

    def test_seed_changes_the_suite(self, capsys):
        _, first, _ = run_cli(capsys, "verify", "--seed", "7", "--count", "3")
        _, second, _ = run_cli(capsys, "verify", "--seed", "8", "--count", "3")
        assert first != second


class TestBadInput:
    def test_malformed_json_exits_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code, _, err = run_cli(capsys, "makespan", "--instance", str(bad), "--energy", "5")
        assert code == 2
        assert err.startswith("error:")

    def test_missing_file_exits_2(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "makespan", "--instance", str(tmp_path / "nope.json"), "--energy", "5"
        )
        assert code == 2
        assert err

    def test_negative_energy_exits_2(self, capsys, tri_path):
        code, _, err = run_cli(capsys, "makespan", "--instance", tri_path, "--energy", "-1")
        assert code == 2
        assert err

    def test_energy_and_deadline_together_rejected(self, tri_path):
        # no subcommand exposes both flags, so the guard lives on the request
        from powersched.cli import CliRequest
        from powersched import InvalidArgumentError

        with pytest.raises(InvalidArgumentError):
            CliRequest(
                subcommand="makespan", instance_path=tri_path,
                energy=5.0, deadline=7.0,
            )

    def test_unknown_subcommand_exits_2(self, tri_path):
        with pytest.raises(SystemExit) as exc:
            main(["explode", "--instance", tri_path])
        assert exc.value.code == 2

    def test_nonpositive_epsilon_exits_2(self, capsys, flow3_path):
        code, _, err = run_cli(
            capsys, "flow", "--instance", flow3_path, "--energy", "9",
            "--epsilon", "0",
        )
        assert code == 2
        assert err
