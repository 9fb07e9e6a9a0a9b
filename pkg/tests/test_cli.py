import json

import numpy as np
import pytest

from preisach import uniform_grid
from preisach.cli import main

AGENTS_CSV = "alpha,beta,nu\n2,1,1\n3,0,2\n"


@pytest.fixture()
def agents_csv(tmp_path):
    path = tmp_path / "agents.csv"
    path.write_text(AGENTS_CSV)
    return str(path)


@pytest.fixture()
def generalized_json(tmp_path):
    agents = [
        {
            "alpha": 2.0,
            "beta": -2.0,
            "f_plus": [[-2.0, -1.0], [2.0, -1.0]],
            "f_minus": [[-2.0, 0.0], [2.0, 4.0]],
        },
        {
            "alpha": 0.3,
            "beta": -0.2,
            "f_plus": [[-1.0, -1.0], [1.0, -0.5]],
            "f_minus": [[-1.0, 0.5], [1.0, 1.0]],
        },
    ]
    path = tmp_path / "soft_agents.json"
    path.write_text(json.dumps(agents))
    return str(path)


@pytest.fixture()
def shift_json(tmp_path):
    model = {
        "agents": [
            {"alpha": 0.5, "beta": -0.5, "nu": 1.0},
            {"alpha": 0.8, "beta": -0.2, "nu": 2.0},
        ],
        "g1": [[-2.0, 0.1], [2.0, 0.3]],
        "g2": [[-2.0, 0.0], [2.0, 0.1]],
    }
    path = tmp_path / "shift.json"
    path.write_text(json.dumps(model))
    return str(path)


def read_rows(path):
    lines = open(path, "r", encoding="utf-8").read().strip().splitlines()
    header = lines[0].split(",")
    rows = [[float(x) for x in line.split(",")] for line in lines[1:]]
    return header, rows


class TestSimulate:
    def test_two_agent_example(self, agents_csv, tmp_path):
        out = tmp_path / "out.csv"
        code = main(
            ["simulate", "--agents", agents_csv, "--history", "2.5,0.5", "--out", str(out)]
        )
        assert code == 0
        assert out.read_text() == "step,u,f\n1,2.5,-1.0\n2,0.5,-3.0\n"

    def test_byte_identical_reruns(self, agents_csv, tmp_path):
        outs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            main(["simulate", "--agents", agents_csv, "--history", "2.5,0.5,1.8", "--out", str(out)])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_series_input_emits_one_row_per_sample(self, agents_csv, tmp_path):
        series = tmp_path / "series.csv"
        series.write_text("time,u\n0,1.0\n1,2.5\n2,1.4\n3,0.5\n")
        out = tmp_path / "out.csv"
        assert main(["simulate", "--agents", agents_csv, "--input", str(series), "--out", str(out)]) == 0
        header, rows = read_rows(out)
        assert header == ["step", "u", "f"]
        assert [r[1] for r in rows] == [1.0, 2.5, 1.4, 0.5]
        assert [r[2] for r in rows] == [-3.0, -1.0, -1.0, -3.0]

    def test_empty_series_rejected(self, agents_csv, tmp_path, capsys):
        series = tmp_path / "empty.csv"
        series.write_text("time,u\n")
        code = main(["simulate", "--agents", agents_csv, "--input", str(series)])
        assert code == 2
        assert "empty series" in capsys.readouterr().err

    def test_corrupted_agent_row_named(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("alpha,beta,nu\n2,1,1\n0,1,1\n")
        code = main(["simulate", "--agents", str(bad), "--history", "1"])
        assert code == 2
        err = capsys.readouterr().err
        assert "3" in err and "alpha < beta" in err

    def test_grid_path_matches_direct_on_aligned_history(self, agents_csv, tmp_path):
        aligned = "3.0,0.5,2.5"  # values on the 8-cell grid over (0, 3)
        out_direct = tmp_path / "d.csv"
        out_grid = tmp_path / "g.csv"
        main(["simulate", "--agents", agents_csv, "--history", aligned, "--out", str(out_direct)])
        main(
            [
                "simulate", "--agents", agents_csv, "--history", aligned,
                "--grid-n", "12", "--bounds", "0,3", "--out", str(out_grid),
            ]
        )
        _, direct_rows = read_rows(out_direct)
        _, grid_rows = read_rows(out_grid)
        assert np.allclose(direct_rows, grid_rows, atol=1e-12)

    def test_usage_error_exit_code(self):
        assert main(["simulate"]) == 1

    def test_generalized_rows_match_library(self, generalized_json, tmp_path):
        from preisach import ReversalSequence, eval_generalized
        from preisach.fileio import read_generalized_json

        out = tmp_path / "out.csv"
        values = [2.5, -0.6, 0.4]
        code = main(
            [
                "simulate", "--model", "generalized", "--agents", generalized_json,
                "--history", ",".join(map(str, values)), "--start", "-3",
                "--out", str(out),
            ]
        )
        assert code == 0
        gpop = read_generalized_json(generalized_json)
        _, rows = read_rows(out)
        for k, (_, u, f) in enumerate(rows):
            seq = ReversalSequence(-3.0, tuple(values[: k + 1]))
            assert f == pytest.approx(eval_generalized(gpop, seq, u), abs=1e-12)

    def test_invalid_history_rejected(self, agents_csv, capsys):
        assert main(["simulate", "--agents", agents_csv, "--history", "1,2"]) == 2
        assert "invalid reversal sequence" in capsys.readouterr().err


class TestLoop:
    def test_endpoint_chords_are_zero(self, agents_csv, tmp_path):
        out = tmp_path / "loop.csv"
        code = main(
            [
                "loop", "--agents", agents_csv, "--history", "3",
                "--u-minus", "0.5", "--u-plus", "2.5", "--n-points", "9",
                "--out", str(out),
            ]
        )
        assert code == 0
        header, rows = read_rows(out)
        assert header == ["u", "f_ascending", "f_descending", "chord"]
        assert rows[0][3] == 0.0 and rows[-1][3] == 0.0

    def test_chord_column_equals_branch_gap(self, agents_csv, tmp_path):
        out = tmp_path / "loop.csv"
        main(
            [
                "loop", "--agents", agents_csv, "--history", "3",
                "--u-minus", "0.5", "--u-plus", "2.5", "--n-points", "21",
                "--out", str(out),
            ]
        )
        _, rows = read_rows(out)
        for u, fa, fd, chord in rows:
            assert chord == pytest.approx(fd - fa, abs=1e-12)

    def test_chord_column_history_invariant(self, agents_csv, tmp_path):
        chords = []
        for name, hist in (("h1.csv", "3"), ("h2.csv", "2.6,1.2,2.2")):
            out = tmp_path / name
            main(
                [
                    "loop", "--agents", agents_csv, "--history", hist,
                    "--u-minus", "0.5", "--u-plus", "2.5", "--n-points", "21",
                    "--out", str(out),
                ]
            )
            _, rows = read_rows(out)
            chords.append([r[3] for r in rows])
        assert chords[0] == chords[1]

    def test_uniform_fixture_analytic_chord_profile(self, tmp_path):
        n = 48
        grid = uniform_grid(1.0, n, (0.0, 1.0))
        rows_idx, cols_idx = np.nonzero(grid.cell_mass)
        lines = ["alpha,beta,nu"] + [
            f"{float(grid.centers[i])!r},{float(grid.centers[j])!r},{float(grid.cell_mass[i, j])!r}"
            for i, j in zip(rows_idx, cols_idx)
        ]
        agents = tmp_path / "uniform.csv"
        agents.write_text("\n".join(lines) + "\n")
        out = tmp_path / "loop.csv"
        code = main(
            [
                "loop", "--agents", str(agents), "--history", "1.0,0.0",
                "--u-minus", "0.0", "--u-plus", "1.0", "--n-points", "11",
                "--start", "0.0", "--out", str(out),
            ]
        )
        assert code == 0
        _, rows = read_rows(out)
        for u, _, _, chord in rows:
            assert chord == pytest.approx(2.0 * u * (1.0 - u), abs=6.0 / n)

    def test_cycle_outside_grid_support_rejected(self, agents_csv, tmp_path, capsys):
        code = main(
            [
                "loop", "--agents", agents_csv, "--grid-n", "8", "--bounds", "0,3",
                "--history", "3", "--u-minus", "0.5", "--u-plus", "4.0",
                "--out", str(tmp_path / "loop.csv"),
            ]
        )
        assert code == 2
        assert "out of triangle T" in capsys.readouterr().err

    def test_generalized_loop_runs(self, generalized_json, tmp_path):
        out = tmp_path / "loop.csv"
        code = main(
            [
                "loop", "--model", "generalized", "--agents", generalized_json,
                "--history", "2.5,-0.6", "--start", "-3",
                "--u-minus", "-0.5", "--u-plus", "0.5", "--n-points", "11",
                "--out", str(out),
            ]
        )
        assert code == 0
        _, rows = read_rows(out)
        for u, fa, fd, chord in rows:
            assert chord == pytest.approx(fd - fa, abs=1e-12)


class TestChord:
    def test_single_probe(self, agents_csv, tmp_path):
        out = tmp_path / "chord.csv"
        code = main(
            [
                "chord", "--agents", agents_csv,
                "--u-minus", "0.5", "--u-plus", "2.5", "--at", "1.5",
                "--out", str(out),
            ]
        )
        assert code == 0
        _, rows = read_rows(out)
        assert rows == [[1.5, 2.0]]

    def test_profile_endpoints_zero(self, agents_csv, tmp_path):
        out = tmp_path / "chord.csv"
        main(
            [
                "chord", "--agents", agents_csv,
                "--u-minus", "0.5", "--u-plus", "2.5", "--n-points", "5",
                "--out", str(out),
            ]
        )
        _, rows = read_rows(out)
        assert rows[0][1] == 0.0 and rows[-1][1] == 0.0


class TestDecompose:
    def test_rows_reconstruct_total(self, agents_csv, tmp_path):
        out = tmp_path / "dec.csv"
        code = main(
            ["decompose", "--agents", agents_csv, "--history", "2.5,0.5,1.8", "--out", str(out)]
        )
        assert code == 0
        header, rows = read_rows(out)
        assert header == ["u", "f_irreversible", "G", "F", "f_total"]
        for u, irr, g, f, total in rows:
            assert total == pytest.approx(irr + g + f, abs=1e-12)

    def test_total_column_matches_simulate(self, agents_csv, tmp_path):
        dec = tmp_path / "dec.csv"
        sim = tmp_path / "sim.csv"
        main(["decompose", "--agents", agents_csv, "--history", "2.5,0.5,1.8", "--out", str(dec)])
        main(["simulate", "--agents", agents_csv, "--history", "2.5,0.5,1.8", "--out", str(sim)])
        _, dec_rows = read_rows(dec)
        _, sim_rows = read_rows(sim)
        for d, s in zip(dec_rows, sim_rows):
            assert d[4] == pytest.approx(s[2], abs=1e-12)

    def test_zero_shift_matches_classical_columns(self, agents_csv, tmp_path):
        shift = tmp_path / "zero_shift.json"
        shift.write_text(
            json.dumps(
                {
                    "agents": [
                        {"alpha": 2.0, "beta": 1.0, "nu": 1.0},
                        {"alpha": 3.0, "beta": 0.0, "nu": 2.0},
                    ],
                    "g1": [[0.0, 0.0]],
                    "g2": [[0.0, 0.0]],
                }
            )
        )
        out_classical = tmp_path / "c.csv"
        out_shift = tmp_path / "s.csv"
        main(["decompose", "--agents", agents_csv, "--history", "2.5,0.5", "--out", str(out_classical)])
        main(
            [
                "decompose", "--model", "shifted", "--agents", str(shift),
                "--history", "2.5,0.5", "--out", str(out_shift),
            ]
        )
        _, c_rows = read_rows(out_classical)
        _, s_rows = read_rows(out_shift)
        for c, s in zip(c_rows, s_rows):
            assert c == pytest.approx(s, abs=1e-12)

    def test_fully_reversible_population_has_zero_band(self, tmp_path):
        steps = tmp_path / "steps.csv"
        steps.write_text("alpha,beta,nu\n1,1,1\n0.5,0.5,2\n")
        out = tmp_path / "dec.csv"
        main(["decompose", "--agents", str(steps), "--history", "1.5,0.2,0.7", "--out", str(out)])
        _, rows = read_rows(out)
        assert all(r[1] == 0.0 for r in rows)


class TestMemoryRoundTrip:
    @pytest.mark.parametrize("model_args", [
        (),
        ("--grid-n", "16", "--bounds", "0,3"),
    ])
    def test_split_run_equals_combined_run(self, agents_csv, tmp_path, model_args):
        mem = tmp_path / "mem.json"
        first = tmp_path / "first.csv"
        second = tmp_path / "second.csv"
        combined = tmp_path / "combined.csv"
        base = ["simulate", "--agents", agents_csv, *model_args]
        main([*base, "--history", "3.0,0.5", "--memory-out", str(mem), "--out", str(first)])
        main([*base, "--history", "2.5,1.2", "--memory-in", str(mem), "--out", str(second)])
        main([*base, "--history", "3.0,0.5,2.5,1.2", "--out", str(combined)])
        _, second_rows = read_rows(second)
        _, combined_rows = read_rows(combined)
        assert [r[1:] for r in second_rows] == [r[1:] for r in combined_rows[2:]]

    def test_shifted_model_round_trip(self, shift_json, tmp_path):
        mem = tmp_path / "mem.json"
        second = tmp_path / "second.csv"
        combined = tmp_path / "combined.csv"
        base = ["simulate", "--model", "shifted", "--agents", shift_json, "--start", "-2"]
        main([*base, "--history", "1.5,-0.8", "--memory-out", str(mem)])
        main(
            ["simulate", "--model", "shifted", "--agents", shift_json,
             "--history", "0.9,-0.3", "--memory-in", str(mem), "--out", str(second)]
        )
        main([*base, "--history", "1.5,-0.8,0.9,-0.3", "--out", str(combined)])
        _, second_rows = read_rows(second)
        _, combined_rows = read_rows(combined)
        assert [r[1:] for r in second_rows] == [r[1:] for r in combined_rows[2:]]


class TestVerify:
    def test_classical_fixture_passes(self, agents_csv, tmp_path, capsys):
        report = tmp_path / "report.json"
        code = main(["verify", "--agents", agents_csv, "--out", str(report)])
        assert code == 0
        out = capsys.readouterr().out
        assert "erasure-soundness" in out and "congruency" in out
        results = json.loads(report.read_text())
        assert all(r["passed"] for r in results)

    def test_generalized_fixture_reports_incongruence_witness(self, generalized_json, capsys):
        code = main(["verify", "--model", "generalized", "--agents", generalized_json])
        assert code == 0
        out = capsys.readouterr().out
        assert "equal-chords" in out and "reconstruction" in out
        assert "incongruent loops observed" in out

    def test_shifted_fixture_passes(self, shift_json, capsys):
        code = main(["verify", "--model", "shifted", "--agents", shift_json])
        assert code == 0
        assert "shift-equivalence" in capsys.readouterr().out

    def test_impossible_tolerance_fails_with_exit_3(self, generalized_json, capsys):
        code = main(
            ["verify", "--model", "generalized", "--agents", generalized_json, "--tol", "1e-30"]
        )
        assert code == 3
        assert "FAIL" in capsys.readouterr().out
