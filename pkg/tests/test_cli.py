"""CLI surface: reports, exit codes, determinism, file artifacts."""

import json
import re
import subprocess
import sys

import pytest

from uclab.cli import main

TIMING = re.compile(r'"timing_ms":\d+')


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def report_of(out):
    report = json.loads(out)
    assert list(report) == [
        "command",
        "parameters",
        "seed",
        "results",
        "timing_ms",
        "tool_version",
    ]
    return report


class TestEntropyCommand:
    def test_values_and_display(self, capsys):
        code, out, _ = run_cli(
            capsys, "entropy", "--h", "0.5", "--f", "0.1", "0.1", "--g", "0.2"
        )
        assert code == 0
        report = report_of(out)
        assert report["results"]["h"]["value"] == 1
        assert report["results"]["f"]["value"] == pytest.approx(1.4957, abs=1e-4)
        assert report["results"]["g"]["value"] == pytest.approx(1.4501, abs=1e-4)
        assert report["results"]["g"]["display"] == "1.4500712907"
        assert len(report["results"]["f"]["display"].replace(".", "")) <= 13

    def test_no_flags_is_usage_error(self, capsys):
        code, out, err = run_cli(capsys, "entropy")
        assert code == 1
        assert out == ""
        assert "error" in err

    def test_domain_error_exits_one(self, capsys):
        code, _, err = run_cli(capsys, "entropy", "--h", "1.5")
        assert code == 1
        assert "[0, 1]" in err

    def test_unknown_flag_exits_one(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["entropy", "--nope"])
        assert exc.value.code == 1


class TestLemmaCommands:
    def test_verify_single_point(self, capsys, tmp_path):
        path = tmp_path / "inst.txt"
        path.write_text("1.0 0.01\n")
        code, out, _ = run_cli(capsys, "lemma", "verify", str(path))
        assert code == 0
        results = report_of(out)["results"]
        assert results["passed"] is True
        assert results["lhs_total"] / results["h_x_given_c"] == pytest.approx(
            1.7437, abs=1e-4
        )

    def test_verify_hypothesis_violation_exits_two(self, capsys, tmp_path):
        path = tmp_path / "inst.txt"
        path.write_text("0.5 0.9\n0.5 0.3\n")
        code, out, _ = run_cli(capsys, "lemma", "verify", str(path))
        assert code == 2
        assert report_of(out)["results"]["hypothesis_ok"] is False

    def test_verify_bad_file_reports_line(self, capsys, tmp_path):
        path = tmp_path / "inst.txt"
        path.write_text("0.5 0.01\noops\n")
        code, _, err = run_cli(capsys, "lemma", "verify", str(path))
        assert code == 1
        assert "line 2" in err

    def test_scan_l1_small(self, capsys):
        code, out, _ = run_cli(capsys, "lemma", "scan-l1", "--step", "0.005")
        assert code == 0
        results = report_of(out)["results"]
        assert results["passed"] is True
        assert results["summary"]["violations"] == 0

    def test_minimize_seed_required(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["lemma", "minimize"])
        assert exc.value.code == 1

    def test_minimize_small(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "lemma", "minimize", "--seed", "7", "--iters", "200",
            "--restarts", "2", "--size", "6",
        )
        assert code == 0
        report = report_of(out)
        assert report["seed"] == 7
        assert report["results"]["min_ratio"] >= 1.26

    def test_figure1_writes_csv(self, capsys, tmp_path):
        out_path = tmp_path / "grid.csv"
        code, out, _ = run_cli(
            capsys, "lemma", "figure1", "--step", "0.01", "--out", str(out_path)
        )
        assert code == 0
        results = report_of(out)["results"]
        assert results["rows"] == 11 * 11 - 1
        data = out_path.read_bytes().decode()
        lines = data.split("\n")
        assert lines[0] == "p,p_prime,f"
        assert len(lines) == 11 * 11 + 1  # header + rows + trailing LF
        assert "\r" not in data
        assert results["min_f"] == pytest.approx(1.4957, abs=1e-3)

    def test_figure1_csv_bytes_reproducible(self, capsys, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for path in paths:
            code, _, _ = run_cli(
                capsys, "lemma", "figure1", "--step", "0.01", "--out", str(path)
            )
            assert code == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()


class TestDistCommands:
    def test_example_one_matches_closed_form(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "dist", "example", "--which", "1", "--n", "6", "--p", "0.01",
        )
        assert code == 0
        results = report_of(out)["results"]
        assert abs(results["h_a_residual"]) <= 1e-9
        assert abs(results["h_union_residual"]) <= 1e-9

    def test_example_three_h_a_matches(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "dist", "example", "--which", "3", "--n", "8", "--p", "0.01",
            "--q", "0.99",
        )
        assert code == 0
        results = report_of(out)["results"]
        assert abs(results["h_a_residual"]) <= 1e-9
        # the documented union formula is a strict lower bound
        assert results["h_union_residual"] > 0

    def test_check_thm1_pass(self, capsys):
        code, out, _ = run_cli(
            capsys, "dist", "check-thm1", "--which", "1", "--n", "6",
            "--p", "0.01",
        )
        assert code == 0
        assert report_of(out)["results"]["passed"] is True

    def test_check_thm1_hypothesis_violation(self, capsys):
        code, out, _ = run_cli(
            capsys, "dist", "check-thm1", "--which", "1", "--n", "4",
            "--p", "0.5",
        )
        assert code == 2
        assert report_of(out)["results"]["status"] == "hypothesis-violation"

    def test_union_point_mass(self, capsys, tmp_path):
        path = tmp_path / "dist.txt"
        path.write_text("n=3\n1,3 1.0\n")
        code, out, _ = run_cli(capsys, "dist", "union", "--file", str(path))
        assert code == 0
        results = report_of(out)["results"]
        assert results["union"]["support_size"] == 1
        assert "1,3 1.0" in results["union"]["text"]

    def test_bit_chain(self, capsys):
        code, out, _ = run_cli(
            capsys, "dist", "bit-chain", "--which", "2", "--n", "4", "--p", "0.2"
        )
        assert code == 0
        results = report_of(out)["results"]
        assert results["h_bits"][0] == pytest.approx(0.7219280948873623, abs=1e-12)
        assert all(abs(h) < 1e-15 for h in results["h_bits"][1:])

    def test_marginals(self, capsys):
        code, out, _ = run_cli(
            capsys, "dist", "marginals", "--which", "1", "--n", "3", "--p", "0.25"
        )
        assert code == 0
        results = report_of(out)["results"]
        assert results["marginals"] == pytest.approx([0.25] * 3, abs=1e-12)

    def test_both_inputs_rejected(self, capsys, tmp_path):
        path = tmp_path / "d.txt"
        path.write_text("n=1\n1 1.0\n")
        code, _, err = run_cli(
            capsys, "dist", "entropy", "--file", str(path), "--which", "1",
            "--n", "2", "--p", "0.1",
        )
        assert code == 1
        assert "exactly one" in err


class TestFamilyCommands:
    def test_check_power_set(self, capsys, tmp_path):
        path = tmp_path / "fam.txt"
        path.write_text("n=2\n-\n1\n2\n1,2\n")
        code, out, _ = run_cli(capsys, "family", "check", "--file", str(path))
        assert code == 0
        assert report_of(out)["results"]["union_closed"] is True

    def test_check_reports_witness(self, capsys, tmp_path):
        path = tmp_path / "fam.txt"
        path.write_text("1\n2\n")
        code, out, _ = run_cli(capsys, "family", "check", "--file", str(path))
        assert code == 0
        results = report_of(out)["results"]
        assert results["union_closed"] is False
        assert results["witness"] == {"a": "1", "b": "2"}

    def test_frankl_brute(self, capsys):
        code, out, _ = run_cli(capsys, "family", "frankl-brute", "--n", "2")
        assert code == 0
        results = report_of(out)["results"]
        assert results["count"] == 13
        assert results["counts_agree"] is True
        assert results["min_max_fraction"] == pytest.approx(0.5)

    def test_kl_identity_on_seeded_closure(self, capsys):
        code, out, _ = run_cli(
            capsys, "family", "kl-identity", "--n", "8", "--gens", "5",
            "--seed", "11",
        )
        assert code == 0
        assert report_of(out)["results"]["summary"]["residual"] <= 1e-9

    def test_kl_identity_rejects_open_family(self, capsys, tmp_path):
        path = tmp_path / "fam.txt"
        path.write_text("1\n2\n")
        code, _, err = run_cli(
            capsys, "family", "kl-identity", "--file", str(path)
        )
        assert code == 1
        assert "union of 1 and 2" in err

    def test_enumerate_n1(self, capsys):
        code, out, _ = run_cli(capsys, "family", "enumerate", "--n", "1")
        assert code == 0
        results = report_of(out)["results"]
        assert results["count"] == 3
        assert len(results["families"]) == 3

    def test_random_deterministic(self, capsys):
        _, out1, _ = run_cli(
            capsys, "family", "random", "--n", "6", "--gens", "4", "--seed", "2"
        )
        _, out2, _ = run_cli(
            capsys, "family", "random", "--n", "6", "--gens", "4", "--seed", "2"
        )
        assert TIMING.sub("", out1) == TIMING.sub("", out2)


class TestConjectureCommands:
    def test_gap_file(self, capsys, tmp_path):
        path = tmp_path / "bit.txt"
        path.write_text("n=1\n1 0.5\n- 0.5\n")
        code, out, _ = run_cli(capsys, "conjecture1", "gap", "--file", str(path))
        assert code == 0
        assert report_of(out)["results"]["gap"] == pytest.approx(0.0, abs=1e-12)

    def test_section4(self, capsys):
        code, out, _ = run_cli(capsys, "conjecture1", "section4")
        assert code == 0
        results = report_of(out)["results"]
        assert results["h_f_pair"] == 2
        assert results["h_x"] == 2
        assert results["h_x_given_c"] == 1
        assert results["h_f_given_histories"] == 0
        assert results["max_residual"] == 0

    def test_search_reproducible(self, capsys):
        args = (
            "conjecture1", "search", "--n", "3", "--support", "6",
            "--seed", "1", "--iters", "80", "--restarts", "2",
        )
        _, out1, _ = run_cli(capsys, *args)
        _, out2, _ = run_cli(capsys, *args)
        assert TIMING.sub("", out1) == TIMING.sub("", out2)
        results = report_of(out1)["results"]
        assert "witness_text" in results
        assert isinstance(results["negative_gap_found"], bool)


class TestDeterminism:
    SEEDED = [
        ("lemma", "minimize", "--seed", "5", "--iters", "150",
         "--restarts", "2", "--size", "5"),
        ("family", "random", "--n", "7", "--gens", "4", "--seed", "5"),
        ("conjecture1", "search", "--n", "3", "--support", "5", "--seed", "5",
         "--iters", "60", "--restarts", "2"),
    ]

    @pytest.mark.parametrize("argv", SEEDED, ids=lambda a: " ".join(a[:2]))
    def test_seeded_commands_byte_identical(self, capsys, argv):
        _, out1, _ = run_cli(capsys, *argv)
        _, out2, _ = run_cli(capsys, *argv)
        assert TIMING.sub("", out1) == TIMING.sub("", out2)
        assert TIMING.search(out1)

    def test_jobs_flag_does_not_change_bytes(self, capsys):
        _, out1, _ = run_cli(
            capsys, "lemma", "scan-l2", "--step", "0.01", "--jobs", "1"
        )
        _, out2, _ = run_cli(
            capsys, "lemma", "scan-l2", "--step", "0.01", "--jobs", "2"
        )
        strip = re.compile(r'"(timing_ms|jobs)":\d+')
        assert strip.sub("", out1) == strip.sub("", out2)

    def test_jobs_env_fallback(self, capsys, monkeypatch):
        monkeypatch.setenv("UCLAB_JOBS", "2")
        code, out, _ = run_cli(capsys, "lemma", "scan-l2", "--step", "0.01")
        assert code == 0
        assert report_of(out)["results"]["passed"] is True

    def test_jobs_env_invalid_is_usage_error(self, capsys, monkeypatch):
        monkeypatch.setenv("UCLAB_JOBS", "banana")
        code, _, err = run_cli(capsys, "lemma", "scan-l2", "--step", "0.01")
        assert code == 1
        assert "UCLAB_JOBS" in err


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "uclab.cli", "entropy", "--h", "0.5"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["h"]["value"] == 1
