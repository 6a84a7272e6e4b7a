import json

from tracefn_lab.cli import EXIT_ASSERTION, EXIT_CAPACITY, EXIT_OK, EXIT_USAGE, main


def run_cli(args, capsys):
    try:
        code = main(args)
    except SystemExit as exc:  # argparse usage failures
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


class TestExitCodes:
    def test_pass_run(self, capsys):
        code, out, _ = run_cli(["identities", "--q", "13"], capsys)
        assert code == EXIT_OK
        assert json.loads(out)["status"] == "pass"

    def test_usage_error_from_argparse(self, capsys):
        code, _, _ = run_cli(["identities"], capsys)
        assert code == EXIT_USAGE

    def test_usage_error_from_service(self, capsys):
        code, _, err = run_cli(["identities", "--q", "12"], capsys)
        assert code == EXIT_USAGE
        assert "not prime" in err

    def test_capacity_error(self, capsys):
        code, _, err = run_cli(
            ["dap", "--k", "2", "--X", str(10**8 + 7), "--q", "7", "--a", "1"],
            capsys)
        assert code == EXIT_CAPACITY
        assert "capacity" in err


class TestOutputs:
    def test_json_report_file(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code, _, _ = run_cli(["bounds", "--q", "101", "--family", "kl2",
                              "--out", str(out)], capsys)
        assert code == EXIT_OK
        body = json.loads(out.read_text())
        assert body["command"] == "bounds"
        assert body["seed"] == 0x5EEDF00D

    def test_byte_identical_reruns(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run_cli(["satotate", "--family", "gauss", "--q", "101",
                 "--out", str(a)], capsys)
        run_cli(["satotate", "--family", "gauss", "--q", "101",
                 "--out", str(b)], capsys)
        assert a.read_bytes() == b.read_bytes()

    def test_satotate_csv_rows(self, tmp_path, capsys):
        out = tmp_path / "angles.csv"
        code, _, _ = run_cli(["satotate", "--family", "kl2", "--q", "101",
                              "--format", "csv", "--out", str(out)], capsys)
        assert code == EXIT_OK
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "q,family,parameter,value,theta"
        assert len(lines) == 1 + 100  # one row per unit

    def test_threads_flag_does_not_change_output(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run_cli(["identities", "--q", "101", "--threads", "1",
                 "--out", str(a)], capsys)
        run_cli(["identities", "--q", "101", "--threads", "2",
                 "--out", str(b)], capsys)
        assert a.read_bytes() == b.read_bytes()

    def test_calibrate_writes_manifest(self, tmp_path, capsys):
        out = tmp_path / "manifest.json"
        code, _, _ = run_cli(["calibrate", "--suite", "prime_sum_cancellation",
                              "--manifest-out", str(out)], capsys)
        assert code == EXIT_OK
        manifest = json.loads(out.read_text())
        assert "prime_sum_cancellation" in manifest["suites"]


class TestVdcCommand:
    def test_ratio_reported(self, capsys):
        code, out, _ = run_cli(["vdc", "--p", "11", "--q", "89"], capsys)
        assert code == EXIT_OK
        body = json.loads(out)
        assert body["data"]["rows"][0]["bound_ratio"] <= 10


class TestAssertionExit:
    def test_failed_bound_exits_3_and_names_reference(self, capsys, monkeypatch):
        import copy

        from tracefn_lab import calibration

        strict = copy.deepcopy(calibration.load_manifest())
        strict["suites"]["ks_kl2"]["threshold"] = 0.0
        monkeypatch.setattr(calibration, "_cached", strict)
        code, _, err = run_cli(["satotate", "--family", "kl2", "--q", "101"],
                               capsys)
        assert code == EXIT_ASSERTION
        assert "FAIL ks_kl2_q101" in err
        assert "equidistribution" in err
