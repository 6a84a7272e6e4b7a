import json

import pytest
from fastapi.testclient import TestClient

from tracefn_lab.reporting import dump_csv, dump_json, jsonable
from tracefn_lab.service.app import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


class TestEndpoints:
    def test_health(self, client):
        assert client.get("/healthz").json() == {"status": "ok"}

    def test_identities(self, client):
        r = client.post("/identities", json={"q": 13})
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "pass"
        assert body["failures"] == []
        assert all(c["value"] <= c["bound"] for c in body["checks"]
                   if c["kind"] == "max")

    def test_bounds(self, client):
        r = client.post("/bounds", json={"q": 101, "families": ["kl2"]})
        assert r.status_code == 200
        assert r.json()["status"] == "pass"

    def test_satotate_rows(self, client):
        r = client.post("/satotate", json={"family": "gauss", "q_grid": [13]})
        assert r.status_code == 200
        assert len(r.json()["data"]["rows"]) == 11

    def test_dap(self, client):
        r = client.post("/dap", json={"k": 2, "X": 500, "q": 7, "a": 3})
        assert r.status_code == 200
        rep = r.json()["data"]["report"]
        assert rep["discrepancy"] == pytest.approx(
            rep["progression_sum"] - rep["coprime_average"])

    def test_khan_ngo_small(self, client):
        r = client.post("/khan-ngo", json={"q": 101, "lmax": 3})
        assert r.status_code == 200
        assert r.json()["status"] == "pass"

    def test_usage_error(self, client):
        r = client.post("/identities", json={"q": 10})
        assert r.status_code == 400
        assert r.json()["error"] == "usage"

    def test_validation_error(self, client):
        r = client.post("/identities", json={"q": "not a number"})
        assert r.status_code == 422

    def test_capacity_error(self, client):
        r = client.post("/dap", json={"k": 2, "X": 10**8 + 7, "q": 7, "a": 1})
        assert r.status_code == 422
        assert r.json()["error"] == "capacity"

    def test_calibration_manifest_served(self, client):
        manifest = client.get("/calibration").json()
        assert "suites" in manifest
        assert manifest["suites"]["ks_kl2"]["threshold"] == 0.02

    def test_calibrate_endpoint(self, client):
        r = client.post("/calibrate", json={"suites": ["prime_sum_cancellation"]})
        assert r.status_code == 200
        entry = r.json()["suites"]["prime_sum_cancellation"]
        assert entry["observed"] is not None
        assert entry["proposed_threshold"] == pytest.approx(2 * entry["observed"])


class TestDeterminism:
    def test_identical_requests_identical_bodies(self, client):
        payload = {"q": 101, "seed": 12345}
        a = client.post("/identities", json=payload).json()
        b = client.post("/identities", json=payload).json()
        assert dump_json(a) == dump_json(b)

    def test_seed_changes_random_checks(self, client):
        a = client.post("/bounds", json={"q": 101, "seed": 1}).json()
        b = client.post("/bounds", json={"q": 101, "seed": 2}).json()
        fk_a = next(c for c in a["checks"] if c["name"] == "interval_refinement_kl2")
        fk_b = next(c for c in b["checks"] if c["name"] == "interval_refinement_kl2")
        assert fk_a["value"] != fk_b["value"]


class TestReporting:
    def test_complex_encoding(self):
        assert jsonable(1 + 2j) == {"re": 1.0, "im": 2.0}

    def test_json_sorted_and_stable(self, tmp_path):
        obj = {"b": 1 + 1j, "a": [0.1, {"z": 2, "y": 3}]}
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        dump_json(obj, p1)
        dump_json(json.loads(p1.read_text()), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_csv_complex_columns(self):
        rows = [{"q": 5, "value": 1 + 2j}, {"q": 7, "value": 3 - 1j}]
        text = dump_csv(rows)
        lines = text.strip().splitlines()
        assert lines[0] == "q,value_re,value_im"
        assert lines[1] == "5,1.0,2.0"

    def test_csv_plain_decimal_point(self):
        text = dump_csv([{"x": 0.5}])
        assert "0.5" in text and "," not in text.splitlines()[1].replace(",", "", 0)


class TestHorizontal:
    def test_rows_and_report_only_flag(self, client):
        r = client.post("/horizontal", json={"X": 100})
        assert r.status_code == 200
        body = r.json()
        assert len(body["data"]["rows"]) == 24
        assert body["data"]["conjectural"] is True
        assert "ks_sato_tate_report_only" in body["data"]
