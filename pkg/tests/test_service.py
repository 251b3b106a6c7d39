import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from fica import eval_basis, make_basis
from fica import io as fio
from fica.service import create_app


@pytest.fixture
def signal_csv():
    basis = make_basis((0.0, 1.0), 12, 4)
    rng = np.random.default_rng(99)
    ts = np.linspace(0.0, 1.0, 200)
    coefs = rng.standard_normal((9, 12))
    coefs[3] += 4.0 * np.exp(-0.5 * ((np.arange(12) - 6) / 1.0) ** 2)
    values = coefs @ eval_basis(basis, ts).T
    return fio.signal_to_text(values), values, ts


@pytest.fixture
def client():
    return TestClient(create_app())


def make_session(client, signal_csv, p=12):
    csv_text, *_ = signal_csv
    resp = client.post("/sessions", json={"csv": csv_text, "p": p, "order": 4})
    assert resp.status_code == 200, resp.text
    return resp.json()


class TestSessionLifecycle:
    def test_create_and_fetch(self, client, signal_csv):
        info = make_session(client, signal_csv)
        assert info["n_curves"] == 9 and info["p"] == 12
        again = client.get(f"/sessions/{info['session_id']}")
        assert again.status_code == 200
        assert again.json()["revision"] == info["revision"]

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope").status_code == 404

    def test_invalid_csv_422(self, client):
        resp = client.post("/sessions", json={"csv": "1,2,bogus\n"})
        assert resp.status_code == 422
        assert resp.json()["code"] == "invalid-input"

    def test_bad_config_422(self, client, signal_csv):
        csv_text, *_ = signal_csv
        resp = client.post("/sessions", json={"csv": csv_text, "p": 2, "order": 4})
        assert resp.status_code == 422

    def test_delete(self, client, signal_csv):
        info = make_session(client, signal_csv)
        assert client.delete(f"/sessions/{info['session_id']}").status_code == 200
        assert client.get(f"/sessions/{info['session_id']}").status_code == 404


class TestDecomposeAndComponents:
    def test_components_descending_rho(self, client, signal_csv):
        info = make_session(client, signal_csv)
        sid = info["session_id"]
        resp = client.post(
            f"/sessions/{sid}/decompose", json={"lambda": 0.0, "q": 4}
        )
        assert resp.status_code == 200, resp.text
        body = resp.json()
        assert body["q"] == 4
        comps = client.get(f"/sessions/{sid}/components").json()
        rhos = [c["rho"] for c in comps["components"]]
        assert len(rhos) == 4
        assert all(a >= b for a, b in zip(rhos, rhos[1:]))
        assert comps["components"][0]["index"] == 1
        assert len(comps["components"][0]["channel_scores"]) == 9

    def test_tune_then_summary(self, client, signal_csv):
        info = make_session(client, signal_csv)
        sid = info["session_id"]
        r = client.post(f"/sessions/{sid}/tune", json={"grid": [0.0, 0.1, 10.0]})
        assert r.status_code == 200, r.text
        tuned = r.json()
        assert "surface_csv" in tuned and tuned["j0"] >= 1
        client.post(
            f"/sessions/{sid}/decompose",
            json={"lambda": tuned["lambda_star"], "q": max(tuned["q_star"], 2)},
        )
        summary = client.get(f"/sessions/{sid}/summary").json()
        assert summary["j0"] == tuned["j0"]
        assert summary["var_pct_lambda"] is not None

    def test_components_without_model_422(self, client, signal_csv):
        info = make_session(client, signal_csv)
        assert client.get(f"/sessions/{info['session_id']}/components").status_code == 422

    def test_numeric_failure_500_with_stage_tag(self, client):
        # rank-2 curves cannot support a 3-component whitening
        ts = np.linspace(0.0, 1.0, 120)
        rows = [np.sin(2 * np.pi * ts + k) for k in np.linspace(0, 1, 6)]
        csv_text = fio.signal_to_text(np.vstack(rows))
        sid = client.post(
            "/sessions", json={"csv": csv_text, "p": 10, "order": 4}
        ).json()["session_id"]
        resp = client.post(f"/sessions/{sid}/decompose", json={"lambda": 0.0, "q": 3})
        assert resp.status_code == 500
        body = resp.json()
        assert body["stage"] == "decompose"
        assert body["code"] == "whitening-singular"


class TestSelectionAndCleaned:
    def _decomposed(self, client, signal_csv):
        info = make_session(client, signal_csv)
        sid = info["session_id"]
        rev = client.post(
            f"/sessions/{sid}/decompose", json={"lambda": 0.0, "q": 3}
        ).json()["revision"]
        return sid, rev

    def test_empty_selection_cleaned_equals_original(self, client, signal_csv):
        csv_text, values, ts = signal_csv
        sid, rev = self._decomposed(client, signal_csv)
        client.put(f"/sessions/{sid}/selection", json={"indices": [], "revision": rev})
        resp = client.get(f"/sessions/{sid}/cleaned", params={"points": ts.size})
        body = resp.json()
        got = np.array([c["values"] for c in body["curves"]])
        assert np.abs(got - values).max() < 1e-6

    def test_stale_revision_409(self, client, signal_csv):
        sid, rev = self._decomposed(client, signal_csv)
        ok = client.put(
            f"/sessions/{sid}/selection", json={"indices": [1], "revision": rev}
        )
        assert ok.status_code == 200
        stale = client.put(
            f"/sessions/{sid}/selection", json={"indices": [2], "revision": rev}
        )
        assert stale.status_code == 409

    def test_selection_out_of_range_422(self, client, signal_csv):
        sid, rev = self._decomposed(client, signal_csv)
        resp = client.put(
            f"/sessions/{sid}/selection", json={"indices": [9], "revision": rev}
        )
        assert resp.status_code == 422

    def test_selection_does_not_mutate_models(self, client, signal_csv):
        sid, rev = self._decomposed(client, signal_csv)
        before = client.get(f"/sessions/{sid}/export/model.json").content
        client.put(f"/sessions/{sid}/selection", json={"indices": [1, 3], "revision": rev})
        after = client.get(f"/sessions/{sid}/export/model.json").content
        assert before == after

    def test_revision_echoed_everywhere(self, client, signal_csv):
        sid, rev = self._decomposed(client, signal_csv)
        for path in ("components", "cleaned", "summary"):
            assert client.get(f"/sessions/{sid}/{path}").json()["revision"] == rev

    def test_channel_filter(self, client, signal_csv):
        sid, _ = self._decomposed(client, signal_csv)
        body = client.get(
            f"/sessions/{sid}/cleaned", params={"channels": "2,5"}
        ).json()
        assert [c["channel"] for c in body["curves"]] == [2, 5]
        bad = client.get(f"/sessions/{sid}/cleaned", params={"channels": "0,99"})
        assert bad.status_code == 422

    def test_concurrent_reads_see_consistent_snapshots(self, client, signal_csv):
        """Readers observe (revision, selection) pairs that some mutation
        actually produced, never a blend of old and new state."""
        import threading

        sid, rev = self._decomposed(client, signal_csv)
        valid = {rev: []}
        observed = []
        stop = threading.Event()

        def reader():
            while not stop.is_set():
                body = client.get(f"/sessions/{sid}/summary").json()
                observed.append((body["revision"], tuple(body["selection"])))

        threads = [threading.Thread(target=reader) for _ in range(2)]
        for t in threads:
            t.start()
        current = rev
        for k in range(6):
            sel = [1] if k % 2 == 0 else [2]
            resp = client.put(
                f"/sessions/{sid}/selection",
                json={"indices": sel, "revision": current},
            ).json()
            current = resp["revision"]
            valid[current] = resp["indices"]
        stop.set()
        for t in threads:
            t.join()
        assert observed, "readers never ran"
        for revision, selection in observed:
            assert revision in valid
            assert list(selection) == list(valid[revision])

    def test_raw_override_ignores_selection(self, client, signal_csv):
        csv_text, values, ts = signal_csv
        sid, rev = self._decomposed(client, signal_csv)
        client.put(
            f"/sessions/{sid}/selection", json={"indices": [1, 2], "revision": rev}
        )
        raw = client.get(
            f"/sessions/{sid}/cleaned", params={"points": ts.size, "raw": True}
        ).json()
        got = np.array([c["values"] for c in raw["curves"]])
        assert np.abs(got - values).max() < 1e-6
        cleaned = client.get(
            f"/sessions/{sid}/cleaned", params={"points": ts.size}
        ).json()
        got_clean = np.array([c["values"] for c in cleaned["curves"]])
        assert np.abs(got_clean - values).max() > 1e-3


class TestCliParity:
    def test_cleaned_csv_matches_cli_bytes(self, client, signal_csv, tmp_path):
        """Cleaning via the API with selection {1,2} equals CLI --select 1,2."""
        from click.testing import CliRunner

        from fica.cli import main

        csv_text, values, ts = signal_csv
        sig = tmp_path / "sig.csv"
        sig.write_text(csv_text)
        work = tmp_path / "work"
        runner = CliRunner()
        assert runner.invoke(main, ["fit", "--input", str(sig), "--p", "12",
                                    "--workdir", str(work)]).exit_code == 0
        assert runner.invoke(main, ["decompose", "--workdir", str(work),
                                    "--lam", "0", "--q", "3"]).exit_code == 0
        assert runner.invoke(main, ["clean", "--workdir", str(work),
                                    "--select", "1,2"]).exit_code == 0
        cli_bytes = (work / "cleaned.csv").read_bytes()

        info = make_session(client, signal_csv)
        sid = info["session_id"]
        rev = client.post(
            f"/sessions/{sid}/decompose", json={"lambda": 0.0, "q": 3}
        ).json()["revision"]
        client.put(
            f"/sessions/{sid}/selection", json={"indices": [1, 2], "revision": rev}
        )
        api_bytes = client.get(f"/sessions/{sid}/export/cleaned.csv").content
        assert api_bytes == cli_bytes
