"""End-to-end check: the built UI served by the real API server.

Run from the repo root after `npm run build` in frontend/:

    python frontend/smoke.py

Creates a throwaway session on a synthetic dataset, then replays the
request shapes the UI issues and checks the fields it renders.
"""

import sys
import tempfile
import time

sys.path.insert(0, "tests")

from starlette.testclient import TestClient

from conftest import make_sine_bump, write_dataset_pair
from tsxplain.server import create_app

import pathlib


def main() -> int:
    dist = pathlib.Path(__file__).parent / "dist"
    if not dist.is_dir():
        print("frontend/dist missing, run `npm run build` first")
        return 1
    store = tempfile.mkdtemp(prefix="smokestore")
    data_dir = pathlib.Path(tempfile.mkdtemp(prefix="smokedata"))
    train, test = write_dataset_pair(make_sine_bump(40, 64, seed=5), data_dir)

    app = create_app(store, static_dir=str(dist))
    with TestClient(app) as client:
        page = client.get("/")
        assert page.status_code == 200 and "tsxplain explorer" in page.text
        assert client.get("/main.js").status_code == 200
        assert client.get("/style.css").status_code == 200

        cfg = {
            "dataset": {"train": train, "test": test},
            "model": {"train": {"epochs": 40, "filters": [3, 6]}},
            "methods": ["saliency", "occlusion"],
            "techniques": ["pca", "kpca"],
            "mc_passes": 10,
            "seed": 1,
        }
        r = client.post("/api/sessions", json=cfg)
        assert r.status_code == 201, r.text
        sid = r.json()["id"]
        deadline = time.time() + 120
        while time.time() < deadline:
            st = client.get(f"/api/sessions/{sid}/status").json()
            if st["state"] in ("done", "failed"):
                break
            time.sleep(0.05)
        assert st["state"] == "done", st

        ranking = client.get(f"/api/sessions/{sid}/ranking").json()
        assert ranking["table"]["methods"], ranking
        proj = client.get(f"/api/sessions/{sid}/projections").json()
        assert proj["cells"] and proj["samples"]["labels"]

        detail = client.get(f"/api/sessions/{sid}/samples/0").json()
        for field in ("series", "probs", "attributions", "actmax", "uncertainty"):
            assert field in detail, field

        # the exact op grammar the card tools emit
        body = {
            "base": 0,
            "edits": [
                {"kind": "drag", "t": 4, "value": 2.5, "radius": 3},
                {"kind": "region", "a": 5, "b": 9, "op": "global_mean"},
                {"kind": "region", "a": 5, "b": 9, "op": "moving_avg", "k": 4},
            ],
        }
        w = client.post(f"/api/sessions/{sid}/whatif", json=body)
        assert w.status_code == 200, w.text
        out = w.json()
        assert len(out["series"]) == len(detail["series"])
        assert out["coords"], "reprojection coords missing"

        c = client.post(
            f"/api/sessions/{sid}/counterfactual", json={"idx": 0, "method": "native"}
        )
        assert c.status_code == 200, c.text
        cf = c.json()["counterfactual"]
        assert isinstance(cf["degenerate"], bool)
        assert len(cf["changed_mask"]) == len(detail["series"])

    print("smoke ok: static ui + session lifecycle + card round trips")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
