import pytest
from fastapi.testclient import TestClient

from app.config import get_settings
from app.main import app
from app.routers import experiments
from app.schemas import CaseOutcome, GoldensReport
from app.services.runner import DATA_DIR

from helpers import config_text

SMALL = config_text(
    2,
    [(1, 2, 1.0), (2, 1, 0.5)],
    [(1.0, 0.0, 0.0, 0.0), (0.6, 0.0, 0.8, 0.0)],
    integrator={"dt": 0.05, "t_final": 0.5},
    name="api-small",
)


@pytest.fixture
def client(tmp_path, monkeypatch):
    monkeypatch.setattr(get_settings(), "OUTPUT_DIR", str(tmp_path))
    with TestClient(app) as client:
        yield client


def test_root_and_health(client):
    body = client.get("/").json()
    assert body["service"] == get_settings().APP_NAME
    assert body["status"] == "running"
    assert client.get("/health").json()["status"] == "healthy"


def test_check_endpoint(client):
    response = client.post("/api/experiments/check", json={"config": (DATA_DIR / "case2.cfg").read_text()})
    assert response.status_code == 200
    body = response.json()
    assert body["roots"] == [2, 3, 4]
    assert body["quasi_strong"] is True


def test_check_rejects_bad_config(client):
    response = client.post("/api/experiments/check", json={"config": "[graph]\nnodes 2\ncolour red\n"})
    assert response.status_code == 400
    detail = response.json()["detail"]
    assert detail["error"] == "config"
    assert detail["message"].startswith("error[config]: line 3")


def test_check_rejects_self_loop(client):
    response = client.post("/api/experiments/check", json={"config": SMALL.replace("edge 1 2", "edge 1 1")})
    assert response.status_code == 400
    assert response.json()["detail"]["error"] == "graph"


def test_run_endpoint_writes_under_output_dir(client, tmp_path):
    response = client.post("/api/experiments/run", json={"config": SMALL, "name": "renamed"})
    assert response.status_code == 200
    body = response.json()
    assert body["case"] == "renamed"
    assert body["steps"] == 10
    assert (tmp_path / "renamed" / "trace.csv").is_file()
    assert not (tmp_path / "renamed" / "attitudes.svg").exists()


def test_run_rejects_unsafe_name(client):
    response = client.post("/api/experiments/run", json={"config": SMALL, "name": "../escape"})
    assert response.status_code == 422


def test_goldens_endpoint(client, monkeypatch, tmp_path):
    seen = []

    def fake_goldens(out_dir):
        seen.append(out_dir)
        return GoldensReport(passed=True, cases=[CaseOutcome(case="case1", passed=True)])

    monkeypatch.setattr(experiments.runner, "goldens", fake_goldens)
    response = client.get("/api/experiments/goldens")
    assert response.status_code == 200
    assert response.json()["passed"] is True
    assert seen == [tmp_path / "goldens"]


@pytest.mark.parametrize("name", ["../escaped", "..", "nested/dir"])
def test_run_rejects_unsafe_name_from_config(client, tmp_path, name):
    response = client.post("/api/experiments/run", json={"config": SMALL.replace("name api-small", f"name {name}")})
    assert response.status_code == 400
    detail = response.json()["detail"]
    assert detail["error"] == "config"
    assert "name" in detail["message"]
    assert not (tmp_path.parent / "escaped").exists()
    assert list(tmp_path.iterdir()) == []
