import json

import pytest
from fastapi.testclient import TestClient

from hemadiag.model_io import save_model
from hemadiag.pipeline import predict_payload
from hemadiag.service import create_app, load_registry


@pytest.fixture(scope="module")
def models_dir(tmp_path_factory, small_model, small_model_basic):
    path = tmp_path_factory.mktemp("registry")
    save_model(small_model, path / "full.sbaf")
    save_model(small_model_basic, path / "basic.sbaf")
    return path


@pytest.fixture(scope="module")
def client(models_dir, catalog):
    app = create_app(models_dir=models_dir, catalog=catalog)
    return TestClient(app)


class TestHealthAndModels:
    def test_health(self, client):
        response = client.get("/v1/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok"}

    def test_models_listing(self, client, small_model, catalog):
        response = client.get("/v1/models")
        assert response.status_code == 200
        entries = {m["model_id"]: m for m in response.json()}
        assert set(entries) == {"hem181", "hem061"}
        assert entries["hem181"]["subset"] == "full"
        assert entries["hem061"]["subset"] == "basic"
        assert entries["hem181"]["n_trees"] == small_model.config.n_trees
        assert entries["hem181"]["catalog_version"] == catalog.version


class TestCatalogEndpoint:
    def test_full_has_181_entries(self, client):
        entries = client.get("/v1/catalog", params={"subset": "full"}).json()
        assert len(entries) == 181

    def test_basic_has_61_entries(self, client):
        entries = client.get("/v1/catalog", params={"subset": "basic"}).json()
        assert len(entries) == 61
        assert all(e["basic"] for e in entries)

    def test_reference_ranges_ordered(self, client):
        entries = client.get("/v1/catalog").json()
        for e in entries:
            assert e["ref_low"] <= e["ref_high"]
            assert set(e) == {
                "code",
                "name",
                "unit",
                "basic",
                "ref_low",
                "ref_high",
                "plausible_min",
                "plausible_max",
            }

    def test_bad_subset_rejected(self, client):
        assert client.get("/v1/catalog", params={"subset": "tiny"}).status_code == 400


class TestPredict:
    def test_unknown_model_is_404(self, client):
        response = client.post(
            "/v1/predict",
            json={"model_id": "nope", "measurements": {"P001": 40.0}},
        )
        assert response.status_code == 404

    def test_empty_measurements_is_400(self, client):
        response = client.post(
            "/v1/predict", json={"model_id": "hem181", "measurements": {}}
        )
        assert response.status_code == 400

    def test_malformed_body_reports_field(self, client):
        response = client.post("/v1/predict", json={"measurements": {"P001": 1.0}})
        assert response.status_code == 422
        assert any("model_id" in str(item.get("loc")) for item in response.json()["detail"])

    def test_unknown_code_warns_but_succeeds(self, client):
        response = client.post(
            "/v1/predict",
            json={"model_id": "hem181", "measurements": {"P001": 40.0, "ZZZ": 1.0}},
        )
        assert response.status_code == 200
        body = response.json()
        assert any("ZZZ" in w for w in body["warnings"])
        assert len(body["ranked"]) == 10

    def test_median_inputs_match_empty_imputation(self, client, small_model, catalog):
        medians = small_model.imputer.median_map()
        response = client.post(
            "/v1/predict", json={"model_id": "hem181", "measurements": medians}
        )
        assert response.status_code == 200
        body = response.json()
        # fully-measured case at the training medians ranks identically to
        # an all-imputed vector (which equals the median vector)
        expected = predict_payload(small_model, medians, catalog)
        assert body["ranked"] == expected["ranked"]
        assert body["chart"] == expected["chart"]
        assert "0 of 181 parameters imputed" in expected["warnings"][-1]

    def test_identical_requests_identical_bodies(self, client):
        payload = {"model_id": "hem061", "measurements": {"P001": 40.0, "P003": 12.0}}
        a = client.post("/v1/predict", json=payload)
        b = client.post("/v1/predict", json=payload)
        assert a.content == b.content

    def test_response_schema(self, client):
        response = client.post(
            "/v1/predict", json={"model_id": "hem181", "measurements": {"P001": 40.0}}
        )
        body = response.json()
        assert set(body) == {"model_id", "ranked", "chart", "warnings"}
        entry = body["ranked"][0]
        assert set(entry) == {"code", "name", "probability", "prevalence", "info_score_bits"}
        probs = [e["probability"] for e in body["ranked"]]
        assert probs == sorted(probs, reverse=True)
        assert set(body["chart"]) == {
            "inner_radius",
            "max_radius",
            "scale_bits_per_unit",
            "segments",
            "remainder",
            "kl_bits",
        }


class TestRegistry:
    def test_corrupt_model_fails_startup(self, tmp_path, catalog, small_model):
        save_model(small_model, tmp_path / "ok.sbaf")
        good = (tmp_path / "ok.sbaf").read_text()
        doc = json.loads(good)
        doc["model_id"] = "evil"
        (tmp_path / "bad.sbaf").write_text(json.dumps(doc))
        with pytest.raises(Exception, match="checksum"):
            load_registry(tmp_path, catalog)

    def test_empty_dir_fails_startup(self, tmp_path, catalog):
        with pytest.raises(FileNotFoundError):
            load_registry(tmp_path, catalog)

    def test_missing_dir_fails_startup(self, tmp_path, catalog):
        with pytest.raises(FileNotFoundError):
            load_registry(tmp_path / "absent", catalog)
