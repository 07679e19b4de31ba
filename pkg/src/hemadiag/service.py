"""Read-only HTTP prediction service.

Models are loaded (and checksum-verified) once at startup into an immutable
registry; requests never mutate anything, so identical requests always get
identical bodies.  The built web console, when present, is served from a
configured static directory under ``/``.
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .catalog import ParameterCatalog, check_subset, default_catalog
from .model import RandomForestModel
from .model_io import MODEL_SUFFIX, load_model
from .pipeline import predict_payload

__all__ = ["create_app", "load_registry", "MODELS_DIR_ENV"]

MODELS_DIR_ENV = "SBA_MODELS_DIR"


class PredictRequest(BaseModel):
    model_id: str
    measurements: dict[str, float] = Field(default_factory=dict)


def load_registry(
    models_dir: str | Path, catalog: ParameterCatalog
) -> dict[str, RandomForestModel]:
    """Load every model file in the directory; any invalid file aborts startup."""
    models_dir = Path(models_dir)
    if not models_dir.is_dir():
        raise FileNotFoundError(f"models directory {models_dir} does not exist")
    registry: dict[str, RandomForestModel] = {}
    for path in sorted(models_dir.glob(f"*{MODEL_SUFFIX}")):
        model = load_model(path, catalog)
        if model.model_id in registry:
            raise ValueError(f"duplicate model_id {model.model_id!r} in {models_dir}")
        registry[model.model_id] = model
    if not registry:
        raise FileNotFoundError(f"no *{MODEL_SUFFIX} model files in {models_dir}")
    return registry


def create_app(
    models_dir: str | Path | None = None,
    catalog: ParameterCatalog | None = None,
    console_dir: str | Path | None = None,
) -> FastAPI:
    catalog = catalog or default_catalog()
    if models_dir is None:
        models_dir = os.environ.get(MODELS_DIR_ENV)
    if models_dir is None:
        raise ValueError(
            f"no models directory configured (flag --models or ${MODELS_DIR_ENV})"
        )
    registry = load_registry(models_dir, catalog)

    app = FastAPI(title="hemadiag prediction service")

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/v1/models")
    def models() -> list[dict]:
        return [
            {
                "model_id": m.model_id,
                "subset": m.subset,
                "n_trees": m.config.n_trees,
                "catalog_version": m.catalog_version,
            }
            for m in registry.values()
        ]

    @app.get("/v1/catalog")
    def catalog_listing(subset: str = "full") -> list[dict]:
        try:
            check_subset(subset)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return [
            {
                "code": p.code,
                "name": p.name,
                "unit": p.unit,
                "basic": p.basic,
                "ref_low": p.ref_low,
                "ref_high": p.ref_high,
                "plausible_min": p.plausible_min,
                "plausible_max": p.plausible_max,
            }
            for p in catalog.subset_params(subset)
        ]

    @app.post("/v1/predict")
    def predict(request: PredictRequest) -> JSONResponse:
        model = registry.get(request.model_id)
        if model is None:
            raise HTTPException(
                status_code=404, detail=f"unknown model_id {request.model_id!r}"
            )
        if not request.measurements:
            raise HTTPException(
                status_code=400, detail="measurements: at least one value required"
            )
        payload = predict_payload(model, request.measurements, catalog)
        return JSONResponse(content=payload)

    if console_dir is not None:
        app.mount("/", StaticFiles(directory=str(console_dir), html=True), name="console")

    return app
