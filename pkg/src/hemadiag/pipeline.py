"""The one prediction path shared by the CLI and the HTTP service.

canonize -> impute with the model's stored medians -> forest probabilities
-> ranked top ten -> chart geometry.  Output dictionaries follow the wire
schema exactly (sorted keys happen at serialization; numbers are reduced to
six significant digits here), so both entry points byte-agree.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .catalog import ParameterCatalog
from .chart import chart_geometry, geometry_wire, information_score
from .forest import top_k
from .model import RandomForestModel
from .preprocess import canonize, impute

__all__ = ["predict_payload"]


def _round6(x: float) -> float:
    return float(f"{x:.6g}")


def predict_payload(
    model: RandomForestModel,
    measurements: Mapping[str, float],
    catalog: ParameterCatalog,
) -> dict:
    """PredictResponse dictionary for one measurement map."""
    if not measurements:
        raise ValueError("measurements must be non-empty")
    if model.catalog_version != catalog.version:
        raise ValueError(
            f"model {model.model_id!r} was built against catalog "
            f"{model.catalog_version!r}, service catalog is {catalog.version!r}"
        )
    clean, warnings = canonize(measurements, catalog)
    fv = impute(clean, model.imputer)
    warnings.append(f"{fv.n_imputed} of {len(fv.values)} parameters imputed")

    probs = model.predict_proba(fv.values.reshape(1, -1))[0]
    ranked = top_k(probs, model.class_codes, min(10, len(model.class_codes)))
    names = {d.code: d.name for d in model.class_list}
    ranked_out = []
    for code, prob in ranked:
        prevalence = model.prevalence.prevalence(code)
        score = information_score(prob, prevalence) if prob > 0 else None
        ranked_out.append(
            {
                "code": code,
                "name": names[code],
                "probability": _round6(prob),
                "prevalence": _round6(prevalence),
                "info_score_bits": None if score is None else _round6(score),
            }
        )
    geom = chart_geometry(probs, model.class_list, model.prevalence)
    return {
        "model_id": model.model_id,
        "ranked": ranked_out,
        "chart": geometry_wire(geom),
        "warnings": warnings,
    }
