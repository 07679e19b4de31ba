"""The deployable model bundle: forest + class list + pretest probabilities
+ imputation statistics, trained from a cohort in one call.

Training always canonicalizes case order (sorted by id) before drawing
bootstrap samples, so shuffling the input cohort cannot change the model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import ParameterCatalog, Subset, check_subset
from .cohort import Cohort, DiseaseCode, PrevalenceTable, sorted_cases
from .forest import ForestConfig, ForestEnsemble, train_trees
from .preprocess import ImputerStats, MedianImputer
from .synth import DISEASE_TABLE

__all__ = ["RandomForestModel", "train_model", "class_list_for", "disease_name"]


def disease_name(code: str) -> str:
    entry = DISEASE_TABLE.get(code)
    return entry[0] if entry else code


def class_list_for(cohort: Cohort) -> tuple[DiseaseCode, ...]:
    """Canonical class list: distinct diagnoses sorted by code."""
    codes = sorted({c.diagnosis for c in cohort.cases})
    return tuple(DiseaseCode(code, disease_name(code)) for code in codes)


@dataclass
class RandomForestModel:
    model_id: str
    subset: Subset
    catalog_version: str
    config: ForestConfig
    class_list: tuple[DiseaseCode, ...]
    prevalence: PrevalenceTable
    imputer: ImputerStats
    ensemble: ForestEnsemble

    def __post_init__(self) -> None:
        if self.ensemble.n_trees != self.config.n_trees:
            raise ValueError(
                f"ensemble has {self.ensemble.n_trees} trees, "
                f"config says {self.config.n_trees}"
            )
        if self.ensemble.n_classes != len(self.class_list):
            raise ValueError("ensemble class count does not match class list")
        if set(self.prevalence.codes) != {d.code for d in self.class_list}:
            raise ValueError("prevalence table does not cover the class list")

    @property
    def class_codes(self) -> tuple[str, ...]:
        return tuple(d.code for d in self.class_list)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.ensemble.predict_proba(X)


def train_model(
    cohort: Cohort,
    catalog: ParameterCatalog,
    subset: Subset,
    config: ForestConfig,
    model_id: str | None = None,
    class_list: tuple[DiseaseCode, ...] | None = None,
    n_jobs: int = 1,
) -> RandomForestModel:
    """Fit imputer + forest on a cohort.

    ``class_list`` can widen the label space beyond the classes present in
    ``cohort`` (used by cross-validation so fold models stay aligned).
    """
    check_subset(subset)
    if cohort.catalog_version != catalog.version:
        raise ValueError(
            f"cohort built against catalog {cohort.catalog_version!r}, "
            f"got {catalog.version!r}"
        )
    cases = sorted_cases(cohort.cases)
    if class_list is None:
        class_list = class_list_for(cohort)
    index = {d.code: i for i, d in enumerate(class_list)}
    try:
        labels = np.array([index[c.diagnosis] for c in cases], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"cohort contains diagnosis outside class list: {exc}")
    if np.unique(labels).size < 2:
        raise ValueError("training cohort contains a single class")

    imputer = MedianImputer(catalog=catalog, subset=subset)
    X, _ = imputer.fit(cases).transform(cases)
    ensemble = train_trees(X, labels, len(class_list), config, n_jobs=n_jobs)

    counts = np.bincount(labels, minlength=len(class_list))
    n = len(cases)
    prevalence = PrevalenceTable(
        {d.code: (int(counts[i]), counts[i] / n) for i, d in enumerate(class_list)}
    )
    if model_id is None:
        model_id = f"hem{len(imputer.stats_.codes):03d}"
    return RandomForestModel(
        model_id=model_id,
        subset=subset,
        catalog_version=catalog.version,
        config=config,
        class_list=tuple(class_list),
        prevalence=prevalence,
        imputer=imputer.stats_,
        ensemble=ensemble,
    )
