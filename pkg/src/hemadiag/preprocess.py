"""Input canonization and fold-local median imputation.

``canonize`` matches raw measurements against the catalog and drops what it
cannot trust (unknown codes, out-of-bounds or non-finite values), reporting
warnings instead of failing.  ``MedianImputer`` fills the remaining gaps
with per-parameter medians learned from training cases only, which keeps
cross-validation free of test-fold leakage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .catalog import ParameterCatalog, Subset, check_subset
from .cohort import CaseRecord, Cohort

__all__ = [
    "canonize",
    "ImputerStats",
    "FeatureVector",
    "MedianImputer",
    "fit_imputer",
    "impute",
    "VersionMismatchError",
]


class VersionMismatchError(ValueError):
    """Catalog version of the data does not match the fitted statistics."""


def canonize(
    raw: Mapping[str, float], catalog: ParameterCatalog
) -> tuple[dict[str, float], list[str]]:
    """Filter raw measurements against the catalog.

    Returns the surviving subset of ``raw`` plus one warning per dropped
    entry.  Never invents or alters values.
    """
    clean: dict[str, float] = {}
    warnings: list[str] = []
    for code, value in raw.items():
        if code not in catalog:
            warnings.append(f"unknown parameter code {code!r}: dropped")
            continue
        try:
            value = float(value)
        except (TypeError, ValueError):
            warnings.append(f"{code}: non-numeric value {value!r}: dropped")
            continue
        if not math.isfinite(value):
            warnings.append(f"{code}: non-finite value {value!r}: dropped")
            continue
        p = catalog[code]
        if not (p.plausible_min <= value <= p.plausible_max):
            warnings.append(
                f"{code}: value {value} outside plausible range "
                f"[{p.plausible_min}, {p.plausible_max}]: dropped"
            )
            continue
        clean[code] = value
    return clean, warnings


@dataclass(frozen=True)
class ImputerStats:
    """Per-parameter medians (and observation counts) over a training fold."""

    catalog_version: str
    subset: Subset
    codes: tuple[str, ...]
    medians: np.ndarray  # aligned to codes; defined for every code
    observed_counts: np.ndarray | None = None

    def __post_init__(self) -> None:
        if len(self.medians) != len(self.codes):
            raise ValueError("medians not aligned to codes")
        if not np.all(np.isfinite(self.medians)):
            raise ValueError("imputer medians must be finite for every parameter")

    def median_map(self) -> dict[str, float]:
        return {c: float(m) for c, m in zip(self.codes, self.medians)}


@dataclass(frozen=True)
class FeatureVector:
    """Dense vector over the active subset, with per-slot provenance."""

    values: np.ndarray
    observed: np.ndarray  # bool per slot; False means the slot was imputed

    def __post_init__(self) -> None:
        if self.values.shape != self.observed.shape:
            raise ValueError("provenance flags not aligned to values")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature vector has undefined entries")

    @property
    def n_imputed(self) -> int:
        return int((~self.observed).sum())


def fit_imputer(
    cases: Sequence[CaseRecord],
    catalog: ParameterCatalog,
    subset: Subset = "full",
) -> ImputerStats:
    """Median of observed training values per parameter.

    Parameters never observed in training fall back to the midpoint of
    their reference range.
    """
    check_subset(subset)
    if not cases:
        raise ValueError("cannot fit an imputer on an empty training set")
    params = catalog.subset_params(subset)
    codes = tuple(p.code for p in params)
    observed: dict[str, list[float]] = {c: [] for c in codes}
    for case in cases:
        for code, value in case.measurements.items():
            values = observed.get(code)
            if values is not None:
                values.append(value)
    medians = np.empty(len(codes))
    counts = np.zeros(len(codes), dtype=np.int64)
    for i, p in enumerate(params):
        vals = observed[p.code]
        counts[i] = len(vals)
        medians[i] = np.median(vals) if vals else p.ref_midpoint
    return ImputerStats(
        catalog_version=catalog.version,
        subset=subset,
        codes=codes,
        medians=medians,
        observed_counts=counts,
    )


def impute(measurements: Mapping[str, float], stats: ImputerStats) -> FeatureVector:
    """Fill missing slots of one case with the fitted medians."""
    values = stats.medians.copy()
    observed = np.zeros(len(stats.codes), dtype=bool)
    index = {c: i for i, c in enumerate(stats.codes)}
    for code, value in measurements.items():
        i = index.get(code)
        if i is not None:
            values[i] = value
            observed[i] = True
    return FeatureVector(values=values, observed=observed)


class MedianImputer:
    """Estimator-style wrapper around :func:`fit_imputer` / :func:`impute`.

    Follows the fit/transform convention so it drops into pipeline tooling
    that expects ``get_params``/``set_params``.
    """

    def __init__(
        self,
        catalog: ParameterCatalog | None = None,
        subset: Subset = "full",
        append_missing_indicators: bool = False,
    ):
        self.catalog = catalog
        self.subset = subset
        self.append_missing_indicators = append_missing_indicators

    def get_params(self, deep: bool = True) -> dict:
        return {
            "catalog": self.catalog,
            "subset": self.subset,
            "append_missing_indicators": self.append_missing_indicators,
        }

    def set_params(self, **params) -> "MedianImputer":
        for key, value in params.items():
            if key not in self.get_params():
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    def _require_catalog(self) -> ParameterCatalog:
        if self.catalog is None:
            from .catalog import default_catalog

            self.catalog = default_catalog()
        return self.catalog

    def fit(self, cases: Sequence[CaseRecord], y=None) -> "MedianImputer":
        self.stats_ = fit_imputer(cases, self._require_catalog(), self.subset)
        return self

    def transform_case(self, case: CaseRecord | Mapping[str, float]) -> FeatureVector:
        self._check_fitted()
        measurements = case.measurements if isinstance(case, CaseRecord) else case
        return impute(measurements, self.stats_)

    def transform(
        self, cases: Sequence[CaseRecord] | Cohort
    ) -> tuple[np.ndarray, np.ndarray]:
        """Dense (n, d) matrix plus a boolean observed mask of the same shape.

        When ``append_missing_indicators`` is set, the mask is also appended
        to the matrix as 0/1 columns (doubling the width).
        """
        self._check_fitted()
        if isinstance(cases, Cohort):
            if cases.catalog_version != self.stats_.catalog_version:
                raise VersionMismatchError(
                    f"cohort built against catalog {cases.catalog_version!r}, "
                    f"imputer fitted on {self.stats_.catalog_version!r}"
                )
            cases = cases.cases
        n, d = len(cases), len(self.stats_.codes)
        X = np.empty((n, d))
        mask = np.zeros((n, d), dtype=bool)
        for r, case in enumerate(cases):
            fv = impute(case.measurements, self.stats_)
            X[r] = fv.values
            mask[r] = fv.observed
        if self.append_missing_indicators:
            X = np.hstack([X, mask.astype(float)])
        return X, mask

    def fit_transform(self, cases, y=None):
        return self.fit(cases).transform(cases)

    def _check_fitted(self) -> None:
        if not hasattr(self, "stats_"):
            raise RuntimeError("MedianImputer is not fitted; call fit() first")
