"""Case records, cohorts, and cohort-level statistics.

A cohort file is JSON Lines, one case per line, keys sorted so identical
cohorts serialize to identical bytes.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .catalog import ParameterCatalog, Subset, check_subset

__all__ = [
    "CohortError",
    "DiseaseCode",
    "CaseRecord",
    "Cohort",
    "PrevalenceTable",
    "compute_prevalence",
    "shannon_entropy",
    "coverage_stats",
    "read_cohort",
    "write_cohort",
]

ICD_PATTERN = re.compile(r"^[A-Z][0-9][0-9]$")


class CohortError(ValueError):
    """Raised for invalid case records or cohort files."""


@dataclass(frozen=True)
class DiseaseCode:
    """Three-character disease category code with a display name."""

    code: str
    name: str = ""

    def __post_init__(self) -> None:
        if not ICD_PATTERN.match(self.code):
            raise CohortError(
                f"disease code must match [A-Z][0-9][0-9], got {self.code!r}"
            )


@dataclass(frozen=True)
class CaseRecord:
    """One admission: a sparse set of measurements plus the discharge diagnosis."""

    id: str
    measurements: Mapping[str, float]
    diagnosis: str

    def __post_init__(self) -> None:
        if not self.id:
            raise CohortError("case id must be non-empty")
        if not ICD_PATTERN.match(self.diagnosis):
            raise CohortError(
                f"case {self.id!r}: diagnosis must match [A-Z][0-9][0-9], "
                f"got {self.diagnosis!r}"
            )
        if not self.measurements:
            raise CohortError(f"case {self.id!r}: at least one measurement required")

    def validate_against(self, catalog: ParameterCatalog) -> None:
        for code, value in self.measurements.items():
            if code not in catalog:
                raise CohortError(f"case {self.id!r}: unknown parameter {code!r}")
            p = catalog[code]
            if not (p.plausible_min <= value <= p.plausible_max):
                raise CohortError(
                    f"case {self.id!r}: {code}={value} outside plausible range "
                    f"[{p.plausible_min}, {p.plausible_max}]"
                )


@dataclass(frozen=True)
class Cohort:
    cases: tuple[CaseRecord, ...]
    catalog_version: str

    def __post_init__(self) -> None:
        ids = [c.id for c in self.cases]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise CohortError(f"duplicate case ids: {dupes[:5]}")

    def __len__(self) -> int:
        return len(self.cases)


@dataclass(frozen=True)
class PrevalenceTable:
    """Per-disease frequency and prevalence over a cohort (the pretest probabilities)."""

    entries: Mapping[str, tuple[int, float]]  # code -> (frequency, prevalence)
    total: int = field(default=0)

    def __post_init__(self) -> None:
        total = sum(f for f, _ in self.entries.values())
        if self.total and self.total != total:
            raise CohortError(
                f"frequencies sum to {total}, expected total {self.total}"
            )
        object.__setattr__(self, "total", total)
        psum = sum(p for _, p in self.entries.values())
        if abs(psum - 1.0) > 1e-9:
            raise CohortError(f"prevalences sum to {psum!r}, expected 1")

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(self.entries)

    def frequency(self, code: str) -> int:
        return self.entries[code][0]

    def prevalence(self, code: str) -> float:
        return self.entries[code][1]


def compute_prevalence(cohort: Cohort) -> PrevalenceTable:
    """Count diagnoses; prevalence = frequency / cohort size.  Codes sorted."""
    if not cohort.cases:
        raise CohortError("cannot compute prevalence of an empty cohort")
    counts: dict[str, int] = {}
    for case in cohort.cases:
        counts[case.diagnosis] = counts.get(case.diagnosis, 0) + 1
    n = len(cohort.cases)
    entries = {code: (counts[code], counts[code] / n) for code in sorted(counts)}
    return PrevalenceTable(entries)


def shannon_entropy(table: PrevalenceTable) -> float:
    """Entropy of the prevalence distribution, in bits."""
    return -sum(p * math.log2(p) for _, p in table.entries.values() if p > 0)


def coverage_stats(cohort: Cohort, catalog: ParameterCatalog, subset: Subset) -> float:
    """Mean fraction of the subset's parameters measured per case."""
    check_subset(subset)
    if not cohort.cases:
        raise CohortError("cannot compute coverage of an empty cohort")
    codes = set(catalog.subset_codes(subset))
    total = sum(
        len(codes.intersection(case.measurements)) for case in cohort.cases
    )
    return total / (len(codes) * len(cohort.cases))


def write_cohort(cohort: Cohort, path: str | Path) -> None:
    """Write JSON Lines with lexicographically sorted keys (byte-stable)."""
    with open(path, "w", encoding="utf-8") as fh:
        for case in cohort.cases:
            obj = {
                "diagnosis": case.diagnosis,
                "id": case.id,
                "measurements": dict(sorted(case.measurements.items())),
            }
            fh.write(json.dumps(obj, sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def read_cohort(
    path: str | Path,
    catalog: ParameterCatalog,
    validate: bool = True,
) -> Cohort:
    """Read a JSON Lines cohort, optionally validating against the catalog."""
    cases: list[CaseRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CohortError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            try:
                case = CaseRecord(
                    id=obj["id"],
                    measurements={k: float(v) for k, v in obj["measurements"].items()},
                    diagnosis=obj["diagnosis"],
                )
            except (KeyError, TypeError) as exc:
                raise CohortError(f"{path}:{lineno}: malformed case: {exc}") from exc
            if validate:
                try:
                    case.validate_against(catalog)
                except CohortError as exc:
                    raise CohortError(f"{path}:{lineno}: {exc}") from exc
            cases.append(case)
    return Cohort(cases=tuple(cases), catalog_version=catalog.version)


def sorted_cases(cases: Iterable[CaseRecord]) -> list[CaseRecord]:
    """Canonical case ordering (by id); training pipelines sort before use so
    results do not depend on input order."""
    return sorted(cases, key=lambda c: c.id)
