"""Seeded synthetic-cohort generator.

Stands in for the private hospital dataset: 43 disease categories whose
frequency profile, per-class measurement coverage, and class-conditional
value shifts are calibrated so that cohort statistics (prevalence ranking,
entropy, parameter coverage) land where the production system's published
numbers sit.  Generation is a pure function of the spec, including its seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ._rng import child_rng
from .catalog import ParameterCatalog, default_catalog
from .cohort import CaseRecord, Cohort, DiseaseCode

__all__ = [
    "SynthError",
    "ClassProfile",
    "SynthSpec",
    "DISEASE_TABLE",
    "apportion",
    "default_spec",
    "synth_cohort",
    "read_spec",
    "write_spec",
]


class SynthError(ValueError):
    """Raised for invalid generator specs."""


# Observed admission counts for the ten most frequent categories (out of
# 8233), with standard ICD category titles.  The remaining 1339 admissions
# are spread over 33 synthetic rare categories with geometrically decaying
# weights (ratio 0.9), which places the 43-class distribution's entropy at
# 3.97 bits and its collision mass (sum of squared prevalences) at 0.094.
TOP10_TABLE: tuple[tuple[str, str, int], ...] = (
    ("D47", "Other neoplasms of uncertain or unknown behaviour of lymphoid, haematopoietic and related tissue", 1522),
    ("D50", "Iron deficiency anaemia", 1190),
    ("D69", "Purpura and other haemorrhagic conditions", 743),
    ("C90", "Multiple myeloma and malignant plasma cell neoplasms", 739),
    ("C91", "Lymphoid leukaemia", 696),
    ("C92", "Myeloid leukaemia", 578),
    ("D75", "Other diseases of blood and blood-forming organs", 547),
    ("D46", "Myelodysplastic syndromes", 457),
    ("D64", "Other anaemias", 218),
    ("D45", "Polycythaemia vera", 204),
)

REFERENCE_COHORT_SIZE = 8233
N_RARE_CLASSES = 33
RARE_TOTAL = 1339
RARE_DECAY = 0.9


def apportion(weights: Sequence[float], total: int) -> list[int]:
    """Largest-remainder apportionment of ``total`` over ``weights``.

    Ties in remainders break by position, so the result is deterministic.
    """
    if total < 0:
        raise ValueError("total must be non-negative")
    s = float(sum(weights))
    if s <= 0:
        raise ValueError("weights must have positive sum")
    quotas = [w / s * total for w in weights]
    out = [math.floor(q) for q in quotas]
    remainder = total - sum(out)
    order = sorted(range(len(weights)), key=lambda i: (-(quotas[i] - out[i]), i))
    for i in order[:remainder]:
        out[i] += 1
    return out


def _disease_table() -> tuple[tuple[str, str, int], ...]:
    rare_counts = apportion(
        [RARE_DECAY**k for k in range(N_RARE_CLASSES)], RARE_TOTAL
    )
    rare = tuple(
        (f"X{k + 1:02d}", f"Rare haematological category {k + 1:02d}", rare_counts[k])
        for k in range(N_RARE_CLASSES)
    )
    return TOP10_TABLE + rare


#: code -> (display name, reference frequency out of 8233), all 43 classes
DISEASE_TABLE: dict[str, tuple[str, int]] = {
    code: (name, freq) for code, name, freq in _disease_table()
}


@dataclass(frozen=True)
class ClassProfile:
    """Generator profile for one disease class."""

    code: str
    name: str
    prevalence: float
    signature: Mapping[str, float]  # parameter code -> mean shift in SD units
    measure_prob: Mapping[str, float]  # parameter code -> measurement probability

    def disease(self) -> DiseaseCode:
        return DiseaseCode(self.code, self.name)


@dataclass(frozen=True)
class SynthSpec:
    n_cases: int
    seed: int
    catalog_version: str
    baseline: Mapping[str, tuple[float, float]]  # code -> (mean, sd)
    classes: tuple[ClassProfile, ...]

    def validate(self, catalog: ParameterCatalog) -> None:
        if self.n_cases < len(self.classes):
            raise SynthError(
                f"n_cases={self.n_cases} is below the class count {len(self.classes)}"
            )
        if self.catalog_version != catalog.version:
            raise SynthError(
                f"spec targets catalog {self.catalog_version!r}, "
                f"got {catalog.version!r}"
            )
        psum = sum(c.prevalence for c in self.classes)
        if abs(psum - 1.0) > 1e-9:
            raise SynthError(f"class prevalences sum to {psum!r}, expected 1")
        for code in catalog.codes:
            if code not in self.baseline:
                raise SynthError(f"baseline missing for parameter {code!r}")
        for cls in self.classes:
            for code in cls.signature:
                if code not in catalog:
                    raise SynthError(
                        f"class {cls.code}: signature parameter {code!r} not in catalog"
                    )
            for code, prob in cls.measure_prob.items():
                if code not in catalog:
                    raise SynthError(
                        f"class {cls.code}: probability for unknown parameter {code!r}"
                    )
                if not (0.0 <= prob <= 1.0):
                    raise SynthError(
                        f"class {cls.code}: measurement probability for {code} "
                        f"is {prob}, outside [0, 1]"
                    )


# Calibration targets: mean fraction of parameters measured per case.
COVERAGE_TARGET_FULL = 0.249
COVERAGE_TARGET_BASIC = 0.664
# Signature composition and shift are tuned so that stratified 10-fold CV on
# the 8233-case default cohort lands in the deployed models' accuracy regime
# (top-1 near 0.6, top-5 near 0.85) with the basic panel close behind the
# full one.  Most signature parameters sit in the basic panel, which is what
# makes the reduced panel carry nearly the whole fingerprint.
SIGNATURE_BASIC = 10
SIGNATURE_NONBASIC = 2
SIGNATURE_BOOST = 0.25
DEFAULT_SHIFT_SD = 0.85


def default_spec(
    n_cases: int = REFERENCE_COHORT_SIZE,
    seed: int = 42,
    catalog: ParameterCatalog | None = None,
    shift_sd: float = DEFAULT_SHIFT_SD,
) -> SynthSpec:
    """Build the calibrated default generator spec.

    Each class carries 12 signature parameters (10 basic, 2 non-basic)
    whose class-conditional means shift by ``shift_sd`` baseline SDs,
    alternating sign.  Base measurement probabilities are solved from the
    coverage targets given the +0.25 signature boost, so the expected
    coverage equals the targets exactly.
    """
    catalog = catalog or default_catalog()
    basic = list(catalog.basic_codes)
    nonbasic = [c for c in catalog.codes if c not in set(basic)]
    n_basic, n_nonbasic = len(basic), len(nonbasic)

    p_basic = COVERAGE_TARGET_BASIC - SIGNATURE_BOOST * SIGNATURE_BASIC / n_basic
    p_nonbasic = (
        COVERAGE_TARGET_FULL * len(catalog)
        - n_basic * COVERAGE_TARGET_BASIC
        - SIGNATURE_BOOST * SIGNATURE_NONBASIC
    ) / n_nonbasic
    if not (0 <= p_basic <= 1 - SIGNATURE_BOOST and 0 <= p_nonbasic <= 1 - SIGNATURE_BOOST):
        raise SynthError("coverage targets are not satisfiable with these boosts")

    baseline = {
        p.code: (p.ref_midpoint, (p.ref_high - p.ref_low) / 4.0) for p in catalog.params
    }

    table = list(DISEASE_TABLE.items())
    total = sum(freq for _, (_, freq) in table)
    classes: list[ClassProfile] = []
    for ci, (code, (name, freq)) in enumerate(table):
        signature: dict[str, float] = {}
        for j in range(SIGNATURE_BASIC):
            param = basic[(ci * SIGNATURE_BASIC + j) % n_basic]
            signature[param] = shift_sd if j % 2 == 0 else -shift_sd
        for j in range(SIGNATURE_NONBASIC):
            param = nonbasic[(ci * SIGNATURE_NONBASIC + j) % n_nonbasic]
            signature[param] = shift_sd if j % 2 == 0 else -shift_sd
        probs: dict[str, float] = {}
        for p in catalog.params:
            base = p_basic if p.basic else p_nonbasic
            if p.code in signature:
                base = min(1.0, base + SIGNATURE_BOOST)
            probs[p.code] = base
        classes.append(
            ClassProfile(
                code=code,
                name=name,
                prevalence=freq / total,
                signature=signature,
                measure_prob=probs,
            )
        )
    return SynthSpec(
        n_cases=n_cases,
        seed=seed,
        catalog_version=catalog.version,
        baseline=baseline,
        classes=tuple(classes),
    )


def synth_cohort(spec: SynthSpec, catalog: ParameterCatalog | None = None) -> Cohort:
    """Generate a cohort from ``spec``; deterministic given the spec's seed.

    Per-class case counts follow largest-remainder apportionment of the
    target prevalences, so they are exact, not sampled.  Every measurement
    is clipped to the parameter's plausibility bounds.
    """
    catalog = catalog or default_catalog()
    spec.validate(catalog)

    counts = apportion([c.prevalence for c in spec.classes], spec.n_cases)
    codes = list(catalog.codes)
    d = len(codes)
    means = np.array([spec.baseline[c][0] for c in codes])
    sds = np.array([spec.baseline[c][1] for c in codes])
    lo = np.array([catalog[c].plausible_min for c in codes])
    hi = np.array([catalog[c].plausible_max for c in codes])

    cases: list[CaseRecord] = []
    case_index = 0
    for cls, n_cls in zip(spec.classes, counts):
        prob = np.array([cls.measure_prob[c] for c in codes])
        cls_means = means.copy()
        for code, shift in cls.signature.items():
            i = catalog.index(code)
            cls_means[i] = means[i] + shift * sds[i]
        first_sig = min(cls.signature, key=catalog.index) if cls.signature else codes[0]
        for j in range(n_cls):
            rng = child_rng(spec.seed, case_index)
            case_index += 1
            measured = rng.random(d) < prob
            if not measured.any():
                measured[catalog.index(first_sig)] = True
            values = np.clip(cls_means + rng.standard_normal(d) * sds, lo, hi)
            measurements = {
                codes[i]: round(float(values[i]), 4)
                for i in range(d)
                if measured[i]
            }
            cases.append(
                CaseRecord(
                    id=f"{cls.code}-{j:04d}",
                    measurements=measurements,
                    diagnosis=cls.code,
                )
            )
    cases.sort(key=lambda c: c.id)
    return Cohort(cases=tuple(cases), catalog_version=catalog.version)


def write_spec(spec: SynthSpec, path: str | Path) -> None:
    doc = {
        "n_cases": spec.n_cases,
        "seed": spec.seed,
        "catalog_version": spec.catalog_version,
        "baseline": {c: [m, s] for c, (m, s) in sorted(spec.baseline.items())},
        "classes": [
            {
                "code": c.code,
                "name": c.name,
                "prevalence": c.prevalence,
                "signature": dict(sorted(c.signature.items())),
                "measure_prob": dict(sorted(c.measure_prob.items())),
            }
            for c in spec.classes
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def read_spec(path: str | Path) -> SynthSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SynthError(f"{path}: invalid JSON: {exc}") from exc
    try:
        classes = tuple(
            ClassProfile(
                code=c["code"],
                name=c.get("name", c["code"]),
                prevalence=float(c["prevalence"]),
                signature={k: float(v) for k, v in c["signature"].items()},
                measure_prob={k: float(v) for k, v in c["measure_prob"].items()},
            )
            for c in doc["classes"]
        )
        return SynthSpec(
            n_cases=int(doc["n_cases"]),
            seed=int(doc["seed"]),
            catalog_version=doc["catalog_version"],
            baseline={k: (float(m), float(s)) for k, (m, s) in doc["baseline"].items()},
            classes=classes,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SynthError(f"{path}: malformed spec: {exc}") from exc
