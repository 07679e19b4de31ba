import pytest

from hemadiag import default_catalog, default_spec, synth_cohort
from hemadiag.cohort import CaseRecord, Cohort
from hemadiag.forest import ForestConfig
from hemadiag.model import train_model


def step_function_cohort(catalog, n=120):
    """Class is a deterministic step function of always-measured P001; every
    other basic parameter carries class-independent jitter around its
    reference midpoint, so nodes always have split candidates."""
    cases = []
    classes = ["C90", "D47", "D50"]
    basic = catalog.subset_params("basic")
    for i in range(n):
        cls = i % 3
        measurements = {
            p.code: round(p.ref_midpoint * (0.92 + 0.02 * ((i * 13 + j * 7) % 9)), 3)
            for j, p in enumerate(basic)
        }
        measurements["P001"] = 20.0 + 10.0 * cls + (i % 7) * 0.1
        cases.append(
            CaseRecord(id=f"s{i:03d}", measurements=measurements, diagnosis=classes[cls])
        )
    return Cohort(cases=tuple(cases), catalog_version=catalog.version)


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


@pytest.fixture(scope="session")
def small_cohort(catalog):
    """400-case default-spec cohort; small enough for per-test training."""
    return synth_cohort(default_spec(n_cases=400, seed=42), catalog)


@pytest.fixture(scope="session")
def small_model(catalog, small_cohort):
    """Forest trained on the small cohort (full subset, 30 trees)."""
    return train_model(
        small_cohort, catalog, "full", ForestConfig(n_trees=30, seed=11), n_jobs=2
    )


@pytest.fixture(scope="session")
def small_model_basic(catalog, small_cohort):
    return train_model(
        small_cohort, catalog, "basic", ForestConfig(n_trees=30, seed=11), n_jobs=2
    )
