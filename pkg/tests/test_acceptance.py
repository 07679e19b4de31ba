"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The full-scale cross-validation criterion (8233 cases, 500 trees, ~10 min)
is gated behind HEMADIAG_FULL_ACCEPT=1; the always-on smoke profile covers
the same pipeline at reduced scale.  Everything else runs on every pytest
invocation.
"""

import json
import math
import os
import socket
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import step_function_cohort
from hemadiag import (
    compute_prevalence,
    coverage_stats,
    default_catalog,
    default_spec,
    gini_impurity,
    information_score,
    kl_divergence,
    shannon_entropy,
    synth_cohort,
)
from hemadiag._rng import child_rng
from hemadiag.chart import chart_geometry, render_svg
from hemadiag.cli import main as cli_main
from hemadiag.cohort import DiseaseCode, PrevalenceTable
from hemadiag.evaluate import cross_validate, stratified_folds
from hemadiag.forest import ForestConfig
from hemadiag.model import train_model
from hemadiag.model_io import _model_payload, canonical_bytes, save_model
from hemadiag.stats import roc_ovr, wilcoxon_signed_rank
from hemadiag.synth import DISEASE_TABLE

FULL_GATE = "HEMADIAG_FULL_ACCEPT"

MAJORITY_PREVALENCE = 1522 / 8233


def announce(criterion: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    line = f"ACCEPTANCE {criterion}: {status}"
    if detail:
        line += f"  ({detail})"
    print(line, file=sys.__stderr__, flush=True)


class TestSyntheticCalibration:
    def test_synthetic_calibration(self, catalog):
        t0 = time.time()
        ok = False
        try:
            cohort = synth_cohort(default_spec(), catalog)
            table = compute_prevalence(cohort)
            for code, (_, freq) in DISEASE_TABLE.items():
                assert table.frequency(code) == freq, code
            assert table.frequency("D47") == 1522
            assert table.frequency("D50") == 1190

            spec = default_spec()
            sum_sq = sum(c.prevalence**2 for c in spec.classes)
            assert 0.090 <= sum_sq <= 0.100, sum_sq
            entropy = -sum(
                c.prevalence * math.log2(c.prevalence) for c in spec.classes
            )
            assert abs(entropy - 3.95) <= 0.10, entropy
            assert shannon_entropy(table) == pytest.approx(entropy, abs=1e-12)

            elapsed = time.time() - t0
            assert elapsed < 30.0, f"{elapsed:.1f}s"
            ok = True
        finally:
            announce(
                "synthetic-calibration",
                ok,
                f"entropy={entropy:.4f} sum_p2={sum_sq:.5f} {time.time()-t0:.1f}s"
                if ok
                else "",
            )


class TestCoverageCalibration:
    def test_coverage_calibration(self, catalog):
        t0 = time.time()
        ok = False
        try:
            cohort = synth_cohort(default_spec(), catalog)
            full = coverage_stats(cohort, catalog, "full")
            basic = coverage_stats(cohort, catalog, "basic")
            assert abs(full - 0.249) <= 0.02, full
            assert abs(basic - 0.664) <= 0.02, basic
            elapsed = time.time() - t0
            assert elapsed < 10.0, f"{elapsed:.1f}s"
            ok = True
        finally:
            announce(
                "coverage-calibration",
                ok,
                f"full={full:.4f} basic={basic:.4f}" if ok else "",
            )


class TestRegimeCheck:
    def test_smoke_profile(self, catalog):
        t0 = time.time()
        ok = False
        try:
            cohort = synth_cohort(default_spec(n_cases=2000, seed=42), catalog)
            report = cross_validate(
                cohort,
                catalog,
                "full",
                ForestConfig(n_trees=100, seed=0),
                cv_seed=7,
                folds=10,
                n_jobs=2,
            )
            elapsed = time.time() - t0
            assert elapsed < 120.0, f"{elapsed:.1f}s"
            assert report.top1_accuracy >= 2 * MAJORITY_PREVALENCE
            ok = True
        finally:
            announce(
                "regime-smoke",
                ok,
                f"top1={report.top1_accuracy:.3f} (majority x2 = "
                f"{2 * MAJORITY_PREVALENCE:.3f}) {elapsed:.0f}s"
                if ok
                else "",
            )

    @pytest.mark.skipif(
        not os.environ.get(FULL_GATE),
        reason=f"full-scale CV takes ~10 min on 2 cores; set {FULL_GATE}=1",
    )
    def test_full_scale(self, catalog):
        t0 = time.time()
        ok = False
        try:
            cohort = synth_cohort(default_spec(), catalog)
            full = cross_validate(
                cohort, catalog, "full",
                ForestConfig(n_trees=500, seed=0), cv_seed=7, folds=10, n_jobs=2,
            )
            basic = cross_validate(
                cohort, catalog, "basic",
                ForestConfig(n_trees=500, seed=0), cv_seed=7, folds=10, n_jobs=2,
            )
            assert 0.50 <= full.top1_accuracy <= 0.70, full.top1_accuracy
            assert 0.80 <= full.top5_accuracy <= 0.95, full.top5_accuracy
            assert abs(full.top1_accuracy - basic.top1_accuracy) <= 0.05

            # the companion comparison: the test must run and report a p-value
            ranks_full = {c.case_id: c.rank_of_truth for c in full.cases}
            ranks_basic = {c.case_id: c.rank_of_truth for c in basic.cases}
            ids = sorted(ranks_full)
            result = wilcoxon_signed_rank(
                [float(ranks_full[i]) for i in ids],
                [float(ranks_basic[i]) for i in ids],
            )
            assert 0.0 < result.p_two_sided <= 1.0
            # directional observation, reported not asserted as a theorem
            micro_above_macro = full.micro_curve.auc >= full.macro_curve.auc
            ok = True
        finally:
            detail = ""
            if ok:
                detail = (
                    f"full top1={full.top1_accuracy:.4f} top5={full.top5_accuracy:.4f} "
                    f"basic top1={basic.top1_accuracy:.4f} "
                    f"wilcoxon p={result.p_two_sided:.4f} "
                    f"micro>=macro={micro_above_macro} {time.time()-t0:.0f}s"
                )
            announce("regime-full-scale", ok, detail)


class TestOracleSuites:
    def test_auc_against_pairwise_oracle(self):
        t0 = time.time()
        ok = False
        try:
            rng = child_rng(501, 0)
            for _ in range(200):
                n = int(rng.integers(2, 51))
                scores = np.round(rng.random(n), 2)
                flags = rng.random(n) < 0.5
                if flags.all() or not flags.any():
                    flags[0], flags[-1] = True, False
                auc = roc_ovr(scores, flags).auc
                pos = scores[flags]
                neg = scores[~flags]
                wins = (pos[:, None] > neg[None, :]).sum()
                ties = (pos[:, None] == neg[None, :]).sum()
                oracle = (wins + 0.5 * ties) / (len(pos) * len(neg))
                assert abs(auc - oracle) <= 1e-12
            elapsed = time.time() - t0
            assert elapsed < 10.0
            ok = True
        finally:
            announce("oracle-auc-pairwise", ok, f"{time.time()-t0:.1f}s" if ok else "")

    def test_wilcoxon_against_enumeration(self):
        import itertools

        t0 = time.time()
        ok = False
        try:
            rng = child_rng(502, 0)
            for _ in range(40):
                n = int(rng.integers(1, 13))
                d = np.round(rng.standard_normal(n) * 2) / 2
                if (d == 0).all():
                    d[0] = 0.5
                d = d[d != 0]
                result = wilcoxon_signed_rank(d)
                ranks = _avg_ranks(np.abs(d))
                total = ranks.sum()
                w = ranks[d > 0].sum()
                lo, hi = min(w, total - w), max(w, total - w)
                count = 0
                for signs in itertools.product([0, 1], repeat=len(d)):
                    ws = sum(r for r, s in zip(ranks, signs) if s)
                    if ws <= lo or ws >= hi:
                        count += 1
                oracle = min(1.0, count / 2 ** len(d))
                assert result.p_two_sided == pytest.approx(oracle, abs=1e-12)
            elapsed = time.time() - t0
            assert elapsed < 10.0
            ok = True
        finally:
            announce("oracle-wilcoxon-exact", ok, f"{time.time()-t0:.1f}s" if ok else "")

    def test_formula_oracles(self):
        t0 = time.time()
        ok = False
        try:
            rng = child_rng(503, 0)
            for _ in range(300):
                counts = rng.integers(0, 50, size=int(rng.integers(2, 8)))
                counts[0] += 1
                total = counts.sum()
                direct = 1.0 - sum((c / total) ** 2 for c in counts)
                assert abs(gini_impurity(counts) - direct) <= 1e-12

                k = int(rng.integers(2, 12))
                p = rng.random(k) + 1e-9
                p /= p.sum()
                table = PrevalenceTable(
                    {f"D{i:02d}": (1, float(p[i])) for i in range(k)}
                )
                direct_h = -sum(pi * math.log2(pi) for pi in p)
                assert abs(shannon_entropy(table) - direct_h) <= 1e-12

                predicted = float(rng.random()) + 1e-9
                prevalence = float(rng.random()) + 1e-9
                direct_info = math.log2(predicted / prevalence)
                assert abs(information_score(predicted, prevalence) - direct_info) <= 1e-12

                q = rng.random(k) + 1e-9
                q /= q.sum()
                direct_kl = sum(
                    pi * (math.log2(pi) - math.log2(qi)) for pi, qi in zip(p, q)
                )
                assert abs(kl_divergence(p, q) - direct_kl) <= 1e-9
            elapsed = time.time() - t0
            assert elapsed < 10.0
            ok = True
        finally:
            announce("oracle-formulas", ok, f"{time.time()-t0:.1f}s" if ok else "")

    def test_stratified_folds_bound(self):
        t0 = time.time()
        ok = False
        try:
            rng = child_rng(504, 0)
            for trial in range(100):
                n_classes = int(rng.integers(2, 10))
                n = int(rng.integers(20, 400))
                k = int(rng.integers(2, 11))
                labels = rng.integers(0, n_classes, size=n)
                folds = stratified_folds(labels, k, seed=trial)
                for cls in np.unique(labels):
                    counts = np.bincount(folds[labels == cls], minlength=k)
                    assert counts.max() - counts.min() <= 1
            elapsed = time.time() - t0
            assert elapsed < 10.0
            ok = True
        finally:
            announce("oracle-stratified-folds", ok, f"{time.time()-t0:.1f}s" if ok else "")


class TestDeterminism:
    def test_pipeline_byte_identical(self, tmp_path, catalog):
        ok = False
        try:
            outputs = []
            for run in ("one", "two"):
                root = tmp_path / run
                root.mkdir()
                cohort_path = root / "cohort.jsonl"
                model_path = root / "model.sbaf"
                report_path = root / "report.json"
                assert cli_main(
                    ["synth", "--spec", "default", "--seed", "42", "--n", "600",
                     "--out", str(cohort_path)]
                ) == 0
                assert cli_main(
                    ["train", "--cohort", str(cohort_path), "--subset", "basic",
                     "--trees", "30", "--seed", "5", "--jobs", "2",
                     "--out", str(model_path)]
                ) == 0
                assert cli_main(
                    ["evaluate", "--cohort", str(cohort_path), "--subset", "basic",
                     "--folds", "5", "--cv-seed", "7", "--trees", "20",
                     "--jobs", "2", "--out", str(report_path)]
                ) == 0
                outputs.append(
                    tuple(p.read_bytes() for p in (cohort_path, model_path, report_path))
                )
            assert outputs[0] == outputs[1]
            ok = True
        finally:
            announce("determinism-pipeline", ok)

    def test_worker_count_invariance(self, catalog):
        ok = False
        try:
            cohort = synth_cohort(default_spec(n_cases=600, seed=42), catalog)
            config = ForestConfig(n_trees=24, seed=9)
            m1 = train_model(cohort, catalog, "full", config, n_jobs=1)
            m8 = train_model(cohort, catalog, "full", config, n_jobs=8)
            assert canonical_bytes(_model_payload(m1)) == canonical_bytes(
                _model_payload(m8)
            )
            ok = True
        finally:
            announce("determinism-workers", ok)


class TestChartInvariants:
    def test_chart_invariants(self, catalog):
        ok = False
        try:
            codes = sorted(DISEASE_TABLE)
            classes = tuple(DiseaseCode(c, DISEASE_TABLE[c][0]) for c in codes)
            prevalence = PrevalenceTable(
                {c: (DISEASE_TABLE[c][1], DISEASE_TABLE[c][1] / 8233) for c in codes}
            )
            rng = child_rng(505, 0)

            # angles close the circle
            for _ in range(50):
                dist = rng.random(43)
                dist /= dist.sum()
                geom = chart_geometry(dist, classes, prevalence)
                total = sum(s.angle for s in geom.segments) + geom.remainder_angle
                assert abs(total - 2 * math.pi) <= 1e-9

            # matching the prior pins every radius to the inner circle
            prior = np.array([prevalence.prevalence(c) for c in codes])
            geom = chart_geometry(prior, classes, prevalence)
            assert all(s.display_radius == geom.inner_radius for s in geom.segments)

            # golden SVG byte-exactness is asserted in test_chart.py against
            # the frozen fixture; here the renderer must at least be stable
            assert render_svg(geom) == render_svg(geom)

            # KL non-negativity on 1000 random pairs
            for _ in range(1000):
                k = int(rng.integers(2, 44))
                p = rng.random(k)
                p /= p.sum()
                q = rng.random(k) + 1e-9
                q /= q.sum()
                assert kl_divergence(p, q) >= 0.0
            ok = True
        finally:
            announce("chart-invariants", ok)

    def test_golden_svg_byte_exact(self, catalog, small_model):
        ok = False
        try:
            from hemadiag.preprocess import canonize, impute

            data = Path(__file__).parent / "data"
            case = json.loads((data / "golden_case.json").read_text())
            clean, _ = canonize(case["measurements"], catalog)
            fv = impute(clean, small_model.imputer)
            probs = small_model.predict_proba(fv.values.reshape(1, -1))[0]
            geom = chart_geometry(probs, small_model.class_list, small_model.prevalence)
            assert render_svg(geom) == (data / "golden_chart.svg").read_text()
            ok = True
        finally:
            announce("chart-golden-svg", ok)


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="module")
def live_service(tmp_path_factory, catalog, small_model, small_model_basic):
    import httpx

    models_dir = tmp_path_factory.mktemp("live-models")
    save_model(small_model, models_dir / "full.sbaf")
    save_model(small_model_basic, models_dir / "basic.sbaf")
    port = _free_port()
    proc = subprocess.Popen(
        [
            sys.executable, "-m", "hemadiag.cli", "serve",
            "--models", str(models_dir), "--port", str(port),
        ],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    base = f"http://127.0.0.1:{port}"
    try:
        for _ in range(100):
            try:
                if httpx.get(f"{base}/v1/health", timeout=1.0).status_code == 200:
                    break
            except httpx.TransportError:
                time.sleep(0.2)
        else:
            raise RuntimeError("service did not come up")
        yield base
    finally:
        proc.terminate()
        proc.wait(timeout=10)


class TestServiceContract:
    def test_service_contract(self, live_service, small_model, catalog):
        import httpx

        ok = False
        try:
            base = live_service
            assert httpx.get(f"{base}/v1/health").json() == {"status": "ok"}

            models = httpx.get(f"{base}/v1/models").json()
            assert {m["model_id"] for m in models} == {"hem181", "hem061"}

            full = httpx.get(f"{base}/v1/catalog", params={"subset": "full"}).json()
            basic = httpx.get(f"{base}/v1/catalog", params={"subset": "basic"}).json()
            assert len(full) == 181
            assert len(basic) == 61
            assert all(e["ref_low"] <= e["ref_high"] for e in full)

            # median-valued request behaves like an all-imputed request
            medians = small_model.imputer.median_map()
            r_median = httpx.post(
                f"{base}/v1/predict",
                json={"model_id": "hem181", "measurements": medians},
            )
            assert r_median.status_code == 200
            r_ghost = httpx.post(
                f"{base}/v1/predict",
                json={"model_id": "hem181", "measurements": {"ZZZ": 1.0}},
            )
            assert r_ghost.status_code == 200
            assert r_median.json()["ranked"] == r_ghost.json()["ranked"]
            assert r_median.json()["chart"] == r_ghost.json()["chart"]
            assert any("0 of 181" in w for w in r_median.json()["warnings"])
            assert any("ZZZ" in w for w in r_ghost.json()["warnings"])

            # held-out fingerprint case ranks its disease in the top 5
            case = json.loads(
                (Path(__file__).parent / "data" / "golden_case.json").read_text()
            )
            response = httpx.post(
                f"{base}/v1/predict",
                json={"model_id": "hem181", "measurements": case["measurements"]},
            )
            assert response.status_code == 200
            top5 = [r["code"] for r in response.json()["ranked"][:5]]
            assert case["diagnosis"] in top5

            # error contract
            assert (
                httpx.post(
                    f"{base}/v1/predict",
                    json={"model_id": "nope", "measurements": {"P001": 1.0}},
                ).status_code
                == 404
            )
            assert (
                httpx.post(
                    f"{base}/v1/predict",
                    json={"model_id": "hem181", "measurements": {}},
                ).status_code
                == 400
            )
            ok = True
        finally:
            announce("service-contract", ok)


def _avg_ranks(values):
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2 + 1
        i = j + 1
    return ranks
