"""Command-line interface for the whole pipeline.

Subcommands: synth, train, evaluate, predict, compare, serve.
Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .catalog import CatalogError, default_catalog, load_catalog
from .cohort import CohortError, read_cohort, write_cohort
from .evaluate import cross_validate, read_report, write_report
from .forest import ForestConfig
from .model import train_model
from .model_io import ModelFormatError, load_model, save_model
from .pipeline import predict_payload
from .service import MODELS_DIR_ENV
from .stats import wilcoxon_signed_rank
from .synth import SynthError, default_spec, read_spec, synth_cohort

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def build_parser() -> _Parser:
    parser = _Parser(prog="hemadiag", description=__doc__)
    parser.add_argument(
        "--catalog", default=None, help="catalog CSV (default: bundled catalog)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[], help="generate a synthetic cohort")
    p.add_argument("--spec", default="default", help="'default' or a spec JSON file")
    p.add_argument("--seed", type=int, default=None, help="override the spec's seed")
    p.add_argument("--n", type=int, default=None, help="override the spec's n_cases")
    p.add_argument("--out", required=True, help="output cohort (.jsonl)")

    p = sub.add_parser("train", help="train a model on a cohort")
    p.add_argument("--cohort", required=True)
    p.add_argument("--subset", choices=["full", "basic"], default="full")
    p.add_argument("--trees", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model-id", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output model file (.sbaf)")

    p = sub.add_parser("evaluate", help="stratified cross-validation")
    p.add_argument("--cohort", required=True)
    p.add_argument("--subset", choices=["full", "basic"], default="full")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--cv-seed", type=int, default=0)
    p.add_argument("--trees", type=int, default=500)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output report (.json)")

    p = sub.add_parser("predict", help="rank diseases for one case file")
    p.add_argument("--model", required=True, help="model file (.sbaf)")
    p.add_argument("--case", required=True, help='JSON file {"measurements": {...}}')
    p.add_argument("--svg", default=None, help="also write the chart as SVG")
    p.add_argument("--out", default=None, help="write response JSON here (default: stdout)")

    p = sub.add_parser("compare", help="Wilcoxon signed-rank test on two reports")
    p.add_argument("report_a")
    p.add_argument("report_b")

    p = sub.add_parser("serve", help="start the prediction service")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument(
        "--models", default=None, help=f"models directory (or ${MODELS_DIR_ENV})"
    )
    p.add_argument("--console", default=None, help="built web console directory")
    return parser


def _cmd_synth(args, catalog) -> int:
    if args.spec == "default":
        spec = default_spec(catalog=catalog)
    else:
        spec = read_spec(args.spec)
    if args.seed is not None or args.n is not None:
        from dataclasses import replace

        spec = replace(
            spec,
            seed=spec.seed if args.seed is None else args.seed,
            n_cases=spec.n_cases if args.n is None else args.n,
        )
    cohort = synth_cohort(spec, catalog)
    write_cohort(cohort, args.out)
    print(f"wrote {len(cohort)} cases to {args.out}")
    return 0


def _cmd_train(args, catalog) -> int:
    cohort = read_cohort(args.cohort, catalog)
    config = ForestConfig(n_trees=args.trees, seed=args.seed)
    model = train_model(
        cohort,
        catalog,
        args.subset,
        config,
        model_id=args.model_id,
        n_jobs=args.jobs,
    )
    save_model(model, args.out)
    print(f"wrote model {model.model_id!r} ({model.config.n_trees} trees) to {args.out}")
    return 0


def _cmd_evaluate(args, catalog) -> int:
    cohort = read_cohort(args.cohort, catalog)
    config = ForestConfig(n_trees=args.trees, seed=0)
    report = cross_validate(
        cohort,
        catalog,
        args.subset,
        config,
        cv_seed=args.cv_seed,
        folds=args.folds,
        n_jobs=args.jobs,
    )
    write_report(report, args.out)
    print(f"top-1 accuracy: {report.top1_accuracy:.4f}")
    print(f"top-5 accuracy: {report.top5_accuracy:.4f}")
    print(f"macro AUC: {report.macro_curve.auc:.4f}")
    print(f"micro AUC: {report.micro_curve.auc:.4f}")
    print(f"report written to {args.out}")
    return 0


def _cmd_predict(args, catalog) -> int:
    model = load_model(args.model, catalog)
    with open(args.case, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    measurements = doc.get("measurements")
    if not isinstance(measurements, dict) or not measurements:
        raise CohortError(f"{args.case}: expected a non-empty 'measurements' object")
    payload = predict_payload(model, measurements, catalog)
    text = json.dumps(payload, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    if args.svg:
        from .chart import chart_geometry, render_svg
        from .preprocess import canonize, impute

        clean, _ = canonize(measurements, catalog)
        fv = impute(clean, model.imputer)
        probs = model.predict_proba(fv.values.reshape(1, -1))[0]
        geom = chart_geometry(probs, model.class_list, model.prevalence)
        Path(args.svg).write_text(render_svg(geom), encoding="utf-8")
        print(f"chart written to {args.svg}", file=sys.stderr)
    return 0


def _cmd_compare(args, catalog) -> int:
    doc_a = read_report(args.report_a)
    doc_b = read_report(args.report_b)
    ranks_a = {c["id"]: c["rank_of_truth"] for c in doc_a["cases"]}
    ranks_b = {c["id"]: c["rank_of_truth"] for c in doc_b["cases"]}
    shared = sorted(set(ranks_a) & set(ranks_b))
    if not shared:
        raise CohortError("reports share no case ids")
    result = wilcoxon_signed_rank(
        [float(ranks_a[i]) for i in shared], [float(ranks_b[i]) for i in shared]
    )
    print(
        json.dumps(
            {
                "n_effective": result.n_effective,
                "W": result.W,
                "p_two_sided": result.p_two_sided,
                "method": result.method,
            },
            sort_keys=True,
        )
    )
    return 0


def _cmd_serve(args, catalog) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        models_dir=args.models, catalog=catalog, console_dir=args.console
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "predict": _cmd_predict,
    "compare": _cmd_compare,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        catalog = load_catalog(args.catalog) if args.catalog else default_catalog()
        return _COMMANDS[args.command](args, catalog)
    except (
        CatalogError,
        CohortError,
        SynthError,
        ModelFormatError,
        FileNotFoundError,
        ValueError,
    ) as exc:
        print(f"hemadiag: error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    raise SystemExit(main())
