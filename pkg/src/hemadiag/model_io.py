"""Model file format: one canonical JSON document with a content checksum.

The serializer is hand-rolled so bytes are reproducible: keys sorted,
floats via ``repr`` (shortest exact form), no whitespace, trees emitted
iteratively as nested arrays.  The checksum is the SHA-256 hex digest of
the canonical serialization of every field except ``checksum`` itself.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from .catalog import ParameterCatalog, default_catalog
from .cohort import DiseaseCode, PrevalenceTable
from .forest import ForestConfig, ForestEnsemble
from .model import RandomForestModel
from .preprocess import ImputerStats

__all__ = ["ModelFormatError", "save_model", "load_model", "FORMAT_VERSION"]

FORMAT_VERSION = 1
MODEL_SUFFIX = ".sbaf"


class ModelFormatError(ValueError):
    """Corrupted, mismatched, or unsupported model file."""


class _Lit(str):
    """Pre-rendered JSON fragment."""


def canonical_chunks(obj):
    """Yield canonical JSON text chunks for ``obj`` without recursion."""
    stack = [obj]
    while stack:
        o = stack.pop()
        if isinstance(o, _Lit):
            yield str(o)
        elif o is None:
            yield "null"
        elif o is True:
            yield "true"
        elif o is False:
            yield "false"
        elif isinstance(o, str):
            yield json.dumps(o)
        elif isinstance(o, (int, np.integer)):
            yield str(int(o))
        elif isinstance(o, (float, np.floating)):
            value = float(o)
            if not np.isfinite(value):
                raise ModelFormatError(f"non-finite number {value!r} in model document")
            yield repr(value)
        elif isinstance(o, dict):
            keys = sorted(o)
            if any(not isinstance(k, str) for k in keys):
                raise ModelFormatError("object keys must be strings")
            stack.append(_Lit("}"))
            for i in range(len(keys) - 1, -1, -1):
                if i < len(keys) - 1:
                    stack.append(_Lit(","))
                stack.append(o[keys[i]])
                stack.append(_Lit(json.dumps(keys[i]) + ":"))
            stack.append(_Lit("{"))
        elif isinstance(o, (list, tuple)):
            stack.append(_Lit("]"))
            for i in range(len(o) - 1, -1, -1):
                if i < len(o) - 1:
                    stack.append(_Lit(","))
                stack.append(o[i])
            stack.append(_Lit("["))
        else:
            raise ModelFormatError(f"unserializable value of type {type(o).__name__}")


def canonical_bytes(obj) -> bytes:
    return "".join(canonical_chunks(obj)).encode("utf-8")


def _checksum(payload: dict) -> str:
    digest = hashlib.sha256()
    for chunk in canonical_chunks(payload):
        digest.update(chunk.encode("utf-8"))
    return digest.hexdigest()


def _tree_to_nested(feat, thr, left, right, leaf_classes, leaf_counts, n_classes):
    nested: list = [None] * len(feat)
    # children have larger pre-order ids, so a reverse sweep builds bottom-up
    for nid in range(len(feat) - 1, -1, -1):
        if feat[nid] < 0:
            counts = [0] * n_classes
            for k in range(left[nid], right[nid]):
                counts[int(leaf_classes[k])] = int(leaf_counts[k])
            nested[nid] = ["L", *counts]
        else:
            nested[nid] = [
                int(feat[nid]),
                float(thr[nid]),
                nested[int(left[nid])],
                nested[int(right[nid])],
            ]
    return nested[0]


def _nested_to_tree(nested, n_classes: int):
    feat: list[int] = []
    thr: list[float] = []
    left: list[int] = []
    right: list[int] = []
    leaf_classes: list[int] = []
    leaf_counts: list[int] = []
    stack = [(nested, -1, False)]
    while stack:
        node, parent, is_left = stack.pop()
        nid = len(feat)
        if parent >= 0:
            if is_left:
                left[parent] = nid
            else:
                right[parent] = nid
        if not isinstance(node, list) or not node:
            raise ModelFormatError("malformed tree node")
        if node[0] == "L":
            counts = node[1:]
            if len(counts) != n_classes:
                raise ModelFormatError(
                    f"leaf has {len(counts)} counts, expected {n_classes}"
                )
            feat.append(-1)
            thr.append(0.0)
            left.append(len(leaf_classes))
            for k, c in enumerate(counts):
                if c:
                    leaf_classes.append(k)
                    leaf_counts.append(int(c))
            right.append(len(leaf_classes))
        else:
            if len(node) != 4:
                raise ModelFormatError("internal node must be [feature, threshold, left, right]")
            feat.append(int(node[0]))
            thr.append(float(node[1]))
            left.append(-1)
            right.append(-1)
            stack.append((node[3], nid, False))
            stack.append((node[2], nid, True))
    return (
        np.array(feat, dtype=np.int64),
        np.array(thr, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(leaf_classes, dtype=np.int64),
        np.array(leaf_counts, dtype=np.int64),
    )


def _model_payload(model: RandomForestModel) -> dict:
    n_classes = len(model.class_list)
    trees = [
        _tree_to_nested(*model.ensemble.tree_local_arrays(t), n_classes)
        for t in range(model.ensemble.n_trees)
    ]
    return {
        "format_version": FORMAT_VERSION,
        "model_id": model.model_id,
        "subset": model.subset,
        "catalog_version": model.catalog_version,
        "config": model.config.to_dict(),
        "class_list": [{"code": d.code, "name": d.name} for d in model.class_list],
        "prevalence": {
            code: {
                "frequency": model.prevalence.frequency(code),
                "prevalence": model.prevalence.prevalence(code),
            }
            for code in model.prevalence.codes
        },
        "imputer_medians": model.imputer.median_map(),
        "trees": trees,
    }


def save_model(model: RandomForestModel, path: str | Path) -> None:
    payload = _model_payload(model)
    payload["checksum"] = _checksum(payload)
    with open(path, "w", encoding="utf-8") as fh:
        for chunk in canonical_chunks(payload):
            fh.write(chunk)
        fh.write("\n")


def load_model(
    path: str | Path, catalog: ParameterCatalog | None = None
) -> RandomForestModel:
    """Load and verify a model file.

    The catalog (default: bundled) supplies the feature order; its version
    must match the one recorded in the file.
    """
    catalog = catalog or default_catalog()
    text = Path(path).read_text(encoding="utf-8")
    limit = sys.getrecursionlimit()
    try:
        sys.setrecursionlimit(max(limit, 100_000))
        doc = json.loads(text)
    except (json.JSONDecodeError, RecursionError) as exc:
        raise ModelFormatError(f"{path}: corrupted model file: {exc}") from exc
    finally:
        sys.setrecursionlimit(limit)
    if not isinstance(doc, dict):
        raise ModelFormatError(f"{path}: model file must hold a JSON object")

    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: format version {version!r} unsupported "
            f"(this reader supports version {FORMAT_VERSION})"
        )
    stored = doc.pop("checksum", None)
    if stored is None:
        raise ModelFormatError(f"{path}: missing checksum")
    actual = _checksum(doc)
    if stored != actual:
        raise ModelFormatError(
            f"{path}: checksum failure (file says {stored[:12]}…, content is {actual[:12]}…)"
        )

    if doc["catalog_version"] != catalog.version:
        raise ModelFormatError(
            f"{path}: model built against catalog {doc['catalog_version']!r}, "
            f"current catalog is {catalog.version!r}"
        )
    subset = doc["subset"]
    config = ForestConfig.from_dict(doc["config"])
    class_list = tuple(
        DiseaseCode(d["code"], d.get("name", d["code"])) for d in doc["class_list"]
    )
    prevalence = PrevalenceTable(
        {
            code: (int(e["frequency"]), float(e["prevalence"]))
            for code, e in doc["prevalence"].items()
        }
    )
    codes = catalog.subset_codes(subset)
    medians_map = doc["imputer_medians"]
    missing = [c for c in codes if c not in medians_map]
    if missing:
        raise ModelFormatError(f"{path}: imputer medians missing for {missing[:3]}")
    imputer = ImputerStats(
        catalog_version=doc["catalog_version"],
        subset=subset,
        codes=codes,
        medians=np.array([float(medians_map[c]) for c in codes]),
        observed_counts=None,
    )
    n_classes = len(class_list)
    tree_nodes = [_nested_to_tree(t, n_classes) for t in doc["trees"]]
    for feat, *_ in tree_nodes:
        internal = feat[feat >= 0]
        if internal.size and internal.max() >= len(codes):
            raise ModelFormatError(
                f"{path}: split feature index {int(internal.max())} exceeds "
                f"the {subset} subset dimension {len(codes)}"
            )
    ensemble = ForestEnsemble(n_classes, tree_nodes)
    return RandomForestModel(
        model_id=doc["model_id"],
        subset=subset,
        catalog_version=doc["catalog_version"],
        config=config,
        class_list=class_list,
        prevalence=prevalence,
        imputer=imputer,
        ensemble=ensemble,
    )
