"""Blood-test parameter catalog: definitions, CSV loading, and the bundled default.

The catalog fixes the feature-vector layout: parameter order in the file is
the feature order everywhere downstream.  A catalog's ``version`` is a
content digest of its canonical CSV form, so any edit produces a new version
and stale models/cohorts are detected instead of silently misaligned.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Literal

__all__ = [
    "CatalogError",
    "ParameterDef",
    "ParameterCatalog",
    "Subset",
    "load_catalog",
    "parse_catalog",
    "save_catalog",
    "default_catalog",
]

Subset = Literal["full", "basic"]

CSV_HEADER = [
    "code",
    "name",
    "unit",
    "basic",
    "plausible_min",
    "plausible_max",
    "ref_low",
    "ref_high",
]


class CatalogError(ValueError):
    """Raised for unparseable or inconsistent catalog files."""


def check_subset(subset: str) -> Subset:
    if subset not in ("full", "basic"):
        raise ValueError(f"subset must be 'full' or 'basic', got {subset!r}")
    return subset  # type: ignore[return-value]


@dataclass(frozen=True)
class ParameterDef:
    """One blood-test parameter.

    ``plausible_min``/``plausible_max`` are hard physiologic bounds used to
    reject erroneous values; ``ref_low``/``ref_high`` are the display
    reference range.  Bounds must satisfy
    ``plausible_min < ref_low <= ref_high < plausible_max``.
    """

    code: str
    name: str
    unit: str
    basic: bool
    plausible_min: float
    plausible_max: float
    ref_low: float
    ref_high: float

    def __post_init__(self) -> None:
        if not self.code:
            raise CatalogError("parameter code must be non-empty")
        if not (self.plausible_min < self.ref_low <= self.ref_high < self.plausible_max):
            raise CatalogError(
                f"parameter {self.code!r}: bounds must satisfy "
                f"plausible_min < ref_low <= ref_high < plausible_max, got "
                f"({self.plausible_min}, {self.ref_low}, {self.ref_high}, {self.plausible_max})"
            )

    @property
    def ref_midpoint(self) -> float:
        return (self.ref_low + self.ref_high) / 2.0


class ParameterCatalog:
    """Ordered, versioned collection of :class:`ParameterDef`.

    Parameter order is significant: it defines the index of each parameter
    in dense feature vectors.  The basic subset preserves catalog order.
    """

    def __init__(self, params: Iterable[ParameterDef], version: str | None = None):
        self.params: tuple[ParameterDef, ...] = tuple(params)
        seen: set[str] = set()
        for p in self.params:
            if p.code in seen:
                raise CatalogError(f"duplicate parameter code {p.code!r}")
            seen.add(p.code)
        self._index = {p.code: i for i, p in enumerate(self.params)}
        self.version = version if version is not None else self._content_version()

    def _content_version(self) -> str:
        digest = hashlib.sha256(_canonical_csv(self.params).encode("utf-8")).hexdigest()
        return f"sha256:{digest[:12]}"

    def __len__(self) -> int:
        return len(self.params)

    def __contains__(self, code: str) -> bool:
        return code in self._index

    def __getitem__(self, code: str) -> ParameterDef:
        return self.params[self._index[code]]

    def index(self, code: str) -> int:
        return self._index[code]

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(p.code for p in self.params)

    @property
    def basic_codes(self) -> tuple[str, ...]:
        return tuple(p.code for p in self.params if p.basic)

    def subset_params(self, subset: Subset) -> tuple[ParameterDef, ...]:
        check_subset(subset)
        if subset == "full":
            return self.params
        return tuple(p for p in self.params if p.basic)

    def subset_codes(self, subset: Subset) -> tuple[str, ...]:
        return tuple(p.code for p in self.subset_params(subset))


def _canonical_csv(params: Iterable[ParameterDef]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for p in params:
        writer.writerow(
            [
                p.code,
                p.name,
                p.unit,
                "true" if p.basic else "false",
                _fmt(p.plausible_min),
                _fmt(p.plausible_max),
                _fmt(p.ref_low),
                _fmt(p.ref_high),
            ]
        )
    return buf.getvalue()


def _fmt(x: float) -> str:
    # integers render without a trailing .0 so hand-edited files round-trip
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def parse_catalog(text: str, source: str = "<catalog>") -> ParameterCatalog:
    """Parse catalog CSV text; errors carry 1-based line numbers."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise CatalogError(f"{source}: empty catalog file")
    if rows[0] != CSV_HEADER:
        raise CatalogError(
            f"{source}:1: bad header, expected {','.join(CSV_HEADER)!r}"
        )
    params: list[ParameterDef] = []
    seen: set[str] = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise CatalogError(
                f"{source}:{lineno}: expected {len(CSV_HEADER)} fields, got {len(row)}"
            )
        code, name, unit, basic_s, pmin_s, pmax_s, rlo_s, rhi_s = row
        if basic_s not in ("true", "false"):
            raise CatalogError(
                f"{source}:{lineno}: basic must be 'true' or 'false', got {basic_s!r}"
            )
        try:
            pmin, pmax = float(pmin_s), float(pmax_s)
            rlo, rhi = float(rlo_s), float(rhi_s)
        except ValueError as exc:
            raise CatalogError(f"{source}:{lineno}: bad numeric field: {exc}") from exc
        if code in seen:
            raise CatalogError(f"{source}:{lineno}: duplicate parameter code {code!r}")
        seen.add(code)
        try:
            params.append(
                ParameterDef(code, name, unit, basic_s == "true", pmin, pmax, rlo, rhi)
            )
        except CatalogError as exc:
            raise CatalogError(f"{source}:{lineno}: {exc}") from exc
    if not params:
        raise CatalogError(f"{source}: catalog has no parameter rows")
    return ParameterCatalog(params)


def load_catalog(path: str | Path) -> ParameterCatalog:
    """Load a parameter catalog from a CSV file."""
    path = Path(path)
    return parse_catalog(path.read_text(encoding="utf-8"), source=str(path))


def save_catalog(catalog: ParameterCatalog, path: str | Path) -> None:
    Path(path).write_text(_canonical_csv(catalog.params), encoding="utf-8")


_DEFAULT: ParameterCatalog | None = None


def default_catalog() -> ParameterCatalog:
    """The bundled 181-parameter catalog (61 flagged basic), cached."""
    global _DEFAULT
    if _DEFAULT is None:
        text = (
            resources.files("hemadiag.data")
            .joinpath("default_catalog.csv")
            .read_text(encoding="utf-8")
        )
        _DEFAULT = parse_catalog(text, source="default_catalog.csv")
    return _DEFAULT
