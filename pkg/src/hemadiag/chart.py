"""Information-score polar chart.

Each displayed disease becomes a sector whose angle is 2*pi times its
posterior probability and whose radius encodes the information score
log2(posterior / prevalence) in bits.  Zero information sits exactly on the
inner reference circle; negative scores render strictly inside it.  The
classes beyond the top ten are aggregated into a neutral remainder sector
drawn at the reference radius, so sector angles always close the circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._validation import check_probabilities
from .cohort import DiseaseCode, PrevalenceTable
from .forest import ranked_indices

__all__ = [
    "information_score",
    "kl_divergence",
    "ChartSegment",
    "ChartGeometry",
    "chart_geometry",
    "geometry_wire",
    "render_svg",
    "DEFAULT_INNER_RADIUS",
    "DEFAULT_MAX_RADIUS",
]

TAU = 2.0 * math.pi
DEFAULT_INNER_RADIUS = 250.0
DEFAULT_MAX_RADIUS = 470.0
TOP_SEGMENTS = 10
RADIUS_FLOOR_FRACTION = 0.1  # display floor for strongly negative scores

PALETTE = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
)
REMAINDER_COLOR = "#e8e8e8"


def information_score(predicted: float, prevalence: float) -> float:
    """log2(posttest / pretest) in bits; negative means the inputs speak
    against the disease.  Returns -inf when predicted is exactly zero."""
    if prevalence <= 0.0:
        raise ValueError(f"prevalence must be positive, got {prevalence}")
    if predicted < 0.0:
        raise ValueError(f"predicted probability must be >= 0, got {predicted}")
    if predicted == 0.0:
        return float("-inf")
    return math.log2(predicted / prevalence)


def kl_divergence(predicted, prevalence: Sequence[float]) -> float:
    """Kullback-Leibler divergence (bits) between the predicted distribution
    and the prevalence distribution, with 0*log(0) = 0."""
    p = check_probabilities(predicted)
    q = np.asarray(prevalence, dtype=np.float64)
    if q.shape != p.shape:
        raise ValueError("distributions must be aligned")
    if (q <= 0.0).any():
        raise ValueError("prevalence must be strictly positive on every class")
    mask = p > 0
    return float(np.sum(p[mask] * np.log2(p[mask] / q[mask])))


@dataclass(frozen=True)
class ChartSegment:
    disease: DiseaseCode
    predicted: float
    prevalence: float
    info_score: float  # bits; -inf when predicted == 0
    start_angle: float
    angle: float
    display_radius: float
    clamped: bool


@dataclass(frozen=True)
class ChartGeometry:
    segments: tuple[ChartSegment, ...]
    remainder_predicted: float
    remainder_start_angle: float
    remainder_angle: float
    inner_radius: float
    max_radius: float
    scale: float  # device units per bit
    kl_bits: float


def chart_geometry(
    dist,
    class_list: Sequence[DiseaseCode],
    prevalence: PrevalenceTable,
    inner_radius: float = DEFAULT_INNER_RADIUS,
    max_radius: float = DEFAULT_MAX_RADIUS,
) -> ChartGeometry:
    """Geometry for the top ten classes by tie-broken probability.

    display_radius = clamp(R0 + s * info, 0.1 * R0, R_max) with
    s = (R_max - R0) / max(1 bit, largest positive displayed score).
    """
    p = check_probabilities(dist)
    if len(p) != len(class_list):
        raise ValueError("distribution is not aligned to the class list")
    if not (0.0 < inner_radius < max_radius):
        raise ValueError("need 0 < inner_radius < max_radius")
    codes = [d.code for d in class_list]
    for code in codes:
        if prevalence.prevalence(code) <= 0.0:
            raise ValueError(f"prevalence must be positive for {code}")

    order = ranked_indices(p)[: min(TOP_SEGMENTS, len(p))]
    scores = [information_score(float(p[i]), prevalence.prevalence(codes[i])) for i in order]
    max_positive = max((s for s in scores if s > 0.0 and math.isfinite(s)), default=0.0)
    scale = (max_radius - inner_radius) / max(1.0, max_positive)
    floor = RADIUS_FLOOR_FRACTION * inner_radius

    segments = []
    start = 0.0
    for i, score in zip(order, scores):
        angle = TAU * float(p[i])
        raw = inner_radius + scale * score if math.isfinite(score) else -math.inf
        radius = min(max(raw, floor), max_radius)
        segments.append(
            ChartSegment(
                disease=class_list[i],
                predicted=float(p[i]),
                prevalence=prevalence.prevalence(codes[i]),
                info_score=score,
                start_angle=start,
                angle=angle,
                display_radius=radius,
                clamped=radius != raw,
            )
        )
        start += angle
    remainder = float(p.sum() - sum(s.predicted for s in segments))
    remainder = max(0.0, remainder)
    return ChartGeometry(
        segments=tuple(segments),
        remainder_predicted=remainder,
        remainder_start_angle=start,
        remainder_angle=TAU * remainder,
        inner_radius=inner_radius,
        max_radius=max_radius,
        scale=scale,
        kl_bits=kl_divergence(p, [prevalence.prevalence(c) for c in codes]),
    )


def _round6(x: float) -> float:
    return float(f"{x:.6g}")


def geometry_wire(geom: ChartGeometry) -> dict:
    """The JSON-ready geometry payload shared with the web console."""
    return {
        "inner_radius": _round6(geom.inner_radius),
        "max_radius": _round6(geom.max_radius),
        "scale_bits_per_unit": _round6(geom.scale),
        "segments": [
            {
                "code": s.disease.code,
                "name": s.disease.name,
                "predicted": _round6(s.predicted),
                "prevalence": _round6(s.prevalence),
                "info_score_bits": None if s.info_score == -math.inf else _round6(s.info_score),
                "start_angle_rad": _round6(s.start_angle),
                "angle_rad": _round6(s.angle),
                "display_radius": _round6(s.display_radius),
                "clamped": s.clamped,
            }
            for s in geom.segments
        ],
        "remainder": {
            "predicted": _round6(geom.remainder_predicted),
            "start_angle_rad": _round6(geom.remainder_start_angle),
            "angle_rad": _round6(geom.remainder_angle),
            "display_radius": _round6(geom.inner_radius),
        },
        "kl_bits": _round6(geom.kl_bits),
    }


_CENTER = 500.0
_VIEW = 1000


def _polar(radius: float, angle: float) -> tuple[float, float]:
    # angle 0 at twelve o'clock, increasing clockwise (screen coordinates)
    return (
        _CENTER + radius * math.sin(angle),
        _CENTER - radius * math.cos(angle),
    )


def _sector_path(start: float, sweep: float, radius: float) -> str:
    if sweep <= 1e-9:  # invisible at 3-decimal precision
        return ""
    if sweep >= TAU - 1e-12:
        # full circle: two half arcs
        x0, y0 = _polar(radius, start)
        x1, y1 = _polar(radius, start + math.pi)
        return (
            f"M {x0:.3f} {y0:.3f} "
            f"A {radius:.3f} {radius:.3f} 0 0 1 {x1:.3f} {y1:.3f} "
            f"A {radius:.3f} {radius:.3f} 0 0 1 {x0:.3f} {y0:.3f} Z"
        )
    x0, y0 = _polar(radius, start)
    x1, y1 = _polar(radius, start + sweep)
    large = 1 if sweep > math.pi else 0
    return (
        f"M {_CENTER:.3f} {_CENTER:.3f} L {x0:.3f} {y0:.3f} "
        f"A {radius:.3f} {radius:.3f} 0 {large} 1 {x1:.3f} {y1:.3f} Z"
    )


def render_svg(geom: ChartGeometry, labels: str = "show") -> str:
    """Deterministic standalone SVG (fixed precision, fixed element order)."""
    if labels not in ("show", "hide"):
        raise ValueError("labels must be 'show' or 'hide'")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_VIEW} {_VIEW}">',
        f'<rect width="{_VIEW}" height="{_VIEW}" fill="#ffffff"/>',
    ]
    for i, seg in enumerate(geom.segments):
        path = _sector_path(seg.start_angle, seg.angle, seg.display_radius)
        if path:
            color = PALETTE[i % len(PALETTE)]
            parts.append(
                f'<path d="{path}" fill="{color}" stroke="#ffffff" stroke-width="1"/>'
            )
    if geom.remainder_angle > 0.0:
        path = _sector_path(
            geom.remainder_start_angle, geom.remainder_angle, geom.inner_radius
        )
        if path:
            parts.append(
                f'<path d="{path}" fill="{REMAINDER_COLOR}" stroke="#ffffff" stroke-width="1"/>'
            )
    parts.append(
        f'<circle cx="{_CENTER:.3f}" cy="{_CENTER:.3f}" r="{geom.inner_radius:.3f}" '
        f'fill="none" stroke="#555555" stroke-width="2" stroke-dasharray="6 4"/>'
    )
    if labels == "show":
        for seg in geom.segments:
            if seg.angle <= 0.0:
                continue
            mid = seg.start_angle + seg.angle / 2.0
            lx, ly = _polar(max(seg.display_radius, geom.inner_radius) * 0.66, mid)
            parts.append(
                f'<text x="{lx:.3f}" y="{ly:.3f}" font-family="sans-serif" '
                f'font-size="28" text-anchor="middle">{seg.disease.code}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
