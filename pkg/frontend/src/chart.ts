/**
 * Chart view model: sectors carry the service's angles and radii verbatim.
 * The only math here is the polar-to-screen projection for SVG paths; no
 * probability, prevalence, or information-score value is ever re-derived.
 */

import type { GeometryWire } from "./types.js";

export interface SectorModel {
  code: string;
  name: string;
  startAngle: number; // radians, exactly as received
  angle: number; // radians, exactly as received
  radius: number; // device units, exactly as received
  clamped: boolean;
  fill: string;
}

export interface ChartModel {
  sectors: SectorModel[];
  remainder: SectorModel | null;
  innerRadius: number;
  maxRadius: number;
  klBits: number;
}

export const PALETTE = [
  "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
  "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];
export const REMAINDER_FILL = "#e8e8e8";

export function buildChartModel(geometry: GeometryWire): ChartModel {
  const sectors = geometry.segments.map((segment, i) => ({
    code: segment.code,
    name: segment.name,
    startAngle: segment.start_angle_rad,
    angle: segment.angle_rad,
    radius: segment.display_radius,
    clamped: segment.clamped,
    fill: PALETTE[i % PALETTE.length] as string,
  }));
  const r = geometry.remainder;
  const remainder =
    r.angle_rad > 1e-9
      ? {
          code: "",
          name: "other diseases",
          startAngle: r.start_angle_rad,
          angle: r.angle_rad,
          radius: r.display_radius,
          clamped: false,
          fill: REMAINDER_FILL,
        }
      : null;
  return {
    sectors,
    remainder,
    innerRadius: geometry.inner_radius,
    maxRadius: geometry.max_radius,
    klBits: geometry.kl_bits,
  };
}

const CENTER = 500;
const TAU = 2 * Math.PI;

function polar(radius: number, angle: number): [number, number] {
  // angle 0 at twelve o'clock, increasing clockwise
  return [CENTER + radius * Math.sin(angle), CENTER - radius * Math.cos(angle)];
}

const fmt = (x: number) => x.toFixed(3);

/** SVG path for one sector (display scaling only). */
export function sectorPath(sector: SectorModel): string {
  const { startAngle: start, angle: sweep, radius } = sector;
  if (sweep <= 1e-9 || radius <= 0) return "";
  if (sweep >= TAU - 1e-12) {
    const [x0, y0] = polar(radius, start);
    const [x1, y1] = polar(radius, start + Math.PI);
    return (
      `M ${fmt(x0)} ${fmt(y0)} ` +
      `A ${fmt(radius)} ${fmt(radius)} 0 0 1 ${fmt(x1)} ${fmt(y1)} ` +
      `A ${fmt(radius)} ${fmt(radius)} 0 0 1 ${fmt(x0)} ${fmt(y0)} Z`
    );
  }
  const [x0, y0] = polar(radius, start);
  const [x1, y1] = polar(radius, start + sweep);
  const large = sweep > Math.PI ? 1 : 0;
  return (
    `M ${fmt(CENTER)} ${fmt(CENTER)} L ${fmt(x0)} ${fmt(y0)} ` +
    `A ${fmt(radius)} ${fmt(radius)} 0 ${large} 1 ${fmt(x1)} ${fmt(y1)} Z`
  );
}

/** Label anchor at the sector centroid direction. */
export function labelPosition(
  sector: SectorModel,
  innerRadius: number,
): [number, number] {
  const mid = sector.startAngle + sector.angle / 2;
  return polar(Math.max(sector.radius, innerRadius) * 0.66, mid);
}
