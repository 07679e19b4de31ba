/** Wire types mirroring the service's JSON payloads. */

export interface CatalogEntry {
  code: string;
  name: string;
  unit: string;
  basic: boolean;
  ref_low: number;
  ref_high: number;
  plausible_min: number;
  plausible_max: number;
}

export interface ModelInfo {
  model_id: string;
  subset: "full" | "basic";
  n_trees: number;
  catalog_version: string;
}

export interface PredictRequest {
  model_id: string;
  measurements: Record<string, number>;
}

export interface RankedEntry {
  code: string;
  name: string;
  probability: number;
  prevalence: number;
  info_score_bits: number | null;
}

export interface GeometrySegment {
  code: string;
  name: string;
  predicted: number;
  prevalence: number;
  info_score_bits: number | null;
  start_angle_rad: number;
  angle_rad: number;
  display_radius: number;
  clamped: boolean;
}

export interface GeometryRemainder {
  predicted: number;
  start_angle_rad: number;
  angle_rad: number;
  display_radius: number;
}

export interface GeometryWire {
  inner_radius: number;
  max_radius: number;
  scale_bits_per_unit: number;
  segments: GeometrySegment[];
  remainder: GeometryRemainder;
  kl_bits: number;
}

export interface PredictResponse {
  model_id: string;
  ranked: RankedEntry[];
  chart: GeometryWire;
  warnings: string[];
}
