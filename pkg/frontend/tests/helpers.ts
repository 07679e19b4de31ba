import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { CatalogEntry, GeometryWire } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));
const repoRoot = join(here, "..", "..");

/** The bundled parameter catalog, parsed from its CSV source of truth. */
export function loadCatalog(): CatalogEntry[] {
  const csv = readFileSync(
    join(repoRoot, "src", "hemadiag", "data", "default_catalog.csv"),
    "utf-8",
  );
  const [header, ...rows] = csv.trim().split("\n");
  if (header !== "code,name,unit,basic,plausible_min,plausible_max,ref_low,ref_high") {
    throw new Error("unexpected catalog header");
  }
  return rows.map((row) => {
    const [code, name, unit, basic, pmin, pmax, rlo, rhi] = row.split(",");
    return {
      code: code!,
      name: name!,
      unit: unit!,
      basic: basic === "true",
      plausible_min: Number(pmin),
      plausible_max: Number(pmax),
      ref_low: Number(rlo),
      ref_high: Number(rhi),
    };
  });
}

/** The geometry payload frozen alongside the service's golden SVG. */
export function loadGoldenGeometry(): GeometryWire {
  return JSON.parse(
    readFileSync(join(repoRoot, "tests", "data", "golden_geometry.json"), "utf-8"),
  ) as GeometryWire;
}
