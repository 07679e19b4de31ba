/**
 * DOM wiring for the console.  All state transitions live in form.ts /
 * panels.ts; this module only reflects them into the document.
 */

import { fetchCatalog, fetchModels, postPredict, ServiceError } from "./api.js";
import { buildChartModel, labelPosition, sectorPath } from "./chart.js";
import {
  FormState,
  buildForm,
  canSubmit,
  setField,
  submitBlockedReason,
  toPredictRequest,
} from "./form.js";
import {
  PanelsState,
  SubmissionQueue,
  acceptResult,
  dismissPrevious,
  emptyPanels,
  visiblePanels,
} from "./panels.js";
import type { CatalogEntry, ModelInfo, PredictResponse } from "./types.js";

const app = document.getElementById("app") as HTMLElement;

let models: ModelInfo[] = [];
let form: FormState | null = null;
let panels: PanelsState = emptyPanels;

const queue = new SubmissionQueue(
  postPredict,
  (result) => {
    panels = acceptResult(panels, result);
    if (form) form = { ...form, dirty: false };
    renderAll();
  },
  (error) => {
    showBanner(error instanceof ServiceError ? error.message : String(error));
  },
);

function showBanner(message: string): void {
  const banner = document.getElementById("banner") as HTMLElement;
  banner.textContent = message;
  banner.hidden = false;
}

function clearBanner(): void {
  const banner = document.getElementById("banner") as HTMLElement;
  banner.hidden = true;
}

async function boot(): Promise<void> {
  app.innerHTML = `
    <header>
      <h1>Blood panel disease ranking</h1>
      <div id="banner" class="banner" hidden></div>
      <div class="controls">
        <label>Model <select id="model-select"></select></label>
        <button id="submit" disabled>Predict</button>
        <span id="submit-hint" class="hint"></span>
      </div>
    </header>
    <main>
      <section id="form-panel"><div id="fields"></div></section>
      <section id="results"></section>
    </main>`;
  document.getElementById("submit")!.addEventListener("click", onSubmit);
  document.getElementById("model-select")!.addEventListener("change", onModelChange);
  await loadCatalogAndForm();
}

async function loadCatalogAndForm(): Promise<void> {
  clearBanner();
  try {
    models = await fetchModels();
  } catch (error) {
    renderRetry(`cannot load model list: ${String(error)}`);
    return;
  }
  // the basic-panel model is the default: fewer fields to fill
  const defaultModel =
    models.find((m) => m.subset === "basic") ?? models[0];
  if (!defaultModel) {
    renderRetry("service lists no models");
    return;
  }
  const select = document.getElementById("model-select") as HTMLSelectElement;
  select.innerHTML = models
    .map((m) => `<option value="${m.model_id}">${m.model_id} (${m.subset})</option>`)
    .join("");
  select.value = defaultModel.model_id;
  await rebuildFormFor(defaultModel);
}

async function rebuildFormFor(model: ModelInfo): Promise<void> {
  let catalog: CatalogEntry[];
  try {
    catalog = await fetchCatalog(model.subset);
  } catch (error) {
    renderRetry(`cannot load the parameter catalog: ${String(error)}`);
    return;
  }
  form = buildForm(catalog, model.model_id);
  renderAll();
}

function renderRetry(message: string): void {
  showBanner(message);
  const fields = document.getElementById("fields") as HTMLElement;
  fields.innerHTML = `<button id="retry">Retry</button>`;
  document.getElementById("retry")!.addEventListener("click", () => void loadCatalogAndForm());
}

function onModelChange(): void {
  const select = document.getElementById("model-select") as HTMLSelectElement;
  const model = models.find((m) => m.model_id === select.value);
  if (model) void rebuildFormFor(model);
}

function onSubmit(): void {
  if (!form || !canSubmit(form)) return;
  clearBanner();
  queue.submit(toPredictRequest(form));
}

function renderAll(): void {
  renderFields();
  renderResults();
}

function renderFields(): void {
  if (!form) return;
  const container = document.getElementById("fields") as HTMLElement;
  container.innerHTML = "";
  for (const field of form.fields) {
    const row = document.createElement("div");
    row.className = `field status-${field.status}`;
    const label = document.createElement("label");
    label.textContent = `${field.entry.code} ${field.entry.name}`;
    const input = document.createElement("input");
    input.type = "text";
    input.inputMode = "decimal";
    input.value = field.raw;
    input.dataset.code = field.entry.code;
    input.addEventListener("input", () => {
      form = setField(form!, field.entry.code, input.value);
      row.className = `field status-${form.fields.find((f) => f.entry.code === field.entry.code)!.status}`;
      updateSubmit();
    });
    const meta = document.createElement("span");
    meta.className = "meta";
    meta.textContent = `${field.entry.unit} · ref ${field.entry.ref_low}–${field.entry.ref_high}`;
    const flag = document.createElement("span");
    flag.className = "flag";
    if (field.status === "out-of-bounds") {
      flag.textContent = `outside plausible range ${field.entry.plausible_min}–${field.entry.plausible_max}; excluded`;
    } else if (field.status === "non-numeric") {
      flag.textContent = "not a number; treated as blank";
    }
    row.append(label, input, meta, flag);
    container.append(row);
  }
  updateSubmit();
}

function updateSubmit(): void {
  if (!form) return;
  const button = document.getElementById("submit") as HTMLButtonElement;
  const hint = document.getElementById("submit-hint") as HTMLElement;
  button.disabled = !canSubmit(form);
  hint.textContent = submitBlockedReason(form) ?? (form.dirty ? "edited since last prediction" : "");
}

function renderResults(): void {
  const container = document.getElementById("results") as HTMLElement;
  container.innerHTML = "";
  for (const panel of visiblePanels(panels)) {
    container.append(renderPanel(panel.label, panel.result));
  }
}

function renderPanel(label: "previous" | "current", result: PredictResponse): HTMLElement {
  const section = document.createElement("article");
  section.className = `result-panel ${label}`;
  section.dataset.panel = label;

  const heading = document.createElement("h2");
  heading.textContent = label;
  section.append(heading);

  if (label === "previous") {
    const dismiss = document.createElement("button");
    dismiss.textContent = "dismiss";
    dismiss.addEventListener("click", () => {
      panels = dismissPrevious(panels);
      renderResults();
    });
    section.append(dismiss);
  }

  section.append(renderChart(result));

  const table = document.createElement("table");
  table.innerHTML =
    "<tr><th>disease</th><th>probability</th><th>prevalence</th><th>info (bits)</th></tr>";
  for (const entry of result.ranked) {
    const row = document.createElement("tr");
    const info = entry.info_score_bits === null ? "−∞" : entry.info_score_bits.toFixed(3);
    row.innerHTML = `<td title="${entry.name}">${entry.code}</td><td>${entry.probability.toFixed(4)}</td><td>${entry.prevalence.toFixed(4)}</td><td>${info}</td>`;
    table.append(row);
  }
  section.append(table);

  if (result.warnings.length) {
    const warnings = document.createElement("ul");
    warnings.className = "warnings";
    for (const w of result.warnings) {
      const item = document.createElement("li");
      item.textContent = w;
      warnings.append(item);
    }
    section.append(warnings);
  }
  return section;
}

function renderChart(result: PredictResponse): SVGSVGElement {
  const model = buildChartModel(result.chart);
  const ns = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(ns, "svg");
  svg.setAttribute("viewBox", "0 0 1000 1000");
  svg.classList.add("chart");

  const shapes = model.remainder ? [...model.sectors, model.remainder] : model.sectors;
  for (const sector of shapes) {
    const d = sectorPath(sector);
    if (!d) continue;
    const path = document.createElementNS(ns, "path");
    path.setAttribute("d", d);
    path.setAttribute("fill", sector.fill);
    path.setAttribute("stroke", "#ffffff");
    // the payload values ride along verbatim for inspection and tests
    path.dataset.code = sector.code;
    path.dataset.startAngle = String(sector.startAngle);
    path.dataset.angle = String(sector.angle);
    path.dataset.radius = String(sector.radius);
    const title = document.createElementNS(ns, "title");
    title.textContent = sector.code
      ? `${sector.code} ${sector.name}`
      : sector.name;
    path.append(title);
    svg.append(path);
  }

  const circle = document.createElementNS(ns, "circle");
  circle.setAttribute("cx", "500");
  circle.setAttribute("cy", "500");
  circle.setAttribute("r", String(model.innerRadius));
  circle.setAttribute("fill", "none");
  circle.setAttribute("stroke", "#555555");
  circle.setAttribute("stroke-dasharray", "6 4");
  svg.append(circle);

  for (const sector of model.sectors) {
    if (sector.angle <= 0) continue;
    const [x, y] = labelPosition(sector, model.innerRadius);
    const text = document.createElementNS(ns, "text");
    text.setAttribute("x", x.toFixed(3));
    text.setAttribute("y", y.toFixed(3));
    text.setAttribute("text-anchor", "middle");
    text.textContent = sector.code;
    svg.append(text);
  }
  return svg;
}

void boot();
