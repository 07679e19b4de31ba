/** Thin fetch wrappers for the prediction service. */

import type { CatalogEntry, ModelInfo, PredictRequest, PredictResponse } from "./types.js";

export class ServiceError extends Error {
  constructor(
    message: string,
    public readonly status: number | null = null,
  ) {
    super(message);
  }
}

async function getJson<T>(url: string): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url);
  } catch (error) {
    throw new ServiceError(`cannot reach the service: ${String(error)}`);
  }
  if (!response.ok) {
    throw new ServiceError(`${url} failed (${response.status})`, response.status);
  }
  return (await response.json()) as T;
}

export function fetchModels(): Promise<ModelInfo[]> {
  return getJson<ModelInfo[]>("/v1/models");
}

export function fetchCatalog(subset: "full" | "basic"): Promise<CatalogEntry[]> {
  return getJson<CatalogEntry[]>(`/v1/catalog?subset=${subset}`);
}

export async function postPredict(request: PredictRequest): Promise<PredictResponse> {
  let response: Response;
  try {
    response = await fetch("/v1/predict", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
  } catch (error) {
    throw new ServiceError(`cannot reach the service: ${String(error)}`);
  }
  if (!response.ok) {
    let detail = `prediction failed (${response.status})`;
    try {
      const body = (await response.json()) as { detail?: unknown };
      if (body.detail) detail = `${detail}: ${JSON.stringify(body.detail)}`;
    } catch {
      // keep the generic message
    }
    throw new ServiceError(detail, response.status);
  }
  return (await response.json()) as PredictResponse;
}
