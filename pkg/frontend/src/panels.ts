/**
 * What-if comparison state: the latest prediction is "current"; the one it
 * displaced stays visible as "previous" until dismissed.  Requests are
 * serialized with queued-latest-wins semantics: while one request is in
 * flight, only the newest queued submission survives.
 */

import type { PredictRequest, PredictResponse } from "./types.js";

export interface PanelsState {
  current: PredictResponse | null;
  previous: PredictResponse | null;
}

export const emptyPanels: PanelsState = { current: null, previous: null };

export function acceptResult(state: PanelsState, result: PredictResponse): PanelsState {
  return { current: result, previous: state.current };
}

export function dismissPrevious(state: PanelsState): PanelsState {
  return { current: state.current, previous: null };
}

export interface PanelView {
  label: "previous" | "current";
  result: PredictResponse;
}

/** Panels in display order; previous (when present) sits beside current. */
export function visiblePanels(state: PanelsState): PanelView[] {
  const panels: PanelView[] = [];
  if (state.previous) panels.push({ label: "previous", result: state.previous });
  if (state.current) panels.push({ label: "current", result: state.current });
  return panels;
}

export type PredictFn = (request: PredictRequest) => Promise<PredictResponse>;

/** Serializes submissions; while a request runs, the newest wins the queue. */
export class SubmissionQueue {
  private inFlight = false;
  private pending: PredictRequest | null = null;

  constructor(
    private readonly predict: PredictFn,
    private readonly onResult: (result: PredictResponse) => void,
    private readonly onError: (error: unknown) => void,
  ) {}

  submit(request: PredictRequest): void {
    if (this.inFlight) {
      this.pending = request;
      return;
    }
    this.run(request);
  }

  private run(request: PredictRequest): void {
    this.inFlight = true;
    this.predict(request)
      .then((result) => this.onResult(result))
      .catch((error) => this.onError(error))
      .finally(() => {
        this.inFlight = false;
        if (this.pending) {
          const next = this.pending;
          this.pending = null;
          this.run(next);
        }
      });
  }
}
