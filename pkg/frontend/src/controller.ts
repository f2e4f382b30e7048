// Input -> debounced request -> render loop with stale-response discarding.
//
// Every keystroke bumps a generation counter; a response renders only if its
// generation is still current when it arrives, and superseded in-flight
// requests are aborted. Quiescence therefore always ends with a render that
// matches the final input.

import { CorrectionResponse, correct } from "./api.js";

export interface ViewSink {
  renderResults(response: CorrectionResponse): void;
  renderError(message: string): void;
  clear(): void;
}

export interface ControllerOptions {
  debounceMs?: number;
  k?: number;
  apiBase?: string;
  fetcher?: typeof correct;
}

export class SearchController {
  private generation = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inflight: AbortController | null = null;
  readonly debounceMs: number;
  private readonly k: number;
  private readonly base: string | undefined;
  private readonly fetcher: typeof correct;

  constructor(private view: ViewSink, options: ControllerOptions = {}) {
    this.debounceMs = options.debounceMs ?? 150;
    this.k = options.k ?? 5;
    this.base = options.apiBase;
    this.fetcher = options.fetcher ?? correct;
  }

  /** Handle one keystroke's worth of input. */
  onInput(text: string): void {
    this.generation += 1;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    if (this.inflight !== null) {
      this.inflight.abort();
      this.inflight = null;
    }
    const trimmed = text.trim();
    if (trimmed === "") {
      this.view.clear();
      return;
    }
    const generation = this.generation;
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.fire(trimmed, generation);
    }, this.debounceMs);
  }

  private async fire(query: string, generation: number): Promise<void> {
    if (generation !== this.generation) return; // superseded while queued
    const abort = new AbortController();
    this.inflight = abort;
    try {
      const response = await this.fetcher(
        query,
        this.k,
        abort.signal,
        this.base ?? undefined
      );
      if (generation === this.generation) {
        this.view.renderResults(response);
      }
    } catch (err) {
      if (abort.signal.aborted) return; // cancellation is not an error
      if (generation === this.generation) {
        this.view.renderError(err instanceof Error ? err.message : String(err));
      }
    } finally {
      if (this.inflight === abort) this.inflight = null;
    }
  }
}
