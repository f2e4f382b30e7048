import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { CorrectionResponse } from "../src/api.js";
import { SearchController, ViewSink } from "../src/controller.js";

function response(query: string, exact = false): CorrectionResponse {
  return {
    query,
    canonical: query,
    exact,
    matches: [{ name: `${query}-match`, class: 0, score: 0.9 }],
    latency_ms: 1.2,
  };
}

class RecordingView implements ViewSink {
  rendered: CorrectionResponse[] = [];
  errors: string[] = [];
  cleared = 0;
  renderResults(r: CorrectionResponse) {
    this.rendered.push(r);
  }
  renderError(message: string) {
    this.errors.push(message);
  }
  clear() {
    this.cleared += 1;
  }
}

describe("SearchController", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it("debounces rapid typing into exactly one request", async () => {
    const calls: string[] = [];
    const fetcher = vi.fn(async (q: string) => {
      calls.push(q);
      return response(q);
    });
    const view = new RecordingView();
    const controller = new SearchController(view, { fetcher });

    for (const text of ["p", "po", "pow", "powr", "powr bi"]) {
      controller.onInput(text);
      vi.advanceTimersByTime(50); // below the 150 ms debounce
    }
    vi.advanceTimersByTime(200); // quiescence
    await vi.runAllTimersAsync();

    expect(calls).toEqual(["powr bi"]);
    expect(view.rendered.map((r) => r.query)).toEqual(["powr bi"]);
  });

  it("discards responses for outdated input", async () => {
    const resolvers = new Map<string, (r: CorrectionResponse) => void>();
    const fetcher = vi.fn(
      (q: string) =>
        new Promise<CorrectionResponse>((resolve) => {
          resolvers.set(q, resolve);
        })
    );
    const view = new RecordingView();
    const controller = new SearchController(view, { fetcher });

    controller.onInput("first");
    await vi.advanceTimersByTimeAsync(150); // first request in flight
    controller.onInput("second");
    await vi.advanceTimersByTimeAsync(150);

    // the stale response arrives after the newer input superseded it
    resolvers.get("first")?.(response("first"));
    resolvers.get("second")?.(response("second"));
    await vi.runAllTimersAsync();

    expect(view.rendered.map((r) => r.query)).toEqual(["second"]);
  });

  it("aborts the in-flight request when superseded", async () => {
    const seen: AbortSignal[] = [];
    const fetcher = vi.fn(
      (q: string, _k: number, signal?: AbortSignal) =>
        new Promise<CorrectionResponse>((resolve, reject) => {
          if (signal) {
            seen.push(signal);
            signal.addEventListener("abort", () =>
              reject(new DOMException("aborted", "AbortError"))
            );
          }
          if (q === "final") resolve(response(q));
        })
    );
    const view = new RecordingView();
    const controller = new SearchController(view, { fetcher });

    controller.onInput("slow query");
    await vi.advanceTimersByTimeAsync(150);
    controller.onInput("final");
    await vi.advanceTimersByTimeAsync(150);
    await vi.runAllTimersAsync();

    expect(seen[0].aborted).toBe(true);
    expect(view.errors).toEqual([]); // cancellation is not an error
    expect(view.rendered.map((r) => r.query)).toEqual(["final"]);
  });

  it("clears results on empty input without issuing a request", async () => {
    const fetcher = vi.fn(async (q: string) => response(q));
    const view = new RecordingView();
    const controller = new SearchController(view, { fetcher });

    controller.onInput("query");
    controller.onInput("   ");
    await vi.runAllTimersAsync();

    expect(fetcher).not.toHaveBeenCalled();
    expect(view.cleared).toBe(1);
  });

  it("surfaces network failures as a banner", async () => {
    const fetcher = vi.fn(async () => {
      throw new Error("connection refused");
    });
    const view = new RecordingView();
    const controller = new SearchController(view, { fetcher });

    controller.onInput("anything");
    await vi.advanceTimersByTimeAsync(150);
    await vi.runAllTimersAsync();

    expect(view.errors).toEqual(["connection refused"]);
    expect(view.rendered).toEqual([]);
  });

  it("after any input sequence, quiescence renders the final input", async () => {
    const fetcher = vi.fn(async (q: string) => response(q));
    const view = new RecordingView();
    const controller = new SearchController(view, { fetcher });

    const sequence = ["a", "ab", "", "abc", "abcd", "ab", "power bi"];
    for (const text of sequence) {
      controller.onInput(text);
      vi.advanceTimersByTime(30);
    }
    await vi.advanceTimersByTimeAsync(500);
    await vi.runAllTimersAsync();

    const last = view.rendered.at(-1);
    expect(last?.query).toBe("power bi");
  });
});
