// @vitest-environment jsdom
import { beforeEach, describe, expect, it, vi } from "vitest";

import { CorrectionResponse } from "../src/api.js";
import { SearchView } from "../src/view.js";

function makeView(onPick = vi.fn()) {
  document.body.innerHTML = `
    <div id="banner" hidden></div>
    <ul id="results"></ul>
    <p id="status"></p>`;
  const view = new SearchView(
    {
      results: document.getElementById("results")!,
      banner: document.getElementById("banner")!,
      status: document.getElementById("status")!,
    },
    onPick
  );
  return { view, onPick };
}

function response(partial: Partial<CorrectionResponse>): CorrectionResponse {
  return {
    query: "q",
    canonical: "q",
    exact: false,
    matches: [],
    latency_ms: 2.5,
    ...partial,
  };
}

describe("SearchView", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("renders k rows in score order with scores shown", () => {
    const { view } = makeView();
    view.renderResults(
      response({
        exact: true,
        matches: [
          { name: "power bi", class: 3, score: 1.0 },
          { name: "power apps", class: 5, score: 0.93 },
          { name: "powerpoint", class: 9, score: 0.88 },
        ],
      })
    );
    const rows = [...document.querySelectorAll(".result")];
    expect(rows).toHaveLength(3);
    const scores = [...document.querySelectorAll(".result-score")].map((el) =>
      parseFloat(el.textContent!)
    );
    expect(scores).toEqual([...scores].sort((a, b) => b - a));
  });

  it("exact match shows no correction banner", () => {
    const { view } = makeView();
    view.renderResults(
      response({ exact: true, matches: [{ name: "power bi", class: 0, score: 1 }] })
    );
    const banner = document.getElementById("banner")!;
    expect(banner.hidden).toBe(true);
    expect(document.getElementById("status")!.textContent).toContain("exact");
  });

  it("inexact match highlights the top suggestion", () => {
    const { view } = makeView();
    view.renderResults(
      response({ exact: false, matches: [{ name: "power bi", class: 0, score: 0.97 }] })
    );
    const banner = document.getElementById("banner")!;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("power bi");
    expect(banner.className).toContain("suggestion");
  });

  it("clicking a result reports the exact catalog name", () => {
    const { view, onPick } = makeView();
    view.renderResults(
      response({ matches: [{ name: "helpdesk suite", class: 2, score: 0.91 }] })
    );
    (document.querySelector(".result-name") as HTMLButtonElement).click();
    expect(onPick).toHaveBeenCalledWith("helpdesk suite");
  });

  it("errors keep existing results and show an error banner", () => {
    const { view } = makeView();
    view.renderResults(
      response({ matches: [{ name: "kept", class: 0, score: 0.9 }] })
    );
    view.renderError("boom");
    expect(document.querySelectorAll(".result")).toHaveLength(1);
    const banner = document.getElementById("banner")!;
    expect(banner.className).toContain("error");
    expect(banner.textContent).toContain("boom");
  });

  it("clear empties everything", () => {
    const { view } = makeView();
    view.renderResults(
      response({ matches: [{ name: "x", class: 0, score: 0.9 }] })
    );
    view.clear();
    expect(document.querySelectorAll(".result")).toHaveLength(0);
    expect(document.getElementById("banner")!.hidden).toBe(true);
  });
});
