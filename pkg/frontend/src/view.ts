// DOM rendering: result list, "did you mean" highlight, error banner.

import { CorrectionResponse } from "./api.js";
import { ViewSink } from "./controller.js";

export interface ViewElements {
  results: HTMLElement;
  banner: HTMLElement;
  status: HTMLElement;
}

export class SearchView implements ViewSink {
  constructor(
    private el: ViewElements,
    private onPick: (name: string) => void
  ) {}

  renderResults(response: CorrectionResponse): void {
    this.el.banner.hidden = true;
    this.el.banner.textContent = "";
    this.el.results.replaceChildren();

    if (!response.exact && response.matches.length > 0) {
      this.el.banner.hidden = false;
      this.el.banner.className = "banner suggestion";
      this.el.banner.textContent = `did you mean “${response.matches[0].name}”?`;
    }

    for (const match of response.matches) {
      const row = document.createElement("li");
      row.className = "result";
      const name = document.createElement("button");
      name.type = "button";
      name.className = "result-name";
      name.textContent = match.name;
      name.addEventListener("click", () => this.onPick(match.name));
      const score = document.createElement("span");
      score.className = "result-score";
      score.textContent = match.score.toFixed(4);
      row.append(name, score);
      this.el.results.append(row);
    }
    this.el.status.textContent =
      `${response.matches.length} matches in ${response.latency_ms.toFixed(1)} ms` +
      (response.exact ? " — exact match" : "");
  }

  renderError(message: string): void {
    // keep the last good results visible; just surface the failure
    this.el.banner.hidden = false;
    this.el.banner.className = "banner error";
    this.el.banner.textContent = `search failed: ${message}`;
  }

  clear(): void {
    this.el.results.replaceChildren();
    this.el.banner.hidden = true;
    this.el.banner.textContent = "";
    this.el.status.textContent = "";
  }
}
