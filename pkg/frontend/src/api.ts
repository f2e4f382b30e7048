// Typed client for the correction API.

export interface Match {
  name: string;
  class: number;
  score: number;
}

export interface CorrectionResponse {
  query: string;
  canonical: string;
  exact: boolean;
  matches: Match[];
  latency_ms: number;
  index_digest?: string;
}

export interface Health {
  status: string;
  index_digest: string;
  catalog_size: number;
}

declare global {
  interface Window {
    SPELLSEARCH_API_BASE?: string;
  }
}

/** API base URL: injected global, else same origin. */
export function apiBase(): string {
  if (typeof window !== "undefined" && window.SPELLSEARCH_API_BASE) {
    return window.SPELLSEARCH_API_BASE.replace(/\/$/, "");
  }
  return "";
}

export async function correct(
  query: string,
  k: number,
  signal?: AbortSignal,
  base: string = apiBase()
): Promise<CorrectionResponse> {
  const url = `${base}/v1/correct?q=${encodeURIComponent(query)}&k=${k}`;
  const resp = await fetch(url, { signal });
  if (!resp.ok) {
    let reason = `HTTP ${resp.status}`;
    try {
      const body = await resp.json();
      if (body && body.error) reason = body.error;
    } catch {
      // keep the status-based reason
    }
    throw new Error(reason);
  }
  return (await resp.json()) as CorrectionResponse;
}

export async function health(base: string = apiBase()): Promise<Health> {
  const resp = await fetch(`${base}/v1/healthz`);
  if (!resp.ok) throw new Error(`HTTP ${resp.status}`);
  return (await resp.json()) as Health;
}
