"""Real-time correction API over an immutable model+index snapshot.

Endpoints (HTTP/1.1, UTF-8 JSON):

  GET  /v1/correct?q=<query>&k=<int>  -> query, canonical, exact, matches,
                                         latency_ms, index_digest
  GET  /v1/healthz                    -> status, index_digest, catalog_size
  POST /v1/reload {checkpoint, index} -> swapped, index_digest

Requests read one snapshot reference for their whole lifetime; reload swaps
the snapshot atomically, so responses are always internally consistent and
in-flight requests finish on the snapshot they started with.
"""

from __future__ import annotations

import hashlib
import http.client
import json
import threading
import time
import urllib.parse
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import DEFAULT_ALPHABET
from .index import EmbeddingIndex, load_index, query as index_query
from .model import CheckpointBundle, load_checkpoint

EXACT_THRESHOLD = 1.0 - 1e-6


@dataclass
class ServiceConfig:
    checkpoint_path: str
    index_path: str
    host: str = "127.0.0.1"
    port: int = 8750
    default_k: int = 5
    max_query_len: int = 256
    latency_budget_ms: float = 50.0
    static_dir: Optional[str] = None

    def __post_init__(self):
        if self.default_k < 1:
            raise ValueError("default_k must be >= 1")
        if self.latency_budget_ms <= 0:
            raise ValueError("latency budget must be positive")


@dataclass(frozen=True)
class Snapshot:
    bundle: CheckpointBundle
    index: EmbeddingIndex
    index_digest: str


def load_snapshot(checkpoint_path: str, index_path: str) -> Snapshot:
    """Load checkpoint + index and verify they belong together."""
    bundle = load_checkpoint(Path(checkpoint_path).read_bytes())
    data = Path(index_path).read_bytes()
    idx = load_index(data, expect_checkpoint_digest=bundle.digest)
    return Snapshot(
        bundle=bundle,
        index=idx,
        index_digest=hashlib.sha256(data).hexdigest(),
    )


class CorrectionService:
    """Holds the active snapshot and serves corrections from it."""

    def __init__(self, config: ServiceConfig, snapshot: Optional[Snapshot] = None):
        self.config = config
        self._snapshot = snapshot or load_snapshot(
            config.checkpoint_path, config.index_path
        )
        self._reload_lock = threading.Lock()

    @property
    def snapshot(self) -> Snapshot:
        return self._snapshot

    def correct(self, q: str, k: Optional[int] = None) -> dict:
        """One correction request; raises ValueError for bad input."""
        start = time.perf_counter()
        snap = self._snapshot  # single read: the whole request uses one snapshot
        if len(q) > self.config.max_query_len:
            raise ValueError(
                f"query longer than {self.config.max_query_len} characters"
            )
        canonical = DEFAULT_ALPHABET.canonicalize(q)
        if not canonical:
            raise ValueError("query is empty after canonicalization")
        k = self.config.default_k if k is None else k
        if k < 1:
            raise ValueError("k must be >= 1")
        matches = index_query(
            snap.index, snap.bundle.params, snap.bundle.config, canonical, k
        )
        exact = bool(matches and matches[0].similarity >= EXACT_THRESHOLD)
        return {
            "query": q,
            "canonical": canonical,
            "exact": exact,
            "matches": [
                {"name": m.name, "class": m.class_index, "score": m.similarity}
                for m in matches
            ],
            "latency_ms": (time.perf_counter() - start) * 1000.0,
            "index_digest": snap.index_digest,
        }

    def health(self) -> dict:
        start = time.perf_counter()
        snap = self._snapshot
        return {
            "status": "ok",
            "index_digest": snap.index_digest,
            "catalog_size": len(snap.index),
            "latency_ms": (time.perf_counter() - start) * 1000.0,
        }

    def reload(
        self,
        checkpoint_path: Optional[str] = None,
        index_path: Optional[str] = None,
    ) -> dict:
        """Atomically swap in a new snapshot; on failure the old one stays."""
        start = time.perf_counter()
        with self._reload_lock:
            try:
                snapshot = load_snapshot(
                    checkpoint_path or self.config.checkpoint_path,
                    index_path or self.config.index_path,
                )
            except Exception as exc:  # keep serving the old snapshot
                return {
                    "swapped": False,
                    "index_digest": self._snapshot.index_digest,
                    "error": f"{type(exc).__name__}: {exc}",
                    "latency_ms": (time.perf_counter() - start) * 1000.0,
                }
            self._snapshot = snapshot
            return {
                "swapped": True,
                "index_digest": snapshot.index_digest,
                "latency_ms": (time.perf_counter() - start) * 1000.0,
            }


def _make_handler(service: CorrectionService):
    static_dir = (
        Path(service.config.static_dir) if service.config.static_dir else None
    )

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # silence default stderr noise
            pass

        def _send(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _send_static(self, rel: str) -> None:
            target = (static_dir / rel).resolve()
            if not str(target).startswith(str(static_dir.resolve())) or not target.is_file():
                self._send(404, {"error": "not found"})
                return
            ctype = {
                ".html": "text/html", ".js": "text/javascript",
                ".css": "text/css", ".map": "application/json",
            }.get(target.suffix, "application/octet-stream")
            body = target.read_bytes()
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            parsed = urllib.parse.urlparse(self.path)
            if parsed.path == "/v1/correct":
                params = urllib.parse.parse_qs(parsed.query)
                q = params.get("q", [""])[0]
                if not q:
                    self._send(400, {"error": "missing query parameter q"})
                    return
                try:
                    k = int(params["k"][0]) if "k" in params else None
                except ValueError:
                    self._send(400, {"error": "k must be an integer"})
                    return
                try:
                    self._send(200, service.correct(q, k))
                except ValueError as exc:
                    self._send(400, {"error": str(exc)})
            elif parsed.path == "/v1/healthz":
                self._send(200, service.health())
            elif static_dir is not None:
                rel = parsed.path.lstrip("/") or "index.html"
                self._send_static(rel)
            else:
                self._send(404, {"error": "not found"})

        def do_POST(self):
            parsed = urllib.parse.urlparse(self.path)
            if parsed.path != "/v1/reload":
                self._send(404, {"error": "not found"})
                return
            length = int(self.headers.get("Content-Length", 0) or 0)
            body = self.rfile.read(length) if length else b"{}"
            try:
                payload = json.loads(body.decode("utf-8")) if body.strip() else {}
            except (UnicodeDecodeError, json.JSONDecodeError):
                self._send(400, {"error": "body must be JSON"})
                return
            result = service.reload(
                checkpoint_path=payload.get("checkpoint"),
                index_path=payload.get("index"),
            )
            self._send(200 if result["swapped"] else 409, result)

    return Handler


def make_server(
    service: CorrectionService,
    host: Optional[str] = None,
    port: Optional[int] = None,
) -> ThreadingHTTPServer:
    return ThreadingHTTPServer(
        (host or service.config.host, port if port is not None else service.config.port),
        _make_handler(service),
    )


def serve(config: ServiceConfig) -> None:
    """Blocking entry point used by the CLI."""
    service = CorrectionService(config)
    server = make_server(service)
    host, port = server.server_address[:2]
    print(f"serving catalog of {len(service.snapshot.index)} on http://{host}:{port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


# ---------------------------------------------------------------------------
# Latency measurement

def measure_latency(
    host: str,
    port: int,
    queries: Sequence[str],
    concurrency: int = 8,
) -> dict:
    """Replay queries at fixed concurrency; client-side latency percentiles."""
    if not queries:
        raise ValueError("no queries to measure")
    shards = [list(queries[i::concurrency]) for i in range(concurrency)]
    all_latencies: list[list[float]] = [[] for _ in range(concurrency)]
    errors: list[int] = [0] * concurrency

    def worker(wid: int) -> None:
        conn = http.client.HTTPConnection(host, port, timeout=30)
        for q in shards[wid]:
            target = "/v1/correct?" + urllib.parse.urlencode({"q": q, "k": 1})
            start = time.perf_counter()
            conn.request("GET", target)
            resp = conn.getresponse()
            resp.read()
            elapsed = (time.perf_counter() - start) * 1000.0
            if resp.status == 200:
                all_latencies[wid].append(elapsed)
            else:
                errors[wid] += 1
        conn.close()

    threads = [
        threading.Thread(target=worker, args=(i,)) for i in range(concurrency)
    ]
    start = time.perf_counter()
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    total = time.perf_counter() - start

    latencies = np.array([x for shard in all_latencies for x in shard])
    if latencies.size == 0:
        raise RuntimeError("all requests failed")
    return {
        "count": int(latencies.size),
        "errors": int(sum(errors)),
        "p50_ms": float(np.percentile(latencies, 50)),
        "p99_ms": float(np.percentile(latencies, 99)),
        "max_ms": float(latencies.max()),
        "mean_ms": float(latencies.mean()),
        "throughput_rps": float(latencies.size / total),
        "latencies_ms": latencies.tolist(),
    }
