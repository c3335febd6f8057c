"""Consent-request delivery and decision signaling over HTTP.

The website side serves a ``Consent-Requests`` header pointing at its
machine-readable request document (pages embed the HTML fallback markup
too) and logs any ``Consent-Decisions`` / ``Consent-Decisions-Bin``
headers it receives, per session. The user-agent side fetches, matches
against local preference rules behind a bloom prefilter, generates
dialogues for whatever needs a human, and signals the merged verdicts
back. Both halves run on the stdlib threading HTTP server so a whole
round trip fits in one process for tests.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from enum import Enum
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import urljoin, urlparse

from .dialogue import DialogueSpec, apply_human_decision, generate_complete
from .errors import ConsentKitError, SchemaError, TransportError, UnknownVocabularyError
from .markup import emit_markup
from .matching import (
    DecisionStore,
    Outcome,
    PrefilterOutcome,
    build_prefilter,
    load_preferences,
    match_request,
    prefilter_check,
    preferences_document,
)
from .policy import CompactWord, decode_base64url, encode_base64url
from .taxonomy import Registry, load_registry
from .wire import (
    ConsentRequest,
    DecisionSignal,
    decode_decision_word,
    encode_decision_word,
    parse_decisions_header,
    parse_requests_document,
)

REQUESTS_HEADER = "Consent-Requests"
DECISIONS_HEADER = "Consent-Decisions"
DECISIONS_BIN_HEADER = "Consent-Decisions-Bin"
SESSION_HEADER = "Consent-Session"

DEFAULT_TIMEOUT = 10.0


class SignalFormat(Enum):
    TEXT_HEADER = "text"
    BINARY_WORD = "binary"


def ack_digest(signal: DecisionSignal) -> str:
    canonical = ";".join(
        f"{name}:{rid}"
        for name, ids in (("consent", signal.consent), ("withdraw", signal.withdraw),
                          ("object", signal.object))
        for rid in sorted(ids)
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# HTTP plumbing
# ---------------------------------------------------------------------------

def _http_exchange(
    url: str,
    method: str = "GET",
    headers: dict[str, str] | None = None,
    body: bytes | None = None,
    timeout: float = DEFAULT_TIMEOUT,
) -> tuple[int, dict[str, str], bytes]:
    request = urllib.request.Request(url, data=body, method=method)
    for key, value in (headers or {}).items():
        request.add_header(key, value)
    try:
        with urllib.request.urlopen(request, timeout=timeout) as response:
            return response.status, dict(response.headers), response.read()
    except urllib.error.HTTPError as exc:
        raise TransportError(f"{method} {url} -> HTTP {exc.code}") from exc
    except (urllib.error.URLError, TimeoutError, OSError) as exc:
        raise TransportError(f"{method} {url} failed: {exc}") from exc


def _json_of(body: bytes, what: str) -> dict:
    try:
        return json.loads(body.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise SchemaError(what, f"response is not valid JSON: {exc}") from exc


class _QuietHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, *args):  # harness servers stay silent
        pass

    def _send_json(self, payload: dict | list, status: int = 200,
                   extra_headers: dict[str, str] | None = None) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        for key, value in (extra_headers or {}).items():
            self.send_header(key, value)
        self.end_headers()
        self.wfile.write(body)

    def _send_html(self, markup: str, extra_headers: dict[str, str] | None = None) -> None:
        body = markup.encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "text/html; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        for key, value in (extra_headers or {}).items():
            self.send_header(key, value)
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length", "0") or 0)
        return self.rfile.read(length) if length else b""


# ---------------------------------------------------------------------------
# Website simulator
# ---------------------------------------------------------------------------

@dataclass
class SiteConfig:
    registry: Registry
    requests_doc: dict
    port: int = 0
    resource_path: str = "/consent-requests.json"
    log_path: Path | None = None

    @classmethod
    def load(cls, source: dict | str | Path, base_dir: str | Path | None = None) -> "SiteConfig":
        if isinstance(source, (str, Path)):
            base_dir = Path(source).parent if base_dir is None else Path(base_dir)
            source = json.loads(Path(source).read_text(encoding="utf-8"))
        if not isinstance(source, dict):
            raise SchemaError("config", "site config must be a JSON object")
        base = Path(base_dir) if base_dir is not None else Path(".")

        def resolve(value):
            path = Path(value)
            return path if path.is_absolute() else base / path

        if "registry" not in source:
            raise SchemaError("registry")
        registry = source["registry"]
        if isinstance(registry, (str,)):
            registry = load_registry(resolve(registry))
        elif isinstance(registry, dict):
            registry = load_registry(registry, base_dir=base)
        else:
            raise SchemaError("registry", "registry must be a path or inline document")
        if "requests_doc" not in source:
            raise SchemaError("requests_doc")
        doc = source["requests_doc"]
        if isinstance(doc, str):
            doc = json.loads(resolve(doc).read_text(encoding="utf-8"))
        log_path = source.get("log_path")
        return cls(
            registry=registry,
            requests_doc=doc,
            port=int(source.get("port", 0)),
            resource_path=str(source.get("resource_path", "/consent-requests.json")),
            log_path=Path(log_path) if log_path else None,
        )


class WebsiteSimulator:
    """Serves the consent-requests resource and logs incoming decisions."""

    def __init__(self, config: SiteConfig) -> None:
        self.config = config
        self.registry = config.registry
        self.requests = parse_requests_document(config.requests_doc, config.registry)
        self.vocab_id = int(config.requests_doc["vocab"])
        self.request_order = [r.id for r in self.requests]
        self.events: list[dict] = []
        self._lock = threading.Lock()
        self._server: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None
        if self.requests:
            self.page_html = (
                "<!DOCTYPE html>\n<html><head><title>harness site</title></head>\n<body>\n"
                "<h1>Welcome</h1>\n"
                + emit_markup(generate_complete(self.requests, self.registry))
                + "\n</body></html>\n"
            )
        else:
            self.page_html = "<!DOCTYPE html>\n<html><body><h1>Welcome</h1></body></html>\n"

    # -- decision intake -----------------------------------------------------

    def receive(self, headers: dict[str, str]) -> dict | None:
        """Parse decision headers if present; log and acknowledge."""
        session = headers.get(SESSION_HEADER, "anonymous")
        signal: DecisionSignal | None = None
        fmt: str | None = None
        if DECISIONS_HEADER in headers:
            signal = parse_decisions_header(headers[DECISIONS_HEADER])
            fmt = SignalFormat.TEXT_HEADER.value
        elif DECISIONS_BIN_HEADER in headers:
            word = CompactWord.from_bytes(decode_base64url(headers[DECISIONS_BIN_HEADER]))
            signal = decode_decision_word(word, self.request_order)
            fmt = SignalFormat.BINARY_WORD.value
        if signal is None:
            return None
        event = {
            "session": session,
            "format": fmt,
            "consent": sorted(signal.consent),
            "withdraw": sorted(signal.withdraw),
            "object": sorted(signal.object),
            "timestamp": time.time(),
        }
        with self._lock:
            self.events.append(event)
            if self.config.log_path is not None:
                with self.config.log_path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(event) + "\n")
        return {
            "received": signal.to_json(),
            "digest": ack_digest(signal),
        }

    def log_summary(self) -> dict:
        with self._lock:
            events = list(self.events)
        received: dict[str, set[str]] = {"consent": set(), "withdraw": set(), "object": set()}
        for event in events:
            for name in received:
                received[name].update(event[name])
        return {
            "events": events,
            "received": {name: sorted(ids) for name, ids in received.items()},
        }

    # -- server lifecycle ------------------------------------------------------

    def _requests_header(self) -> dict[str, str]:
        return {REQUESTS_HEADER: f"{self.config.resource_path}; v={self.vocab_id}"}

    def start(self) -> None:
        site = self

        class Handler(_QuietHandler):
            def _dispatch(self):
                headers = {k: v for k, v in self.headers.items()}
                try:
                    ack = site.receive(headers)
                except ConsentKitError as exc:
                    self._send_json({"error": str(exc)}, status=400,
                                    extra_headers=site._requests_header())
                    return
                if ack is not None:
                    self._send_json(ack, extra_headers=site._requests_header())
                    return
                path = urlparse(self.path).path
                if path == site.config.resource_path:
                    self._send_json(site.config.requests_doc, extra_headers=site._requests_header())
                elif path == "/log":
                    self._send_json(site.log_summary(), extra_headers=site._requests_header())
                elif path == "/":
                    self._send_html(site.page_html, extra_headers=site._requests_header())
                else:
                    self._send_json({"error": "not found"}, status=404,
                                    extra_headers=site._requests_header())

            do_GET = _dispatch
            do_POST = _dispatch

        self._server = ThreadingHTTPServer(("127.0.0.1", self.config.port), Handler)
        server = self._server
        self._thread = threading.Thread(
            target=lambda: server.serve_forever(poll_interval=0.02), daemon=True)
        self._thread.start()

    @property
    def port(self) -> int:
        if self._server is None:
            raise RuntimeError("website simulator is not running")
        return self._server.server_address[1]

    @property
    def url(self) -> str:
        return f"http://127.0.0.1:{self.port}/"

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None


def serve_requests(config: SiteConfig | dict | str | Path) -> WebsiteSimulator:
    """Validate the site config and return a started website simulator."""
    if not isinstance(config, SiteConfig):
        config = SiteConfig.load(config)
    site = WebsiteSimulator(config)
    site.start()
    return site


# ---------------------------------------------------------------------------
# User-agent side
# ---------------------------------------------------------------------------

@dataclass
class FetchResult:
    url: str
    resource_url: str
    vocab_id: int
    requests: list[ConsentRequest]
    raw_doc: dict

    @property
    def request_order(self) -> list[str]:
        return [r.id for r in self.requests]


def _fetch_document(url: str) -> tuple[dict, str, int]:
    status, headers, _ = _http_exchange(url)
    header = next((v for k, v in headers.items() if k.lower() == REQUESTS_HEADER.lower()), None)
    if header is None:
        raise SchemaError(REQUESTS_HEADER, f"{url} sent no {REQUESTS_HEADER} header")
    part, _, vpart = header.partition(";")
    resource = part.strip()
    vpart = vpart.strip()
    if not resource or not vpart.startswith("v="):
        raise SchemaError(REQUESTS_HEADER, f"malformed header value {header!r}")
    try:
        vocab_id = int(vpart[2:])
    except ValueError as exc:
        raise SchemaError(REQUESTS_HEADER, f"malformed vocabulary id in {header!r}") from exc
    resource_url = urljoin(url, resource)
    status, _, body = _http_exchange(resource_url)
    doc = _json_of(body, "consent-requests")
    if int(doc.get("vocab", -1)) != vocab_id:
        raise SchemaError("vocab", f"document vocab {doc.get('vocab')} != header v={vocab_id}")
    return doc, resource_url, vocab_id


def fetch_requests(url: str, registry: Registry) -> FetchResult:
    """Fetch and validate the consent requests a site links from ``url``."""
    doc, resource_url, vocab_id = _fetch_document(url)
    registry.vocabulary(vocab_id)  # UnknownVocabularyError before any parsing trust
    requests = parse_requests_document(doc, registry)
    return FetchResult(url=url, resource_url=resource_url, vocab_id=vocab_id,
                       requests=requests, raw_doc=doc)


def send_decisions(
    url: str,
    signal: DecisionSignal,
    format: SignalFormat = SignalFormat.TEXT_HEADER,
    *,
    request_order: list[str] | None = None,
    vocab_id: int | None = None,
    session: str | None = None,
) -> dict:
    """Signal decisions to the website and return its acknowledgment."""
    headers: dict[str, str] = {}
    if session:
        headers[SESSION_HEADER] = session
    if format is SignalFormat.TEXT_HEADER:
        headers[DECISIONS_HEADER] = signal.header_value()
    else:
        if request_order is None or vocab_id is None:
            raise ValueError("binary decision words need request_order and vocab_id")
        word = encode_decision_word(signal, request_order, vocab_id)
        headers[DECISIONS_BIN_HEADER] = encode_base64url(word.to_bytes())
    status, _, body = _http_exchange(url, method="POST", headers=headers)
    return _json_of(body, "acknowledgment")


class AgentMode(Enum):
    HEADLESS = "headless"
    INTERACTIVE = "interactive"


@dataclass
class RequestVerdict:
    request_id: str
    outcome: Outcome
    provenance: str  # "rule" | "human" | "unanswered" | "unknown-vocabulary"
    rule_index: int | None = None
    specificity: int | None = None

    def to_json(self) -> dict:
        out = {"id": self.request_id, "outcome": self.outcome.value, "provenance": self.provenance}
        if self.rule_index is not None:
            out["rule_index"] = self.rule_index
        if self.specificity is not None:
            out["specificity"] = self.specificity
        return out


class AgentSession:
    """One agent visit to one site: fetch, prefilter, match, prompt, signal."""

    def __init__(
        self,
        prefs_source: dict | str | Path,
        url: str,
        registry: Registry,
        mode: AgentMode = AgentMode.HEADLESS,
        store: DecisionStore | None = None,
        target_fpr: float = 0.01,
        signal_format: SignalFormat = SignalFormat.TEXT_HEADER,
        session_token: str | None = None,
    ) -> None:
        self.registry = registry
        self.url = url
        self.mode = mode
        self.store = store
        self.signal_format = signal_format
        self.prefs_path = Path(prefs_source) if isinstance(prefs_source, (str, Path)) else None
        self.rules = load_preferences(prefs_source, registry)
        self.target_fpr = target_fpr
        self.prefilter = build_prefilter(self.rules, target_fpr)
        seed = json.dumps(preferences_document(self.rules), sort_keys=True) + url
        self.session_token = session_token or f"sess-{hashlib.sha256(seed.encode()).hexdigest()[:10]}"

        self._lock = threading.RLock()
        self.fetched: FetchResult | None = None
        self.verdicts: dict[str, RequestVerdict] = {}
        self.pending_specs: dict[str, DialogueSpec] = {}
        self.prompted_ids: list[str] = []
        self.human_interactions = 0
        self.ack: dict | None = None
        self.sent_signal: DecisionSignal | None = None
        self.finalized = False
        self.vocab_known = True

    # -- pipeline ---------------------------------------------------------------

    def process(self) -> None:
        """Fetch and match; queue a dialogue for whatever needs a human."""
        with self._lock:
            try:
                self.fetched = fetch_requests(self.url, self.registry)
            except UnknownVocabularyError:
                doc, resource_url, vocab_id = _fetch_document(self.url)
                requests = parse_requests_document(doc, None)
                self.fetched = FetchResult(url=self.url, resource_url=resource_url,
                                           vocab_id=vocab_id, requests=requests, raw_doc=doc)
                self.vocab_known = False
                for request in requests:
                    self.verdicts[request.id] = RequestVerdict(
                        request.id, Outcome.PROMPT, "unknown-vocabulary")
                return
            prompts: list[ConsentRequest] = []
            for request in self.fetched.requests:
                if prefilter_check(self.prefilter, request, self.registry) is PrefilterOutcome.NO_RULE_CAN_APPLY:
                    decision = None
                else:
                    decision = match_request(request, self.rules, self.registry, self.store)
                if decision is None or decision.outcome is Outcome.PROMPT:
                    self.verdicts[request.id] = RequestVerdict(request.id, Outcome.PROMPT, "unanswered")
                    prompts.append(request)
                else:
                    self.verdicts[request.id] = RequestVerdict(
                        request.id, decision.outcome, "rule",
                        rule_index=decision.rule_index, specificity=decision.specificity,
                    )
            if prompts and self.mode is AgentMode.INTERACTIVE:
                spec = generate_complete(prompts, self.registry)
                self.pending_specs[spec.dialogue_id] = spec
                self.prompted_ids = [r.id for r in prompts]

    def pending(self) -> list[DialogueSpec]:
        with self._lock:
            return list(self.pending_specs.values())

    def submit(
        self,
        dialogue_id: str,
        activations: list[str] | None = None,
        accepted: list[str] | None = None,
        refused: list[str] | None = None,
    ) -> dict:
        """Apply a human decision to a pending dialogue.

        Activation lists drive the dialogue's controls directly; plain
        accepted/refused id lists are translated to toggle+save activations.
        """
        with self._lock:
            spec = self.pending_specs.get(dialogue_id)
            if spec is None:
                raise SchemaError("dialogue_id", f"no pending dialogue {dialogue_id!r}")
            if activations is None:
                activations = [f"toggle-{rid}" for rid in (accepted or [])]
                activations.append("save-selections")
            result = apply_human_decision(spec, activations)
            self.human_interactions += len(activations)
            for rid in result.signal.consent:
                self.verdicts[rid] = RequestVerdict(rid, Outcome.CONSENT, "human")
            for rid in result.signal.object:
                self.verdicts[rid] = RequestVerdict(rid, Outcome.OBJECT, "human")
            for rid in result.signal.withdraw:
                self.verdicts[rid] = RequestVerdict(rid, Outcome.WITHDRAW, "human")
            del self.pending_specs[dialogue_id]
            return {
                "dialogue_id": dialogue_id,
                "signal": result.signal.to_json(),
                "signal_text": result.signal.header_value(),
                "explicit_gate_unmet": result.explicit_gate_unmet,
            }

    def merged_signal(self) -> DecisionSignal:
        with self._lock:
            order = self.fetched.request_order if self.fetched else []
            consent = tuple(r for r in order if self.verdicts[r].outcome is Outcome.CONSENT)
            withdraw = tuple(r for r in order if self.verdicts[r].outcome is Outcome.WITHDRAW)
            objected = tuple(r for r in order if self.verdicts[r].outcome is Outcome.OBJECT)
            return DecisionSignal(consent=consent, withdraw=withdraw, object=objected)

    def finalize(self) -> dict:
        """Send the merged signal (once) and return the session report."""
        with self._lock:
            if not self.finalized:
                signal = self.merged_signal()
                if not signal.is_empty():
                    self.ack = send_decisions(
                        self.url, signal, self.signal_format,
                        request_order=self.fetched.request_order if self.fetched else [],
                        vocab_id=self.fetched.vocab_id if self.fetched else 0,
                        session=self.session_token,
                    )
                    if self.store is not None:
                        for verdict in self.verdicts.values():
                            if verdict.outcome is not Outcome.PROMPT:
                                self.store.record(verdict.request_id, verdict.outcome,
                                                  rule_index=verdict.rule_index)
                self.sent_signal = signal
                self.finalized = True
            return self.report()

    def complete(self) -> bool:
        with self._lock:
            return not self.pending_specs

    def report(self) -> dict:
        with self._lock:
            order = self.fetched.request_order if self.fetched else []
            signal = self.sent_signal if self.sent_signal is not None else self.merged_signal()
            prompts = sum(1 for v in self.verdicts.values() if v.outcome is Outcome.PROMPT)
            return {
                "mode": self.mode.value,
                "url": self.url,
                "vocab": self.fetched.vocab_id if self.fetched else None,
                "vocab_known": self.vocab_known,
                "requests": [self.verdicts[rid].to_json() for rid in order],
                "signal": signal.to_json(),
                "signal_text": signal.header_value(),
                "signal_sent": self.sent_signal is not None and not self.sent_signal.is_empty(),
                "ack": self.ack,
                "prompts_unanswered": prompts,
                "human_interactions": self.human_interactions,
                "complete": not self.pending_specs,
            }


def run_agent(
    prefs_source: dict | str | Path,
    url: str,
    registry: Registry,
    mode: AgentMode = AgentMode.HEADLESS,
    store: DecisionStore | None = None,
    signal_format: SignalFormat = SignalFormat.TEXT_HEADER,
    session_token: str | None = None,
) -> AgentSession:
    """Run the fetch/prefilter/match pipeline; headless sessions finalize
    immediately, interactive ones stay open while dialogues are pending."""
    session = AgentSession(
        prefs_source, url, registry, mode=mode, store=store,
        signal_format=signal_format, session_token=session_token,
    )
    session.process()
    if mode is AgentMode.HEADLESS or session.complete():
        session.finalize()
    return session


# ---------------------------------------------------------------------------
# Agent HTTP service (consumed by the UI)
# ---------------------------------------------------------------------------

class AgentService:
    """Exposes a session over HTTP: GET /pending, POST /decision,
    GET /report, GET /registry, GET+PUT /preferences, static UI assets."""

    def __init__(
        self,
        session: AgentSession,
        port: int = 0,
        ui_dir: str | Path | None = None,
    ) -> None:
        self.session = session
        self._port = port
        self.ui_dir = Path(ui_dir).resolve() if ui_dir else None
        self._server: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None

    def start(self) -> None:
        service = self

        class Handler(_QuietHandler):
            def do_GET(self):
                path = urlparse(self.path).path
                if path == "/pending":
                    self._send_json([spec.to_json() for spec in service.session.pending()])
                elif path == "/report":
                    self._send_json(service.session.report())
                elif path == "/registry":
                    self._send_json(service.session.registry.to_json())
                elif path == "/preferences":
                    self._send_json(preferences_document(service.session.rules))
                else:
                    service._serve_static(self, path)

            def do_POST(self):
                path = urlparse(self.path).path
                if path != "/decision":
                    self._send_json({"error": "not found"}, status=404)
                    return
                try:
                    body = json.loads(self._read_body().decode("utf-8"))
                    result = service.session.submit(
                        dialogue_id=str(body["dialogue_id"]),
                        activations=body.get("activations"),
                        accepted=body.get("accepted"),
                        refused=body.get("refused"),
                    )
                except SchemaError as exc:
                    self._send_json({"error": str(exc)}, status=404)
                    return
                except (KeyError, ValueError) as exc:
                    self._send_json({"error": f"malformed decision body: {exc}"}, status=400)
                    return
                if service.session.complete():
                    service.session.finalize()
                self._send_json(result)

            def do_PUT(self):
                path = urlparse(self.path).path
                if path != "/preferences":
                    self._send_json({"error": "not found"}, status=404)
                    return
                try:
                    doc = json.loads(self._read_body().decode("utf-8"))
                    service.session.rules = load_preferences(doc, service.session.registry)
                except (ValueError, ConsentKitError) as exc:
                    self._send_json({"error": str(exc)}, status=400)
                    return
                service.session.prefilter = build_prefilter(
                    service.session.rules, service.session.target_fpr)
                if service.session.prefs_path is not None:
                    service.session.prefs_path.write_text(
                        json.dumps(preferences_document(service.session.rules), indent=2) + "\n",
                        encoding="utf-8",
                    )
                self._send_json({"saved": len(service.session.rules)})

        self._server = ThreadingHTTPServer(("127.0.0.1", self._port), Handler)
        server = self._server
        self._thread = threading.Thread(
            target=lambda: server.serve_forever(poll_interval=0.02), daemon=True)
        self._thread.start()

    def _serve_static(self, handler: _QuietHandler, path: str) -> None:
        if self.ui_dir is None:
            handler._send_json({"error": "not found"}, status=404)
            return
        relative = path.lstrip("/") or "index.html"
        target = (self.ui_dir / relative).resolve()
        if not str(target).startswith(str(self.ui_dir)) or not target.is_file():
            handler._send_json({"error": "not found"}, status=404)
            return
        content_types = {
            ".html": "text/html; charset=utf-8",
            ".js": "text/javascript",
            ".css": "text/css",
            ".json": "application/json",
        }
        body = target.read_bytes()
        handler.send_response(200)
        handler.send_header("Content-Type", content_types.get(target.suffix, "application/octet-stream"))
        handler.send_header("Content-Length", str(len(body)))
        handler.end_headers()
        handler.wfile.write(body)

    @property
    def port(self) -> int:
        if self._server is None:
            raise RuntimeError("agent service is not running")
        return self._server.server_address[1]

    @property
    def url(self) -> str:
        return f"http://127.0.0.1:{self.port}/"

    def wait_complete(self, timeout: float) -> bool:
        deadline = time.time() + timeout
        while time.time() < deadline:
            if self.session.complete():
                return True
            time.sleep(0.05)
        return self.session.complete()

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None
