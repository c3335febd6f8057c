"""Command-line entry point wiring every module together.

Exit codes are stable: 0 success, 1 lint errors present, 2 input error,
3 transport error. Every command accepts --json for machine-readable
output on both success and failure paths.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from pathlib import Path

from . import corpus
from .dialogue import (
    DialogueSpec,
    Severity,
    generate_choices_only,
    generate_complete,
    generate_from_template,
    lint,
)
from .errors import ConsentKitError, SchemaError, TransportError
from .markup import parse_markup
from .matching import (
    DecisionStore,
    ancestor_path,
    bruteforce_match,
    load_preferences,
    match_request,
)
from .policy import (
    PolicyBitString,
    decode_base64url,
    decode_policy,
    encode_base64url,
    encode_policy,
    strip_for_header,
)
from .signal import (
    AgentMode,
    AgentService,
    SignalFormat,
    SiteConfig,
    WebsiteSimulator,
    run_agent,
)
from .taxonomy import build_codebook, load_registry, load_vocabulary
from .wire import parse_requests_document

EXIT_OK = 0
EXIT_LINT = 1
EXIT_INPUT = 2
EXIT_TRANSPORT = 3


class _Output:
    def __init__(self, as_json: bool):
        self.as_json = as_json

    def emit(self, payload: dict | list, text: str | None = None) -> None:
        if self.as_json:
            print(json.dumps(payload, indent=2, sort_keys=False))
        else:
            print(text if text is not None else json.dumps(payload, indent=2))

    def emit_lines(self, payloads: list[dict], lines: list[str]) -> None:
        if self.as_json:
            for payload in payloads:
                print(json.dumps(payload))
        else:
            for line in lines:
                print(line)

    def fail(self, exc: Exception) -> None:
        if self.as_json:
            print(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}))
        else:
            print(f"error: {exc}", file=sys.stderr)


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError("document", f"{path}: not valid JSON: {exc}") from exc


# ---------------------------------------------------------------------------
# taxonomy
# ---------------------------------------------------------------------------

def cmd_taxonomy(args, out: _Output) -> int:
    vocab = load_vocabulary(args.vocab)
    if args.action == "validate":
        out.emit(
            {"ok": True, "name": vocab.name, "registry_id": vocab.registry_id,
             "concepts": len(vocab)},
            f"{vocab.name}: {len(vocab)} concepts, registry id {vocab.registry_id}: ok",
        )
        return EXIT_OK
    weights = None
    if args.weights:
        doc = _read_json(args.weights)
        weights = doc.get("weights", doc)
    book = build_codebook(vocab, weights or vocab.default_weights or None)
    payload = {
        "vocab": vocab.registry_id,
        "name": vocab.name,
        "codec": vocab.codec,
        **book.to_json(),
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        out.emit({"written": args.output, "entries": len(book.entries)},
                 f"wrote {len(book.entries)} codes to {args.output}")
    else:
        print(text, end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# policy
# ---------------------------------------------------------------------------

def cmd_policy(args, out: _Output) -> int:
    registry = load_registry(args.registry) if args.registry else None
    if args.action == "encode":
        policy = PolicyBitString.from_json(_read_json(args.input))
        encoded = encode_base64url(encode_policy(policy, registry))
        if args.output:
            Path(args.output).write_text(encoded + "\n", encoding="utf-8")
        out.emit({"encoded": encoded, "bytes": len(encoded)}, encoded)
        return EXIT_OK
    if args.action == "decode":
        if registry is None:
            raise SchemaError("registry", "decode needs --registry")
        text = args.input
        if Path(text).is_file():
            text = Path(text).read_text(encoding="utf-8").strip()
        policy = decode_policy(decode_base64url(text), registry)
        out.emit(policy.to_json())
        return EXIT_OK
    # strip
    policy = PolicyBitString.from_json(_read_json(args.input))
    keep = {tok.strip() for tok in args.keep.split(",") if tok.strip()}
    word = strip_for_header(policy, keep)
    encoded = encode_base64url(word.to_bytes())
    full = encode_base64url(encode_policy(policy, registry))
    out.emit(
        {"stripped": encoded, "kept": sorted(keep), "stripped_chars": len(encoded),
         "full_chars": len(full)},
        f"{encoded}\n({len(encoded)} chars, full encoding {len(full)} chars)",
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# match
# ---------------------------------------------------------------------------

def _explain(decision, request, registry) -> str | None:
    if decision.matched_rule is None:
        return None
    rule = decision.matched_rule
    vocab = registry.vocabulary(request.vocab)
    if rule.target_vocab == request.vocab:
        base = request.purpose if request.purpose in vocab else request.parent
        chain = ancestor_path(vocab, base, rule.target_concept) if base else None
        if chain is not None:
            if base != request.purpose:
                chain = [request.purpose] + chain
            return " -> ".join(chain)
    return f"{request.purpose} ~ {rule.target_vocab}:{rule.target_concept} (via registry mapping)"


def cmd_match(args, out: _Output) -> int:
    if args.oracle_check:
        rng = random.Random(args.seed)
        mismatches = 0
        for case_index in range(args.cases):
            case = corpus.random_match_case(rng)
            for request in case.requests:
                fast = match_request(request, case.rules, case.registry, case.store)
                slow = bruteforce_match(request, case.rules, case.registry, case.store)
                if (fast.outcome, fast.specificity, fast.rule_index) != (
                        slow.outcome, slow.specificity, slow.rule_index):
                    mismatches += 1
        payload = {"cases": args.cases, "mismatches": mismatches, "seed": args.seed}
        out.emit(payload, f"{args.cases} cases, {mismatches} oracle mismatches")
        return EXIT_OK if mismatches == 0 else EXIT_INPUT
    registry = load_registry(args.registry)
    prefs = load_preferences(args.prefs, registry)
    requests = parse_requests_document(_read_json(args.requests), registry)
    store = DecisionStore(args.store) if args.store else None
    rows = []
    lines = []
    for request in requests:
        decision = match_request(request, prefs, registry, store)
        row = {"id": request.id, "outcome": decision.outcome.value}
        line = f"{request.id}: {decision.outcome.value}"
        if decision.matched_rule is not None:
            rule = decision.matched_rule
            row.update(rule_index=decision.rule_index, specificity=decision.specificity,
                       rule={"target": list(rule.target), "effect": rule.effect.value})
            line += (f" (rule #{decision.rule_index} {rule.effect.value} "
                     f"{rule.target_vocab}:{rule.target_concept}, specificity {decision.specificity})")
        if args.explain:
            path = _explain(decision, request, registry)
            if path:
                row["path"] = path
                line += f"\n  path: {path}"
        rows.append(row)
        lines.append(line)
    out.emit({"decisions": rows}, "\n".join(lines) if lines else "no requests")
    return EXIT_OK


# ---------------------------------------------------------------------------
# serve / agent run
# ---------------------------------------------------------------------------

def cmd_serve(args, out: _Output) -> int:
    if args.target == "website":
        config = SiteConfig.load(args.config)
        if args.port is not None:
            config.port = args.port
        if args.log:
            config.log_path = Path(args.log)
        site = WebsiteSimulator(config)
        site.start()
        out.emit({"url": site.url, "resource": config.resource_path},
                 f"website simulator listening on {site.url}")
        sys.stdout.flush()
        return _wait_forever(site.stop, args.max_seconds)
    # agent service
    registry = load_registry(args.registry)
    session = run_agent(
        args.prefs, args.url, registry,
        mode=AgentMode.INTERACTIVE,
        store=DecisionStore(args.store) if args.store else None,
    )
    service = AgentService(session, port=args.port or 0, ui_dir=args.ui)
    service.start()
    out.emit({"url": service.url, "pending": len(session.pending())},
             f"agent service listening on {service.url}")
    sys.stdout.flush()
    return _wait_forever(service.stop, args.max_seconds)


def _wait_forever(stop, max_seconds: float | None) -> int:
    deadline = time.time() + max_seconds if max_seconds else None
    try:
        while deadline is None or time.time() < deadline:
            time.sleep(0.1)
    except KeyboardInterrupt:
        pass
    finally:
        stop()
    return EXIT_OK


def cmd_agent_run(args, out: _Output) -> int:
    registry = load_registry(args.registry)
    store = DecisionStore(args.store) if args.store else None
    fmt = SignalFormat.BINARY_WORD if args.format == "binary" else SignalFormat.TEXT_HEADER
    mode = AgentMode.INTERACTIVE if args.interactive else AgentMode.HEADLESS
    session = run_agent(args.prefs, args.url, registry, mode=mode, store=store,
                        signal_format=fmt, session_token=args.session)
    if mode is AgentMode.INTERACTIVE and not session.complete():
        service = AgentService(session, port=args.port or 0, ui_dir=args.ui)
        service.start()
        print(json.dumps({"service_url": service.url}))
        sys.stdout.flush()
        try:
            done = service.wait_complete(args.wait)
            if done:
                session.finalize()
        finally:
            service.stop()
    report = session.report()
    lines = [f"{row['id']}: {row['outcome']} ({row['provenance']})" for row in report["requests"]]
    if report["signal_sent"]:
        lines.append(f'signaled: {report["signal_text"]}')
    else:
        lines.append("no signal sent")
    out.emit(report, "\n".join(lines))
    return EXIT_OK


# ---------------------------------------------------------------------------
# dialogue
# ---------------------------------------------------------------------------

def cmd_dialogue(args, out: _Output) -> int:
    if args.action == "gen":
        registry = load_registry(args.registry) if args.registry else None
        doc = _read_json(args.requests)
        if args.mode == "choices":
            for forbidden in ("controls", "layers", "template"):
                if forbidden in doc:
                    raise SchemaError(forbidden,
                                      f"choices mode accepts no controller {forbidden}")
        requests = parse_requests_document(doc, registry)
        if args.mode == "complete":
            spec = generate_complete(requests, registry)
        elif args.mode == "template":
            if not args.template:
                raise SchemaError("template", "--mode template needs --template")
            spec = generate_from_template(_read_json(args.template), requests, registry,
                                          flatten_layers=args.flatten_layers)
        else:
            if args.template:
                raise SchemaError("template", "choices mode accepts no controller template")
            spec = generate_choices_only(args.notice_ref or "", requests, registry)
        text = json.dumps(spec.to_json(), indent=2) + "\n"
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
            out.emit({"written": args.output, "dialogue_id": spec.dialogue_id},
                     f"wrote {spec.dialogue_id} to {args.output}")
        else:
            print(text, end="")
        return EXIT_OK
    # lint
    registry = load_registry(args.registry) if args.registry else None
    target = Path(args.target)
    if target.suffix in (".html", ".htm"):
        subject = parse_markup(target.read_text(encoding="utf-8"), origin=str(target))
    else:
        subject = DialogueSpec.from_json(_read_json(args.target))
    findings = lint(subject, registry)
    payloads = [f.to_json() for f in findings]
    lines = [f"{f.rule} {f.severity.value}: {f.message} [{f.location}]" for f in findings]
    out.emit_lines(payloads, lines if lines else ["clean: no findings"])
    has_errors = any(f.severity is Severity.ERROR for f in findings)
    return EXIT_LINT if has_errors else EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="consentkit",
                                     description="consent-signaling protocol engine")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("taxonomy", help="vocabulary compilation and validation")
    p.add_argument("action", choices=["compile", "validate"])
    p.add_argument("vocab", help="vocabulary JSON document")
    p.add_argument("--weights", help="weight map JSON")
    p.add_argument("-o", "--output", help="write the codebook here")
    p.set_defaults(func=cmd_taxonomy)

    p = sub.add_parser("policy", help="policy bit-string codec")
    p.add_argument("action", choices=["encode", "decode", "strip"])
    p.add_argument("input", help="policy JSON file, or base64url text for decode")
    p.add_argument("--registry", help="registry JSON document")
    p.add_argument("--keep", default="purposes", help="fields to keep when stripping")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_policy)

    p = sub.add_parser("match", help="resolve requests against preferences")
    p.add_argument("--prefs")
    p.add_argument("--requests")
    p.add_argument("--registry")
    p.add_argument("--store", help="decision store JSONL")
    p.add_argument("--explain", action="store_true")
    p.add_argument("--oracle-check", action="store_true",
                   help="compare the matcher against the brute-force enumerator")
    p.add_argument("--cases", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("serve", help="run the website simulator or agent service")
    p.add_argument("target", choices=["website", "agent"])
    p.add_argument("--config", help="website: site config JSON")
    p.add_argument("--port", type=int)
    p.add_argument("--log", help="website: decision log JSONL path")
    p.add_argument("--prefs", help="agent: preference file")
    p.add_argument("--registry", help="agent: registry document")
    p.add_argument("--url", help="agent: website URL to visit")
    p.add_argument("--store", help="agent: decision store JSONL")
    p.add_argument("--ui", help="agent: static UI directory")
    p.add_argument("--max-seconds", type=float, default=None,
                   help="stop after this long (default: run until interrupted)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("agent", help="agent operations")
    agent_sub = p.add_subparsers(dest="agent_command", required=True)
    pr = agent_sub.add_parser("run", help="visit a site and signal decisions")
    group = pr.add_mutually_exclusive_group(required=True)
    group.add_argument("--headless", action="store_true")
    group.add_argument("--interactive", action="store_true")
    pr.add_argument("--prefs", required=True)
    pr.add_argument("--registry", required=True)
    pr.add_argument("--url", required=True)
    pr.add_argument("--store")
    pr.add_argument("--format", choices=["text", "binary"], default="text")
    pr.add_argument("--session", help="session token override")
    pr.add_argument("--port", type=int, help="interactive: service port")
    pr.add_argument("--ui", help="interactive: static UI directory")
    pr.add_argument("--wait", type=float, default=300.0,
                    help="interactive: seconds to wait for human decisions")
    pr.set_defaults(func=cmd_agent_run)

    p = sub.add_parser("dialogue", help="generate and lint consent dialogues")
    dlg_sub = p.add_subparsers(dest="dialogue_command", required=True)
    pg = dlg_sub.add_parser("gen")
    pg.add_argument("--mode", choices=["complete", "template", "choices"], required=True)
    pg.add_argument("--requests", required=True, help="consent-requests JSON document")
    pg.add_argument("--registry")
    pg.add_argument("--template", help="template mode: notice template JSON")
    pg.add_argument("--notice-ref", help="choices mode: controller notice handle")
    pg.add_argument("--flatten-layers", action="store_true")
    pg.add_argument("-o", "--output")
    pg.set_defaults(func=cmd_dialogue, action="gen")
    pl = dlg_sub.add_parser("lint")
    pl.add_argument("target", help="dialogue spec JSON or HTML page")
    pl.add_argument("--registry")
    pl.set_defaults(func=cmd_dialogue, action="lint")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = _Output(args.json)
    try:
        return args.func(args, out)
    except TransportError as exc:
        out.fail(exc)
        return EXIT_TRANSPORT
    except (ConsentKitError, OSError, ValueError) as exc:
        out.fail(exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
