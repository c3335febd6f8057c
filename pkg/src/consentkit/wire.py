"""Wire model: consent requests, decision signals, and their header forms.

A request names a purpose plus the parent concept it was expanded from,
the data/processing/recipient details the notice must disclose, and the
legal basis. A decision signal carries the user's consent / withdraw /
object verdicts back, either as a readable header value or as a compact
binary word. The special-category flag on requests is derived from the
personal-data concepts, never declared.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass

from .errors import DisjointnessError, NonCanonicalError, SchemaError
from .policy import CompactWord
from .taxonomy import Registry, Vocabulary


@dataclass(frozen=True)
class Party:
    """A named controller or recipient with its controller number."""

    name: str
    number: int

    def to_json(self) -> dict:
        return {"name": self.name, "number": self.number}


@dataclass(frozen=True)
class ConsentRequest:
    id: str
    purpose: str
    vocab: int
    parent: str | None = None
    personal_data: tuple[str, ...] = ()
    processing: tuple[str, ...] = ()
    controller: Party = Party("", 0)
    recipients: tuple[Party, ...] = ()
    legal_basis: str = "consent"
    measures: tuple[str, ...] = ()
    special_category: bool = False

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "purpose": self.purpose,
            "parent": self.parent,
            "vocab": self.vocab,
            "personal_data": list(self.personal_data),
            "processing": list(self.processing),
            "controller": self.controller.to_json(),
            "recipients": [p.to_json() for p in self.recipients],
            "legal_basis": self.legal_basis,
            "measures": list(self.measures),
            "special_category": self.special_category,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ConsentRequest":
        return cls(
            id=str(doc["id"]),
            purpose=str(doc["purpose"]),
            vocab=int(doc.get("vocab", 0)),
            parent=doc.get("parent"),
            personal_data=tuple(doc.get("personal_data", [])),
            processing=tuple(doc.get("processing", [])),
            controller=_parse_party(doc.get("controller", {"name": "", "number": 0}), "controller"),
            recipients=tuple(_parse_party(r, "recipients") for r in doc.get("recipients", [])),
            legal_basis=str(doc.get("legal_basis", "consent")),
            measures=tuple(doc.get("measures", [])),
            special_category=bool(doc.get("special_category", False)),
        )


def _parse_party(raw: dict, fieldname: str) -> Party:
    if not isinstance(raw, dict) or "name" not in raw:
        raise SchemaError(fieldname, f"{fieldname} entries need a name")
    return Party(name=str(raw["name"]), number=int(raw.get("number", 0)))


def derive_special_category(request: ConsentRequest, vocab: Vocabulary | None) -> bool:
    if vocab is None:
        return request.special_category
    return any(
        pd in vocab and vocab.node(pd).special_category for pd in request.personal_data
    )


def parse_requests_document(doc: dict, registry: Registry | None = None) -> list[ConsentRequest]:
    """Validate a consent-requests document and return its requests.

    With a registry the purposes are resolved: a purpose that is not a
    registered concept is a custom token and must declare a parent anchor,
    and a declared parent of a registered purpose must be a real ancestor.
    The consenting flow only carries legal basis "consent".
    """
    if not isinstance(doc, dict):
        raise SchemaError("document", "top level must be a JSON object")
    for key in ("version", "vocab", "requests"):
        if key not in doc:
            raise SchemaError(key)
    vocab_id = int(doc["vocab"])
    vocab = None
    if registry is not None:
        vocab = registry.vocabulary(vocab_id)
    doc_controller = doc.get("controller")
    requests: list[ConsentRequest] = []
    seen_ids: set[str] = set()
    for raw in doc["requests"]:
        if not isinstance(raw, dict):
            raise SchemaError("requests", "request entries must be objects")
        if "id" not in raw or not str(raw["id"]):
            raise SchemaError("id")
        if str(raw["id"]) in seen_ids:
            raise SchemaError("id", f"duplicate request id {raw['id']!r}")
        seen_ids.add(str(raw["id"]))
        if "purpose" not in raw or not str(raw["purpose"]):
            raise SchemaError("purpose")
        merged = dict(raw)
        merged.setdefault("controller", doc_controller or {"name": "", "number": 0})
        merged["vocab"] = vocab_id
        request = ConsentRequest.from_json(merged)
        if request.legal_basis != "consent":
            raise SchemaError("legal_basis", "the consenting flow only carries legal basis 'consent'")
        if vocab is not None:
            request = _validate_against_vocab(request, vocab)
        requests.append(request)
    return requests


def _validate_against_vocab(request: ConsentRequest, vocab: Vocabulary) -> ConsentRequest:
    if request.purpose not in vocab:
        if not request.parent:
            raise SchemaError("parent", f"custom purpose {request.purpose!r} needs a parent anchor")
        if request.parent not in vocab:
            raise SchemaError("parent", f"parent {request.parent!r} is not a registered concept")
    elif request.parent is not None:
        if request.parent not in _ancestor_ids(vocab, request.purpose):
            raise SchemaError("parent", f"{request.parent!r} is not an ancestor of {request.purpose!r}")
    special = derive_special_category(request, vocab)
    if special != request.special_category:
        request = dataclasses.replace(request, special_category=special)
    return request


def _ancestor_ids(vocab: Vocabulary, concept_id: str) -> set[str]:
    out: set[str] = set()
    frontier = [concept_id]
    while frontier:
        nxt: list[str] = []
        for cid in frontier:
            for parent in vocab.parents_of(cid):
                if parent not in out:
                    out.add(parent)
                    nxt.append(parent)
        frontier = nxt
    return out


def requests_document(vocab_id: int, controller: Party, requests: list[ConsentRequest]) -> dict:
    return {
        "version": 1,
        "vocab": vocab_id,
        "controller": controller.to_json(),
        "requests": [r.to_json() for r in requests],
    }


# ---------------------------------------------------------------------------
# Decision signals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecisionSignal:
    """The user-side verdicts for a batch of requests; lists are disjoint."""

    consent: tuple[str, ...] = ()
    withdraw: tuple[str, ...] = ()
    object: tuple[str, ...] = ()
    word: CompactWord | None = None

    def __post_init__(self):
        seen: set[str] = set()
        for name, ids in (("consent", self.consent), ("withdraw", self.withdraw), ("object", self.object)):
            for rid in ids:
                if rid in seen:
                    raise DisjointnessError(f"request id {rid!r} appears in more than one decision list")
                seen.add(rid)

    def is_empty(self) -> bool:
        return not (self.consent or self.withdraw or self.object)

    def all_ids(self) -> set[str]:
        return set(self.consent) | set(self.withdraw) | set(self.object)

    def to_json(self) -> dict:
        return {
            "consent": list(self.consent),
            "withdraw": list(self.withdraw),
            "object": list(self.object),
        }

    def header_value(self) -> str:
        """The text header form: sections in consent, withdraw, object order,
        empty sections omitted, ids space separated."""
        parts = []
        for name, ids in (("consent", self.consent), ("withdraw", self.withdraw), ("object", self.object)):
            if ids:
                parts.append(f'{name}="{" ".join(ids)}"')
        return ", ".join(parts)


_SECTION_RE = re.compile(r'\s*(consent|withdraw|object)\s*=\s*"([^"]*)"\s*(?:,|$)')


def parse_decisions_header(value: str) -> DecisionSignal:
    """Inverse of DecisionSignal.header_value."""
    fields: dict[str, tuple[str, ...]] = {}
    pos = 0
    for match in _SECTION_RE.finditer(value):
        if match.start() != pos:
            raise SchemaError("Consent-Decisions", f"unparseable header near {value[pos:][:30]!r}")
        name = match.group(1)
        if name in fields:
            raise SchemaError("Consent-Decisions", f"duplicate section {name!r}")
        fields[name] = tuple(tok for tok in match.group(2).split(" ") if tok)
        pos = match.end()
    if pos != len(value):
        raise SchemaError("Consent-Decisions", f"unparseable header near {value[pos:][:30]!r}")
    return DecisionSignal(
        consent=fields.get("consent", ()),
        withdraw=fields.get("withdraw", ()),
        object=fields.get("object", ()),
    )


# Binary form: 2-bit verdict per request, in requests-document order.
_WORD_CODES = {"none": 0, "consent": 1, "object": 2, "withdraw": 3}
_WORD_NAMES = {v: k for k, v in _WORD_CODES.items()}


def encode_decision_word(signal: DecisionSignal, request_order: list[str], vocab_id: int) -> CompactWord:
    unknown = signal.all_ids() - set(request_order)
    if unknown:
        raise SchemaError("word", f"signal covers unserved request ids {sorted(unknown)}")
    bits = []
    for rid in request_order:
        if rid in signal.consent:
            code = _WORD_CODES["consent"]
        elif rid in signal.object:
            code = _WORD_CODES["object"]
        elif rid in signal.withdraw:
            code = _WORD_CODES["withdraw"]
        else:
            code = _WORD_CODES["none"]
        bits.append(format(code, "02b"))
    return CompactWord(vocab=vocab_id, payload="".join(bits))


def decode_decision_word(word: CompactWord, request_order: list[str]) -> DecisionSignal:
    if len(word.payload) != 2 * len(request_order):
        raise NonCanonicalError(
            f"decision word carries {len(word.payload)} bits for {len(request_order)} requests"
        )
    consent: list[str] = []
    withdraw: list[str] = []
    objected: list[str] = []
    for i, rid in enumerate(request_order):
        code = int(word.payload[2 * i: 2 * i + 2], 2)
        name = _WORD_NAMES[code]
        if name == "consent":
            consent.append(rid)
        elif name == "object":
            objected.append(rid)
        elif name == "withdraw":
            withdraw.append(rid)
    return DecisionSignal(consent=tuple(consent), withdraw=tuple(withdraw), object=tuple(objected))
