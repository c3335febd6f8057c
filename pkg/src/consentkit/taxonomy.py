"""Purpose taxonomies, flat-list prefix codebooks, and the vocabulary registry.

A vocabulary is a DAG of concepts (purposes, personal-data categories,
legal bases, ...) identified by string tokens. Vocabularies register under
an 8-bit id so bit-level encodings can name the concept space they draw
from, and a registry holds cross-vocabulary mappings so one party's terms
can be matched against another's.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import (
    CycleError,
    DanglingParentError,
    DuplicateIdError,
    EmptyVocabularyError,
    SchemaError,
    TruncatedError,
    UnknownConceptError,
    UnknownVocabularyError,
)

MAX_REGISTRY_ID = 127          # 8-bit field; 0xFF reserved for "unregistered"
UNREGISTERED_ID = 0xFF

LEGAL_BASIS_TOKENS = ("consent", "legitimate_interest", "contract", "other")


class ConceptKind(Enum):
    PURPOSE = "purpose"
    PERSONAL_DATA = "personal_data"
    LEGAL_BASIS = "legal_basis"
    RECIPIENT = "recipient"
    PROCESSING = "processing"
    MEASURE = "measure"


_KIND_ALIASES = {k.value: k for k in ConceptKind}
_KIND_ALIASES.update({
    "Purpose": ConceptKind.PURPOSE,
    "PersonalData": ConceptKind.PERSONAL_DATA,
    "LegalBasis": ConceptKind.LEGAL_BASIS,
    "Recipient": ConceptKind.RECIPIENT,
    "Processing": ConceptKind.PROCESSING,
    "Measure": ConceptKind.MEASURE,
})


def parse_kind(token: str) -> ConceptKind:
    try:
        return _KIND_ALIASES[token]
    except KeyError:
        raise SchemaError("kind", f"unknown concept kind {token!r}") from None


@dataclass(frozen=True)
class ConceptNode:
    """One concept in a vocabulary; parents point within the same vocabulary."""

    id: str
    label: str
    kind: ConceptKind
    parents: frozenset[str] = frozenset()
    special_category: bool = False


class Vocabulary:
    """An immutable, validated concept DAG with optional prefix codebook.

    Construction validates every invariant (unique ids, resolvable parents,
    acyclicity) and precomputes the deterministic flat order; instances are
    safe to share between threads.
    """

    def __init__(
        self,
        registry_id: int,
        name: str,
        version: int,
        concepts: list[ConceptNode],
        codec: str = "sf",
        default_weights: dict[str, float] | None = None,
    ) -> None:
        if not 0 <= registry_id <= MAX_REGISTRY_ID:
            raise SchemaError("registry_id", f"registry id {registry_id} outside 0..{MAX_REGISTRY_ID}")
        if version < 1:
            raise SchemaError("version", "vocabulary version must be >= 1")
        if codec not in ("enum", "sf"):
            raise SchemaError("codec", f"codec must be 'enum' or 'sf', got {codec!r}")
        self.registry_id = registry_id
        self.name = name
        self.version = version
        self.codec = codec
        self.default_weights = dict(default_weights or {})

        self.concepts: dict[str, ConceptNode] = {}
        for node in concepts:
            if node.id in self.concepts:
                raise DuplicateIdError(node.id)
            self.concepts[node.id] = node
        for node in concepts:
            for parent in node.parents:
                if parent not in self.concepts:
                    raise DanglingParentError(node.id, parent)

        self._flat = _toposort(self.concepts)
        self._flat_index = {cid: i for i, cid in enumerate(self._flat)}
        self.codebook: Codebook | None = None
        if self.concepts:
            self.codebook = build_codebook(self, self.default_weights or None)

    def __contains__(self, concept_id: str) -> bool:
        return concept_id in self.concepts

    def __len__(self) -> int:
        return len(self.concepts)

    def node(self, concept_id: str) -> ConceptNode:
        try:
            return self.concepts[concept_id]
        except KeyError:
            raise UnknownConceptError(concept_id, self.registry_id) from None

    def parents_of(self, concept_id: str) -> frozenset[str]:
        return self.node(concept_id).parents

    @property
    def flat(self) -> list[str]:
        """Concept ids in deterministic topological order (parents first)."""
        return list(self._flat)

    def flat_index(self, concept_id: str) -> int:
        try:
            return self._flat_index[concept_id]
        except KeyError:
            raise UnknownConceptError(concept_id, self.registry_id) from None

    def to_json(self) -> dict:
        return {
            "registry_id": self.registry_id,
            "name": self.name,
            "version": self.version,
            "codec": self.codec,
            "concepts": [
                {
                    "id": n.id,
                    "label": n.label,
                    "kind": n.kind.value,
                    "parents": sorted(n.parents),
                    "special_category": n.special_category,
                    **({"weight": self.default_weights[n.id]} if n.id in self.default_weights else {}),
                }
                for n in (self.concepts[cid] for cid in self._flat)
            ],
        }


def _toposort(concepts: dict[str, ConceptNode]) -> list[str]:
    """Kahn's algorithm with a min-heap of ready ids: parents always precede
    children, ties broken by ascending id. Raises CycleError otherwise."""
    children: dict[str, list[str]] = {cid: [] for cid in concepts}
    pending = {}
    for node in concepts.values():
        pending[node.id] = len(node.parents)
        for parent in node.parents:
            children[parent].append(node.id)
    ready = [cid for cid, n in pending.items() if n == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        cid = heapq.heappop(ready)
        order.append(cid)
        for child in children[cid]:
            pending[child] -= 1
            if pending[child] == 0:
                heapq.heappush(ready, child)
    if len(order) != len(concepts):
        stuck = sorted(cid for cid in concepts if cid not in set(order))
        raise CycleError(stuck[0])
    return order


def flatten(vocab: Vocabulary) -> list[str]:
    """The vocabulary's flat list: a deterministic topological order."""
    return vocab.flat


# ---------------------------------------------------------------------------
# Codebooks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Codebook:
    """Prefix-free bit codes for every concept of one vocabulary."""

    entries: dict[str, str]
    weights: dict[str, float]

    def encode(self, concept_id: str) -> str:
        try:
            return self.entries[concept_id]
        except KeyError:
            raise UnknownConceptError(concept_id) from None

    def encode_sequence(self, concept_ids: list[str]) -> str:
        return "".join(self.encode(cid) for cid in concept_ids)

    def decode_sequence(self, bits: str) -> list[str]:
        """Split a bit string into whole concept codes (prefix-free scan)."""
        reverse = {code: cid for cid, code in self.entries.items()}
        out: list[str] = []
        acc = ""
        for ch in bits:
            acc += ch
            if acc in reverse:
                out.append(reverse[acc])
                acc = ""
        if acc:
            raise TruncatedError(f"trailing partial concept code {acc!r}")
        return out

    def to_json(self) -> dict:
        return {
            "entries": dict(sorted(self.entries.items())),
            "weights": dict(sorted(self.weights.items())),
        }


def build_codebook(vocab: Vocabulary, weights: dict[str, float] | None = None) -> Codebook:
    """Build the vocabulary's codebook under its declared codec.

    'enum' assigns fixed-width flat-list indices; 'sf' runs a recursive
    equal-weight split over the list sorted by descending weight and then
    assigns bit patterns canonically, so heavier concepts never carry
    longer codes. Both are pure functions of (concepts, weights).
    """
    if not vocab.concepts:
        raise EmptyVocabularyError(f"vocabulary {vocab.name!r} has no concepts")
    resolved: dict[str, float] = {}
    for cid in vocab.flat:
        w = (weights or {}).get(cid, 1.0)
        if not w > 0:
            raise ValueError(f"weight for {cid!r} must be > 0, got {w}")
        resolved[cid] = float(w)

    if vocab.codec == "enum":
        width = max(1, math.ceil(math.log2(len(vocab.flat)))) if len(vocab.flat) > 1 else 1
        entries = {cid: format(i, f"0{width}b") for i, cid in enumerate(vocab.flat)}
        return Codebook(entries=entries, weights=resolved)

    order = sorted(vocab.flat, key=lambda cid: (-resolved[cid], vocab.flat_index(cid)))
    if len(order) == 1:
        return Codebook(entries={order[0]: "0"}, weights=resolved)

    lengths = [0] * len(order)
    wts = [resolved[cid] for cid in order]
    prefix = [0.0]
    for w in wts:
        prefix.append(prefix[-1] + w)

    def split(lo: int, hi: int, depth: int) -> None:
        if hi - lo == 1:
            lengths[lo] = depth
            return
        total = prefix[hi] - prefix[lo]
        best_k, best_diff = lo + 1, None
        for k in range(lo + 1, hi):
            left = prefix[k] - prefix[lo]
            diff = abs(total - 2 * left)
            if best_diff is None or diff < best_diff:
                best_k, best_diff = k, diff
        split(lo, best_k, depth + 1)
        split(best_k, hi, depth + 1)

    split(0, len(order), 0)

    # Canonical assignment: sort the split's length multiset ascending along
    # the descending-weight order, then hand out codes counter-style. Keeps
    # the code prefix-free and the length monotone in weight.
    assigned = sorted(lengths)
    entries: dict[str, str] = {}
    code = 0
    prev_len = assigned[0]
    for cid, length in zip(order, assigned):
        code <<= length - prev_len
        entries[cid] = format(code, f"0{length}b")
        prev_len = length
        code += 1
    return Codebook(entries=entries, weights=resolved)


# ---------------------------------------------------------------------------
# Registry and cross-vocabulary mappings
# ---------------------------------------------------------------------------

class MappingRelation(Enum):
    EQUIVALENT = "equivalent"
    NARROWER = "narrower"
    BROADER = "broader"


@dataclass(frozen=True)
class ConceptMapping:
    """A directed link between concepts of two different vocabularies."""

    from_vocab: int
    from_concept: str
    to_vocab: int
    to_concept: str
    relation: MappingRelation


@dataclass
class Registry:
    """All registered vocabularies plus the mapping table between them."""

    vocabularies: dict[int, Vocabulary] = field(default_factory=dict)
    mappings: list[ConceptMapping] = field(default_factory=list)

    def add(self, vocab: Vocabulary) -> None:
        if vocab.registry_id in self.vocabularies:
            raise SchemaError("registry_id", f"registry id {vocab.registry_id} already taken")
        if len(self.vocabularies) >= MAX_REGISTRY_ID + 1:
            raise SchemaError("vocabularies", "registry is full (128 vocabularies)")
        self.vocabularies[vocab.registry_id] = vocab

    def vocabulary(self, registry_id: int) -> Vocabulary:
        try:
            return self.vocabularies[registry_id]
        except KeyError:
            raise UnknownVocabularyError(registry_id) from None

    def add_mapping(self, mapping: ConceptMapping) -> None:
        if mapping.from_vocab == mapping.to_vocab:
            raise SchemaError("mappings", "mapping endpoints must be in different vocabularies")
        self.vocabulary(mapping.from_vocab).node(mapping.from_concept)
        self.vocabulary(mapping.to_vocab).node(mapping.to_concept)
        self.mappings.append(mapping)

    def translate(
        self, concept: tuple[int, str], target_vocab: int
    ) -> list[tuple[str, MappingRelation]]:
        """Direct mappings of ``concept`` into ``target_vocab``, sorted by id.

        Equivalent mappings apply in both directions; Narrower/Broader only
        as written. No transitive closure.
        """
        registry_id, concept_id = concept
        self.vocabulary(registry_id).node(concept_id)
        self.vocabulary(target_vocab)
        found: dict[tuple[str, MappingRelation], None] = {}
        for m in self.mappings:
            if (m.from_vocab, m.from_concept) == (registry_id, concept_id) and m.to_vocab == target_vocab:
                found[(m.to_concept, m.relation)] = None
            elif (
                m.relation is MappingRelation.EQUIVALENT
                and (m.to_vocab, m.to_concept) == (registry_id, concept_id)
                and m.from_vocab == target_vocab
            ):
                found[(m.from_concept, MappingRelation.EQUIVALENT)] = None
        return sorted(found, key=lambda pair: (pair[0], pair[1].value))

    def mappings_from(self, registry_id: int, concept_id: str) -> list[ConceptMapping]:
        """Every outgoing mapping (Equivalent inverses included), any target."""
        out: list[ConceptMapping] = []
        for m in self.mappings:
            if (m.from_vocab, m.from_concept) == (registry_id, concept_id):
                out.append(m)
            elif (
                m.relation is MappingRelation.EQUIVALENT
                and (m.to_vocab, m.to_concept) == (registry_id, concept_id)
            ):
                out.append(
                    ConceptMapping(
                        from_vocab=registry_id,
                        from_concept=concept_id,
                        to_vocab=m.from_vocab,
                        to_concept=m.from_concept,
                        relation=MappingRelation.EQUIVALENT,
                    )
                )
        return out

    def to_json(self) -> dict:
        return {
            "vocabularies": [
                self.vocabularies[rid].to_json() for rid in sorted(self.vocabularies)
            ],
            "mappings": [
                {
                    "from": [m.from_vocab, m.from_concept],
                    "to": [m.to_vocab, m.to_concept],
                    "relation": m.relation.value,
                }
                for m in self.mappings
            ],
        }


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def load_vocabulary(source: dict | str | Path) -> Vocabulary:
    """Load and validate a vocabulary document (dict, JSON path, or text)."""
    doc = _load_doc(source)
    for key in ("registry_id", "name", "version", "concepts"):
        if key not in doc:
            raise SchemaError(key)
    if not isinstance(doc["concepts"], list):
        raise SchemaError("concepts", "concepts must be a list")
    nodes: list[ConceptNode] = []
    weights: dict[str, float] = {}
    for raw in doc["concepts"]:
        if not isinstance(raw, dict) or "id" not in raw:
            raise SchemaError("concepts[].id")
        node = ConceptNode(
            id=str(raw["id"]),
            label=str(raw.get("label", raw["id"])),
            kind=parse_kind(str(raw.get("kind", "purpose"))),
            parents=frozenset(str(p) for p in raw.get("parents", [])),
            special_category=bool(raw.get("special_category", False)),
        )
        nodes.append(node)
        if "weight" in raw:
            weights[node.id] = float(raw["weight"])
    return Vocabulary(
        registry_id=int(doc["registry_id"]),
        name=str(doc["name"]),
        version=int(doc["version"]),
        concepts=nodes,
        codec=str(doc.get("codec", "sf")),
        default_weights=weights,
    )


def load_registry(source: dict | str | Path, base_dir: str | Path | None = None) -> Registry:
    """Load a registry document; vocabulary entries may be inline or paths."""
    if isinstance(source, (str, Path)) and base_dir is None:
        base_dir = Path(source).parent
    doc = _load_doc(source)
    registry = Registry()
    for entry in doc.get("vocabularies", []):
        if isinstance(entry, str):
            path = Path(entry)
            if not path.is_absolute() and base_dir is not None:
                path = Path(base_dir) / path
            registry.add(load_vocabulary(path))
        else:
            registry.add(load_vocabulary(entry))
    for raw in doc.get("mappings", []):
        try:
            relation = MappingRelation(str(raw["relation"]).lower())
            mapping = ConceptMapping(
                from_vocab=int(raw["from"][0]),
                from_concept=str(raw["from"][1]),
                to_vocab=int(raw["to"][0]),
                to_concept=str(raw["to"][1]),
                relation=relation,
            )
        except (KeyError, IndexError, TypeError) as exc:
            raise SchemaError("mappings", f"malformed mapping entry: {raw!r}") from exc
        except ValueError as exc:
            raise SchemaError("mappings", str(exc)) from exc
        registry.add_mapping(mapping)
    return registry


def _load_doc(source: dict | str | Path) -> dict:
    if isinstance(source, dict):
        return source
    text = Path(source).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("document", f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("document", "top level must be a JSON object")
    return doc
