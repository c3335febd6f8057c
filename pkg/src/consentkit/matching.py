"""Semantic preference matching with a bloom-filter prefilter.

A preference rule targets a concept at any level of the hierarchy; a
request matches when the rule's target subsumes the request's purpose
(ancestor-or-self, following Equivalent/Broader cross-vocabulary mappings
one hop). The most specific rule wins; on ties Prohibit beats Permit.
``bruteforce_match`` re-derives the same answer by exhaustively
enumerating every (rule, ancestor-path) pair and exists solely to check
``match_request`` against an independent route.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import SchemaError, UnknownConceptError
from .wire import ConsentRequest
from .taxonomy import (
    LEGAL_BASIS_TOKENS,
    ConceptKind,
    MappingRelation,
    Registry,
    Vocabulary,
)


class Effect(Enum):
    PERMIT = "permit"
    PROHIBIT = "prohibit"


class Outcome(Enum):
    CONSENT = "consent"
    OBJECT = "object"
    WITHDRAW = "withdraw"
    PROMPT = "prompt"


@dataclass(frozen=True)
class Constraints:
    """Conjunctive rule guards; a missing entry is a wildcard."""

    data: str | None = None
    controller: int | None = None
    legal_basis: str | None = None

    def to_json(self) -> dict:
        out: dict = {}
        if self.data is not None:
            out["data"] = self.data
        if self.controller is not None:
            out["controller"] = self.controller
        if self.legal_basis is not None:
            out["legal_basis"] = self.legal_basis
        return out


@dataclass(frozen=True)
class PreferenceRule:
    target_vocab: int
    target_concept: str
    effect: Effect
    constraints: Constraints = Constraints()
    created_at: float = 0.0

    @property
    def target(self) -> tuple[int, str]:
        return (self.target_vocab, self.target_concept)

    def to_json(self) -> dict:
        out = {"target": [self.target_vocab, self.target_concept], "effect": self.effect.value}
        if self.constraints.to_json():
            out["constraints"] = self.constraints.to_json()
        return out


@dataclass(frozen=True)
class Decision:
    request_id: str
    outcome: Outcome
    matched_rule: PreferenceRule | None = None
    rule_index: int | None = None
    specificity: int | None = None

    def __post_init__(self):
        if (self.outcome is Outcome.PROMPT) != (self.matched_rule is None):
            raise ValueError("Prompt decisions carry no rule; matched decisions must")


# ---------------------------------------------------------------------------
# Hierarchy walks
# ---------------------------------------------------------------------------

def ancestors(vocab: Vocabulary, concept_id: str) -> list[tuple[str, int]]:
    """Self plus all transitive parents with shortest-path depths.

    Breadth-first, so a diamond's far corner appears once at its minimum
    depth. Ordered by (depth, id).
    """
    vocab.node(concept_id)
    depths: dict[str, int] = {concept_id: 0}
    frontier = [concept_id]
    depth = 0
    while frontier:
        depth += 1
        nxt: list[str] = []
        for cid in frontier:
            for parent in vocab.parents_of(cid):
                if parent not in depths:
                    depths[parent] = depth
                    nxt.append(parent)
        frontier = nxt
    return sorted(depths.items(), key=lambda item: (item[1], item[0]))


def concept_candidates(
    registry: Registry,
    vocab_id: int,
    concept_id: str,
    parent: str | None = None,
) -> dict[tuple[int, str], int]:
    """Every (vocab, concept) a rule could target to subsume this concept,
    mapped to its minimum specificity.

    Specificity = request-side ancestor depth, plus one translation hop
    (Equivalent free, Broader costs 1), plus target-side ancestor depth.
    Unregistered concept tokens anchor through ``parent`` at depth 1.
    """
    vocab = registry.vocabulary(vocab_id)
    base: list[tuple[str, int]]
    candidates: dict[tuple[int, str], int] = {}
    if concept_id in vocab:
        base = ancestors(vocab, concept_id)
    else:
        candidates[(vocab_id, concept_id)] = 0  # custom token: only exact text match
        if parent is None or parent not in vocab:
            return candidates
        base = [(aid, depth + 1) for aid, depth in ancestors(vocab, parent)]

    def offer(key: tuple[int, str], depth: int) -> None:
        if key not in candidates or depth < candidates[key]:
            candidates[key] = depth

    for aid, depth in base:
        offer((vocab_id, aid), depth)
        for mapping in registry.mappings_from(vocab_id, aid):
            if mapping.relation is MappingRelation.NARROWER:
                continue  # a narrower concept would over-claim intent
            hop = 0 if mapping.relation is MappingRelation.EQUIVALENT else 1
            target_vocab = registry.vocabulary(mapping.to_vocab)
            for tid, tdepth in ancestors(target_vocab, mapping.to_concept):
                offer((mapping.to_vocab, tid), depth + hop + tdepth)
    return candidates


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------

def _constraints_hold(
    rule: PreferenceRule, request: ConsentRequest, registry: Registry
) -> bool:
    c = rule.constraints
    if c.controller is not None and request.controller.number != c.controller:
        return False
    if c.legal_basis is not None and request.legal_basis != c.legal_basis:
        return False
    if c.data is not None:
        key = (rule.target_vocab, c.data)
        for pd in request.personal_data:
            try:
                if key in concept_candidates(registry, request.vocab, pd):
                    break
            except UnknownConceptError:
                continue
        else:
            return False
    return True


def match_request(
    request: ConsentRequest,
    prefs: list[PreferenceRule],
    registry: Registry,
    store: "DecisionStore | None" = None,
) -> Decision:
    """Resolve one request against the rule set.

    Winner = minimum specificity; ties go to Prohibit, then to the earliest
    rule, so results are fully deterministic. Prohibit outcomes upgrade
    from Object to Withdraw when the store holds a prior Consent for the
    same request id. No applicable rule means Prompt.
    """
    candidates = concept_candidates(registry, request.vocab, request.purpose, request.parent)
    best: tuple[int, int, int] | None = None
    best_rule: PreferenceRule | None = None
    for index, rule in enumerate(prefs):
        depth = candidates.get(rule.target)
        if depth is None or not _constraints_hold(rule, request, registry):
            continue
        rank = (depth, 0 if rule.effect is Effect.PROHIBIT else 1, index)
        if best is None or rank < best:
            best = rank
            best_rule = rule
    if best is None or best_rule is None:
        return Decision(request_id=request.id, outcome=Outcome.PROMPT)
    if best_rule.effect is Effect.PERMIT:
        outcome = Outcome.CONSENT
    elif store is not None and store.has_prior_consent(request.id):
        outcome = Outcome.WITHDRAW
    else:
        outcome = Outcome.OBJECT
    return Decision(
        request_id=request.id,
        outcome=outcome,
        matched_rule=best_rule,
        rule_index=best[2],
        specificity=best[0],
    )


def ancestor_path(vocab: Vocabulary, concept_id: str, target_id: str) -> list[str] | None:
    """One shortest parent chain concept -> target, for --explain output."""
    if concept_id not in vocab:
        return None
    prev: dict[str, str] = {}
    depths = {concept_id: 0}
    frontier = [concept_id]
    while frontier:
        nxt = []
        for cid in frontier:
            for parent in vocab.parents_of(cid):
                if parent not in depths:
                    depths[parent] = depths[cid] + 1
                    prev[parent] = cid
                    nxt.append(parent)
        frontier = nxt
    if target_id not in depths:
        return None
    chain = [target_id]
    while chain[-1] != concept_id:
        chain.append(prev[chain[-1]])
    return list(reversed(chain))


# ---------------------------------------------------------------------------
# Independent oracle: exhaustive (rule, ancestor-path) enumeration
# ---------------------------------------------------------------------------

def _all_upward_paths(vocab: Vocabulary, concept_id: str) -> list[tuple[str, int]]:
    """Every simple upward path as (endpoint, length); no dedup, no BFS."""
    out: list[tuple[str, int]] = []

    def walk(cid: str, length: int) -> None:
        out.append((cid, length))
        for parent in sorted(vocab.parents_of(cid)):
            walk(parent, length + 1)

    walk(concept_id, 0)
    return out


def _oracle_reach(
    registry: Registry, vocab_id: int, concept_id: str, parent: str | None
) -> list[tuple[int, str, int]]:
    vocab = registry.vocabulary(vocab_id)
    starts: list[tuple[str, int]]
    reach: list[tuple[int, str, int]] = []
    if concept_id in vocab:
        starts = _all_upward_paths(vocab, concept_id)
    else:
        reach.append((vocab_id, concept_id, 0))
        if parent is None or parent not in vocab:
            return reach
        starts = [(cid, length + 1) for cid, length in _all_upward_paths(vocab, parent)]
    for cid, length in starts:
        reach.append((vocab_id, cid, length))
        for mapping in registry.mappings_from(vocab_id, cid):
            if mapping.relation is MappingRelation.NARROWER:
                continue
            hop = 0 if mapping.relation is MappingRelation.EQUIVALENT else 1
            far = registry.vocabulary(mapping.to_vocab)
            for tid, tlen in _all_upward_paths(far, mapping.to_concept):
                reach.append((mapping.to_vocab, tid, length + hop + tlen))
    return reach


def bruteforce_match(
    request: ConsentRequest,
    prefs: list[PreferenceRule],
    registry: Registry,
    store: "DecisionStore | None" = None,
) -> Decision:
    """Reference matcher: enumerates every rule against every ancestor path
    and scores pairs directly. Slow on purpose; used to cross-check
    match_request."""
    reach = _oracle_reach(registry, request.vocab, request.purpose, request.parent)
    scored: list[tuple[int, int, int, PreferenceRule]] = []
    for index, rule in enumerate(prefs):
        depths = [d for rid, cid, d in reach if (rid, cid) == rule.target]
        if not depths:
            continue
        if not _oracle_constraints(rule, request, registry):
            continue
        scored.append(
            (min(depths), 0 if rule.effect is Effect.PROHIBIT else 1, index, rule)
        )
    if not scored:
        return Decision(request_id=request.id, outcome=Outcome.PROMPT)
    scored.sort(key=lambda item: item[:3])
    depth, _, index, rule = scored[0]
    if rule.effect is Effect.PERMIT:
        outcome = Outcome.CONSENT
    elif store is not None and store.has_prior_consent(request.id):
        outcome = Outcome.WITHDRAW
    else:
        outcome = Outcome.OBJECT
    return Decision(
        request_id=request.id,
        outcome=outcome,
        matched_rule=rule,
        rule_index=index,
        specificity=depth,
    )


def _oracle_constraints(rule: PreferenceRule, request: ConsentRequest, registry: Registry) -> bool:
    c = rule.constraints
    if c.controller is not None and request.controller.number != c.controller:
        return False
    if c.legal_basis is not None and request.legal_basis != c.legal_basis:
        return False
    if c.data is not None:
        for pd in request.personal_data:
            vocab = registry.vocabulary(request.vocab)
            if pd not in vocab:
                continue
            reach = _oracle_reach(registry, request.vocab, pd, None)
            if any((rid, cid) == (rule.target_vocab, c.data) for rid, cid, _ in reach):
                return True
        return False
    return True


# ---------------------------------------------------------------------------
# Bloom prefilter
# ---------------------------------------------------------------------------

class BloomFilter:
    """Plain m-bit / k-hash bloom filter with SHA-256 double hashing."""

    def __init__(self, m: int, k: int) -> None:
        if m < 1 or k < 1:
            raise ValueError("bloom filter needs m >= 1 and k >= 1")
        self.m = m
        self.k = k
        self._bits = bytearray((m + 7) // 8)
        self.count = 0

    def _indexes(self, key: str) -> list[int]:
        digest = hashlib.sha256(key.encode("utf-8")).digest()
        h1 = int.from_bytes(digest[:8], "big")
        h2 = int.from_bytes(digest[8:16], "big") | 1
        return [(h1 + i * h2) % self.m for i in range(self.k)]

    def add(self, key: str) -> None:
        for idx in self._indexes(key):
            self._bits[idx >> 3] |= 1 << (idx & 7)
        self.count += 1

    def __contains__(self, key: str) -> bool:
        return all(self._bits[idx >> 3] & (1 << (idx & 7)) for idx in self._indexes(key))


class PrefilterOutcome(Enum):
    NO_RULE_CAN_APPLY = "no_rule_can_apply"
    MAYBE_APPLIES = "maybe_applies"


@dataclass
class PrefilterPair:
    permit_filter: BloomFilter
    prohibit_filter: BloomFilter
    params: tuple[int, int]


def bloom_params(n: int, target_fpr: float) -> tuple[int, int]:
    """Standard sizing: m = ceil(-n ln p / ln(2)^2), k = round(m/n ln 2)."""
    if not 0 < target_fpr < 1:
        raise ValueError("target_fpr must be in (0, 1)")
    n = max(1, n)
    m = math.ceil(-n * math.log(target_fpr) / (math.log(2) ** 2))
    k = max(1, round((m / n) * math.log(2)))
    return m, k


def rule_key(target_vocab: int, target_concept: str) -> str:
    return f"{target_vocab}:{target_concept}"


def build_prefilter(prefs: list[PreferenceRule], target_fpr: float) -> PrefilterPair:
    m, k = bloom_params(len(prefs), target_fpr)
    pair = PrefilterPair(BloomFilter(m, k), BloomFilter(m, k), (m, k))
    for rule in prefs:
        bucket = pair.permit_filter if rule.effect is Effect.PERMIT else pair.prohibit_filter
        bucket.add(rule_key(*rule.target))
    return pair


def prefilter_check(
    pair: PrefilterPair, request: ConsentRequest, registry: Registry
) -> PrefilterOutcome:
    """Probe every concept a rule could target for this request; all-negative
    means match_request is guaranteed to Prompt."""
    candidates = concept_candidates(registry, request.vocab, request.purpose, request.parent)
    for rid, cid in candidates:
        key = rule_key(rid, cid)
        if key in pair.permit_filter or key in pair.prohibit_filter:
            return PrefilterOutcome.MAYBE_APPLIES
    return PrefilterOutcome.NO_RULE_CAN_APPLY


# ---------------------------------------------------------------------------
# Preference files and the decision store
# ---------------------------------------------------------------------------

def load_preferences(source: dict | str | Path, registry: Registry) -> list[PreferenceRule]:
    """Parse and validate a preference file against the registry."""
    if isinstance(source, (str, Path)):
        doc = json.loads(Path(source).read_text(encoding="utf-8"))
    else:
        doc = source
    if not isinstance(doc, dict) or "rules" not in doc or not isinstance(doc["rules"], list):
        raise SchemaError("rules")
    rules: list[PreferenceRule] = []
    for raw in doc["rules"]:
        try:
            target = raw["target"]
            vocab_id, concept_id = int(target[0]), str(target[1])
            effect = Effect(str(raw["effect"]).lower())
        except (KeyError, IndexError, TypeError) as exc:
            raise SchemaError("rules", f"malformed rule entry: {raw!r}") from exc
        except ValueError as exc:
            raise SchemaError("effect", str(exc)) from exc
        vocab = registry.vocabulary(vocab_id)
        vocab.node(concept_id)
        c_raw = raw.get("constraints", {}) or {}
        constraints = Constraints(
            data=c_raw.get("data"),
            controller=int(c_raw["controller"]) if "controller" in c_raw else None,
            legal_basis=c_raw.get("legal_basis"),
        )
        if constraints.data is not None:
            node = vocab.node(constraints.data)
            if node.kind is not ConceptKind.PERSONAL_DATA:
                raise SchemaError("constraints.data", f"{constraints.data!r} is not a personal-data concept")
        if constraints.legal_basis is not None and constraints.legal_basis not in LEGAL_BASIS_TOKENS:
            raise SchemaError("constraints.legal_basis", f"unknown legal basis {constraints.legal_basis!r}")
        rules.append(
            PreferenceRule(
                target_vocab=vocab_id,
                target_concept=concept_id,
                effect=effect,
                constraints=constraints,
                created_at=float(raw.get("created_at", 0.0)),
            )
        )
    return rules


def preferences_document(rules: list[PreferenceRule]) -> dict:
    return {"rules": [r.to_json() for r in rules]}


class DecisionStore:
    """Append-only decision log; optionally backed by a JSON-lines file."""

    def __init__(self, path: str | Path | None = None) -> None:
        self.path = Path(path) if path is not None else None
        self.entries: list[dict] = []
        self._consented: set[str] = set()
        if self.path is not None and self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._ingest(json.loads(line))

    def _ingest(self, entry: dict) -> None:
        self.entries.append(entry)
        if entry.get("outcome") == Outcome.CONSENT.value:
            self._consented.add(entry["request_id"])

    def record(
        self,
        request_id: str,
        outcome: Outcome,
        rule_index: int | None = None,
        timestamp: float | None = None,
    ) -> None:
        entry: dict = {
            "request_id": request_id,
            "outcome": outcome.value,
            "timestamp": time.time() if timestamp is None else timestamp,
        }
        if rule_index is not None:
            entry["rule_index"] = rule_index
        if self.path is not None:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry) + "\n")
        self._ingest(entry)

    def has_prior_consent(self, request_id: str) -> bool:
        return request_id in self._consented
