"""Seeded random corpus generation for verification runs.

Used by the test suite and by `consentkit match --oracle-check` to produce
reproducible vocabularies, policies, preference sets, and request batches.
Everything takes an explicit random.Random so corpora are replayable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .matching import Constraints, DecisionStore, Effect, Outcome, PreferenceRule
from .policy import MAX_CONTROLLER, PolicyBitString
from .wire import ConsentRequest, Party
from .taxonomy import (
    LEGAL_BASIS_TOKENS,
    ConceptKind,
    ConceptMapping,
    ConceptNode,
    MappingRelation,
    Registry,
    Vocabulary,
)


def random_vocabulary(
    rng: random.Random,
    registry_id: int,
    n_concepts: int,
    codec: str = "sf",
    max_parents: int = 2,
    data_share: float = 0.25,
) -> Vocabulary:
    """A random DAG vocabulary: mostly purposes, some personal-data nodes.

    Parents are drawn only from earlier nodes of the same kind, so the
    result is a DAG by construction and hierarchies stay kind-pure.
    """
    nodes: list[ConceptNode] = []
    by_kind: dict[ConceptKind, list[str]] = {}
    for i in range(n_concepts):
        kind = ConceptKind.PERSONAL_DATA if rng.random() < data_share else ConceptKind.PURPOSE
        cid = f"{'d' if kind is ConceptKind.PERSONAL_DATA else 'p'}{i:03d}"
        pool = by_kind.setdefault(kind, [])
        k = rng.randint(0, min(max_parents, len(pool)))
        parents = rng.sample(pool, k) if k else []
        nodes.append(
            ConceptNode(
                id=cid,
                label=f"concept {i}",
                kind=kind,
                parents=frozenset(parents),
                special_category=(kind is ConceptKind.PERSONAL_DATA and rng.random() < 0.1),
            )
        )
        pool.append(cid)
    weights = {n.id: rng.choice([1, 1, 1, 2, 3, 5, 8, 20]) for n in nodes}
    return Vocabulary(registry_id, f"random-{registry_id}", 1, nodes, codec=codec, default_weights=weights)


def random_registry(
    rng: random.Random,
    main_size: int,
    aux_size: int = 0,
    n_mappings: int = 0,
) -> Registry:
    """A registry with a main vocabulary and optionally a mapped auxiliary one."""
    registry = Registry()
    main = random_vocabulary(rng, rng.randint(0, 60), main_size)
    registry.add(main)
    if aux_size:
        aux_id = main.registry_id + 1 + rng.randint(0, 60)
        aux = random_vocabulary(rng, aux_id, aux_size, codec=rng.choice(["enum", "sf"]))
        registry.add(aux)
        purposes_main = [c for c in main.flat if main.node(c).kind is ConceptKind.PURPOSE]
        purposes_aux = [c for c in aux.flat if aux.node(c).kind is ConceptKind.PURPOSE]
        seen: set[tuple] = set()
        for _ in range(n_mappings):
            if not purposes_main or not purposes_aux:
                break
            a = rng.choice(purposes_main)
            b = rng.choice(purposes_aux)
            relation = rng.choice([MappingRelation.EQUIVALENT, MappingRelation.BROADER,
                                   MappingRelation.NARROWER])
            if rng.random() < 0.5:
                key = (main.registry_id, a, aux.registry_id, b, relation)
                if key not in seen:
                    seen.add(key)
                    registry.add_mapping(ConceptMapping(main.registry_id, a, aux.registry_id, b, relation))
            else:
                key = (aux.registry_id, b, main.registry_id, a, relation)
                if key not in seen:
                    seen.add(key)
                    registry.add_mapping(ConceptMapping(aux.registry_id, b, main.registry_id, a, relation))
    return registry


@dataclass
class MatchCase:
    """One reproducible matching scenario: registry, rules, requests, store."""

    registry: Registry
    main_vocab: int
    rules: list[PreferenceRule]
    requests: list[ConsentRequest]
    store: DecisionStore = field(default_factory=DecisionStore)


def _concepts_of(vocab: Vocabulary, kind: ConceptKind) -> list[str]:
    return [cid for cid in vocab.flat if vocab.node(cid).kind is kind]


def random_rules(rng: random.Random, registry: Registry, n: int) -> list[PreferenceRule]:
    vocab_ids = sorted(registry.vocabularies)
    rules: list[PreferenceRule] = []
    for _ in range(n):
        vocab_id = vocab_ids[0] if len(vocab_ids) == 1 or rng.random() < 0.7 else rng.choice(vocab_ids[1:])
        vocab = registry.vocabulary(vocab_id)
        if not vocab.flat:
            continue
        purposes = _concepts_of(vocab, ConceptKind.PURPOSE)
        target = rng.choice(purposes or vocab.flat)
        constraints = Constraints()
        if rng.random() < 0.25:
            data_pool = _concepts_of(vocab, ConceptKind.PERSONAL_DATA)
            constraints = Constraints(
                data=rng.choice(data_pool) if data_pool and rng.random() < 0.5 else None,
                controller=rng.randint(0, 5) if rng.random() < 0.5 else None,
                legal_basis=rng.choice(LEGAL_BASIS_TOKENS) if rng.random() < 0.4 else None,
            )
        rules.append(
            PreferenceRule(
                target_vocab=vocab_id,
                target_concept=target,
                effect=rng.choice([Effect.PERMIT, Effect.PROHIBIT]),
                constraints=constraints,
            )
        )
    return rules


def random_requests(rng: random.Random, registry: Registry, main_vocab: int, n: int) -> list[ConsentRequest]:
    vocab = registry.vocabulary(main_vocab)
    purposes = _concepts_of(vocab, ConceptKind.PURPOSE) or vocab.flat
    data_pool = _concepts_of(vocab, ConceptKind.PERSONAL_DATA)
    requests: list[ConsentRequest] = []
    for i in range(n):
        if purposes and rng.random() < 0.85:
            purpose = rng.choice(purposes)
            parent = None
        else:
            purpose = f"Custom{i}"
            parent = rng.choice(purposes) if purposes else None
        pd = tuple(rng.sample(data_pool, min(len(data_pool), rng.randint(0, 2)))) if data_pool else ()
        requests.append(
            ConsentRequest(
                id=f"q{i}",
                purpose=purpose,
                parent=parent,
                vocab=main_vocab,
                personal_data=pd,
                controller=Party(name=f"ctl{i % 3}", number=rng.randint(0, 5)),
                legal_basis=rng.choice(LEGAL_BASIS_TOKENS),
            )
        )
    return requests


def random_match_case(
    rng: random.Random,
    max_nodes: int = 200,
    max_rules: int = 50,
    max_requests: int = 20,
) -> MatchCase:
    cross = rng.random() < 0.4
    registry = random_registry(
        rng,
        main_size=rng.randint(1, max_nodes),
        aux_size=rng.randint(2, 40) if cross else 0,
        n_mappings=rng.randint(1, 8) if cross else 0,
    )
    main_vocab = sorted(registry.vocabularies)[0]
    rules = random_rules(rng, registry, rng.randint(0, max_rules))
    requests = random_requests(rng, registry, main_vocab, rng.randint(1, max_requests))
    store = DecisionStore()
    for request in requests:
        if rng.random() < 0.2:
            store.record(request.id, Outcome.CONSENT, timestamp=0.0)
    return MatchCase(registry=registry, main_vocab=main_vocab, rules=rules, requests=requests, store=store)


def random_policy(rng: random.Random, vocab_id: int | None = None, max_width: int = 48) -> PolicyBitString:
    """A random canonical policy; widths are arbitrary unless pinned."""
    width = rng.randint(0, max_width)
    purposes = "".join(rng.choice("01") for _ in range(width))
    data = "".join(rng.choice("01") for _ in range(width))
    n_controllers = rng.randint(0, 6)
    controllers = tuple(sorted(rng.sample(range(MAX_CONTROLLER + 1), n_controllers)))
    basis = tuple(rng.choice(LEGAL_BASIS_TOKENS) for _ in range(purposes.count("1")))
    return PolicyBitString(
        version=rng.randint(0, 63),
        vocab=vocab_id if vocab_id is not None else rng.randint(0, 127),
        purposes=purposes,
        data_categories=data,
        controllers=controllers,
        legal_basis=basis,
    )
