"""Vocabulary loading, flat ordering, codebooks, and registry mappings."""

from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from consentkit.errors import (
    CycleError,
    DanglingParentError,
    DuplicateIdError,
    EmptyVocabularyError,
    SchemaError,
    TruncatedError,
    UnknownConceptError,
    UnknownVocabularyError,
)
from consentkit.taxonomy import (
    ConceptKind,
    ConceptMapping,
    ConceptNode,
    MappingRelation,
    Registry,
    Vocabulary,
    build_codebook,
    flatten,
    load_registry,
    load_vocabulary,
)


def make_vocab(edges: dict[str, list[str]], registry_id: int = 1, codec: str = "sf",
               weights: dict[str, float] | None = None) -> Vocabulary:
    nodes = [
        ConceptNode(id=cid, label=cid, kind=ConceptKind.PURPOSE, parents=frozenset(parents))
        for cid, parents in edges.items()
    ]
    return Vocabulary(registry_id, "test", 1, nodes, codec=codec, default_weights=weights)


def random_dag(rng: random.Random, n: int) -> dict[str, list[str]]:
    ids = [f"c{i:03d}" for i in range(n)]
    edges: dict[str, list[str]] = {}
    for i, cid in enumerate(ids):
        k = rng.randint(0, min(2, i))
        edges[cid] = rng.sample(ids[:i], k) if k else []
    return edges


# -- reference oracle: textbook recursive split, string based ---------------

def fano_lengths(items: list[tuple[str, float]]) -> dict[str, int]:
    """Independent recursive-split reference: returns code length per id."""
    if len(items) == 1:
        return {items[0][0]: 1}
    lengths: dict[str, int] = {}

    def rec(group: list[tuple[str, float]], depth: int) -> None:
        if len(group) == 1:
            lengths[group[0][0]] = depth
            return
        total = sum(w for _, w in group)
        best = None
        for k in range(1, len(group)):
            left = sum(w for _, w in group[:k])
            diff = abs(left - (total - left))
            if best is None or diff < best[0]:
                best = (diff, k)
        rec(group[: best[1]], depth + 1)
        rec(group[best[1]:], depth + 1)

    rec(items, 0)
    return lengths


def assert_prefix_free(codes: list[str]) -> None:
    for i, a in enumerate(codes):
        for j, b in enumerate(codes):
            if i != j:
                assert not b.startswith(a), f"{a!r} is a prefix of {b!r}"


class TestLoadVocabulary:
    def test_newsletter_edge(self, tmp_path):
        doc = {
            "registry_id": 2,
            "name": "mini",
            "version": 1,
            "codec": "sf",
            "concepts": [
                {"id": "Marketing", "label": "Marketing", "kind": "purpose", "parents": []},
                {"id": "SendNewsletters", "label": "Send newsletters", "kind": "purpose",
                 "parents": ["Marketing"]},
            ],
        }
        path = tmp_path / "v.json"
        path.write_text(json.dumps(doc))
        vocab = load_vocabulary(path)
        assert len(vocab) == 2
        assert vocab.node("SendNewsletters").parents == frozenset({"Marketing"})

    def test_empty_concepts_is_valid(self):
        vocab = load_vocabulary({"registry_id": 0, "name": "empty", "version": 1, "concepts": []})
        assert len(vocab) == 0
        assert vocab.codebook is None

    def test_two_cycle(self):
        doc = {
            "registry_id": 1, "name": "bad", "version": 1,
            "concepts": [
                {"id": "A", "parents": ["B"]},
                {"id": "B", "parents": ["A"]},
            ],
        }
        with pytest.raises(CycleError) as exc:
            load_vocabulary(doc)
        assert exc.value.concept_id in {"A", "B"}

    def test_dangling_parent(self):
        doc = {"registry_id": 1, "name": "bad", "version": 1,
               "concepts": [{"id": "A", "parents": ["Ghost"]}]}
        with pytest.raises(DanglingParentError):
            load_vocabulary(doc)

    def test_duplicate_id(self):
        doc = {"registry_id": 1, "name": "bad", "version": 1,
               "concepts": [{"id": "A"}, {"id": "A"}]}
        with pytest.raises(DuplicateIdError):
            load_vocabulary(doc)

    def test_bad_registry_id(self):
        with pytest.raises(SchemaError):
            load_vocabulary({"registry_id": 128, "name": "x", "version": 1, "concepts": []})

    def test_bad_kind(self):
        doc = {"registry_id": 1, "name": "bad", "version": 1,
               "concepts": [{"id": "A", "kind": "nonsense"}]}
        with pytest.raises(SchemaError):
            load_vocabulary(doc)


class TestFlatten:
    def test_single_edge_forces_order(self):
        vocab = make_vocab({"Marketing": [], "SendNewsletters": ["Marketing"]})
        assert flatten(vocab) == ["Marketing", "SendNewsletters"]

    def test_roots_lexicographic(self):
        vocab = make_vocab({"B": [], "A": []})
        assert flatten(vocab) == ["A", "B"]

    def test_random_dag_every_edge_points_forward(self):
        rng = random.Random(1205)
        edges = random_dag(rng, 50)
        vocab = make_vocab(edges)
        order = flatten(vocab)
        index = {cid: i for i, cid in enumerate(order)}
        assert sorted(order) == sorted(edges)
        for cid, parents in edges.items():
            for parent in parents:
                assert index[parent] < index[cid]

    def test_deterministic(self):
        rng = random.Random(7)
        edges = random_dag(rng, 30)
        assert flatten(make_vocab(edges)) == flatten(make_vocab(edges))


class TestCodebook:
    def test_descending_weights_monotone_lengths(self):
        weights = {"A": 0.4, "B": 0.3, "C": 0.2, "D": 0.1}
        vocab = make_vocab({k: [] for k in weights})
        book = build_codebook(vocab, weights)
        lens = {cid: len(code) for cid, code in book.entries.items()}
        assert lens["A"] <= lens["B"] <= lens["C"] <= lens["D"]
        assert_prefix_free(list(book.entries.values()))
        # length multiset agrees with the independent recursive-split reference
        ref = fano_lengths(sorted(weights.items(), key=lambda kv: -kv[1]))
        assert sorted(lens.values()) == sorted(ref.values())

    def test_single_concept_gets_one_bit(self):
        vocab = make_vocab({"A": []})
        book = build_codebook(vocab, {"A": 1})
        assert book.entries == {"A": "0"}

    def test_two_equal_weights_flatten_order(self):
        vocab = make_vocab({"A": [], "B": []})
        book = build_codebook(vocab, {"A": 1, "B": 1})
        assert book.entries == {"A": "0", "B": "1"}

    def test_empty_vocabulary_rejected(self):
        vocab = make_vocab({})
        with pytest.raises(EmptyVocabularyError):
            build_codebook(vocab)

    def test_nonpositive_weight_rejected(self):
        vocab = make_vocab({"A": [], "B": []})
        with pytest.raises(ValueError):
            build_codebook(vocab, {"A": 0, "B": 1})

    def test_enum_codec_fixed_width(self):
        vocab = make_vocab({"A": [], "B": [], "C": []}, codec="enum")
        book = vocab.codebook
        assert book.entries == {"A": "00", "B": "01", "C": "10"}

    def test_pure_function(self):
        rng = random.Random(99)
        edges = random_dag(rng, 40)
        weights = {cid: rng.randint(1, 20) for cid in edges}
        a = build_codebook(make_vocab(edges), weights)
        b = build_codebook(make_vocab(edges), weights)
        assert a.entries == b.entries

    def test_decode_roundtrip_every_concept(self):
        rng = random.Random(3)
        edges = random_dag(rng, 25)
        vocab = make_vocab(edges, weights={cid: rng.randint(1, 9) for cid in edges})
        book = vocab.codebook
        for cid in vocab.flat:
            assert book.decode_sequence(book.encode(cid)) == [cid]
        seq = rng.sample(vocab.flat, 10)
        assert book.decode_sequence(book.encode_sequence(seq)) == seq

    def test_partial_code_rejected(self):
        vocab = make_vocab({"A": [], "B": [], "C": []})
        book = vocab.codebook
        longest = max(book.entries.values(), key=len)
        with pytest.raises(TruncatedError):
            book.decode_sequence(longest[:-1])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=1, max_value=60), st.integers())
    def test_prefix_free_and_monotone_random(self, n, seed):
        rng = random.Random(seed)
        edges = random_dag(rng, n)
        weights = {cid: rng.choice([1, 1, 2, 5, 10, 40]) for cid in edges}
        vocab = make_vocab(edges, weights=weights)
        book = vocab.codebook
        assert_prefix_free(list(book.entries.values()))
        by_weight = sorted(edges, key=lambda cid: (-weights[cid], vocab.flat_index(cid)))
        lens = [len(book.entries[cid]) for cid in by_weight]
        assert lens == sorted(lens)


class TestRegistry:
    def build(self) -> Registry:
        reg = Registry()
        reg.add(make_vocab({"Marketing": [], "Advertising": ["Marketing"]}, registry_id=2))
        reg.add(make_vocab({"p1": [], "p2": [], "p3": []}, registry_id=110, codec="enum"))
        reg.add_mapping(ConceptMapping(110, "p2", 2, "Marketing", MappingRelation.EQUIVALENT))
        reg.add_mapping(ConceptMapping(110, "p2", 2, "Advertising", MappingRelation.BROADER))
        return reg

    def test_translate_direct(self):
        reg = self.build()
        got = reg.translate((110, "p2"), 2)
        assert got == [("Advertising", MappingRelation.BROADER),
                       ("Marketing", MappingRelation.EQUIVALENT)]

    def test_equivalent_symmetric(self):
        reg = self.build()
        assert ("p2", MappingRelation.EQUIVALENT) in reg.translate((2, "Marketing"), 110)

    def test_broader_not_inverted(self):
        reg = self.build()
        assert reg.translate((2, "Advertising"), 110) == []

    def test_unmapped_concept_empty(self):
        reg = self.build()
        assert reg.translate((110, "p1"), 2) == []

    def test_unknown_vocab(self):
        reg = self.build()
        with pytest.raises(UnknownVocabularyError):
            reg.translate((110, "p1"), 99)

    def test_unknown_concept(self):
        reg = self.build()
        with pytest.raises(UnknownConceptError):
            reg.translate((110, "ghost"), 2)

    def test_same_vocab_mapping_rejected(self):
        reg = self.build()
        with pytest.raises(SchemaError):
            reg.add_mapping(ConceptMapping(2, "Marketing", 2, "Advertising", MappingRelation.BROADER))

    def test_duplicate_registry_id_rejected(self):
        reg = self.build()
        with pytest.raises(SchemaError):
            reg.add(make_vocab({"x": []}, registry_id=2))

    def test_load_registry_file(self, tmp_path):
        vocab_doc = {"registry_id": 5, "name": "aux", "version": 1,
                     "concepts": [{"id": "A"}]}
        (tmp_path / "aux.json").write_text(json.dumps(vocab_doc))
        reg_doc = {
            "vocabularies": [
                "aux.json",
                {"registry_id": 6, "name": "inline", "version": 1, "concepts": [{"id": "B"}]},
            ],
            "mappings": [{"from": [5, "A"], "to": [6, "B"], "relation": "equivalent"}],
        }
        path = tmp_path / "registry.json"
        path.write_text(json.dumps(reg_doc))
        reg = load_registry(path)
        assert set(reg.vocabularies) == {5, 6}
        assert reg.translate((5, "A"), 6) == [("B", MappingRelation.EQUIVALENT)]
