"""Bit-string policy codec and compact header words.

A policy names a vocabulary and packs purposes, data categories,
controllers and legal bases into one canonical byte sequence. The layout
is normative and bit-exact (golden vectors live in the test fixtures):

    version:6 | vocab:8 | p_len:12 | purposes | d_len:12 | data
    | controller_count:12 | controllers (12 bits each, strictly ascending)
    | legal_basis (2 bits per set purpose) | zero padding to byte

Legal-basis codes: 00 consent, 01 legitimate interest, 10 contract,
11 other. Compact words drop the version and field-length plumbing for
HTTP-header transmission; the payload ends with a reserved 1 bit so the
zero padding is unambiguous.
"""

from __future__ import annotations

import base64
import binascii
import re
from dataclasses import dataclass

from .bits import BitReader, BitWriter, bits_of_bytes
from .errors import (
    AlphabetError,
    EmptyMaskError,
    NonCanonicalError,
    SchemaError,
    TruncatedError,
    UnknownVocabularyError,
    WidthMismatchError,
)
from .taxonomy import LEGAL_BASIS_TOKENS, Registry

VERSION_BITS = 6
VOCAB_BITS = 8
LEN_BITS = 12
CONTROLLER_BITS = 12
BASIS_BITS = 2

MAX_CONTROLLER = (1 << CONTROLLER_BITS) - 1

FIELD_ORDER = ("purposes", "data", "controllers", "legal_basis")

_BASIS_CODE = {token: i for i, token in enumerate(LEGAL_BASIS_TOKENS)}
_BASIS_TOKEN = {i: token for token, i in _BASIS_CODE.items()}

_BITFIELD_RE = re.compile(r"^[01]*$")


@dataclass(frozen=True)
class PolicyBitString:
    """A canonical-form policy over one vocabulary's concept space.

    ``purposes`` and ``data_categories`` are bitfields over the
    vocabulary's flat order ('1' at index i = concept i requested);
    ``legal_basis`` carries one token per set purpose bit, in index order.
    """

    version: int
    vocab: int
    purposes: str = ""
    data_categories: str = ""
    controllers: tuple[int, ...] = ()
    legal_basis: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0 <= self.version < (1 << VERSION_BITS):
            raise SchemaError("version", f"version {self.version} outside 0..63")
        if not 0 <= self.vocab <= 0xFF:
            raise SchemaError("vocab", f"vocab id {self.vocab} outside 0..255")
        for name, bitfield in (("purposes", self.purposes), ("data_categories", self.data_categories)):
            if not _BITFIELD_RE.match(bitfield):
                raise SchemaError(name, "bitfields are strings of 0/1")
            if len(bitfield) >= (1 << LEN_BITS):
                raise SchemaError(name, f"bitfield wider than {LEN_BITS}-bit length prefix allows")
        if list(self.controllers) != sorted(set(self.controllers)):
            raise NonCanonicalError("controllers must be strictly ascending")
        for c in self.controllers:
            if not 0 <= c <= MAX_CONTROLLER:
                raise SchemaError("controllers", f"controller number {c} outside 0..{MAX_CONTROLLER}")
        if len(self.legal_basis) != self.purposes.count("1"):
            raise SchemaError(
                "legal_basis",
                f"{len(self.legal_basis)} legal-basis entries for {self.purposes.count('1')} set purposes",
            )
        for token in self.legal_basis:
            if token not in _BASIS_CODE:
                raise SchemaError("legal_basis", f"unknown legal basis {token!r}")

    def set_purposes(self) -> list[int]:
        return [i for i, bit in enumerate(self.purposes) if bit == "1"]

    def to_json(self) -> dict:
        return {
            "version": self.version,
            "vocab": self.vocab,
            "purposes": self.purposes,
            "data_categories": self.data_categories,
            "controllers": list(self.controllers),
            "legal_basis": list(self.legal_basis),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PolicyBitString":
        try:
            return cls(
                version=int(doc.get("version", 1)),
                vocab=int(doc["vocab"]),
                purposes=str(doc.get("purposes", "")),
                data_categories=str(doc.get("data_categories", "")),
                controllers=tuple(int(c) for c in doc.get("controllers", [])),
                legal_basis=tuple(str(t) for t in doc.get("legal_basis", [])),
            )
        except KeyError as exc:
            raise SchemaError(str(exc.args[0])) from exc


@dataclass(frozen=True)
class CompositePurposeId:
    """A purpose/data/controller triple addressed as one identifier."""

    purpose: str
    data: str
    controller: int

    def __post_init__(self):
        if not self.purpose or not self.data:
            raise SchemaError("purpose", "composite ids need non-empty purpose and data tokens")
        if not 0 <= self.controller <= MAX_CONTROLLER:
            raise SchemaError("controller", f"controller number {self.controller} outside 0..{MAX_CONTROLLER}")

    def label(self) -> str:
        """Concatenated display form, controller in uppercase hex."""
        return f"{self.purpose}{self.data}{self.controller:X}"


@dataclass(frozen=True)
class CompactWord:
    """An 8-bit vocabulary id plus a payload bit sequence.

    Serialized as the vocab byte, the payload bits, a single 1 bit, then
    zero padding to the byte boundary; deserialization strips the padding
    back off by scanning for the terminator.
    """

    vocab: int
    payload: str = ""

    def __post_init__(self):
        if not 0 <= self.vocab <= 0xFF:
            raise SchemaError("vocab", f"vocab id {self.vocab} outside 0..255")
        if not _BITFIELD_RE.match(self.payload):
            raise SchemaError("payload", "payload is a string of 0/1")

    def to_bytes(self) -> bytes:
        w = BitWriter()
        w.write_uint(self.vocab, VOCAB_BITS)
        w.write_bits(self.payload)
        w.write_bit(1)
        return w.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "CompactWord":
        if len(data) < 2:
            raise TruncatedError("compact word needs a vocab byte and a terminated payload")
        bits = bits_of_bytes(data[1:])
        end = bits.rfind("1")
        if end < 0:
            raise NonCanonicalError("compact word payload lacks its 1 terminator")
        return cls(vocab=data[0], payload=bits[:end])


# ---------------------------------------------------------------------------
# Policy encode / decode
# ---------------------------------------------------------------------------

def encode_policy(policy: PolicyBitString, registry: Registry | None = None) -> bytes:
    """Pack the policy into its canonical byte sequence.

    With a registry, non-empty bitfields must match the named vocabulary's
    concept count (WidthMismatchError); zero-width bitfields are always
    legal as the canonical empty form.
    """
    if registry is not None:
        vocab = registry.vocabulary(policy.vocab)
        for name, bitfield in (("purposes", policy.purposes), ("data_categories", policy.data_categories)):
            if bitfield and len(bitfield) != len(vocab):
                raise WidthMismatchError(
                    f"{name} bitfield is {len(bitfield)} bits, vocabulary {policy.vocab} has {len(vocab)} concepts"
                )
    w = BitWriter()
    w.write_uint(policy.version, VERSION_BITS)
    w.write_uint(policy.vocab, VOCAB_BITS)
    w.write_uint(len(policy.purposes), LEN_BITS)
    w.write_bits(policy.purposes)
    w.write_uint(len(policy.data_categories), LEN_BITS)
    w.write_bits(policy.data_categories)
    w.write_uint(len(policy.controllers), LEN_BITS)
    for c in policy.controllers:
        w.write_uint(c, CONTROLLER_BITS)
    for token in policy.legal_basis:
        w.write_uint(_BASIS_CODE[token], BASIS_BITS)
    return w.to_bytes()


def decode_policy(data: bytes, registry: Registry) -> PolicyBitString:
    """Inverse of encode_policy; rejects unknown vocabularies and any
    deviation from canonical form."""
    r = BitReader(data)
    version = r.read_uint(VERSION_BITS)
    vocab = r.read_uint(VOCAB_BITS)
    registry.vocabulary(vocab)  # fail loudly, never misread the payload
    purposes = r.read_bits(r.read_uint(LEN_BITS))
    data_categories = r.read_bits(r.read_uint(LEN_BITS))
    count = r.read_uint(LEN_BITS)
    controllers = tuple(r.read_uint(CONTROLLER_BITS) for _ in range(count))
    basis = tuple(_BASIS_TOKEN[r.read_uint(BASIS_BITS)] for _ in range(purposes.count("1")))
    _check_padding(r)
    if list(controllers) != sorted(set(controllers)):
        raise NonCanonicalError("controller list is not strictly ascending")
    return PolicyBitString(
        version=version,
        vocab=vocab,
        purposes=purposes,
        data_categories=data_categories,
        controllers=controllers,
        legal_basis=basis,
    )


def _check_padding(r: BitReader) -> None:
    if r.bits_remaining >= 8:
        raise NonCanonicalError(f"{r.bits_remaining} trailing bits beyond the declared fields")
    while r.bits_remaining:
        if r.read_bit():
            raise NonCanonicalError("padding bits must be zero")


# ---------------------------------------------------------------------------
# Header-oriented compact form
# ---------------------------------------------------------------------------

def strip_for_header(policy: PolicyBitString, keep: set[str]) -> CompactWord:
    """Drop everything but the kept fields and repack as a CompactWord.

    ``keep`` must include "purposes"; valid names are purposes, data,
    controllers, legal_basis. The version and the bitfield length prefixes
    are dropped entirely: the receiver recovers widths from the vocabulary
    named in the word.
    """
    unknown = keep - set(FIELD_ORDER)
    if unknown:
        raise SchemaError("keep", f"unknown field names {sorted(unknown)}")
    if "purposes" not in keep:
        raise EmptyMaskError("the purposes field must always be kept")
    w = BitWriter()
    w.write_bits(policy.purposes)
    if "data" in keep:
        w.write_bits(policy.data_categories)
    if "controllers" in keep:
        w.write_uint(len(policy.controllers), LEN_BITS)
        for c in policy.controllers:
            w.write_uint(c, CONTROLLER_BITS)
    if "legal_basis" in keep:
        for token in policy.legal_basis:
            w.write_uint(_BASIS_CODE[token], BASIS_BITS)
    bits = bits_of_bytes(w.to_bytes())[: w.bit_length]
    return CompactWord(vocab=policy.vocab, payload=bits)


def decode_stripped(word: CompactWord, keep: set[str], registry: Registry) -> PolicyBitString:
    """Recover a policy (version 0) from a stripped word, resolving
    bitfield widths from the registry vocabulary the word names."""
    if "purposes" not in keep:
        raise EmptyMaskError("the purposes field must always be kept")
    vocab = registry.vocabulary(word.vocab)
    width = len(vocab)
    r = BitReader(_bits_to_bytes(word.payload))
    available = len(word.payload)

    def take(n: int) -> str:
        nonlocal available
        if n > available:
            raise TruncatedError(f"stripped payload ends {n - available} bits early")
        available -= n
        return r.read_bits(n)

    purposes = take(width)
    data_categories = take(width) if "data" in keep else ""
    controllers: tuple[int, ...] = ()
    if "controllers" in keep:
        count = int(take(LEN_BITS), 2)
        controllers = tuple(int(take(CONTROLLER_BITS), 2) for _ in range(count))
    basis: tuple[str, ...] = ()
    if "legal_basis" in keep:
        basis = tuple(_BASIS_TOKEN[int(take(BASIS_BITS), 2)] for _ in range(purposes.count("1")))
    else:
        basis = tuple("consent" for _ in range(purposes.count("1")))
    if available:
        raise NonCanonicalError(f"{available} unconsumed payload bits")
    return PolicyBitString(
        version=0,
        vocab=word.vocab,
        purposes=purposes,
        data_categories=data_categories,
        controllers=controllers,
        legal_basis=basis,
    )


def _bits_to_bytes(bits: str) -> bytes:
    w = BitWriter()
    w.write_bits(bits)
    return w.to_bytes()


def encode_concept_word(vocab_id: int, concept_ids: list[str], registry: Registry) -> CompactWord:
    """A compact word whose payload is a run of concept codes under the
    vocabulary's own codec."""
    vocab = registry.vocabulary(vocab_id)
    if vocab.codebook is None:
        raise UnknownVocabularyError(vocab_id)
    return CompactWord(vocab=vocab_id, payload=vocab.codebook.encode_sequence(concept_ids))


def decode_concept_word(word: CompactWord, registry: Registry) -> list[str]:
    vocab = registry.vocabulary(word.vocab)
    if vocab.codebook is None:
        raise UnknownVocabularyError(word.vocab)
    return vocab.codebook.decode_sequence(word.payload)


# ---------------------------------------------------------------------------
# base64url, unpadded
# ---------------------------------------------------------------------------

_B64_RE = re.compile(r"^[A-Za-z0-9_-]*$")


def encode_base64url(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).decode("ascii").rstrip("=")


def decode_base64url(text: str) -> bytes:
    if not _B64_RE.match(text):
        bad = next(ch for ch in text if not _B64_RE.match(ch))
        raise AlphabetError(f"character {bad!r} outside the URL-safe alphabet")
    if len(text) % 4 == 1:
        raise AlphabetError("base64url text length cannot be 1 mod 4")
    padded = text + "=" * (-len(text) % 4)
    try:
        return base64.urlsafe_b64decode(padded.encode("ascii"))
    except (binascii.Error, ValueError) as exc:
        raise AlphabetError(str(exc)) from exc
