"""Fallback HTML markup: tolerant parsing, emission, round trips."""

from __future__ import annotations

import json
import random
from collections import Counter
from pathlib import Path

import pytest

from consentkit.dialogue import (
    ControlAction,
    Severity,
    generate_choices_only,
    generate_complete,
    generate_from_template,
    lint,
)
from consentkit.errors import NoDialogError
from consentkit.markup import MarkupDialogue, emit_markup, parse_markup
from consentkit.taxonomy import ConceptKind, ConceptNode, Registry, Vocabulary
from consentkit.wire import ConsentRequest, Party

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture()
def registry() -> Registry:
    nodes = [
        ConceptNode(id="Marketing", label="Marketing", kind=ConceptKind.PURPOSE),
        ConceptNode(id="SendNewsletters", label="Send newsletters", kind=ConceptKind.PURPOSE,
                    parents=frozenset({"Marketing"})),
        ConceptNode(id="EmailAddress", label="Email address", kind=ConceptKind.PERSONAL_DATA),
        ConceptNode(id="HealthData", label="Health data", kind=ConceptKind.PERSONAL_DATA,
                    special_category=True),
    ]
    reg = Registry()
    reg.add(Vocabulary(2, "dpvish", 1, nodes))
    return reg


def request(**overrides) -> ConsentRequest:
    base = dict(
        id="q1", purpose="SendNewsletters", parent="Marketing", vocab=2,
        personal_data=("EmailAddress",), controller=Party("Example Shop", 210),
        recipients=(Party("MailerCo", 455),), legal_basis="consent",
    )
    base.update(overrides)
    return ConsentRequest(**base)


class TestParseMarkup:
    def test_minimal_dialog_attrs_on_dialog_element(self):
        page = '<dialog data-purpose="SendNewsletters" data-parent="Marketing"></dialog>'
        md = parse_markup(page)
        assert len(md.requests) == 1
        got = md.requests[0]
        assert got.purpose == "SendNewsletters"
        assert got.parent == "Marketing"
        assert got.id  # auto-assigned, warned about
        assert any("data-adpc-request-id" in w for w in md.warnings)

    def test_no_dialog_element(self):
        with pytest.raises(NoDialogError):
            parse_markup("<html><body><p>nothing here</p></body></html>")

    def test_golden_fixture(self):
        page = (FIXTURES / "markup_page.html").read_text()
        expected = json.loads((FIXTURES / "markup_page.expected.json").read_text())
        md = parse_markup(page, origin="markup_page.html")

        assert [r.id for r in md.requests] == [e["id"] for e in expected["requests"]]
        got = md.requests[0]
        want = expected["requests"][0]
        assert got.purpose == want["purpose"]
        assert got.parent == want["parent"]
        assert list(got.personal_data) == want["personal_data"]
        assert got.controller.name == want["controller"]["name"]
        assert got.controller.number == want["controller"]["number"]
        assert [p.to_json() for p in got.recipients] == want["recipients"]
        assert got.legal_basis == want["legal_basis"]

        kinds = Counter(c.kind.value for c in md.controls)
        assert kinds == Counter({k: v for k, v in expected["control_kinds"].items() if v})
        preselected = [c.bound_requests[0] for c in md.controls
                       if c.action is ControlAction.TOGGLE and c.preselected]
        assert preselected == expected["preselected_toggle_targets"]
        assert len(md.warnings) == expected["warning_count"]

        findings = lint(md)
        assert [f.rule for f in findings if f.severity is Severity.ERROR] == expected["lint_error_rules"]

    def test_lint_findings_carry_source_locations(self):
        page = (FIXTURES / "markup_page.html").read_text()
        md = parse_markup(page, origin="markup_page.html")
        findings = lint(md)
        l1 = [f for f in findings if f.rule == "L1"][0]
        assert "markup_page.html:" in l1.location

    def test_unknown_attributes_warn_not_raise(self):
        page = '<dialog data-purpose="X" data-parent="Y" data-wizard="oz"></dialog>'
        md = parse_markup(page)
        assert any("data-wizard" in w for w in md.warnings)

    def test_unknown_decision_value_warns(self):
        page = '<dialog data-purpose="X" data-parent="Y"><button data-decision="explode"></button></dialog>'
        md = parse_markup(page)
        assert md.controls == []
        assert any("explode" in w for w in md.warnings)

    def test_multiple_dialogs_aggregate(self):
        page = (
            '<dialog data-adpc-request-id="a" data-purpose="P1" data-parent="R"></dialog>'
            '<dialog data-adpc-request-id="b" data-purpose="P2" data-parent="R">'
            '<button data-decision="refuse">no</button></dialog>'
        )
        md = parse_markup(page)
        assert [r.id for r in md.requests] == ["a", "b"]
        refuse = md.controls[0]
        assert refuse.bound_requests == ("a", "b")


class TestEmitMarkup:
    def test_complete_spec_fragment_shape(self, registry):
        spec = generate_complete([request()], registry)
        fragment = emit_markup(spec)
        assert fragment.count("<dialog") == 1
        for value in ("consent", "refuse", "save", "dismiss"):
            assert f'data-decision="{value}"' in fragment

    def test_explicit_spec_has_confirm_button(self, registry):
        spec = generate_complete([request(personal_data=("HealthData",))], registry)
        fragment = emit_markup(spec)
        assert 'data-decision="confirm-explicit"' in fragment

    def test_attribute_set_is_exactly_normative(self, registry):
        import re
        spec = generate_complete([request()], registry)
        fragment = emit_markup(spec)
        attrs = set(re.findall(r"(data-[a-z-]+)=", fragment))
        assert attrs <= {
            "data-adpc-request-id", "data-purpose", "data-parent", "data-personal-data",
            "data-controller", "data-legal-basis", "data-recipient",
            "data-decision", "data-toggle-for",
        }


class TestRoundTrip:
    def assert_roundtrip(self, spec):
        md = parse_markup(emit_markup(spec), origin="emit")
        assert [r.id for r in md.requests] == [r.id for r in spec.requests]
        assert [(r.purpose, r.parent) for r in md.requests] == [
            (r.purpose, r.parent) for r in spec.requests
        ]
        spec_kinds = Counter(c.kind for _, c in spec.controls())
        got_kinds = Counter(c.kind for c in md.controls)
        assert got_kinds == spec_kinds
        spec_presel = sorted(
            c.bound_requests[0] for _, c in spec.controls()
            if c.action is ControlAction.TOGGLE and c.preselected
        )
        got_presel = sorted(
            c.bound_requests[0] for c in md.controls
            if c.action is ControlAction.TOGGLE and c.preselected
        )
        assert got_presel == spec_presel

    def test_complete_mode(self, registry):
        self.assert_roundtrip(generate_complete([request(), request(id="q2")], registry))

    def test_explicit_mode(self, registry):
        self.assert_roundtrip(generate_complete([request(personal_data=("HealthData",))], registry))

    def test_template_mode_with_layers(self, registry):
        template = {
            "layers": [
                {"elements": [{"field": "purpose", "text": "hi", "request": "q1"}],
                 "decision_marker": True},
                {"elements": [{"field": "recipients", "text": "MailerCo (#455)"}]},
            ]
        }
        self.assert_roundtrip(generate_from_template(template, [request()], registry))

    def test_choices_mode(self, registry):
        self.assert_roundtrip(generate_choices_only("div-9", [request()], registry))

    def test_parity_of_lint_findings(self, registry):
        spec = generate_complete([request(), request(id="q2")], registry)
        direct = [(f.rule, f.severity) for f in lint(spec, registry)]
        via_markup = [(f.rule, f.severity) for f in lint(parse_markup(emit_markup(spec)), registry)]
        assert direct == via_markup == []


def random_soup(rng: random.Random) -> str:
    atoms = [
        "<dialog>", "</dialog>", "<div", ">", '"', "'", "=", "<button data-decision=",
        "consent", "refuse", "<input data-toggle-for=q1 checked", "<p data-purpose",
        "data-adpc-request-id='", "&amp;", "&bogus;", "<!--", "-->", "<![CDATA[", "]]>",
        "<<<", "\x00", "text ", "<script>", "</p>", "<dialog data-purpose='X'",
        "data-recipient=';;'", "<br/>", "</", "<?php ?>", "\n",
    ]
    return "".join(rng.choice(atoms) for _ in range(rng.randint(1, 60)))


class TestFuzz:
    def test_parser_survives_soup(self):
        rng = random.Random(123)
        for _ in range(150):
            doc = random_soup(rng)
            try:
                md = parse_markup(doc)
            except NoDialogError:
                continue
            assert isinstance(md, MarkupDialogue)

    def test_parser_survives_mutated_emissions(self, registry):
        rng = random.Random(321)
        base = emit_markup(generate_complete([request(), request(id="q2")], registry))
        for _ in range(100):
            chars = list(base)
            for _ in range(rng.randint(1, 12)):
                op = rng.randrange(3)
                pos = rng.randrange(len(chars))
                if op == 0:
                    chars[pos] = rng.choice('<>"=&; ')
                elif op == 1:
                    del chars[pos]
                else:
                    chars.insert(pos, rng.choice("<>\"'=&;x "))
            doc = "".join(chars)
            try:
                parse_markup(doc)
            except NoDialogError:
                continue
