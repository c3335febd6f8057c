"""User-side consent dialogue generation, lint, and decision application.

Three generation modes mirror how much interface control the website
keeps: none (complete generation), layout only (template), or everything
except the decision controls (choices-only). Every generated dialogue is
held to the same rule catalog the linter publishes (L1..L7), and special
category data forces the explicit-consent flow: no accept takes effect
until the confirmation control has been activated.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    EmptyRequestSetError,
    MissingNoticeRefError,
    SchemaError,
    TemplateSchemaError,
    UnknownControlError,
    UnknownRequestRefError,
)
from .taxonomy import Registry
from .wire import ConsentRequest, DecisionSignal, derive_special_category


class NoticeField(Enum):
    PURPOSE = "purpose"
    PROCESSING = "processing"
    PERSONAL_DATA = "personal_data"
    CONTROLLER = "controller"
    RECIPIENTS = "recipients"
    LEGAL_BASIS = "legal_basis"
    MEASURES = "measures"


NOTICE_FIELD_ORDER = (
    NoticeField.PURPOSE,
    NoticeField.PROCESSING,
    NoticeField.PERSONAL_DATA,
    NoticeField.CONTROLLER,
    NoticeField.RECIPIENTS,
    NoticeField.LEGAL_BASIS,
    NoticeField.MEASURES,
)


class ControlKind(Enum):
    LAYER = "layer"
    PREFERENCE = "preference"
    DECISION = "decision"


class ControlAction(Enum):
    MORE_INFO = "more_info"
    TOGGLE = "toggle"
    ACCEPT_ALL = "accept_all"
    REFUSE_ALL = "refuse_all"
    SAVE_SELECTIONS = "save_selections"
    CONFIRM_EXPLICIT = "confirm_explicit"
    DISMISS = "dismiss"


class Quality(Enum):
    REGULAR = "regular"
    EXPLICIT = "explicit"


class SourceMode(Enum):
    COMPLETE = "complete"
    TEMPLATE = "template"
    CHOICES_ONLY = "choices_only"


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


# Style properties the controller may override: cosmetics only, nothing
# that can move, hide, or reorder the decision surface.
STYLE_ALLOWLIST = frozenset({
    "color", "background-color", "font-family", "font-size", "font-weight",
    "line-height", "letter-spacing", "text-align", "margin", "padding",
    "border", "border-radius", "gap",
})


def sanitize_style(style: dict) -> dict:
    """Drop disallowed properties; idempotent by construction."""
    return {k: str(v) for k, v in style.items() if k in STYLE_ALLOWLIST}


@dataclass(frozen=True)
class NoticeElement:
    field: NoticeField
    text: str
    concept: tuple[int, str] | None = None

    def __post_init__(self):
        if not self.text:
            raise SchemaError("text", "notice elements need non-empty text")

    def to_json(self) -> dict:
        return {
            "field": self.field.value,
            "text": self.text,
            "concept": list(self.concept) if self.concept else None,
        }


@dataclass(frozen=True)
class Control:
    control_id: str
    kind: ControlKind
    action: ControlAction
    bound_requests: tuple[str, ...] = ()
    preselected: bool = False

    def to_json(self) -> dict:
        return {
            "control_id": self.control_id,
            "kind": self.kind.value,
            "action": self.action.value,
            "bound_requests": list(self.bound_requests),
            "preselected": self.preselected,
        }


@dataclass(frozen=True)
class Layer:
    index: int
    notice_elements: tuple[NoticeElement, ...] = ()
    controls: tuple[Control, ...] = ()

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "notice_elements": [e.to_json() for e in self.notice_elements],
            "controls": [c.to_json() for c in self.controls],
        }


@dataclass
class DialogueSpec:
    dialogue_id: str
    layers: list[Layer]
    quality: Quality
    source_mode: SourceMode
    style_overrides: dict = field(default_factory=dict)
    requests: list[ConsentRequest] = field(default_factory=list)
    notice_ref: str | None = None

    def controls(self) -> list[tuple[int, Control]]:
        return [(layer.index, c) for layer in self.layers for c in layer.controls]

    def find_control(self, control_id: str) -> Control:
        for _, control in self.controls():
            if control.control_id == control_id:
                return control
        raise UnknownControlError(control_id)

    def bound_request_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for _, control in self.controls():
            for rid in control.bound_requests:
                seen.setdefault(rid)
        return list(seen)

    def to_json(self) -> dict:
        return {
            "dialogue_id": self.dialogue_id,
            "source_mode": self.source_mode.value,
            "quality": self.quality.value,
            "style_overrides": dict(self.style_overrides),
            "notice_ref": self.notice_ref,
            "requests": [r.to_json() for r in self.requests],
            "layers": [layer.to_json() for layer in self.layers],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "DialogueSpec":
        try:
            layers = []
            for raw_layer in doc["layers"]:
                elements = tuple(
                    NoticeElement(
                        field=NoticeField(e["field"]),
                        text=str(e["text"]),
                        concept=tuple(e["concept"]) if e.get("concept") else None,
                    )
                    for e in raw_layer.get("notice_elements", [])
                )
                controls = tuple(
                    Control(
                        control_id=str(c["control_id"]),
                        kind=ControlKind(c["kind"]),
                        action=ControlAction(c["action"]),
                        bound_requests=tuple(c.get("bound_requests", [])),
                        preselected=bool(c.get("preselected", False)),
                    )
                    for c in raw_layer.get("controls", [])
                )
                layers.append(Layer(index=int(raw_layer["index"]), notice_elements=elements, controls=controls))
            return cls(
                dialogue_id=str(doc["dialogue_id"]),
                layers=layers,
                quality=Quality(doc.get("quality", "regular")),
                source_mode=SourceMode(doc.get("source_mode", "complete")),
                style_overrides=dict(doc.get("style_overrides", {})),
                requests=[ConsentRequest.from_json(r) for r in doc.get("requests", [])],
                notice_ref=doc.get("notice_ref"),
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError("dialogue", f"malformed dialogue document: {exc}") from exc
        except ValueError as exc:
            raise SchemaError("dialogue", str(exc)) from exc


@dataclass(frozen=True)
class LintFinding:
    rule: str
    severity: Severity
    location: str
    message: str

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "severity": self.severity.value,
            "location": self.location,
            "message": self.message,
        }


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------

def _dialogue_id(mode: SourceMode, requests: list[ConsentRequest]) -> str:
    digest = hashlib.sha256(
        (mode.value + "|" + "|".join(r.id for r in requests)).encode("utf-8")
    ).hexdigest()
    return f"dlg-{digest[:12]}"


def _label(registry: Registry | None, vocab_id: int, token: str) -> str:
    if registry is not None and vocab_id in registry.vocabularies:
        vocab = registry.vocabularies[vocab_id]
        if token in vocab:
            return vocab.node(token).label
    return token


def _concept_ref(registry: Registry | None, vocab_id: int, token: str) -> tuple[int, str] | None:
    if registry is not None and vocab_id in registry.vocabularies and token in registry.vocabularies[vocab_id]:
        return (vocab_id, token)
    return None


def _is_special(request: ConsentRequest, registry: Registry | None) -> bool:
    if request.special_category:
        return True
    if registry is not None and request.vocab in registry.vocabularies:
        return derive_special_category(request, registry.vocabularies[request.vocab])
    return False


def _notice_elements_for(request: ConsentRequest, registry: Registry | None) -> list[NoticeElement]:
    def join(tokens, fmt=lambda t: t) -> str:
        return ", ".join(fmt(t) for t in tokens) if tokens else "none declared"

    vocab_id = request.vocab
    return [
        NoticeElement(NoticeField.PURPOSE, _label(registry, vocab_id, request.purpose),
                      _concept_ref(registry, vocab_id, request.purpose)),
        NoticeElement(NoticeField.PROCESSING, join(request.processing, lambda t: _label(registry, vocab_id, t))),
        NoticeElement(NoticeField.PERSONAL_DATA, join(request.personal_data, lambda t: _label(registry, vocab_id, t))),
        NoticeElement(NoticeField.CONTROLLER,
                      f"{request.controller.name} (#{request.controller.number})"
                      if request.controller.name else "none declared"),
        NoticeElement(NoticeField.RECIPIENTS, join(request.recipients, lambda p: f"{p.name} (#{p.number})")),
        NoticeElement(NoticeField.LEGAL_BASIS, _label(registry, vocab_id, request.legal_basis),
                      _concept_ref(registry, vocab_id, request.legal_basis)),
        NoticeElement(NoticeField.MEASURES, join(request.measures, lambda t: _label(registry, vocab_id, t))),
    ]


def _decision_controls(requests: list[ConsentRequest], special_ids: list[str]) -> list[Control]:
    all_ids = tuple(r.id for r in requests)
    controls: list[Control] = []
    if special_ids:
        controls.append(Control("confirm-explicit", ControlKind.DECISION,
                                ControlAction.CONFIRM_EXPLICIT, tuple(special_ids)))
    controls.extend([
        Control("accept-all", ControlKind.DECISION, ControlAction.ACCEPT_ALL, all_ids),
        Control("refuse-all", ControlKind.DECISION, ControlAction.REFUSE_ALL, all_ids),
        Control("save-selections", ControlKind.DECISION, ControlAction.SAVE_SELECTIONS, all_ids),
        Control("dismiss", ControlKind.DECISION, ControlAction.DISMISS, ()),
    ])
    return controls


def _toggles(requests: list[ConsentRequest]) -> list[Control]:
    return [
        Control(f"toggle-{r.id}", ControlKind.PREFERENCE, ControlAction.TOGGLE, (r.id,), preselected=False)
        for r in requests
    ]


def generate_complete(requests: list[ConsentRequest], registry: Registry | None = None) -> DialogueSpec:
    """Engine-built dialogue: full notice per request, one toggle each, and
    the standard decision controls; special-category data upgrades the
    quality to Explicit and adds the confirmation gate."""
    if not requests:
        raise EmptyRequestSetError("cannot generate a dialogue for zero requests")
    elements: list[NoticeElement] = []
    for request in requests:
        elements.extend(_notice_elements_for(request, registry))
    special_ids = [r.id for r in requests if _is_special(r, registry)]
    controls = _toggles(requests) + _decision_controls(requests, special_ids)
    layer = Layer(index=0, notice_elements=tuple(elements), controls=tuple(controls))
    return DialogueSpec(
        dialogue_id=_dialogue_id(SourceMode.COMPLETE, requests),
        layers=[layer],
        quality=Quality.EXPLICIT if special_ids else Quality.REGULAR,
        source_mode=SourceMode.COMPLETE,
        requests=list(requests),
    )


def generate_from_template(
    template: dict,
    requests: list[ConsentRequest],
    registry: Registry | None = None,
    flatten_layers: bool = False,
) -> DialogueSpec:
    """Controller-shaped dialogue: notice elements and layering come from
    the template; the engine strips disallowed styles, forces toggles
    unpreselected, and injects the decision controls itself."""
    if not requests:
        raise EmptyRequestSetError("cannot generate a dialogue for zero requests")
    if not isinstance(template, dict) or not isinstance(template.get("layers"), list) or not template["layers"]:
        raise TemplateSchemaError("template needs a non-empty layers list")
    known_ids = {r.id for r in requests}
    by_id = {r.id: r for r in requests}

    marked: int | None = None
    layers: list[tuple[list[NoticeElement], list[Control]]] = []
    for li, raw_layer in enumerate(template["layers"]):
        if not isinstance(raw_layer, dict):
            raise TemplateSchemaError(f"layer {li} must be an object")
        if raw_layer.get("decision_marker"):
            if marked is not None:
                raise TemplateSchemaError("only one layer may carry the decision marker")
            marked = li
        elements: list[NoticeElement] = []
        for ei, raw in enumerate(raw_layer.get("elements", [])):
            if not isinstance(raw, dict) or "field" not in raw or "text" not in raw:
                raise TemplateSchemaError(f"layer {li} element {ei} needs field and text")
            try:
                fieldname = NoticeField(str(raw["field"]))
            except ValueError as exc:
                raise TemplateSchemaError(str(exc)) from exc
            ref = raw.get("request")
            if ref is not None and ref not in known_ids:
                raise UnknownRequestRefError(str(ref))
            concept = None
            if ref is not None and fieldname is NoticeField.PURPOSE:
                concept = _concept_ref(registry, by_id[ref].vocab, by_id[ref].purpose)
            elements.append(NoticeElement(fieldname, str(raw["text"]), concept))
        controls: list[Control] = []
        for ti, raw in enumerate(raw_layer.get("toggles", [])):
            ref = raw.get("request") if isinstance(raw, dict) else None
            if ref is None or ref not in known_ids:
                raise UnknownRequestRefError(str(ref))
            # preselected toggles are a hard generation constraint, not a style choice
            controls.append(Control(f"toggle-{ref}", ControlKind.PREFERENCE,
                                    ControlAction.TOGGLE, (str(ref),), preselected=False))
        layers.append((elements, controls))

    special_ids = [r.id for r in requests if _is_special(r, registry)]
    decision_layer = marked if marked is not None else 0
    layers[decision_layer][1].extend(_decision_controls(requests, special_ids))
    for li in range(len(layers) - 1):
        layers[li][1].append(
            Control(f"more-info-{li + 1}", ControlKind.LAYER, ControlAction.MORE_INFO, ())
        )

    if flatten_layers and len(layers) > 1:
        flat_elements = [e for elements, _ in layers for e in elements]
        flat_controls = [
            c for _, controls in layers for c in controls if c.action is not ControlAction.MORE_INFO
        ]
        layers = [(flat_elements, flat_controls)]

    spec_layers = [
        Layer(index=i, notice_elements=tuple(elements), controls=tuple(controls))
        for i, (elements, controls) in enumerate(layers)
    ]
    return DialogueSpec(
        dialogue_id=_dialogue_id(SourceMode.TEMPLATE, requests),
        layers=spec_layers,
        quality=Quality.EXPLICIT if special_ids else Quality.REGULAR,
        source_mode=SourceMode.TEMPLATE,
        style_overrides=sanitize_style(template.get("style", {}) or {}),
        requests=list(requests),
    )


def generate_choices_only(
    notice_ref: str,
    requests: list[ConsentRequest],
    registry: Registry | None = None,
) -> DialogueSpec:
    """Minimal mode: the controller renders its own notice; the engine
    contributes only the choices and the decision controls."""
    if not notice_ref:
        raise MissingNoticeRefError("choices-only generation needs the controller's notice handle")
    if not requests:
        raise EmptyRequestSetError("cannot generate a dialogue for zero requests")
    special_ids = [r.id for r in requests if _is_special(r, registry)]
    placeholder = NoticeElement(
        NoticeField.PURPOSE, f"controller-rendered notice ({notice_ref})"
    )
    controls = _toggles(requests) + _decision_controls(requests, special_ids)
    layer = Layer(index=0, notice_elements=(placeholder,), controls=tuple(controls))
    return DialogueSpec(
        dialogue_id=_dialogue_id(SourceMode.CHOICES_ONLY, requests),
        layers=[layer],
        quality=Quality.EXPLICIT if special_ids else Quality.REGULAR,
        source_mode=SourceMode.CHOICES_ONLY,
        requests=list(requests),
        notice_ref=notice_ref,
    )


# ---------------------------------------------------------------------------
# Lint
# ---------------------------------------------------------------------------

INFINITE = float("inf")

_RULE_CATALOG = {
    "L1": "preselected preference control",
    "L2": "accept and refuse must be reachable in the same layer",
    "L3": "refusing everything must not take more interactions than accepting",
    "L4": "recipients must be named or grouped with a count",
    "L5": "purpose must resolve to a vocabulary concept or declare a parent anchor",
    "L6": "special-category data requires the explicit-consent flow",
    "L7": "a dismiss-without-deciding control must exist",
}


def _reach_cost(spec: DialogueSpec, layer_index: int) -> float:
    """Activations needed to bring a layer on screen: one more-info hop per
    preceding layer; a missing hop makes everything past it unreachable."""
    cost = 0.0
    for layer in spec.layers:
        if layer.index >= layer_index:
            break
        if any(c.action is ControlAction.MORE_INFO for c in layer.controls):
            cost += 1
        else:
            return INFINITE
    return cost


def _scope_ids(spec: DialogueSpec) -> set[str]:
    if spec.requests:
        return {r.id for r in spec.requests}
    return set(spec.bound_request_ids())


def _gate_cost(spec: DialogueSpec) -> int:
    has_gate = any(c.action is ControlAction.CONFIRM_EXPLICIT for _, c in spec.controls())
    return 1 if spec.quality is Quality.EXPLICIT and has_gate else 0


def _toggle_map(spec: DialogueSpec) -> dict[str, Control]:
    out: dict[str, Control] = {}
    for _, control in spec.controls():
        if control.action is ControlAction.TOGGLE:
            for rid in control.bound_requests:
                out.setdefault(rid, control)
    return out


def _min_accept_cost(spec: DialogueSpec) -> float:
    scope = _scope_ids(spec)
    toggles = _toggle_map(spec)
    best = INFINITE
    for layer in spec.layers:
        reach = _reach_cost(spec, layer.index)
        for control in layer.controls:
            if control.action is ControlAction.ACCEPT_ALL and scope <= set(control.bound_requests):
                best = min(best, reach + 1 + _gate_cost(spec))
            elif control.action is ControlAction.SAVE_SELECTIONS and scope <= set(control.bound_requests):
                if all(rid in toggles for rid in scope):
                    flips = sum(1 for rid in scope if not toggles[rid].preselected)
                    best = min(best, reach + flips + 1 + _gate_cost(spec))
    return best


def _min_refuse_cost(spec: DialogueSpec) -> float:
    scope = _scope_ids(spec)
    toggles = _toggle_map(spec)
    best = INFINITE
    for layer in spec.layers:
        reach = _reach_cost(spec, layer.index)
        for control in layer.controls:
            if control.action is ControlAction.REFUSE_ALL and scope <= set(control.bound_requests):
                best = min(best, reach + 1)
            elif control.action is ControlAction.SAVE_SELECTIONS and scope <= set(control.bound_requests):
                flips = sum(1 for rid in scope if rid in toggles and toggles[rid].preselected)
                best = min(best, reach + flips + 1)
    return best


def _recipients_covered(spec: DialogueSpec) -> list[tuple[str, str]]:
    """(request id, missing recipient name) pairs the notice fails to disclose."""
    texts = [
        e.text for layer in spec.layers for e in layer.notice_elements
        if e.field is NoticeField.RECIPIENTS
    ]
    grouped = any(re.search(r"\b\d+\s+(recipient|third|other)", t, re.IGNORECASE) for t in texts)
    missing: list[tuple[str, str]] = []
    for request in spec.requests:
        for party in request.recipients:
            if grouped:
                continue
            if not any(party.name in t for t in texts):
                missing.append((request.id, party.name))
    return missing


def lint(subject, registry: Registry | None = None,
         locations: dict[str, str] | None = None) -> list[LintFinding]:
    """Evaluate the published rule catalog; always returns, never raises.

    Accepts a DialogueSpec or anything exposing ``to_spec()`` plus
    ``control_locations`` (parsed markup dialogues do).
    """
    if hasattr(subject, "to_spec"):
        locations = dict(getattr(subject, "control_locations", {})) | dict(locations or {})
        spec = subject.to_spec()
    else:
        spec = subject
    locations = locations or {}
    findings: list[tuple[int, str, LintFinding]] = []

    def spot(layer_index: int, control: Control | None = None) -> str:
        if control is not None and control.control_id in locations:
            return locations[control.control_id]
        if control is not None:
            return f"layer[{layer_index}]/control[{control.control_id}]"
        return f"layer[{layer_index}]"

    def add(rule: str, severity: Severity, layer_index: int, message: str,
            control: Control | None = None) -> None:
        findings.append(
            (layer_index, rule,
             LintFinding(rule=rule, severity=severity, location=spot(layer_index, control),
                         message=message))
        )

    # L1: no preselected preference controls
    for layer in spec.layers:
        for control in layer.controls:
            if control.kind is ControlKind.PREFERENCE and control.preselected:
                add("L1", Severity.ERROR, layer.index,
                    f"preference control {control.control_id!r} is preselected", control)

    # L2: accept and refuse live in the same layer
    for layer in spec.layers:
        actions = {c.action for c in layer.controls if c.kind is ControlKind.DECISION}
        if ControlAction.ACCEPT_ALL in actions and ControlAction.REFUSE_ALL not in actions:
            add("L2", Severity.ERROR, layer.index,
                "layer offers accept without refuse in the same layer")

    # L3: refuse path no longer than accept path
    accept_cost = _min_accept_cost(spec)
    refuse_cost = _min_refuse_cost(spec)
    if refuse_cost > accept_cost:
        refuse_text = "unreachable" if refuse_cost == INFINITE else f"{int(refuse_cost)} interactions"
        add("L3", Severity.ERROR, 0,
            f"refusing everything takes {refuse_text}, accepting takes {int(accept_cost)}")

    # L4: third parties named or grouped with a count
    if any(layer.notice_elements for layer in spec.layers):
        for rid, name in _recipients_covered(spec):
            add("L4", Severity.WARNING, 0,
                f"recipient {name!r} of request {rid!r} is neither named nor grouped with a count")

    # L5: purposes resolve or anchor
    for request in spec.requests:
        resolvable = (
            registry is not None
            and request.vocab in registry.vocabularies
            and request.purpose in registry.vocabularies[request.vocab]
        )
        if not resolvable and not request.parent:
            add("L5", Severity.WARNING, 0,
                f"purpose {request.purpose!r} of request {request.id!r} has no concept and no parent anchor")

    # L6: special categories force the explicit flow
    special = [r.id for r in spec.requests if _is_special(r, registry)]
    if special:
        has_gate = any(c.action is ControlAction.CONFIRM_EXPLICIT for _, c in spec.controls())
        if spec.quality is not Quality.EXPLICIT or not has_gate:
            add("L6", Severity.ERROR, 0,
                f"special-category requests {special} lack the explicit-consent flow")

    # L7: a dismiss control exists
    if not any(c.action is ControlAction.DISMISS for _, c in spec.controls()):
        add("L7", Severity.ERROR, 0, "no dismiss control: the dialogue is a consent wall")

    findings.sort(key=lambda item: (item[0], item[1]))
    return [finding for _, _, finding in findings]


# ---------------------------------------------------------------------------
# Human decision application
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ApplyResult:
    signal: DecisionSignal
    explicit_gate_unmet: bool = False


def apply_human_decision(spec: DialogueSpec, activations: list[str]) -> ApplyResult:
    """Run an interaction sequence and compute the resulting signal.

    Toggles and the explicit gate flip state; the last terminal activation
    (accept / refuse / save / dismiss) decides. On Explicit dialogues an
    accept with the gate unmet contributes no consent entries and flags
    the report instead.
    """
    toggle_state: dict[str, bool] = {}
    for _, control in spec.controls():
        if control.action is ControlAction.TOGGLE:
            for rid in control.bound_requests:
                toggle_state[rid] = control.preselected
    gate_open = False
    needs_gate = spec.quality is Quality.EXPLICIT and any(
        c.action is ControlAction.CONFIRM_EXPLICIT for _, c in spec.controls()
    )

    terminal: tuple[Control, dict[str, bool], bool] | None = None
    for control_id in activations:
        control = spec.find_control(control_id)
        if control.action is ControlAction.TOGGLE:
            for rid in control.bound_requests:
                toggle_state[rid] = not toggle_state[rid]
        elif control.action is ControlAction.CONFIRM_EXPLICIT:
            gate_open = not gate_open
        elif control.action in (ControlAction.ACCEPT_ALL, ControlAction.REFUSE_ALL,
                                ControlAction.SAVE_SELECTIONS, ControlAction.DISMISS):
            terminal = (control, dict(toggle_state), gate_open)

    if terminal is None:
        return ApplyResult(signal=DecisionSignal())

    control, toggles, gate = terminal
    gate_ok = not needs_gate or gate
    bound = list(control.bound_requests)
    if control.action is ControlAction.ACCEPT_ALL:
        if gate_ok:
            return ApplyResult(signal=DecisionSignal(consent=tuple(bound)))
        return ApplyResult(signal=DecisionSignal(), explicit_gate_unmet=True)
    if control.action is ControlAction.REFUSE_ALL:
        return ApplyResult(signal=DecisionSignal(object=tuple(bound)))
    if control.action is ControlAction.SAVE_SELECTIONS:
        on = tuple(rid for rid in bound if toggles.get(rid, False))
        off = tuple(rid for rid in bound if not toggles.get(rid, False))
        if gate_ok:
            return ApplyResult(signal=DecisionSignal(consent=on, object=off))
        return ApplyResult(signal=DecisionSignal(object=off), explicit_gate_unmet=bool(on))
    return ApplyResult(signal=DecisionSignal())  # dismiss
