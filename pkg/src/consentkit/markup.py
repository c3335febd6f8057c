"""HTML semantic consent markup: the fallback when no signal channel exists.

Requests and controls are carried on plain HTML via data-* attributes
inside a ``dialog`` element. The normative attribute table:

    data-adpc-request-id   opens a request scope on an element
    data-purpose           purpose token
    data-parent            parent anchor token
    data-personal-data     comma-separated data concept tokens
    data-controller        "Name;number"
    data-legal-basis       legal basis token
    data-recipient         "Name;number", repeatable across elements
    data-decision          on buttons: consent | refuse | save | dismiss
                           | confirm-explicit | more-info
    data-toggle-for        on inputs: the request id the checkbox selects

The parser is error tolerant: anything unexpected becomes a warning,
never an exception; only the complete absence of a dialog element raises.
"""

from __future__ import annotations

import html as html_mod
from dataclasses import dataclass, field
from html.parser import HTMLParser

from .dialogue import (
    Control,
    ControlAction,
    ControlKind,
    DialogueSpec,
    Quality,
    SourceMode,
)
from .errors import NoDialogError
from .wire import ConsentRequest, Party

_DECISION_VALUES = {
    "consent": (ControlKind.DECISION, ControlAction.ACCEPT_ALL),
    "refuse": (ControlKind.DECISION, ControlAction.REFUSE_ALL),
    "save": (ControlKind.DECISION, ControlAction.SAVE_SELECTIONS),
    "dismiss": (ControlKind.DECISION, ControlAction.DISMISS),
    "confirm-explicit": (ControlKind.DECISION, ControlAction.CONFIRM_EXPLICIT),
    "more-info": (ControlKind.LAYER, ControlAction.MORE_INFO),
}
_DECISION_OF_ACTION = {
    ControlAction.ACCEPT_ALL: "consent",
    ControlAction.REFUSE_ALL: "refuse",
    ControlAction.SAVE_SELECTIONS: "save",
    ControlAction.DISMISS: "dismiss",
    ControlAction.CONFIRM_EXPLICIT: "confirm-explicit",
    ControlAction.MORE_INFO: "more-info",
}

_REQUEST_ATTRS = {
    "data-adpc-request-id", "data-purpose", "data-parent", "data-personal-data",
    "data-controller", "data-legal-basis", "data-recipient",
}
_KNOWN_ATTRS = _REQUEST_ATTRS | {"data-decision", "data-toggle-for"}


@dataclass
class MarkupDialogue:
    """Requests and controls reconstructed from an HTML page."""

    origin: str
    requests: list[ConsentRequest] = field(default_factory=list)
    controls: list[Control] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    control_locations: dict[str, str] = field(default_factory=dict)

    def to_spec(self) -> DialogueSpec:
        """A single-layer dialogue view for lint; quality is Explicit when a
        confirmation gate is present."""
        from .dialogue import Layer  # local import keeps the surface tidy

        explicit = any(c.action is ControlAction.CONFIRM_EXPLICIT for c in self.controls)
        return DialogueSpec(
            dialogue_id=f"markup:{self.origin}",
            layers=[Layer(index=0, controls=tuple(self.controls))],
            quality=Quality.EXPLICIT if explicit else Quality.REGULAR,
            source_mode=SourceMode.COMPLETE,
            requests=list(self.requests),
        )


def _split_party(value: str) -> Party:
    name, _, number = value.rpartition(";")
    if not name:
        return Party(value.strip(), 0)
    try:
        return Party(name.strip(), int(number.strip()))
    except ValueError:
        return Party(value.strip(), 0)


class _RequestDraft:
    def __init__(self) -> None:
        self.attrs: dict[str, str] = {}
        self.recipients: list[Party] = []

    def finish(self, index: int, vocab: int, warnings: list[str]) -> ConsentRequest | None:
        purpose = self.attrs.get("data-purpose", "")
        if not purpose:
            warnings.append(f"request scope {index} has no data-purpose; dropped")
            return None
        rid = self.attrs.get("data-adpc-request-id") or f"req-{index}"
        if "data-adpc-request-id" not in self.attrs:
            warnings.append(f"request scope {index} has no data-adpc-request-id; assigned {rid!r}")
        personal = tuple(
            tok.strip() for tok in self.attrs.get("data-personal-data", "").split(",") if tok.strip()
        )
        controller = _split_party(self.attrs["data-controller"]) \
            if "data-controller" in self.attrs else Party("", 0)
        return ConsentRequest(
            id=rid,
            purpose=purpose,
            parent=self.attrs.get("data-parent"),
            vocab=vocab,
            personal_data=personal,
            controller=controller,
            recipients=tuple(self.recipients),
            legal_basis=self.attrs.get("data-legal-basis", "consent"),
        )


_VOID_TAGS = {"input", "br", "img", "hr", "meta", "link", "area", "base", "col",
              "embed", "source", "track", "wbr"}


class _ConsentMarkupParser(HTMLParser):
    def __init__(self, origin: str) -> None:
        super().__init__(convert_charrefs=True)
        self.origin = origin
        self.dialog_depth = 0
        self.dialog_count = 0
        self.element_count = 0
        self.warnings: list[str] = []
        self.requests: list[ConsentRequest] = []
        self.controls: list[tuple[Control, str]] = []
        self._draft_stack: list[tuple[int, _RequestDraft]] = []  # (tag depth, draft)
        self._depth = 0
        self._control_n = 0

    # -- helpers -------------------------------------------------------------

    def _where(self, tag: str) -> str:
        line, col = self.getpos()
        return f"{self.origin}:{line}:{col}/{tag}[{self.element_count}]"

    def _open_request(self, attrs: dict[str, str]) -> None:
        draft = _RequestDraft()
        draft.attrs.update({k: v for k, v in attrs.items() if k in _REQUEST_ATTRS and k != "data-recipient"})
        if "data-recipient" in attrs:
            draft.recipients.append(_split_party(attrs["data-recipient"]))
        self._draft_stack.append((self._depth, draft))

    def _close_request(self) -> None:
        _, draft = self._draft_stack.pop()
        request = draft.finish(len(self.requests), 0, self.warnings)
        if request is not None:
            self.requests.append(request)

    def _add_control(self, kind: ControlKind, action: ControlAction,
                     bound: tuple[str, ...], preselected: bool, explicit_id: str | None, tag: str) -> None:
        cid = explicit_id or f"ctl-{self._control_n}"
        self._control_n += 1
        control = Control(control_id=cid, kind=kind, action=action,
                          bound_requests=bound, preselected=preselected)
        self.controls.append((control, self._where(tag)))

    # -- HTMLParser hooks ------------------------------------------------------

    def handle_starttag(self, tag, attrs):
        self.element_count += 1
        attrmap: dict[str, str] = {}
        for key, value in attrs:
            if key in attrmap:
                self.warnings.append(f"duplicate attribute {key!r} on <{tag}>")
            attrmap[key] = value if value is not None else ""
        void = tag in _VOID_TAGS
        if not void:
            self._depth += 1

        if tag == "dialog":
            self.dialog_count += 1
            self.dialog_depth += 1

        if self.dialog_depth <= 0:
            return

        for key in attrmap:
            if key.startswith("data-") and key not in _KNOWN_ATTRS:
                self.warnings.append(f"unknown attribute {key!r} on <{tag}>")

        starts_request = any(
            k in attrmap for k in ("data-adpc-request-id", "data-purpose")
        )
        if starts_request:
            self._open_request(attrmap)
            if void:
                self._close_request()
        elif "data-recipient" in attrmap and self._draft_stack:
            self._draft_stack[-1][1].recipients.append(_split_party(attrmap["data-recipient"]))
        elif "data-recipient" in attrmap:
            self.warnings.append("data-recipient outside any request scope")

        if "data-decision" in attrmap:
            value = attrmap["data-decision"]
            if value in _DECISION_VALUES:
                kind, action = _DECISION_VALUES[value]
                self._add_control(kind, action, (), False, attrmap.get("id"), tag)
            else:
                self.warnings.append(f"unknown data-decision value {value!r}")
        if "data-toggle-for" in attrmap:
            target = attrmap["data-toggle-for"]
            self._add_control(
                ControlKind.PREFERENCE, ControlAction.TOGGLE, (target,),
                "checked" in attrmap, attrmap.get("id"), tag,
            )

    def handle_startendtag(self, tag, attrs):
        self.handle_starttag(tag, attrs)
        if tag not in _VOID_TAGS:
            self._depth = max(0, self._depth - 1)

    def handle_endtag(self, tag):
        if tag in _VOID_TAGS:
            return
        while self._draft_stack and self._draft_stack[-1][0] >= self._depth:
            self._close_request()
        if tag == "dialog" and self.dialog_depth > 0:
            self.dialog_depth -= 1
        self._depth = max(0, self._depth - 1)

    def close(self):
        super().close()
        while self._draft_stack:
            self._close_request()


def parse_markup(document: str, origin: str = "<string>") -> MarkupDialogue:
    """Reconstruct requests and controls from an HTML document.

    Degrades to warnings on everything except a missing dialog element.
    Decision buttons bind to every request id found in the document.
    """
    parser = _ConsentMarkupParser(origin)
    parser.feed(document)
    parser.close()
    if parser.dialog_count == 0:
        raise NoDialogError(f"{origin}: no dialog element found")
    all_ids = tuple(r.id for r in parser.requests)
    controls: list[Control] = []
    locations: dict[str, str] = {}
    for control, where in parser.controls:
        if control.kind is ControlKind.DECISION and control.action is not ControlAction.DISMISS:
            control = Control(
                control_id=control.control_id, kind=control.kind, action=control.action,
                bound_requests=all_ids, preselected=control.preselected,
            )
        controls.append(control)
        locations[control.control_id] = where
    return MarkupDialogue(
        origin=origin,
        requests=parser.requests,
        controls=controls,
        warnings=parser.warnings,
        control_locations=locations,
    )


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

def _esc(text: str) -> str:
    return html_mod.escape(str(text), quote=True)


_CONTROL_LABELS = {
    ControlAction.ACCEPT_ALL: "Accept all",
    ControlAction.REFUSE_ALL: "Refuse all",
    ControlAction.SAVE_SELECTIONS: "Save selections",
    ControlAction.DISMISS: "Dismiss",
    ControlAction.CONFIRM_EXPLICIT: "I explicitly confirm",
    ControlAction.MORE_INFO: "More information",
}


def emit_markup(spec: DialogueSpec) -> str:
    """Serialize a dialogue as fallback HTML; layers flatten into one dialog.

    parse_markup(emit_markup(spec)) preserves request ids, purpose/parent
    anchors, control kinds, and preselected flags.
    """
    out: list[str] = ['<dialog class="consent-dialogue" open>']
    for request in spec.requests:
        attrs = [
            f'data-adpc-request-id="{_esc(request.id)}"',
            f'data-purpose="{_esc(request.purpose)}"',
        ]
        if request.parent:
            attrs.append(f'data-parent="{_esc(request.parent)}"')
        if request.personal_data:
            attrs.append(f'data-personal-data="{_esc(",".join(request.personal_data))}"')
        if request.controller.name:
            attrs.append(
                f'data-controller="{_esc(f"{request.controller.name};{request.controller.number}")}"'
            )
        attrs.append(f'data-legal-basis="{_esc(request.legal_basis)}"')
        out.append(f'  <section {" ".join(attrs)}>')
        out.append(f"    <h2>{_esc(request.purpose)}</h2>")
        for party in request.recipients:
            out.append(
                f'    <p data-recipient="{_esc(f"{party.name};{party.number}")}">{_esc(party.name)}</p>'
            )
        out.append("  </section>")
    for layer in spec.layers:
        for element in layer.notice_elements:
            out.append(f'  <p class="notice-{element.field.value}">{_esc(element.text)}</p>')
    for layer in spec.layers:
        for control in layer.controls:
            if control.action is ControlAction.TOGGLE:
                target = control.bound_requests[0] if control.bound_requests else ""
                checked = " checked" if control.preselected else ""
                out.append(
                    f'  <label><input type="checkbox" data-toggle-for="{_esc(target)}"{checked}> '
                    f"{_esc(target)}</label>"
                )
            elif control.action in _DECISION_OF_ACTION:
                value = _DECISION_OF_ACTION[control.action]
                out.append(
                    f'  <button data-decision="{value}">{_CONTROL_LABELS[control.action]}</button>'
                )
    out.append("</dialog>")
    return "\n".join(out)
