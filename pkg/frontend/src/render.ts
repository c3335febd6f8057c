/** Renders engine-generated dialogue specs into live DOM.
 *
 * The rendering contract: exactly one widget per spec control and no
 * UI-invented decision paths; layers are navigated only through the
 * spec's layer controls; accept and refuse share one size class so
 * neither choice is visually privileged; explicit-quality dialogues keep
 * accept disabled until the confirmation gate is checked.
 */

import type { Control, DialogueSpec, NoticeElement } from "./types.js";

export const DECISION_SIZE_CLASS = "decision-equal";

const ACTION_LABELS: Record<string, string> = {
  more_info: "More information",
  toggle: "",
  accept_all: "Accept all",
  refuse_all: "Refuse all",
  save_selections: "Save selections",
  confirm_explicit: "I explicitly confirm",
  dismiss: "Dismiss",
};

const FIELD_LABELS: Record<string, string> = {
  purpose: "Purpose",
  processing: "Processing",
  personal_data: "Personal data",
  controller: "Controller",
  recipients: "Recipients",
  legal_basis: "Legal basis",
  measures: "Safeguards",
};

// Controller styling may tune cosmetics only; geometry and visibility
// stay under user-agent control.
const STYLE_ALLOWLIST = new Set([
  "color", "background-color", "font-family", "font-size", "font-weight",
  "line-height", "letter-spacing", "text-align", "margin", "padding",
  "border", "border-radius", "gap",
]);

export interface RenderedWidget {
  control: Control;
  element: HTMLElement;
  layerIndex: number;
}

export interface RenderedDialogue {
  dialogueId: string;
  root: HTMLElement;
  widgets: Map<string, RenderedWidget>;
  /** Control ids in click order; becomes the POST /decision payload. */
  activations: string[];
  currentLayer: number;
  showLayer(index: number): void;
}

export function validateSpec(spec: DialogueSpec): void {
  if (!spec || typeof spec.dialogue_id !== "string" || !Array.isArray(spec.layers)) {
    throw new Error("malformed dialogue document");
  }
  for (const layer of spec.layers) {
    if (!Array.isArray(layer.controls) || !Array.isArray(layer.notice_elements)) {
      throw new Error(`malformed layer ${layer.index}`);
    }
  }
}

export function render(
  spec: DialogueSpec,
  doc: Document = document,
  onDecide?: (rendered: RenderedDialogue) => void,
): RenderedDialogue {
  validateSpec(spec);
  const root = doc.createElement("section");
  root.className = "consent-dialogue";
  root.setAttribute("data-dialogue-id", spec.dialogue_id);
  applyStyleOverrides(root, spec.style_overrides);

  const widgets = new Map<string, RenderedWidget>();
  const layerViews: HTMLElement[] = [];
  const rendered: RenderedDialogue = {
    dialogueId: spec.dialogue_id,
    root,
    widgets,
    activations: [],
    currentLayer: 0,
    showLayer(index: number) {
      if (index < 0 || index >= layerViews.length) return;
      rendered.currentLayer = index;
      layerViews.forEach((view, i) => {
        view.hidden = i !== index;
      });
    },
  };

  const gateState = { open: false };
  const needsGate =
    spec.quality === "explicit" &&
    spec.layers.some((l) => l.controls.some((c) => c.action === "confirm_explicit"));

  for (const layer of spec.layers) {
    const view = doc.createElement("div");
    view.className = "dialogue-layer";
    view.setAttribute("data-layer-index", String(layer.index));
    for (const element of layer.notice_elements) {
      view.appendChild(renderNotice(doc, element));
    }
    const controlsRow = doc.createElement("div");
    controlsRow.className = "controls";
    for (const control of layer.controls) {
      const widget = renderControl(doc, control, rendered, gateState, needsGate, onDecide);
      widgets.set(control.control_id, { control, element: widget, layerIndex: layer.index });
      controlsRow.appendChild(widget);
    }
    view.appendChild(controlsRow);
    layerViews.push(view);
    root.appendChild(view);
  }
  rendered.showLayer(0);
  syncAcceptGating(rendered, gateState, needsGate);
  return rendered;
}

function renderNotice(doc: Document, element: NoticeElement): HTMLElement {
  const p = doc.createElement("p");
  p.className = `notice notice-${element.field}`;
  const label = doc.createElement("strong");
  label.textContent = `${FIELD_LABELS[element.field] ?? element.field}: `;
  p.appendChild(label);
  p.appendChild(doc.createTextNode(element.text));
  return p;
}

function renderControl(
  doc: Document,
  control: Control,
  rendered: RenderedDialogue,
  gateState: { open: boolean },
  needsGate: boolean,
  onDecide?: (rendered: RenderedDialogue) => void,
): HTMLElement {
  if (control.action === "toggle" || control.action === "confirm_explicit") {
    const label = doc.createElement("label");
    label.className = control.action === "toggle" ? "toggle" : "confirm-explicit";
    const box = doc.createElement("input");
    box.type = "checkbox";
    box.checked = control.preselected;
    box.setAttribute("data-control-id", control.control_id);
    box.addEventListener("change", () => {
      rendered.activations.push(control.control_id);
      if (control.action === "confirm_explicit") {
        gateState.open = box.checked;
        syncAcceptGating(rendered, gateState, needsGate);
      }
    });
    label.appendChild(box);
    label.appendChild(
      doc.createTextNode(
        control.action === "toggle"
          ? ` allow: ${control.bound_requests.join(", ")}`
          : ` ${ACTION_LABELS.confirm_explicit}`,
      ),
    );
    return label;
  }

  const button = doc.createElement("button");
  button.setAttribute("data-control-id", control.control_id);
  button.textContent = ACTION_LABELS[control.action] ?? control.control_id;
  if (control.action === "more_info") {
    button.className = "layer-control";
    button.addEventListener("click", () => {
      rendered.activations.push(control.control_id);
      rendered.showLayer(rendered.currentLayer + 1);
    });
    return button;
  }
  button.className = `decision-control ${DECISION_SIZE_CLASS} decision-${control.action}`;
  button.addEventListener("click", () => {
    if (button.disabled) return;
    rendered.activations.push(control.control_id);
    onDecide?.(rendered);
  });
  return button;
}

function syncAcceptGating(
  rendered: RenderedDialogue,
  gateState: { open: boolean },
  needsGate: boolean,
): void {
  if (!needsGate) return;
  for (const { control, element } of rendered.widgets.values()) {
    if (control.action === "accept_all") {
      (element as HTMLButtonElement).disabled = !gateState.open;
    }
  }
}

function applyStyleOverrides(root: HTMLElement, overrides: Record<string, string>): void {
  for (const [property, value] of Object.entries(overrides ?? {})) {
    if (STYLE_ALLOWLIST.has(property)) {
      root.style.setProperty(property, value);
    }
  }
}

export function renderErrorView(doc: Document, message: string): HTMLElement {
  const div = doc.createElement("div");
  div.className = "dialogue-error";
  const heading = doc.createElement("strong");
  heading.textContent = "This consent dialogue could not be displayed";
  const detail = doc.createElement("p");
  detail.textContent = message;
  div.appendChild(heading);
  div.appendChild(detail);
  return div;
}
