/** Rendering fidelity: 1:1 widgets, equal prominence, gating, layering. */

import { readFileSync, readdirSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { DECISION_SIZE_CLASS, render, renderErrorView } from "../src/render.js";
import type { Control, DialogueSpec } from "../src/types.js";

const FIXTURES = join(__dirname, "fixtures");

function loadSpec(name: string): DialogueSpec {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as DialogueSpec;
}

function specControls(spec: DialogueSpec): Control[] {
  return spec.layers.flatMap((layer) => layer.controls);
}

/** Mount like the app does; events only fire on connected nodes. */
function mount(spec: DialogueSpec, onDecide?: (r: ReturnType<typeof render>) => void) {
  const rendered = render(spec, document, onDecide);
  document.body.appendChild(rendered.root);
  return rendered;
}

describe("control fidelity", () => {
  for (const name of readdirSync(FIXTURES).filter((f) => f.endsWith(".json"))) {
    it(`renders exactly the spec's controls: ${name}`, () => {
      const spec = loadSpec(name);
      const rendered = mount(spec);
      const controls = specControls(spec);
      expect(rendered.widgets.size).toBe(controls.length);
      const summary = controls.map((control) => ({
        id: control.control_id,
        kind: control.kind,
        action: control.action,
        widgetTag: rendered.widgets.get(control.control_id)?.element.tagName,
        layer: rendered.widgets.get(control.control_id)?.layerIndex,
      }));
      expect(summary).toMatchSnapshot();
    });
  }

  it("invents no decision paths: every activation is a spec control id", () => {
    const spec = loadSpec("newsletter_complete.json");
    const rendered = mount(spec);
    const ids = new Set(specControls(spec).map((control) => control.control_id));
    for (const { element } of rendered.widgets.values()) {
      const input = element.querySelector("input") ?? element;
      (input as HTMLElement).click();
    }
    expect(rendered.activations.length).toBeGreaterThan(0);
    for (const activation of rendered.activations) {
      expect(ids.has(activation)).toBe(true);
    }
  });
});

describe("visual parity of accept and refuse", () => {
  it("both carry the shared size class", () => {
    const spec = loadSpec("newsletter_complete.json");
    const rendered = mount(spec);
    for (const { control, element } of rendered.widgets.values()) {
      if (control.action === "accept_all" || control.action === "refuse_all") {
        expect(element.classList.contains(DECISION_SIZE_CLASS)).toBe(true);
      }
    }
  });
});

describe("explicit-consent gating", () => {
  it("accept stays disabled until the confirmation is checked", () => {
    const spec = loadSpec("special_explicit.json");
    expect(spec.quality).toBe("explicit");
    const rendered = mount(spec);
    const accept = [...rendered.widgets.values()].find(
      (w) => w.control.action === "accept_all",
    )!.element as HTMLButtonElement;
    const confirm = [...rendered.widgets.values()]
      .find((w) => w.control.action === "confirm_explicit")!
      .element.querySelector("input") as HTMLInputElement;
    expect(accept.disabled).toBe(true);
    confirm.click();
    expect(accept.disabled).toBe(false);
    confirm.click();
    expect(accept.disabled).toBe(true);
  });

  it("a disabled accept emits no activation", () => {
    const spec = loadSpec("special_explicit.json");
    const rendered = mount(spec);
    const accept = [...rendered.widgets.values()].find(
      (w) => w.control.action === "accept_all",
    )!.element as HTMLButtonElement;
    accept.click();
    expect(rendered.activations).toEqual([]);
  });
});

describe("layer navigation", () => {
  it("deeper layers are reachable only through the layer control", () => {
    const spec = loadSpec("template_two_layer.json");
    expect(spec.layers.length).toBe(2);
    const rendered = mount(spec);
    const views = rendered.root.querySelectorAll(".dialogue-layer");
    expect((views[0] as HTMLElement).hidden).toBe(false);
    expect((views[1] as HTMLElement).hidden).toBe(true);
    const moreInfo = [...rendered.widgets.values()].find(
      (w) => w.control.action === "more_info",
    )!.element;
    moreInfo.click();
    expect(rendered.currentLayer).toBe(1);
    expect((views[0] as HTMLElement).hidden).toBe(true);
    expect((views[1] as HTMLElement).hidden).toBe(false);
  });
});

describe("interaction order", () => {
  it("activations are recorded in click order", () => {
    const spec = loadSpec("newsletter_complete.json");
    let decided = 0;
    const rendered = mount(spec, () => {
      decided += 1;
    });
    const toggle = [...rendered.widgets.values()]
      .find((w) => w.control.action === "toggle")!
      .element.querySelector("input") as HTMLInputElement;
    const save = [...rendered.widgets.values()].find(
      (w) => w.control.action === "save_selections",
    )!.element;
    toggle.click();
    save.click();
    expect(rendered.activations).toEqual([toggle.getAttribute("data-control-id"), "save-selections"]);
    expect(decided).toBe(1);
  });
});

describe("style overrides", () => {
  it("applies cosmetic properties and drops geometry", () => {
    const spec = loadSpec("newsletter_complete.json");
    spec.style_overrides = { color: "red", position: "fixed", display: "none" };
    const rendered = mount(spec);
    expect(rendered.root.style.getPropertyValue("color")).toBe("red");
    expect(rendered.root.style.getPropertyValue("position")).toBe("");
    expect(rendered.root.style.getPropertyValue("display")).toBe("");
  });
});

describe("malformed specs", () => {
  it("throws a render error the caller turns into the error view", () => {
    expect(() => render({} as DialogueSpec, document)).toThrow(/malformed/);
    const view = renderErrorView(document, "broken");
    expect(view.className).toBe("dialogue-error");
    expect(view.textContent).toContain("could not be displayed");
  });
});
