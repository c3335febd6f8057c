/** Preference tree model and editor behavior. */

import { describe, expect, it } from "vitest";

import { PreferenceEditor, buildConceptTree, renderPreferenceTree } from "../src/prefs.js";
import type { PreferencesDoc, VocabularyDoc } from "../src/types.js";

const vocab: VocabularyDoc = {
  registry_id: 2,
  name: "mini",
  version: 1,
  codec: "sf",
  concepts: [
    { id: "Purpose", label: "Any purpose", kind: "purpose", parents: [], special_category: false },
    { id: "Marketing", label: "Marketing", kind: "purpose", parents: ["Purpose"], special_category: false },
    { id: "SendNewsletters", label: "Send newsletters", kind: "purpose", parents: ["Marketing"], special_category: false },
    { id: "Analytics", label: "Analytics", kind: "purpose", parents: ["Purpose"], special_category: false },
  ],
};

describe("concept tree", () => {
  it("builds parent-first nesting with sorted children", () => {
    const roots = buildConceptTree(vocab);
    expect(roots.map((r) => r.id)).toEqual(["Purpose"]);
    expect(roots[0]!.children.map((c) => c.id)).toEqual(["Analytics", "Marketing"]);
    const marketing = roots[0]!.children.find((c) => c.id === "Marketing")!;
    expect(marketing.children.map((c) => c.id)).toEqual(["SendNewsletters"]);
  });
});

describe("editor", () => {
  it("cycles none -> permit -> prohibit -> none", () => {
    const editor = new PreferenceEditor(2);
    expect(editor.cycle("Marketing")).toBe("permit");
    expect(editor.cycle("Marketing")).toBe("prohibit");
    expect(editor.cycle("Marketing")).toBeUndefined();
  });

  it("round-trips through the preference document", () => {
    const doc: PreferencesDoc = {
      rules: [
        { target: [2, "Marketing"], effect: "prohibit" },
        { target: [110, "p3"], effect: "permit" },
        { target: [2, "Analytics"], effect: "permit", constraints: { controller: 7 } },
      ],
    };
    const editor = PreferenceEditor.fromDocument(2, doc);
    expect(editor.markers.get("Marketing")).toBe("prohibit");
    // constrained and foreign-vocabulary rules are not editable markers
    expect(editor.markers.has("Analytics")).toBe(false);
    const passthrough = doc.rules.filter(
      (rule) => rule.target[0] !== 2 || rule.constraints,
    );
    const out = editor.toDocument(passthrough);
    expect(out.rules).toContainEqual({ target: [2, "Marketing"], effect: "prohibit" });
    expect(out.rules).toContainEqual({ target: [110, "p3"], effect: "permit" });
    expect(out.rules).toContainEqual({
      target: [2, "Analytics"], effect: "permit", constraints: { controller: 7 },
    });
  });

  it("keeps a conflicting child permit under a prohibited parent", () => {
    const editor = new PreferenceEditor(2);
    editor.set("Marketing", "prohibit");
    editor.set("SendNewsletters", "permit");
    const out = editor.toDocument();
    expect(out.rules).toEqual([
      { target: [2, "Marketing"], effect: "prohibit" },
      { target: [2, "SendNewsletters"], effect: "permit" },
    ]);
  });
});

describe("tree rendering", () => {
  it("one marker per visible node; clicks update the editor", () => {
    const editor = new PreferenceEditor(2);
    const tree = renderPreferenceTree(vocab, editor, document);
    document.body.appendChild(tree);
    const markers = tree.querySelectorAll("button.marker");
    expect(markers.length).toBe(vocab.concepts.length);
    const marketing = tree.querySelector('button[data-marker-for="Marketing"]') as HTMLButtonElement;
    marketing.click();
    expect(editor.markers.get("Marketing")).toBe("permit");
    expect(marketing.getAttribute("data-effect")).toBe("permit");
    marketing.click();
    expect(editor.markers.get("Marketing")).toBe("prohibit");
  });
});
