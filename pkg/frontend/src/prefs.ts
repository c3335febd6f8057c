/** Preference rule editing over the registry's concept tree.
 *
 * The tree view shows one node per concept reachable from each root; a
 * concept with several parents appears under each of them but carries a
 * single shared marker. Saving emits the plain preference document the
 * agent's PUT /preferences endpoint expects.
 */

import type {
  PreferenceRuleDoc,
  PreferencesDoc,
  RuleEffect,
  VocabularyDoc,
} from "./types.js";

export interface ConceptTreeNode {
  id: string;
  label: string;
  kind: string;
  children: ConceptTreeNode[];
}

export function buildConceptTree(vocab: VocabularyDoc): ConceptTreeNode[] {
  const childIds = new Map<string, string[]>();
  const byId = new Map(vocab.concepts.map((c) => [c.id, c]));
  for (const concept of vocab.concepts) {
    for (const parent of concept.parents) {
      const siblings = childIds.get(parent) ?? [];
      siblings.push(concept.id);
      childIds.set(parent, siblings);
    }
  }
  const build = (id: string): ConceptTreeNode => {
    const concept = byId.get(id);
    return {
      id,
      label: concept?.label ?? id,
      kind: concept?.kind ?? "purpose",
      children: (childIds.get(id) ?? []).sort().map(build),
    };
  };
  return vocab.concepts
    .filter((c) => c.parents.length === 0)
    .map((c) => c.id)
    .sort()
    .map(build);
}

export class PreferenceEditor {
  readonly markers = new Map<string, RuleEffect>();

  constructor(public vocabId: number) {}

  static fromDocument(vocabId: number, doc: PreferencesDoc): PreferenceEditor {
    const editor = new PreferenceEditor(vocabId);
    for (const rule of doc.rules) {
      const [ruleVocab, concept] = rule.target;
      if (ruleVocab === vocabId && !rule.constraints) {
        editor.markers.set(concept, rule.effect);
      }
    }
    return editor;
  }

  /** Cycle none -> permit -> prohibit -> none. */
  cycle(conceptId: string): RuleEffect | undefined {
    const current = this.markers.get(conceptId);
    if (current === undefined) {
      this.markers.set(conceptId, "permit");
    } else if (current === "permit") {
      this.markers.set(conceptId, "prohibit");
    } else {
      this.markers.delete(conceptId);
    }
    return this.markers.get(conceptId);
  }

  set(conceptId: string, effect: RuleEffect | undefined): void {
    if (effect === undefined) {
      this.markers.delete(conceptId);
    } else {
      this.markers.set(conceptId, effect);
    }
  }

  toDocument(passthrough: PreferenceRuleDoc[] = []): PreferencesDoc {
    const rules: PreferenceRuleDoc[] = [...passthrough];
    for (const [concept, effect] of [...this.markers.entries()].sort()) {
      rules.push({ target: [this.vocabId, concept], effect });
    }
    return { rules };
  }
}

export function renderPreferenceTree(
  vocab: VocabularyDoc,
  editor: PreferenceEditor,
  doc: Document = document,
  onChange?: () => void,
): HTMLElement {
  const container = doc.createElement("div");
  container.className = "preference-tree";

  const renderNode = (node: ConceptTreeNode): HTMLElement => {
    const item = doc.createElement("li");
    item.setAttribute("data-concept-id", node.id);
    const row = doc.createElement("span");
    row.className = "concept-row";
    const marker = doc.createElement("button");
    marker.className = "marker";
    marker.setAttribute("data-marker-for", node.id);
    const paint = () => {
      const effect = editor.markers.get(node.id);
      marker.textContent = effect === "permit" ? "+" : effect === "prohibit" ? "-" : "·";
      marker.setAttribute("data-effect", effect ?? "none");
    };
    marker.addEventListener("click", () => {
      editor.cycle(node.id);
      paint();
      onChange?.();
    });
    paint();
    row.appendChild(marker);
    row.appendChild(doc.createTextNode(` ${node.label}`));
    item.appendChild(row);
    if (node.children.length) {
      const list = doc.createElement("ul");
      for (const child of node.children) {
        list.appendChild(renderNode(child));
      }
      item.appendChild(list);
    }
    return item;
  };

  const rootList = doc.createElement("ul");
  for (const root of buildConceptTree(vocab)) {
    rootList.appendChild(renderNode(root));
  }
  container.appendChild(rootList);
  return container;
}
