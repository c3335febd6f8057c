/** Wire types mirroring the agent service's JSON documents. */

export type NoticeFieldName =
  | "purpose"
  | "processing"
  | "personal_data"
  | "controller"
  | "recipients"
  | "legal_basis"
  | "measures";

export type ControlKind = "layer" | "preference" | "decision";

export type ControlAction =
  | "more_info"
  | "toggle"
  | "accept_all"
  | "refuse_all"
  | "save_selections"
  | "confirm_explicit"
  | "dismiss";

export interface NoticeElement {
  field: NoticeFieldName;
  text: string;
  concept: [number, string] | null;
}

export interface Control {
  control_id: string;
  kind: ControlKind;
  action: ControlAction;
  bound_requests: string[];
  preselected: boolean;
}

export interface Layer {
  index: number;
  notice_elements: NoticeElement[];
  controls: Control[];
}

export interface Party {
  name: string;
  number: number;
}

export interface ConsentRequest {
  id: string;
  purpose: string;
  parent: string | null;
  vocab: number;
  personal_data: string[];
  processing: string[];
  controller: Party;
  recipients: Party[];
  legal_basis: string;
  measures: string[];
  special_category: boolean;
}

export interface DialogueSpec {
  dialogue_id: string;
  source_mode: "complete" | "template" | "choices_only";
  quality: "regular" | "explicit";
  style_overrides: Record<string, string>;
  notice_ref: string | null;
  requests: ConsentRequest[];
  layers: Layer[];
}

export interface SignalBody {
  consent: string[];
  withdraw: string[];
  object: string[];
}

export interface DecisionResponse {
  dialogue_id: string;
  signal: SignalBody;
  signal_text: string;
  explicit_gate_unmet: boolean;
}

export interface RequestVerdict {
  id: string;
  outcome: "consent" | "object" | "withdraw" | "prompt";
  provenance: string;
  rule_index?: number;
  specificity?: number;
}

export interface SessionReport {
  mode: string;
  url: string;
  vocab: number | null;
  vocab_known: boolean;
  requests: RequestVerdict[];
  signal: SignalBody;
  signal_text: string;
  signal_sent: boolean;
  ack: { received: SignalBody; digest: string } | null;
  prompts_unanswered: number;
  human_interactions: number;
  complete: boolean;
}

export interface ConceptDoc {
  id: string;
  label: string;
  kind: string;
  parents: string[];
  special_category: boolean;
  weight?: number;
}

export interface VocabularyDoc {
  registry_id: number;
  name: string;
  version: number;
  codec: "enum" | "sf";
  concepts: ConceptDoc[];
}

export interface RegistryDoc {
  vocabularies: VocabularyDoc[];
  mappings: { from: [number, string]; to: [number, string]; relation: string }[];
}

export type RuleEffect = "permit" | "prohibit";

export interface PreferenceRuleDoc {
  target: [number, string];
  effect: RuleEffect;
  constraints?: { data?: string; controller?: number; legal_basis?: string };
}

export interface PreferencesDoc {
  rules: PreferenceRuleDoc[];
}
