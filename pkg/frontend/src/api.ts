/** Fetch client for the agent service endpoints. */

import type {
  DecisionResponse,
  DialogueSpec,
  PreferencesDoc,
  RegistryDoc,
  SessionReport,
} from "./types.js";

export class AgentClient {
  constructor(public baseUrl: string = "") {}

  private async exchange<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      const body = await response.text();
      throw new Error(`${init?.method ?? "GET"} ${path} -> ${response.status}: ${body}`);
    }
    return (await response.json()) as T;
  }

  getPending(): Promise<DialogueSpec[]> {
    return this.exchange<DialogueSpec[]>("/pending");
  }

  postDecision(dialogueId: string, activations: string[]): Promise<DecisionResponse> {
    return this.exchange<DecisionResponse>("/decision", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ dialogue_id: dialogueId, activations }),
    });
  }

  getReport(): Promise<SessionReport> {
    return this.exchange<SessionReport>("/report");
  }

  getRegistry(): Promise<RegistryDoc> {
    return this.exchange<RegistryDoc>("/registry");
  }

  getPreferences(): Promise<PreferencesDoc> {
    return this.exchange<PreferencesDoc>("/preferences");
  }

  putPreferences(doc: PreferencesDoc): Promise<{ saved: number }> {
    return this.exchange<{ saved: number }>("/preferences", {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(doc),
    });
  }
}
