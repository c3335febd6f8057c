/** Bootstraps the agent UI: pending dialogues, decision flow, preferences. */

import { AgentClient } from "./api.js";
import { render, renderErrorView, type RenderedDialogue } from "./render.js";
import { PreferenceEditor, renderPreferenceTree } from "./prefs.js";

const POLL_INTERVAL_MS = 1500;

export async function bootstrap(doc: Document = document, client = new AgentClient()) {
  const app = doc.getElementById("app");
  if (!app) throw new Error("missing #app mount point");

  const dialogueHost = doc.createElement("div");
  dialogueHost.id = "dialogues";
  const statusLine = doc.createElement("p");
  statusLine.id = "status";
  const prefsHost = doc.createElement("div");
  prefsHost.id = "preferences";
  app.append(statusLine, dialogueHost, prefsHost);

  const inFlight = { busy: false };
  const shown = new Set<string>();

  async function submit(rendered: RenderedDialogue) {
    if (inFlight.busy) return;
    inFlight.busy = true;
    try {
      const result = await client.postDecision(rendered.dialogueId, rendered.activations);
      rendered.root.remove();
      statusLine.textContent = result.signal_text
        ? `Signaled: ${result.signal_text}`
        : result.explicit_gate_unmet
          ? "Nothing consented: the explicit confirmation was not given."
          : "Dialogue dismissed; nothing signaled.";
    } catch (error) {
      statusLine.textContent = `Sending failed, please retry: ${String(error)}`;
      const retry = doc.createElement("button");
      retry.textContent = "Retry";
      retry.addEventListener("click", () => {
        retry.remove();
        void submit(rendered);
      });
      statusLine.appendChild(retry);
    } finally {
      inFlight.busy = false;
    }
  }

  async function poll() {
    try {
      const pending = await client.getPending();
      for (const spec of pending) {
        if (shown.has(spec.dialogue_id)) continue;
        shown.add(spec.dialogue_id);
        try {
          const rendered = render(spec, doc, (r) => void submit(r));
          dialogueHost.appendChild(rendered.root);
        } catch (error) {
          dialogueHost.appendChild(renderErrorView(doc, String(error)));
        }
      }
      if (!pending.length && !dialogueHost.childElementCount) {
        const report = await client.getReport();
        if (report.complete) {
          statusLine.textContent = report.signal_sent
            ? `Session complete. ${report.signal_text}`
            : "Session complete; nothing needed a decision.";
        }
      }
    } catch {
      statusLine.textContent = "Agent service unreachable; retrying.";
    }
  }

  async function loadPreferences() {
    try {
      const [registry, prefsDoc] = await Promise.all([
        client.getRegistry(),
        client.getPreferences(),
      ]);
      const vocab = registry.vocabularies[0];
      if (!vocab) return;
      const editor = PreferenceEditor.fromDocument(vocab.registry_id, prefsDoc);
      const passthrough = prefsDoc.rules.filter(
        (rule) => rule.target[0] !== vocab.registry_id || rule.constraints,
      );
      const heading = doc.createElement("h2");
      heading.textContent = `Standing preferences (${vocab.name})`;
      const save = doc.createElement("button");
      save.id = "save-preferences";
      save.textContent = "Save preferences";
      save.addEventListener("click", () => {
        void client
          .putPreferences(editor.toDocument(passthrough))
          .then(({ saved }) => {
            statusLine.textContent = `Saved ${saved} preference rules.`;
          })
          .catch((error) => {
            statusLine.textContent = `Saving preferences failed: ${String(error)}`;
          });
      });
      prefsHost.append(heading, renderPreferenceTree(vocab, editor, doc), save);
    } catch {
      // preferences editing is optional when the endpoints are absent
    }
  }

  await loadPreferences();
  await poll();
  return setInterval(() => void poll(), POLL_INTERVAL_MS);
}

declare global {
  interface Window {
    __consentkitBooted?: boolean;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined" && !window.__consentkitBooted) {
  if (document.getElementById("app")) {
    window.__consentkitBooted = true;
    void bootstrap();
  }
}
