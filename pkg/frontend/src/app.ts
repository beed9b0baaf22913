// DOM wiring for the simplification playground. All state transitions are
// pure functions in markers.ts/diff.ts; this file only renders and binds.

import { ApiClient, ConstraintInfeasible } from "./api.js";
import { diffTokens } from "./diff.js";
import {
  SessionView,
  applyResponse,
  buildRequest,
  canSubmit,
  cycleMarker,
  markError,
  newSession,
  relaxOverrides,
} from "./markers.js";

const api = new ApiClient(
  (window as unknown as { SENTSIMP_API?: string }).SENTSIMP_API ?? "",
);

let session: SessionView | null = null;
let bannedWords = new Set<string>();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function render(): void {
  const chipsBox = el<HTMLDivElement>("chips");
  chipsBox.replaceChildren();
  if (!session) return;
  session.chips.forEach((chip, index) => {
    const span = document.createElement("span");
    span.textContent = chip.surface;
    span.className = `chip marker-${chip.marker.toLowerCase()}`
      + (chip.banHint ? " ban-hint" : "")
      + (chip.userSet ? " user-set" : "");
    span.title = chip.marker + (chip.banHint ? " (in ban inventory)" : "");
    span.addEventListener("click", () => {
      if (!session) return;
      session.chips[index] = cycleMarker(session.chips[index]);
      render();
    });
    chipsBox.appendChild(span);
  });

  el<HTMLButtonElement>("submit").disabled = !canSubmit(session);
  (el<HTMLSelectElement>("profile")).value = session.profile;
  (el<HTMLSelectElement>("level")).value = session.level;

  const errorBox = el<HTMLDivElement>("error");
  if (session.error) {
    errorBox.hidden = false;
    el<HTMLSpanElement>("error-message").textContent =
      `${session.error.message} — ${session.error.blocking.join("; ")}`;
  } else {
    errorBox.hidden = true;
  }

  const outputBox = el<HTMLDivElement>("output");
  outputBox.replaceChildren();
  if (session.output) {
    const tokensLine = document.createElement("p");
    tokensLine.className = "output-tokens";
    tokensLine.textContent = session.output.output_tokens.join(" ");
    const templateLine = document.createElement("p");
    templateLine.className = "template";
    templateLine.textContent = session.output.template || "(empty template)";
    const diffLine = document.createElement("p");
    diffLine.className = "diff";
    for (const span of diffTokens(
      session.chips.map((c) => c.surface), session.output.output_tokens)) {
      const node = document.createElement("span");
      node.textContent = span.token + " ";
      node.className = `diff-${span.op}`;
      diffLine.appendChild(node);
    }
    const meta = document.createElement("p");
    meta.className = "meta";
    meta.textContent = `banned hits: ${session.output.banned_words_hit.join(", ") || "none"}`
      + ` · rules pruned: ${session.output.rules_banned_hit.join(", ") || "none"}`
      + ` · ${session.output.latency_ms.toFixed(0)} ms`;
    outputBox.append(tokensLine, templateLine, diffLine, meta);
  }

  const historyBox = el<HTMLOListElement>("history");
  historyBox.replaceChildren();
  for (const entry of session.history) {
    const item = document.createElement("li");
    item.textContent = `${entry.request.level}: ${entry.response.output_tokens.join(" ")}`;
    historyBox.appendChild(item);
  }
}

async function loadSentence(): Promise<void> {
  const text = el<HTMLInputElement>("sentence").value.trim();
  if (!text) return;
  const tokens = text.split(/\s+/);
  bannedWords = new Set<string>();
  for (const token of tokens) {
    try {
      const entries = await api.lexicon(token);
      for (const entry of entries) {
        if (entry.word === token) bannedWords.add(token);
      }
    } catch {
      // lexicon endpoint is advisory for chip hints only
    }
  }
  const profile = el<HTMLSelectElement>("profile").value;
  const level = el<HTMLSelectElement>("level").value;
  session = newSession(tokens, bannedWords, profile, level);
  render();
}

async function submit(): Promise<void> {
  if (!session || !canSubmit(session)) return;
  session = { ...session, pending: true };
  render();
  const request = buildRequest(session);
  try {
    const response = await api.simplify(request);
    session = applyResponse(session, request, response);
  } catch (err) {
    if (err instanceof ConstraintInfeasible) {
      session = markError(session, "constraints cannot be satisfied", err.blocking);
    } else {
      session = markError(session, String(err), []);
    }
  }
  render();
}

function bind(): void {
  el<HTMLButtonElement>("load").addEventListener("click", () => void loadSentence());
  el<HTMLButtonElement>("submit").addEventListener("click", () => void submit());
  el<HTMLButtonElement>("relax").addEventListener("click", () => {
    if (!session) return;
    session = relaxOverrides(session);
    render();
  });
  el<HTMLSelectElement>("profile").addEventListener("change", (event) => {
    if (session) session = { ...session, profile: (event.target as HTMLSelectElement).value };
  });
  el<HTMLSelectElement>("level").addEventListener("change", (event) => {
    if (session) session = { ...session, level: (event.target as HTMLSelectElement).value };
  });
  void api.health().then(
    () => { el<HTMLSpanElement>("status").textContent = "service: up"; },
    () => { el<HTMLSpanElement>("status").textContent = "service: unreachable"; },
  );
}

document.addEventListener("DOMContentLoaded", bind);
