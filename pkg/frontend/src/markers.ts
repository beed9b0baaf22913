// Token chip state: the three-way marker cycle and session bookkeeping.
// All marking semantics live server-side; the client only tracks explicit
// user overrides and mirrors whatever markers the server reports applying.

import type { MarkerName, SimplifyRequest, SimplifyResponse } from "./api.js";

export interface TokenChip {
  surface: string;
  // marker shown on the chip; mirrors the last server-applied markers
  marker: MarkerName;
  // set only when the user explicitly cycled the chip; sent as an override
  userSet: MarkerName | null;
  // the word is in the ban inventory (complex list or dictionary source)
  banHint: boolean;
}

export interface HistoryEntry {
  request: SimplifyRequest;
  response: SimplifyResponse;
}

export interface SessionView {
  chips: TokenChip[];
  profile: string;
  level: string;
  output: SimplifyResponse | null;
  history: HistoryEntry[];
  pending: boolean;
  error: { message: string; blocking: string[] } | null;
}

const CYCLE: Record<MarkerName, MarkerName> = {
  INDIFFERENT: "KEEP",
  KEEP: "REPLACE",
  REPLACE: "INDIFFERENT",
};

export function cycleMarker(chip: TokenChip): TokenChip {
  const next = CYCLE[chip.userSet ?? chip.marker];
  return { ...chip, marker: next, userSet: next };
}

export function makeChips(tokens: string[], bannedWords: Set<string>): TokenChip[] {
  return tokens.map((surface) => {
    const banned = bannedWords.has(surface);
    return {
      surface,
      marker: banned ? "REPLACE" : "INDIFFERENT",
      userSet: null,
      banHint: banned,
    };
  });
}

export function newSession(tokens: string[], bannedWords: Set<string>,
                           profile = "NEWSELA", level = "SIMPLE"): SessionView {
  return {
    chips: makeChips(tokens, bannedWords),
    profile,
    level,
    output: null,
    history: [],
    pending: false,
    error: null,
  };
}

export function canSubmit(session: SessionView): boolean {
  return session.chips.length > 0 && !session.pending;
}

export function buildRequest(session: SessionView, beamSize?: number): SimplifyRequest {
  const overrides = session.chips.map((chip) => chip.userSet);
  return {
    tokens: session.chips.map((chip) => chip.surface),
    markers: overrides.some((m) => m !== null) ? overrides : null,
    profile: session.profile,
    level: session.level,
    ...(beamSize ? { beam_size: beamSize } : {}),
  };
}

/** Fold a server response into the session: chips mirror applied markers,
 * the exchange is appended to the (append-only) history. */
export function applyResponse(session: SessionView, request: SimplifyRequest,
                              response: SimplifyResponse): SessionView {
  assertNoBannedTokens(response);
  const chips = session.chips.map((chip, i) => ({
    ...chip,
    marker: response.applied_markers[i] ?? chip.marker,
  }));
  return {
    ...session,
    chips,
    output: response,
    history: [...session.history, { request, response }],
    pending: false,
    error: null,
  };
}

/** Render-side guard: the service never returns banned tokens; refuse to
 * display an output that violates that. */
export function assertNoBannedTokens(response: SimplifyResponse): void {
  const banned = new Set(response.banned_words_hit);
  for (const token of response.output_tokens) {
    if (banned.has(token)) {
      throw new Error(`banned token in output: ${token}`);
    }
  }
}

/** One-click relax: clear the overrides named in the blocking constraints
 * (falls back to clearing every override). */
export function relaxOverrides(session: SessionView): SessionView {
  const chips = session.chips.map((chip) => ({
    ...chip,
    userSet: null,
    marker: chip.banHint ? ("REPLACE" as MarkerName) : ("INDIFFERENT" as MarkerName),
  }));
  return { ...session, chips, error: null };
}

export function markError(session: SessionView, message: string,
                          blocking: string[]): SessionView {
  return { ...session, pending: false, error: { message, blocking } };
}
