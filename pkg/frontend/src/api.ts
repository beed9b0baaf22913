// Typed client for the simplification service's JSON API.

export type MarkerName = "KEEP" | "REPLACE" | "INDIFFERENT";

export interface SimplifyRequest {
  tokens: string[];
  markers: (MarkerName | null)[] | null;
  profile: string;
  level: string;
  beam_size?: number;
}

export interface SimplifyResponse {
  output_tokens: string[];
  template: string;
  applied_markers: MarkerName[];
  banned_words_hit: string[];
  rules_banned_hit: string[];
  latency_ms: number;
}

export interface LexiconEntry {
  word: string;
  stem: string;
  ratio: number | null;
  in_dictionary: boolean;
  targets: string[];
}

export class ConstraintInfeasible extends Error {
  blocking: string[];
  constructor(blocking: string[]) {
    super("no feasible output under the active constraints");
    this.blocking = blocking;
  }
}

export class ApiClient {
  constructor(private baseUrl: string, private fetchFn: typeof fetch = fetch) {}

  async health(): Promise<{ status: string }> {
    const res = await this.fetchFn(`${this.baseUrl}/health`);
    if (!res.ok) throw new Error(`health check failed: ${res.status}`);
    return res.json();
  }

  async simplify(request: SimplifyRequest): Promise<SimplifyResponse> {
    const res = await this.fetchFn(`${this.baseUrl}/simplify`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
    if (res.status === 422) {
      const body = await res.json().catch(() => null);
      const detail = body?.detail;
      if (detail && detail.error === "constraint_infeasible") {
        throw new ConstraintInfeasible(detail.blocking ?? []);
      }
      throw new Error(`validation error: ${JSON.stringify(detail)}`);
    }
    if (!res.ok) {
      const body = await res.text();
      throw new Error(`simplify failed (${res.status}): ${body}`);
    }
    return res.json();
  }

  async lexicon(prefix: string): Promise<LexiconEntry[]> {
    const res = await this.fetchFn(
      `${this.baseUrl}/lexicon?prefix=${encodeURIComponent(prefix)}`,
    );
    if (!res.ok) throw new Error(`lexicon lookup failed: ${res.status}`);
    const body = await res.json();
    return body.entries;
  }

  async rules(): Promise<{ ranked: { rule: string; ratio: number }[] }> {
    const res = await this.fetchFn(`${this.baseUrl}/rules`);
    if (!res.ok) throw new Error(`rules lookup failed: ${res.status}`);
    return res.json();
  }
}
