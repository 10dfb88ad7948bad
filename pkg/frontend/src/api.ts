// Typed client for the game server's HTTP API.  Every request goes through
// one helper so error envelopes ({code, message}) surface uniformly.

export type Tier = "EASY" | "NORMAL" | "HARD";
export type Point = [number, number];
export type Ring = Point[];

export interface FamilySummary {
  family_id: string;
  display_name: string;
  pin: Point;
  bounding_box: [number, number, number, number];
  hex_resolution: number;
  writing_direction: "LTR" | "RTL";
}

export interface DialectLabel {
  label_id: string;
  name: string;
  affiliation: string;
  cells: string[];
  boundary: Ring[];
}

export interface Division {
  division_id: string;
  name: string;
  polygon: Ring[];
}

export interface SessionInfo {
  session_id: string;
  path: "QUIZ" | "MATCH";
  level: Tier;
}

export interface SessionState {
  session_id: string;
  family_id: string;
  path: "QUIZ" | "MATCH";
  stage: string;
  level: Tier;
  rounds_played: number;
}

export interface QuizItem {
  group_id: string;
  standard_text: string;
  tier: Tier;
  suggestion_seed_words: string[];
}

export interface RegionPayload {
  label_id: string;
  name: string;
  boundary: Ring[];
}

export interface SubmitResult {
  prediction: Record<string, number>;
  predicted_labels: string[];
  region_payloads: RegionPayload[];
}

export type ReviewDecision = "confirm" | { label: string } | { new_dialect: string };

export interface GeoEdit {
  add: string[];
  remove: string[];
}

export interface ReviewResult {
  new_level?: Tier;
  label_id?: string;
  level?: Tier;
}

export interface MatchItemView {
  item_index: number;
  variant_id: string;
  text: string;
}

export interface MatchReveal {
  reference_divisions: string[];
  score: number;
}

export interface DifficultyReport {
  family_id: string;
  model_version: number;
  model_hash: string | null;
  rows: { group_id: string; score: number; tier: Tier }[];
}

export interface FamilyStats {
  family_id: string;
  groups: number;
  variants: number;
  labels: number;
  events: number;
  model_version: number;
  model_hash: string | null;
  micro_f1: number | null;
  macro_f1: number | null;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface Api {
  families(): Promise<FamilySummary[]>;
  labels(familyId: string): Promise<DialectLabel[]>;
  divisions(familyId: string): Promise<Division[]>;
  suggest(familyId: string, prefix: string): Promise<{ words: string[] }>;
  lasso(familyId: string, polygon: Point[]): Promise<{ cells: string[] }>;
  startSession(familyId: string, familiar: boolean): Promise<SessionInfo>;
  session(sessionId: string): Promise<SessionState>;
  beginQuiz(sessionId: string): Promise<QuizItem>;
  submitRewrite(sessionId: string, text: string): Promise<SubmitResult>;
  review(sessionId: string, decision: ReviewDecision, geoEdit?: GeoEdit): Promise<ReviewResult>;
  setDifficulty(sessionId: string, tier: Tier): Promise<{ level: Tier }>;
  beginMatch(sessionId: string): Promise<{ items: MatchItemView[] }>;
  answerMatch(sessionId: string, itemIndex: number, divisions: string[]): Promise<MatchReveal>;
  correctMatch(sessionId: string, itemIndex: number, divisions: string[]): Promise<{ event_id: number }>;
  difficultyReport(familyId: string): Promise<DifficultyReport>;
  stats(familyId: string): Promise<FamilyStats>;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

const defaultFetch: FetchLike = (input, init) => globalThis.fetch(input, init);

export function createApi(base = "", fetchFn: FetchLike = defaultFetch): Api {
  async function request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await fetchFn(base + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (exc) {
      throw new ApiError(0, "network", String(exc));
    }
    if (!response.ok) {
      let code = `http_${response.status}`;
      let message = response.statusText || code;
      try {
        const doc = (await response.json()) as { code?: string; message?: string };
        if (doc.code) code = doc.code;
        if (doc.message) message = doc.message;
      } catch {
        // non-JSON error body: keep the status fallback
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  return {
    families: () => request("GET", "/api/families"),
    labels: (f) => request("GET", `/api/families/${encodeURIComponent(f)}/labels`),
    divisions: (f) => request("GET", `/api/families/${encodeURIComponent(f)}/divisions`),
    suggest: (f, prefix) =>
      request(
        "GET",
        `/api/families/${encodeURIComponent(f)}/suggest?prefix=${encodeURIComponent(prefix)}`,
      ),
    lasso: (f, polygon) =>
      request("POST", `/api/families/${encodeURIComponent(f)}/lasso`, { polygon }),
    startSession: (familyId, familiar) =>
      request("POST", "/api/sessions", { family_id: familyId, familiar }),
    session: (sid) => request("GET", `/api/sessions/${encodeURIComponent(sid)}`),
    beginQuiz: (sid) => request("GET", `/api/sessions/${encodeURIComponent(sid)}/quiz`),
    submitRewrite: (sid, text) =>
      request("POST", `/api/sessions/${encodeURIComponent(sid)}/quiz/submit`, { text }),
    review: (sid, decision, geoEdit) =>
      request("POST", `/api/sessions/${encodeURIComponent(sid)}/review`, {
        decision,
        ...(geoEdit ? { geo_edit: geoEdit } : {}),
      }),
    setDifficulty: (sid, tier) =>
      request("POST", `/api/sessions/${encodeURIComponent(sid)}/difficulty`, { tier }),
    beginMatch: (sid) => request("GET", `/api/sessions/${encodeURIComponent(sid)}/match`),
    answerMatch: (sid, itemIndex, divisions) =>
      request("POST", `/api/sessions/${encodeURIComponent(sid)}/match/${itemIndex}`, {
        divisions,
      }),
    correctMatch: (sid, itemIndex, divisions) =>
      request("POST", `/api/sessions/${encodeURIComponent(sid)}/match/${itemIndex}/correction`, {
        divisions,
      }),
    difficultyReport: (f) =>
      request("GET", `/api/admin/difficulty/${encodeURIComponent(f)}`),
    stats: (f) => request("GET", `/api/admin/stats/${encodeURIComponent(f)}`),
  };
}
