// Shared test fixtures: a fake family, a stub Api whose methods fail loudly
// unless overridden, and a Ctx wired to real Store/MutationGate instances
// with recording confirm/navigate hooks.

import type { Api, FamilySummary } from "../src/api";
import type { Ctx } from "../src/ctx";
import { initialState, MutationGate, Store, type UiState } from "../src/state";

export const FAKE_FAMILY: FamilySummary = {
  family_id: "alp",
  display_name: "Alpine",
  pin: [6, 46],
  bounding_box: [5, 45, 7, 47],
  hex_resolution: 0.1,
  writing_direction: "LTR",
};

function unstubbed(name: string): () => never {
  return () => {
    throw new Error(`api.${name} called but not stubbed`);
  };
}

export function makeApi(overrides: Partial<Api> = {}): Api {
  const names: (keyof Api)[] = [
    "families",
    "labels",
    "divisions",
    "suggest",
    "lasso",
    "startSession",
    "session",
    "beginQuiz",
    "submitRewrite",
    "review",
    "setDifficulty",
    "beginMatch",
    "answerMatch",
    "correctMatch",
    "difficultyReport",
    "stats",
  ];
  const api = {} as Record<keyof Api, unknown>;
  for (const name of names) api[name] = unstubbed(name);
  return { ...(api as unknown as Api), ...overrides };
}

export interface TestCtx {
  ctx: Ctx;
  store: Store<UiState>;
  confirms: string[];
  navigations: string[];
  setConfirmResult: (value: boolean) => void;
  getGuard: () => (() => string | null) | null;
}

export function makeCtx(api: Api, state: Partial<UiState> = {}): TestCtx {
  const store = new Store<UiState>({ ...initialState, ...state });
  const gate = new MutationGate((busy) => store.set({ busy }));
  const confirms: string[] = [];
  const navigations: string[] = [];
  let confirmResult = true;
  let guard: (() => string | null) | null = null;
  const ctx: Ctx = {
    api,
    store,
    gate,
    confirmFn: (message) => {
      confirms.push(message);
      return confirmResult;
    },
    navigate: (hash) => {
      navigations.push(hash);
    },
    setGuard: (g) => {
      guard = g;
    },
  };
  return {
    ctx,
    store,
    confirms,
    navigations,
    setConfirmResult: (value) => {
      confirmResult = value;
    },
    getGuard: () => guard,
  };
}

/** Flush queued microtasks and zero-delay timers. */
export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
