// Per-app context threaded through the views: the API client, the state
// store, the mutation gate, navigation, and the leave-guard hook.

import { ApiError, type Api, type SessionState } from "./api";
import { t } from "./messages";
import type { Store, MutationGate, UiState } from "./state";

export interface Ctx {
  api: Api;
  store: Store<UiState>;
  gate: MutationGate;
  confirmFn: (message: string) => boolean;
  navigate: (hash: string) => void;
  setGuard: (guard: (() => string | null) | null) => void;
}

export function describeError(exc: unknown): string {
  if (exc instanceof ApiError) {
    return exc.status === 0 ? t("error.api") : exc.message;
  }
  return String(exc);
}

export function reportError(ctx: Ctx, exc: unknown): void {
  ctx.store.set({ error: describeError(exc) });
}

/**
 * Re-align the client with the server's view of the session.  Called on
 * entering a session route, so deep links and reloads recover family and
 * level context, and the UI stage matches the server stage.
 */
export async function ensureSession(ctx: Ctx, sessionId: string): Promise<SessionState> {
  const session = await ctx.api.session(sessionId);
  const state = ctx.store.get();
  if (state.sessionId !== sessionId || !state.family) {
    const families = await ctx.api.families();
    const family = families.find((f) => f.family_id === session.family_id) ?? null;
    ctx.store.set({
      sessionId,
      familyId: session.family_id,
      family,
      path: session.path,
      stage: session.stage,
      level: session.level,
      roundsPlayed: session.rounds_played,
    });
  } else {
    ctx.store.set({
      stage: session.stage,
      level: session.level,
      roundsPlayed: session.rounds_played,
    });
  }
  return session;
}
