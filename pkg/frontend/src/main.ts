// Application bootstrap: wires the API client, shared state, the mutation
// gate, and a small hash router.  Everything views need arrives through the
// Ctx object, so tests can substitute any piece (fetch, confirm, storage).

import { createApi, type FetchLike } from "./api";
import type { Ctx } from "./ctx";
import { clear, el, errorBanner } from "./dom";
import { t } from "./messages";
import { initialState, MutationGate, Store, type UiState } from "./state";
import { renderChoice } from "./views/choice";
import { renderEntry } from "./views/entry";
import { renderMatch } from "./views/match";
import { onboardingSeen } from "./views/review";
import { renderQuiz } from "./views/quiz";

export interface BootOptions {
  /** Prefix for API requests; defaults to same-origin (or VITE_API_BASE). */
  apiBase?: string;
  /** Fetch implementation override, mainly for tests. */
  fetchFn?: FetchLike;
  /** Confirmation dialog; defaults to window.confirm. */
  confirmFn?: (message: string) => boolean;
}

export interface BootedApp {
  ctx: Ctx;
  route: () => void;
}

function detectBase(): string {
  const g = globalThis as Record<string, unknown>;
  if (typeof g.HEXALECT_API_BASE === "string") return g.HEXALECT_API_BASE;
  const envBase = import.meta.env?.VITE_API_BASE as string | undefined;
  return envBase ?? "";
}

export function boot(rootEl: HTMLElement, opts: BootOptions = {}): BootedApp {
  const api = createApi(opts.apiBase ?? detectBase(), opts.fetchFn);
  const store = new Store<UiState>({ ...initialState, onboarded: onboardingSeen() });
  const gate = new MutationGate((busy) => store.set({ busy }));
  const confirmFn = opts.confirmFn ?? ((message: string) => globalThis.confirm?.(message) ?? true);

  // Navigation guard: a view with unsaved edits registers a callback that
  // returns the confirmation prompt to show before leaving.
  let guard: (() => string | null) | null = null;
  const passGuard = (): boolean => {
    if (!guard) return true;
    const message = guard();
    if (message && !confirmFn(message)) return false;
    guard = null;
    return true;
  };

  clear(rootEl);
  const bannerMount = el("div", { class: "banner-mount" });
  const viewRoot = el("main", { class: "view" });
  rootEl.append(bannerMount, viewRoot);

  let shownError: string | null = null;
  store.subscribe(() => {
    const error = store.get().error;
    if (error === shownError) return;
    shownError = error;
    clear(bannerMount);
    if (error) bannerMount.append(errorBanner(error));
  });

  let currentHash = globalThis.location?.hash || "#/";

  const route = () => {
    store.set({ error: null });
    const hash = globalThis.location?.hash || "#/";
    const [page, arg] = hash.replace(/^#\/?/, "").split("/");
    if (page === "choice" && arg) {
      void renderChoice(ctx, viewRoot, decodeURIComponent(arg));
    } else if (page === "quiz" && arg) {
      void renderQuiz(ctx, viewRoot, decodeURIComponent(arg));
    } else if (page === "match" && arg) {
      void renderMatch(ctx, viewRoot, decodeURIComponent(arg));
    } else {
      void renderEntry(ctx, viewRoot);
    }
  };

  const navigate = (hash: string) => {
    if (!passGuard()) return;
    currentHash = hash;
    if (globalThis.location && globalThis.location.hash !== hash) {
      globalThis.location.hash = hash;
    }
    route();
  };

  const ctx: Ctx = {
    api,
    store,
    gate,
    confirmFn,
    navigate,
    setGuard: (g) => {
      guard = g;
    },
  };

  globalThis.addEventListener?.("hashchange", () => {
    const next = globalThis.location?.hash || "#/";
    if (next === currentHash) return;
    if (!passGuard()) {
      globalThis.location.hash = currentHash;
      return;
    }
    currentHash = next;
    route();
  });

  document.title = t("app.title");
  route();
  return { ctx, route };
}
