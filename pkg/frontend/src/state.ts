// Client-side session state: a tiny observable store plus the gate that
// keeps at most one mutating request in flight and rolls back optimistic
// updates when the server rejects them.

import type { FamilySummary, Tier } from "./api";

export interface UiState {
  familyId: string | null;
  family: FamilySummary | null;
  sessionId: string | null;
  path: "QUIZ" | "MATCH" | null;
  stage: string | null;
  level: Tier;
  roundsPlayed: number;
  busy: boolean;
  error: string | null;
  onboarded: boolean;
}

export const initialState: UiState = {
  familyId: null,
  family: null,
  sessionId: null,
  path: null,
  stage: null,
  level: "EASY",
  roundsPlayed: 0,
  busy: false,
  error: null,
  onboarded: false,
};

export type Listener<S> = (state: S) => void;

export class Store<S extends object> {
  private listeners = new Set<Listener<S>>();

  constructor(private state: S) {}

  get(): S {
    return this.state;
  }

  set(patch: Partial<S>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  subscribe(listener: Listener<S>): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }
}

export class BusyError extends Error {
  constructor() {
    super("another request is already in flight");
    this.name = "BusyError";
  }
}

export interface MutationOptions {
  /** Applied immediately, before the request is sent. */
  optimistic?: () => void;
  /** Applied when the request fails; must undo `optimistic`. */
  rollback?: () => void;
}

export class MutationGate {
  private inFlight = false;

  constructor(private onBusyChange?: (busy: boolean) => void) {}

  get busy(): boolean {
    return this.inFlight;
  }

  async run<T>(op: () => Promise<T>, options: MutationOptions = {}): Promise<T> {
    if (this.inFlight) throw new BusyError();
    this.inFlight = true;
    this.onBusyChange?.(true);
    options.optimistic?.();
    try {
      return await op();
    } catch (exc) {
      options.rollback?.();
      throw exc;
    } finally {
      this.inFlight = false;
      this.onBusyChange?.(false);
    }
  }
}
