// Review panel: the satisfaction question after a quiz submission.  "No"
// opens the archived-dialect list (names and affiliations are display-only)
// plus "none of the above" for creating a new dialect, and the hexagon
// lasso editor for marking where the dialect is spoken.

import type { DialectLabel, FamilySummary, SubmitResult } from "../api";
import { reportError, type Ctx } from "../ctx";
import { clear, el, errorBanner } from "../dom";
import { RegionEditor } from "../lasso";
import { MapView } from "../mapview";
import { t } from "../messages";

const ONBOARD_KEY = "hexalect.lasso.onboarded";
const NEW_DIALECT = "__new__";

export function onboardingSeen(): boolean {
  try {
    return globalThis.localStorage?.getItem(ONBOARD_KEY) === "1";
  } catch {
    return false;
  }
}

function markOnboarded(): void {
  try {
    globalThis.localStorage?.setItem(ONBOARD_KEY, "1");
  } catch {
    // storage unavailable: the overlay will simply show again
  }
}

export async function renderReviewPanel(
  ctx: Ctx,
  mount: HTMLElement,
  submitResult: SubmitResult | null,
  onDone: () => void,
): Promise<void> {
  clear(mount);
  const sessionId = ctx.store.get().sessionId;
  const family = ctx.store.get().family;
  if (!sessionId || !family) {
    mount.append(errorBanner(t("error.api")));
    return;
  }

  const panel = el("section", { class: "review-panel" });
  panel.append(el("p", { class: "review-question" }, t("review.question")));

  const yes = el("button", { class: "review-yes", type: "button", "data-busy-disable": "" }, t("review.yes"));
  const no = el("button", { class: "review-no", type: "button", "data-busy-disable": "" }, t("review.no"));
  panel.append(el("div", { class: "review-actions" }, yes, no));

  const correctionMount = el("div", { class: "correction" });
  panel.append(correctionMount);
  mount.append(panel);

  const finishRound = (level: string | undefined) => {
    ctx.setGuard(null);
    ctx.store.set({
      ...(level ? { level: level as "EASY" | "NORMAL" | "HARD" } : {}),
      stage: "QUIZ",
      roundsPlayed: ctx.store.get().roundsPlayed + 1,
      error: null,
    });
    onDone();
  };

  yes.addEventListener("click", () => {
    void ctx.gate
      .run(() => ctx.api.review(sessionId, "confirm"))
      .then((res) => finishRound(res.new_level))
      .catch((exc) => reportError(ctx, exc));
  });

  no.addEventListener("click", () => {
    void renderCorrection(ctx, correctionMount, sessionId, family, finishRound);
  });
}

async function renderCorrection(
  ctx: Ctx,
  mount: HTMLElement,
  sessionId: string,
  family: FamilySummary,
  finishRound: (level: string | undefined) => void,
): Promise<void> {
  clear(mount);
  let labels: DialectLabel[];
  try {
    labels = await ctx.api.labels(family.family_id);
  } catch {
    mount.append(errorBanner(t("error.api")));
    return;
  }

  mount.append(el("h3", {}, t("review.pick_title")));
  const list = el("div", { class: "dialect-list", role: "radiogroup" });
  const options: HTMLInputElement[] = [];
  const makeOption = (value: string, label: Node) => {
    const input = el("input", { type: "radio", name: "dialect-pick", value });
    options.push(input);
    const row = el("label", { class: "dialect-option" }, input, label);
    list.append(row);
    return input;
  };

  for (const label of labels) {
    // Names and affiliations are read-only text: there is deliberately no
    // affordance anywhere for editing an existing dialect's identity.
    makeOption(
      label.label_id,
      el(
        "span",
        { class: "dialect-text" },
        el("span", { class: "dialect-name" }, label.name),
        " ",
        el("span", { class: "dialect-affiliation hint" }, t("review.affiliation", { name: label.affiliation })),
      ),
    );
  }
  makeOption(NEW_DIALECT, el("span", { class: "dialect-text none-of-above" }, t("review.none_of_above")));
  mount.append(list);

  const editorMount = el("div", { class: "editor-mount" });
  mount.append(editorMount);

  const byId = new Map(labels.map((label) => [label.label_id, label]));
  for (const input of options) {
    input.addEventListener("change", () => {
      if (!input.checked) return;
      const picked = input.value;
      const existing = picked === NEW_DIALECT ? null : byId.get(picked) ?? null;
      renderEditor(ctx, editorMount, sessionId, family, existing, finishRound);
    });
  }
}

function renderEditor(
  ctx: Ctx,
  mount: HTMLElement,
  sessionId: string,
  family: FamilySummary,
  existing: DialectLabel | null,
  finishRound: (level: string | undefined) => void,
): void {
  clear(mount);
  const editor = new RegionEditor(family, existing ? existing.cells : []);
  let saved = false;
  ctx.setGuard(() => (editor.dirty && !saved ? t("review.unsaved_confirm") : null));

  let nameInput: HTMLInputElement | null = null;
  if (!existing) {
    nameInput = el("input", {
      class: "dialect-name-input",
      type: "text",
      placeholder: t("review.new_name_placeholder"),
      "aria-label": t("review.new_name_label"),
    });
    mount.append(el("div", { class: "name-row" }, el("span", { class: "hint" }, t("review.new_name_label")), nameInput));
  }

  mount.append(el("h4", {}, t("review.editor_title")), el("p", { class: "hint" }, t("review.editor_help")));

  const mapBox = el("div", { class: "map-box editor-map" });
  mount.append(mapBox);
  const map = new MapView(mapBox, family.bounding_box, "map editmap");

  if (existing) {
    map.drawPolygon("context", existing.boundary, "region context", { title: existing.name });
  }

  const flash = el("p", { class: "flash", role: "status", "aria-live": "polite" });
  mount.append(flash);

  const refreshCells = () => {
    map.clearLayer("cells");
    for (const id of editor.cells) {
      const cls = editor.base.has(id) ? "cell base" : "cell added";
      map.drawCell("cells", id, family, cls);
    }
  };
  refreshCells();

  // First-use onboarding for the lasso tool.
  if (!onboardingSeen()) {
    const overlay = el(
      "div",
      { class: "onboarding" },
      el("h5", {}, t("review.onboarding_title")),
      el("p", {}, t("review.onboarding_body")),
    );
    const dismiss = el("button", { class: "onboarding-dismiss", type: "button" }, t("review.onboarding_dismiss"));
    dismiss.addEventListener("click", () => {
      markOnboarded();
      ctx.store.set({ onboarded: true });
      overlay.remove();
    });
    overlay.append(dismiss);
    mapBox.append(overlay);
  }

  // Lasso interaction: drag draws a loop (server resolves which cells fall
  // inside); a plain click toggles the single cell under the pointer.
  let dragging = false;
  let path: [number, number][] = [];
  const svg = map.svg;

  const onToggleOutcome = (outcome: string) => {
    flash.textContent = outcome === "rejected" ? t("review.out_of_bounds") : "";
    if (outcome !== "rejected") refreshCells();
  };

  svg.addEventListener("mousedown", (ev) => {
    dragging = true;
    path = [map.mapPoint(ev)];
  });
  svg.addEventListener("mousemove", (ev) => {
    if (!dragging) return;
    path.push(map.mapPoint(ev));
    map.clearLayer("preview");
    map.drawLine("preview", path, "lasso-path");
  });
  svg.addEventListener("mouseup", (ev) => {
    if (!dragging) return;
    dragging = false;
    map.clearLayer("preview");
    const finished = [...path, map.mapPoint(ev)];
    path = [];
    const distinct = new Set(finished.map(([x, y]) => `${x},${y}`));
    if (distinct.size < 3) {
      const [x, y] = finished[finished.length - 1];
      onToggleOutcome(editor.toggleAt(x, y));
      return;
    }
    ctx.api
      .lasso(family.family_id, finished)
      .then((res) => {
        editor.applyLasso(res.cells);
        refreshCells();
        flash.textContent = "";
      })
      .catch((exc) => reportError(ctx, exc));
  });

  const save = el("button", { class: "save", type: "button", "data-busy-disable": "" }, t("review.save"));
  const cancel = el("button", { class: "cancel", type: "button" }, t("review.cancel"));
  mount.append(el("div", { class: "editor-actions" }, save, cancel));

  cancel.addEventListener("click", () => {
    ctx.setGuard(null);
    clear(mount);
  });

  save.addEventListener("click", () => {
    const decision = existing
      ? ({ label: existing.label_id } as const)
      : ({ new_dialect: (nameInput?.value ?? "").trim() } as const);
    if (!existing && !(nameInput?.value ?? "").trim()) {
      flash.textContent = t("review.new_name_label");
      return;
    }
    const geo = editor.geoEdit();
    const body = editor.dirty ? geo : undefined;
    void ctx.gate
      .run(() => ctx.api.review(sessionId, decision, body))
      .then((res) => {
        saved = true;
        flash.textContent = t("review.saved");
        finishRound(res.level);
      })
      .catch((exc) => reportError(ctx, exc));
  });
}
