// Quiz board: the standard sentence, a difficulty toggle, free-text input
// backed by draggable word blocks, and — after submitting — the predicted
// regions on the map plus the review question.

import type { FamilySummary, QuizItem, SubmitResult } from "../api";
import { ApiError } from "../api";
import { Composer } from "../blocks";
import { ensureSession, reportError, type Ctx } from "../ctx";
import { addCleanup, clear, el, errorBanner, resetView } from "../dom";
import { MapView } from "../mapview";
import { t } from "../messages";
import type { Tier } from "../api";
import { renderReviewPanel } from "./review";

export const SUGGEST_DEBOUNCE_MS = 150;
const TIERS: Tier[] = ["EASY", "NORMAL", "HARD"];
const PALETTE_SIZE = 12;

export async function renderQuiz(ctx: Ctx, root: HTMLElement, sessionId: string): Promise<void> {
  resetView(root);
  let stage: string;
  try {
    stage = (await ensureSession(ctx, sessionId)).stage;
  } catch (exc) {
    root.append(errorBanner(t("error.api"), t("error.retry"), () => void renderQuiz(ctx, root, sessionId)));
    return;
  }
  const family = ctx.store.get().family;
  if (!family) {
    root.append(errorBanner(t("error.api")));
    return;
  }

  const page = el("section", { class: "page quiz" });
  const badge = el("span", {
    class: "badge level",
    "data-role": "difficulty-badge",
    "data-level": ctx.store.get().level,
    title: t("quiz.badge_label"),
  }, t(`tier.${ctx.store.get().level}` as const));
  const header = el(
    "header",
    { class: "quiz-header" },
    el("h1", {}, t("quiz.title")),
    el("div", { class: "badge-box" }, el("span", { class: "hint" }, t("quiz.badge_label")), badge),
  );
  page.append(header);

  // Difficulty toggle: the one path that may lower the level.
  const toggle = el("div", { class: "difficulty-toggle", role: "group", "aria-label": t("quiz.difficulty_label") });
  const tierButtons = new Map<Tier, HTMLButtonElement>();
  for (const tier of TIERS) {
    const btn = el("button", { class: "tier-option", type: "button", "data-tier": tier }, t(`tier.${tier}` as const));
    btn.addEventListener("click", () => {
      const previous = ctx.store.get().level;
      if (tier === previous) return;
      void ctx.gate
        .run(() => ctx.api.setDifficulty(sessionId, tier), {
          optimistic: () => ctx.store.set({ level: tier }),
          rollback: () => ctx.store.set({ level: previous }),
        })
        .catch((exc) => reportError(ctx, exc));
    });
    tierButtons.set(tier, btn);
    toggle.append(btn);
  }
  page.append(toggle);

  const board = el("div", { class: "quiz-board" });
  const resultMount = el("div", { class: "quiz-result" });
  page.append(board, resultMount);
  root.append(page);

  const syncFromStore = () => {
    const state = ctx.store.get();
    badge.textContent = t(`tier.${state.level}` as const);
    badge.setAttribute("data-level", state.level);
    for (const [tier, btn] of tierButtons) {
      btn.classList.toggle("active", tier === state.level);
      btn.disabled = state.busy;
    }
    page.querySelectorAll<HTMLButtonElement>("[data-busy-disable]").forEach((btn) => {
      btn.disabled = state.busy || btn.hasAttribute("data-stay-disabled");
    });
  };
  addCleanup(root, ctx.store.subscribe(syncFromStore));
  syncFromStore();

  const nextRound = () => void renderQuiz(ctx, root, sessionId);

  if (stage === "REVIEW") {
    // Mid-turn reload: the submission's prediction is gone, but the open
    // turn still wants its review, so render the panel on its own.
    await renderReviewPanel(ctx, resultMount, null, nextRound);
    return;
  }

  let item: QuizItem;
  try {
    item = await ctx.api.beginQuiz(sessionId);
  } catch (exc) {
    if (exc instanceof ApiError && exc.status === 409) {
      await renderReviewPanel(ctx, resultMount, null, nextRound);
      return;
    }
    board.append(errorBanner(t("error.api"), t("error.retry"), nextRound));
    return;
  }
  ctx.store.set({ stage: "QUIZ" });
  renderBoard(ctx, board, resultMount, sessionId, family, item, nextRound);
}

function renderBoard(
  ctx: Ctx,
  board: HTMLElement,
  resultMount: HTMLElement,
  sessionId: string,
  family: FamilySummary,
  item: QuizItem,
  nextRound: () => void,
): void {
  clear(board);
  const rtl = family.writing_direction === "RTL";
  const composer = new Composer();

  board.append(
    el(
      "div",
      { class: "sentence-card" },
      el("span", { class: "hint" }, t("quiz.sentence_label")),
      el("p", { class: "standard-text" }, item.standard_text),
      el("span", { class: "chip tier-chip", "data-tier": item.tier }, t("quiz.item_tier", { tier: t(`tier.${item.tier}` as const) })),
    ),
  );

  const input = el("textarea", {
    class: "rewrite-input",
    rows: "2",
    placeholder: t("quiz.input_placeholder"),
    "aria-label": t("quiz.input_label"),
  });
  if (rtl) input.dir = "rtl";

  const chipRow = el("div", { class: "block-row" });
  if (rtl) chipRow.dir = "rtl";

  const submit = el("button", { class: "submit", type: "button", "data-busy-disable": "" }, t("quiz.submit"));

  const syncControls = () => {
    input.value = composer.text;
    renderChips();
    syncSubmit();
  };
  const syncSubmit = () => {
    if (composer.text.trim()) submit.removeAttribute("data-stay-disabled");
    else submit.setAttribute("data-stay-disabled", "");
    submit.disabled = ctx.store.get().busy || !composer.text.trim();
  };

  function renderChips(): void {
    clear(chipRow);
    composer.blocks.forEach((word, index) => {
      const chip = el("span", { class: "chip block", draggable: "true", "data-index": String(index) }, word);
      const remove = el("button", { class: "chip-remove", type: "button", "aria-label": `× ${word}` }, "×");
      remove.addEventListener("click", () => {
        composer.removeAt(index);
        syncControls();
      });
      chip.append(remove);
      chip.addEventListener("dragstart", (ev) => {
        ev.dataTransfer?.setData("text/plain", String(index));
      });
      chip.addEventListener("dragover", (ev) => ev.preventDefault());
      chip.addEventListener("drop", (ev) => {
        ev.preventDefault();
        const raw = ev.dataTransfer?.getData("text/plain");
        if (raw === undefined || raw === "") return;
        composer.move(Number.parseInt(raw, 10), index);
        syncControls();
      });
      chipRow.append(chip);
    });
  }

  input.addEventListener("input", () => {
    composer.setText(input.value);
    renderChips();
    syncSubmit();
  });

  // Suggestion palette: seeded from the quiz payload, refreshed from the
  // suggest endpoint on a short debounce while the player types a prefix.
  const palette = el("div", { class: "suggestion-row" });
  const search = el("input", {
    class: "suggestion-search",
    type: "search",
    placeholder: t("quiz.search_placeholder"),
  });
  const renderPalette = (words: string[]) => {
    clear(palette);
    for (const word of words.slice(0, PALETTE_SIZE)) {
      const btn = el("button", {
        class: "suggestion",
        type: "button",
        title: t("quiz.add_block", { word }),
      }, word);
      btn.addEventListener("click", () => {
        composer.add(word);
        syncControls();
      });
      palette.append(btn);
    }
  };
  renderPalette(item.suggestion_seed_words);

  let debounce: ReturnType<typeof setTimeout> | undefined;
  search.addEventListener("input", () => {
    clearTimeout(debounce);
    debounce = setTimeout(() => {
      const prefix = search.value.trim();
      if (!prefix) {
        renderPalette(item.suggestion_seed_words);
        return;
      }
      ctx.api
        .suggest(family.family_id, prefix)
        .then((res) => renderPalette(res.words))
        .catch(() => undefined); // suggestions are best-effort
    }, SUGGEST_DEBOUNCE_MS);
  });

  submit.addEventListener("click", () => {
    const text = composer.text.trim();
    if (!text) return;
    void ctx.gate
      .run(() => ctx.api.submitRewrite(sessionId, text))
      .then(async (result) => {
        ctx.store.set({ stage: "REVIEW", error: null });
        await renderResult(ctx, resultMount, family, result, nextRound);
        submit.setAttribute("data-stay-disabled", "");
        submit.disabled = true;
      })
      .catch((exc) => reportError(ctx, exc));
  });

  board.append(
    el("label", { class: "hint block-label" }, t("quiz.blocks_label")),
    chipRow,
    el("div", { class: "input-row" }, input),
    el("div", { class: "palette-box" }, search, palette),
    submit,
  );
  syncSubmit();
}

async function renderResult(
  ctx: Ctx,
  mount: HTMLElement,
  family: FamilySummary,
  result: SubmitResult,
  nextRound: () => void,
): Promise<void> {
  clear(mount);
  mount.append(el("h2", {}, t("quiz.map_title")));
  const mapBox = el("div", { class: "map-box" });
  mount.append(mapBox);
  const map = new MapView(mapBox, family.bounding_box, "map quizmap");
  for (const payload of result.region_payloads) {
    map.drawPolygon("regions", payload.boundary, "region", {
      title: payload.name,
      data: { label: payload.label_id },
    });
  }

  const legend = el("ul", { class: "legend", title: t("quiz.legend_tooltip") });
  legend.append(el("li", { class: "legend-title" }, t("quiz.legend_title")));
  const ranked = [...result.predicted_labels].sort(
    (a, b) => (result.prediction[b] ?? 0) - (result.prediction[a] ?? 0),
  );
  const names = new Map(result.region_payloads.map((p) => [p.label_id, p.name]));
  for (const labelId of ranked) {
    const pct = ((result.prediction[labelId] ?? 0) * 100).toFixed(1);
    legend.append(
      el(
        "li",
        { class: "legend-row", "data-label": labelId, title: t("quiz.legend_tooltip") },
        el("span", { class: "legend-name" }, names.get(labelId) ?? labelId),
        el("span", { class: "legend-pct" }, `${pct}%`),
      ),
    );
  }
  mount.append(legend);

  const reviewMount = el("div", { class: "review-mount" });
  mount.append(reviewMount);
  await renderReviewPanel(ctx, reviewMount, result, nextRound);
}
