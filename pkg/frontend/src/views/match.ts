// Match flow: guess which administrative divisions a dialect sample comes
// from.  Items are presented one at a time; each reveal shows the reference
// divisions and an overlap score, with a correction path when the player
// disagrees with the reference mapping.

import type { Division, MatchItemView } from "../api";
import { describeError, ensureSession, reportError, type Ctx } from "../ctx";
import { addCleanup, clear, el, errorBanner, resetView } from "../dom";
import { MapView } from "../mapview";
import { t } from "../messages";

export async function renderMatch(ctx: Ctx, root: HTMLElement, sessionId: string): Promise<void> {
  resetView(root);
  try {
    await ensureSession(ctx, sessionId);
  } catch (exc) {
    root.append(errorBanner(describeError(exc), t("error.retry"), () => void renderMatch(ctx, root, sessionId)));
    return;
  }
  const family = ctx.store.get().family;
  if (!family) {
    root.append(errorBanner(t("error.api")));
    return;
  }

  root.append(el("h1", {}, t("match.title")));
  const counter = el("p", { class: "match-counter", "data-role": "match-counter" });
  root.append(counter, el("p", { class: "hint" }, t("match.instructions")));

  let items: MatchItemView[];
  let divisions: Division[];
  try {
    [items, divisions] = await Promise.all([
      ctx.api.beginMatch(sessionId).then((round) => round.items),
      ctx.api.divisions(family.family_id),
    ]);
  } catch (exc) {
    root.append(errorBanner(describeError(exc)), el("a", { class: "nav-home", href: "#/" }, t("nav.home")));
    return;
  }

  const board = el("section", { class: "match-board" });
  root.append(board);

  const syncBusy = () => {
    const busy = ctx.store.get().busy;
    for (const btn of root.querySelectorAll<HTMLButtonElement>("[data-busy-disable]")) {
      btn.disabled = busy || btn.hasAttribute("data-stay-disabled");
    }
  };
  addCleanup(root, ctx.store.subscribe(syncBusy));

  const scores: number[] = [];

  const showSummary = () => {
    clear(board);
    counter.textContent = "";
    board.append(el("h2", {}, t("match.summary_title")));
    const list = el("ul", { class: "match-summary" });
    scores.forEach((score, i) => {
      list.append(el("li", {}, t("match.summary_item", { n: String(i + 1), score: score.toFixed(2) })));
    });
    board.append(list);
    const mean = scores.length ? scores.reduce((a, b) => a + b, 0) / scores.length : 0;
    board.append(el("p", { class: "match-mean" }, t("match.summary_mean", { score: mean.toFixed(2) })));
    const again = el("button", { class: "play-again", type: "button" }, t("match.play_again"));
    again.addEventListener("click", () => ctx.navigate("#/"));
    board.append(again);
  };

  const showItem = (idx: number) => {
    clear(board);
    const item = items[idx];
    counter.textContent = t("match.item_counter", { n: String(idx + 1), total: String(items.length) });

    const text = el("p", { class: "match-text" }, item.text);
    if (family.writing_direction === "RTL") text.dir = "rtl";
    board.append(text);

    const mapBox = el("div", { class: "map-box" });
    board.append(mapBox);
    const map = new MapView(mapBox, family.bounding_box, "map matchmap");

    const selection = new Set<string>();
    const pathEls = new Map<string, SVGPathElement>();
    // "answer" and "correct" accept clicks; "reveal" and "done" are locked.
    let phase: "answer" | "reveal" | "correct" | "done" = "answer";

    for (const division of divisions) {
      const path = map.drawPolygon("divisions", division.polygon, "division", {
        title: division.name,
        data: { division: division.division_id },
      });
      path.addEventListener("click", () => {
        if (phase !== "answer" && phase !== "correct") return;
        if (ctx.store.get().busy) return;
        if (selection.has(division.division_id)) {
          selection.delete(division.division_id);
          path.classList.remove("selected");
        } else {
          selection.add(division.division_id);
          path.classList.add("selected");
        }
      });
      pathEls.set(division.division_id, path);
    }

    const status = el("p", { class: "match-status", role: "status", "aria-live": "polite" });
    const actions = el("div", { class: "match-actions" });
    board.append(status, actions);

    const advance = () => {
      if (idx + 1 < items.length) showItem(idx + 1);
      else showSummary();
    };

    const showReveal = (referenceDivisions: string[], score: number) => {
      phase = "reveal";
      scores.push(score);
      for (const id of referenceDivisions) pathEls.get(id)?.classList.add("reference");
      status.textContent = t("match.score", { score: score.toFixed(2) });
      clear(actions);
      actions.append(el("span", { class: "hint" }, t("match.reference_label")));
      const agree = el("button", { class: "agree", type: "button", "data-busy-disable": "" }, t("match.agree"));
      const disagree = el("button", { class: "disagree", type: "button", "data-busy-disable": "" }, t("match.disagree"));
      actions.append(agree, disagree);
      agree.addEventListener("click", advance);
      disagree.addEventListener("click", () => showCorrection());
    };

    const showCorrection = () => {
      phase = "correct";
      clear(actions);
      actions.append(el("span", { class: "hint" }, t("match.correction_title")));
      const send = el(
        "button",
        { class: "correction-submit", type: "button", "data-busy-disable": "" },
        t("match.correction_submit"),
      );
      actions.append(send);
      send.addEventListener("click", () => {
        void ctx.gate
          .run(() => ctx.api.correctMatch(sessionId, item.item_index, [...selection].sort()))
          .then(() => {
            phase = "done";
            status.textContent = t("match.corrected");
            clear(actions);
            const next = el("button", { class: "next", type: "button", "data-busy-disable": "" }, t("match.next"));
            next.addEventListener("click", advance);
            actions.append(next);
          })
          .catch((exc) => reportError(ctx, exc));
      });
    };

    const submit = el("button", { class: "match-submit", type: "button", "data-busy-disable": "" }, t("match.submit"));
    actions.append(submit);
    submit.addEventListener("click", () => {
      if (selection.size === 0 && !ctx.confirmFn(t("match.confirm_empty"))) return;
      void ctx.gate
        .run(() => ctx.api.answerMatch(sessionId, item.item_index, [...selection].sort()))
        .then((reveal) => showReveal(reveal.reference_divisions, reveal.score))
        .catch((exc) => reportError(ctx, exc));
    });
  };

  showItem(0);
  syncBusy();
}
