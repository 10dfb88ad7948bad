// Choice page: pick the quiz path (you speak a dialect and will rewrite
// sentences) or the match path (you'll guess where sentences are from).

import { type Ctx, reportError } from "../ctx";
import { clear, el, errorBanner } from "../dom";
import { t } from "../messages";

export async function renderChoice(ctx: Ctx, root: HTMLElement, familyId: string): Promise<void> {
  clear(root);
  let family = ctx.store.get().family;
  if (!family || family.family_id !== familyId) {
    try {
      const families = await ctx.api.families();
      family = families.find((f) => f.family_id === familyId) ?? null;
    } catch {
      root.append(errorBanner(t("error.api"), t("error.retry"), () => void renderChoice(ctx, root, familyId)));
      return;
    }
    if (!family) {
      root.append(errorBanner(t("error.api")));
      return;
    }
    ctx.store.set({ family, familyId });
  }

  const page = el("section", { class: "page choice" });
  page.append(el("h1", {}, t("choice.title", { family: family.display_name })));

  const start = (familiar: boolean) => {
    void ctx.gate
      .run(() => ctx.api.startSession(familyId, familiar))
      .then((info) => {
        ctx.store.set({
          sessionId: info.session_id,
          path: info.path,
          stage: info.path,
          level: info.level,
          roundsPlayed: 0,
          error: null,
        });
        ctx.navigate(info.path === "QUIZ" ? `#/quiz/${info.session_id}` : `#/match/${info.session_id}`);
      })
      .catch((exc) => reportError(ctx, exc));
  };

  const quizBtn = el(
    "button",
    { class: "choice-card choice-quiz", type: "button" },
    el("strong", {}, t("choice.quiz")),
    el("span", { class: "hint" }, t("choice.quiz_hint")),
  );
  quizBtn.addEventListener("click", () => start(true));

  const matchBtn = el(
    "button",
    { class: "choice-card choice-match", type: "button" },
    el("strong", {}, t("choice.match")),
    el("span", { class: "hint" }, t("choice.match_hint")),
  );
  matchBtn.addEventListener("click", () => start(false));

  page.append(el("div", { class: "choice-cards" }, quizBtn, matchBtn));
  const home = el("a", { class: "nav-home", href: "#/" }, t("nav.home"));
  page.append(home);
  root.append(page);
}
