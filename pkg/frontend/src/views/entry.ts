// Entry page: a world map with one keyboard-focusable pin per language
// family at its advertised coordinates.

import type { FamilySummary } from "../api";
import { type Ctx } from "../ctx";
import { clear, el, errorBanner } from "../dom";
import { MapView, svgEl } from "../mapview";
import { t } from "../messages";

const WORLD: [number, number, number, number] = [-180, -90, 180, 90];

export async function renderEntry(ctx: Ctx, root: HTMLElement): Promise<void> {
  clear(root);
  const page = el("section", { class: "page entry" });
  page.append(el("h1", {}, t("entry.title")), el("p", { class: "hint" }, t("entry.hint")));
  const mapBox = el("div", { class: "world" });
  page.append(mapBox);
  root.append(page);

  let families: FamilySummary[];
  try {
    families = await ctx.api.families();
  } catch {
    mapBox.append(errorBanner(t("error.api"), t("error.retry"), () => void renderEntry(ctx, root)));
    return;
  }

  const world = new MapView(mapBox, WORLD, "map worldmap");
  world.layer("frame").appendChild(
    svgEl("rect", { x: "-180", y: "-90", width: "360", height: "180", class: "world-frame" }),
  );
  for (let lon = -120; lon <= 120; lon += 60) {
    world.drawLine("graticule", [
      [lon, -90],
      [lon, 90],
    ], "graticule-line");
  }
  for (let lat = -60; lat <= 60; lat += 30) {
    world.drawLine("graticule", [
      [-180, lat],
      [180, lat],
    ], "graticule-line");
  }

  for (const family of families) {
    const pin = el(
      "button",
      {
        class: "pin",
        type: "button",
        "data-family": family.family_id,
        title: family.display_name,
      },
      el("span", { class: "pin-dot", "aria-hidden": "true" }),
      el("span", { class: "pin-name" }, family.display_name),
    );
    const [lon, lat] = family.pin;
    pin.style.left = `${((lon + 180) / 360) * 100}%`;
    pin.style.top = `${((90 - lat) / 180) * 100}%`;
    pin.addEventListener("click", () => {
      ctx.store.set({ familyId: family.family_id, family });
      ctx.navigate(`#/choice/${family.family_id}`);
    });
    mapBox.append(pin);
  }
}
