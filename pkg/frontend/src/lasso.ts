// Region-edit bookkeeping for the hexagon lasso editor.  Tracks the edit
// delta (added / removed cells) against a base region so the save request
// can send exactly {add, remove}.  Bounds checks mirror the server's: a
// cell counts as inside when its center is inside the bounding box.

import { cellContaining, cellInBounds, cellKey, parseCell, type FamilyGeom } from "./hex";

export type ToggleOutcome = "added" | "removed" | "rejected";

export class RegionEditor {
  readonly base: ReadonlySet<string>;
  private added = new Set<string>();
  private removed = new Set<string>();

  constructor(
    private fam: FamilyGeom,
    base: Iterable<string> = [],
  ) {
    this.base = new Set(base);
  }

  get cells(): Set<string> {
    const out = new Set(this.base);
    for (const id of this.added) out.add(id);
    for (const id of this.removed) out.delete(id);
    return out;
  }

  get dirty(): boolean {
    return this.added.size > 0 || this.removed.size > 0;
  }

  toggle(id: string): ToggleOutcome {
    if (!cellInBounds(parseCell(id), this.fam)) return "rejected";
    if (this.cells.has(id)) {
      if (this.added.has(id)) this.added.delete(id);
      else this.removed.add(id);
      return "removed";
    }
    if (this.removed.has(id)) this.removed.delete(id);
    else this.added.add(id);
    return "added";
  }

  toggleAt(x: number, y: number): ToggleOutcome {
    return this.toggle(cellKey(cellContaining(x, y, this.fam)));
  }

  /** Add every in-bounds cell not already present; returns how many joined. */
  applyLasso(ids: Iterable<string>): number {
    let count = 0;
    const present = this.cells;
    for (const id of ids) {
      if (present.has(id)) continue;
      if (!cellInBounds(parseCell(id), this.fam)) continue;
      if (this.removed.has(id)) this.removed.delete(id);
      else this.added.add(id);
      present.add(id);
      count += 1;
    }
    return count;
  }

  geoEdit(): { add: string[]; remove: string[] } {
    return { add: [...this.added].sort(), remove: [...this.removed].sort() };
  }

  reset(): void {
    this.added.clear();
    this.removed.clear();
  }
}
