// Client-side mirror of the server's hexagon grid: pointy-top hexes in
// axial coordinates (q, r) anchored at the family bounding box's south-west
// corner.  With circumradius R the cell center sits at
//
//     x = x_min + R*sqrt(3) * (q + r/2)
//     y = y_min + R*(3/2) * r
//
// and the six corners live on an integer lattice in units of
// (sqrt(3)*R/2, R/2).  Used only for drawing and click handling — the
// server remains the authority on which cells a lasso covers.

export const SQRT3 = Math.sqrt(3);

export interface FamilyGeom {
  bounding_box: [number, number, number, number];
  hex_resolution: number;
}

export interface Cell {
  q: number;
  r: number;
}

export function cellKey(cell: Cell): string {
  return `${cell.q}:${cell.r}`;
}

export function parseCell(id: string): Cell {
  const sep = id.indexOf(":");
  const q = Number.parseInt(id.slice(0, sep), 10);
  const r = Number.parseInt(id.slice(sep + 1), 10);
  if (!Number.isFinite(q) || !Number.isFinite(r)) throw new Error(`bad cell id: ${id}`);
  return { q, r };
}

export function hexCenter(cell: Cell, fam: FamilyGeom): [number, number] {
  const [xMin, yMin] = fam.bounding_box;
  const res = fam.hex_resolution;
  return [xMin + res * SQRT3 * (cell.q + cell.r / 2), yMin + res * 1.5 * cell.r];
}

// The server rounds half-to-even; Math.round rounds half up, which would
// disagree exactly on tie points, so mirror the server's rule.
export function roundHalfEven(x: number): number {
  const floor = Math.floor(x);
  const diff = x - floor;
  if (diff < 0.5) return floor;
  if (diff > 0.5) return floor + 1;
  return floor % 2 === 0 ? floor : floor + 1;
}

export function cellContaining(x: number, y: number, fam: FamilyGeom): Cell {
  const [xMin, yMin] = fam.bounding_box;
  const res = fam.hex_resolution;
  const rf = (y - yMin) / (1.5 * res);
  const qf = (x - xMin) / (SQRT3 * res) - rf / 2;
  // cube rounding: qf + yf + rf = 0
  const yf = -qf - rf;
  let q = roundHalfEven(qf);
  const cy = roundHalfEven(yf);
  let r = roundHalfEven(rf);
  const dq = Math.abs(q - qf);
  const dy = Math.abs(cy - yf);
  const dr = Math.abs(r - rf);
  if (dq > dy && dq > dr) {
    q = -cy - r;
  } else if (dy > dr) {
    // axial coordinates keep q and r as rounded
  } else {
    r = -q - cy;
  }
  return { q, r };
}

// Corner offsets on the integer vertex lattice, counterclockwise from the
// top corner (lattice units: x = sqrt(3)*R/2, y = R/2).
const CORNER_OFFSETS: [number, number][] = [
  [0, 2],
  [-1, 1],
  [-1, -1],
  [0, -2],
  [1, -1],
  [1, 1],
];

export function cellPolygon(cell: Cell, fam: FamilyGeom): [number, number][] {
  const [xMin, yMin] = fam.bounding_box;
  const res = fam.hex_resolution;
  const cx = 2 * cell.q + cell.r;
  const cy = 3 * cell.r;
  return CORNER_OFFSETS.map(([dx, dy]) => [
    xMin + (cx + dx) * ((SQRT3 * res) / 2),
    yMin + (cy + dy) * (res / 2),
  ]);
}

export function inBBox(x: number, y: number, fam: FamilyGeom): boolean {
  const [xMin, yMin, xMax, yMax] = fam.bounding_box;
  return xMin <= x && x <= xMax && yMin <= y && y <= yMax;
}

export function cellInBounds(cell: Cell, fam: FamilyGeom): boolean {
  const [x, y] = hexCenter(cell, fam);
  return inBBox(x, y, fam);
}
