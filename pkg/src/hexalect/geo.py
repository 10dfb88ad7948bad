"""Hexagon-grid dialect regions and administrative-division geometry.

Grid layout: pointy-top hexagons in axial coordinates (q, r), anchored at
the family bounding box's south-west corner, on a flat equirectangular
lon/lat plane. With circumradius R the cell center is

    lon = lon_min + R*sqrt(3) * (q + r/2)
    lat = lat_min + R*(3/2) * r

Hexagon vertices live on an integer lattice in units of (sqrt(3)*R/2,
R/2): cell (q, r) has its center at lattice point (2q + r, 3r) and its
six corners at fixed integer offsets from it.  Boundary extraction
cancels shared edges by exact integer comparison, so no floating-point
tolerance is involved until the final conversion to lon/lat.

All functions here are pure; registry mutation (region edits) is applied
through the corpus store's single writer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, TYPE_CHECKING

from .errors import ConflictingEdit, DegeneratePolygon, OutOfBounds, UnknownDivision

if TYPE_CHECKING:
    from .store import LanguageFamily

SQRT3 = math.sqrt(3.0)

Point = tuple[float, float]
Ring = list[Point]


class HexCell(NamedTuple):
    q: int
    r: int

    @property
    def cell_id(self) -> str:
        return f"{self.q}:{self.r}"

    @staticmethod
    def parse(cell_id: str) -> "HexCell":
        q_s, _, r_s = cell_id.partition(":")
        return HexCell(int(q_s), int(r_s))


# Corner offsets on the integer vertex lattice, counterclockwise from the
# top corner (lattice units: x = sqrt(3)*R/2, y = R/2).
_CORNER_OFFSETS = ((0, 2), (-1, 1), (-1, -1), (0, -2), (1, -1), (1, 1))


@dataclass(frozen=True)
class HexRegion:
    family_id: str
    cells: frozenset[HexCell]

    def cell_ids(self) -> list[str]:
        """Serialized form: cell ids sorted by (q, r)."""
        return [c.cell_id for c in sorted(self.cells)]

    @staticmethod
    def from_ids(family_id: str, ids: Iterable[str]) -> "HexRegion":
        return HexRegion(family_id, frozenset(HexCell.parse(i) for i in ids))


@dataclass(frozen=True)
class AdminDivision:
    division_id: str
    name: str
    polygon: list[Ring]  # first ring is the outer boundary

    def __post_init__(self):
        if not self.polygon:
            raise ValueError(f"division {self.division_id}: no rings")
        for ring in self.polygon:
            if len(ring) < 4:
                raise ValueError(f"division {self.division_id}: ring with < 4 points")
        outer = self.polygon[0]
        if tuple(outer[0]) != tuple(outer[-1]):
            raise ValueError(f"division {self.division_id}: outer ring not closed")


def hex_center(cell: HexCell, family: "LanguageFamily") -> Point:
    lon_min, lat_min, _, _ = family.bounding_box
    res = family.hex_resolution
    lon = lon_min + res * SQRT3 * (cell.q + cell.r / 2.0)
    lat = lat_min + res * 1.5 * cell.r
    return lon, lat


def cell_containing(lon: float, lat: float, family: "LanguageFamily") -> HexCell:
    """The cell whose hexagon contains the point (axial rounding)."""
    lon_min, lat_min, _, _ = family.bounding_box
    res = family.hex_resolution
    rf = (lat - lat_min) / (1.5 * res)
    qf = (lon - lon_min) / (SQRT3 * res) - rf / 2.0
    # cube rounding: x + y + z = 0 with x=q, z=r
    xf, zf = qf, rf
    yf = -xf - zf
    x, y, z = round(xf), round(yf), round(zf)
    dx, dy, dz = abs(x - xf), abs(y - yf), abs(z - zf)
    if dx > dy and dx > dz:
        x = -y - z
    elif dy > dz:
        pass  # y is derived; q and r stay
    else:
        z = -x - y
    return HexCell(int(x), int(z))


def cell_vertices(cell: HexCell) -> list[tuple[int, int]]:
    """Six corner positions on the integer vertex lattice, counterclockwise."""
    cx, cy = 2 * cell.q + cell.r, 3 * cell.r
    return [(cx + dx, cy + dy) for dx, dy in _CORNER_OFFSETS]


def lattice_to_lonlat(x: int, y: int, family: "LanguageFamily") -> Point:
    lon_min, lat_min, _, _ = family.bounding_box
    res = family.hex_resolution
    return lon_min + x * (SQRT3 * res / 2.0), lat_min + y * (res / 2.0)


def in_bounding_box(lon: float, lat: float, family: "LanguageFamily") -> bool:
    lon_min, lat_min, lon_max, lat_max = family.bounding_box
    return lon_min <= lon <= lon_max and lat_min <= lat <= lat_max


def _on_segment(px: float, py: float, ax: float, ay: float, bx: float, by: float) -> bool:
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    scale = max(abs(bx - ax), abs(by - ay), 1.0)
    if abs(cross) > 1e-9 * scale:
        return False
    return min(ax, bx) - 1e-12 <= px <= max(ax, bx) + 1e-12 and \
        min(ay, by) - 1e-12 <= py <= max(ay, by) + 1e-12


def point_in_polygon(point: Point, polygon: Sequence[Point]) -> bool:
    """Even-odd rule; points on the boundary count as inside."""
    px, py = point
    n = len(polygon)
    inside = False
    for i in range(n):
        ax, ay = polygon[i]
        bx, by = polygon[(i + 1) % n]
        if _on_segment(px, py, ax, ay, bx, by):
            return True
        if (ay > py) != (by > py):
            x_cross = ax + (py - ay) * (bx - ax) / (by - ay)
            if px < x_cross:
                inside = not inside
    return inside


def _distinct_vertices(polygon: Sequence[Point]) -> int:
    return len({(float(x), float(y)) for x, y in polygon})


def cells_in_lasso(polygon: Sequence[Point], family: "LanguageFamily") -> set[HexCell]:
    """Cells whose center falls inside the lasso polygon and the family box.

    The polygon is closed implicitly (last vertex connects to the first).
    """
    if _distinct_vertices(polygon) < 3:
        raise DegeneratePolygon(f"{_distinct_vertices(polygon)} distinct vertices")
    lon_min, lat_min, lon_max, lat_max = family.bounding_box
    res = family.hex_resolution
    lons = [p[0] for p in polygon]
    lats = [p[1] for p in polygon]
    lo_lon, hi_lon = max(min(lons), lon_min), min(max(lons), lon_max)
    lo_lat, hi_lat = max(min(lats), lat_min), min(max(lats), lat_max)
    if lo_lon > hi_lon or lo_lat > hi_lat:
        return set()

    hits: set[HexCell] = set()
    r_lo = math.floor((lo_lat - lat_min) / (1.5 * res)) - 1
    r_hi = math.ceil((hi_lat - lat_min) / (1.5 * res)) + 1
    for r in range(r_lo, r_hi + 1):
        q_lo = math.floor((lo_lon - lon_min) / (SQRT3 * res) - r / 2.0) - 1
        q_hi = math.ceil((hi_lon - lon_min) / (SQRT3 * res) - r / 2.0) + 1
        for q in range(q_lo, q_hi + 1):
            cell = HexCell(q, r)
            lon, lat = hex_center(cell, family)
            if in_bounding_box(lon, lat, family) and point_in_polygon((lon, lat), polygon):
                hits.add(cell)
    return hits


def edited_region(region: HexRegion, add: set[HexCell], remove: set[HexCell],
                  family: "LanguageFamily") -> HexRegion:
    """Validated region edit: (region ∪ add) \\ remove.

    Pure half of a geo edit; the store records the event and swaps the
    registry entry.  Raises before touching anything on overlap or
    out-of-bounds cells.
    """
    overlap = add & remove
    if overlap:
        raise ConflictingEdit(f"cells in both sets: {sorted(c.cell_id for c in overlap)}")
    for cell in list(add) + list(remove):
        lon, lat = hex_center(cell, family)
        if not in_bounding_box(lon, lat, family):
            raise OutOfBounds(cell.cell_id)
    return HexRegion(region.family_id, (region.cells | add) - remove)


def region_boundary(region: HexRegion, family: "LanguageFamily") -> list[Ring]:
    """Outer boundary rings of the hexagon union, holes included.

    Shared edges between adjacent cells cancel exactly on the integer
    lattice; what remains is stitched into closed rings.  Each ring is
    closed (first point repeated last) and starts at its smallest lattice
    vertex, so output is deterministic for a given cell set.
    """
    if not region.cells:
        return []
    edges: dict[tuple[int, int], tuple[int, int]] = {}
    seen: set[tuple[tuple[int, int], tuple[int, int]]] = set()
    for cell in region.cells:
        verts = cell_vertices(cell)
        for i in range(6):
            a, b = verts[i], verts[(i + 1) % 6]
            seen.add((a, b))
    for a, b in seen:
        if (b, a) not in seen:
            edges[a] = b

    rings: list[Ring] = []
    remaining = set(edges)
    while remaining:
        start = min(remaining)
        ring_lattice = [start]
        cur = edges[start]
        remaining.discard(start)
        while cur != start:
            ring_lattice.append(cur)
            remaining.discard(cur)
            cur = edges[cur]
        ring = [lattice_to_lonlat(x, y, family) for x, y in ring_lattice]
        ring.append(ring[0])
        rings.append(ring)
    rings.sort(key=lambda r: r[0])
    return rings


def boundary_edge_count(region: HexRegion, family: "LanguageFamily") -> int:
    return sum(len(ring) - 1 for ring in region_boundary(region, family))


def ring_centroid(ring: Sequence[Point]) -> Point:
    """Area centroid of a closed ring (falls back to the vertex mean when
    the ring is degenerate)."""
    pts = list(ring)
    if tuple(pts[0]) == tuple(pts[-1]):
        pts = pts[:-1]
    area2 = 0.0
    cx = cy = 0.0
    for i in range(len(pts)):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % len(pts)]
        w = x0 * y1 - x1 * y0
        area2 += w
        cx += (x0 + x1) * w
        cy += (y0 + y1) * w
    if abs(area2) < 1e-15:
        return sum(p[0] for p in pts) / len(pts), sum(p[1] for p in pts) / len(pts)
    return cx / (3.0 * area2), cy / (3.0 * area2)


def divisions_hit(selector: Iterable[str] | Sequence[Point],
                  divisions: dict[str, AdminDivision]) -> set[str]:
    """Resolve a selection to division ids.

    Accepts either explicit ids (validated against the registry) or a
    lasso polygon, which hits every division whose outer-ring centroid
    falls inside it.
    """
    selector = list(selector)
    if selector and isinstance(selector[0], str):
        ids = set()
        for division_id in selector:
            if division_id not in divisions:
                raise UnknownDivision(str(division_id))
            ids.add(division_id)
        return ids
    polygon = [(float(x), float(y)) for x, y in selector]
    if _distinct_vertices(polygon) < 3:
        raise DegeneratePolygon(f"{_distinct_vertices(polygon)} distinct vertices")
    return {
        d.division_id
        for d in divisions.values()
        if point_in_polygon(ring_centroid(d.polygon[0]), polygon)
    }


def region_divisions(region: HexRegion, divisions: dict[str, AdminDivision],
                     family: "LanguageFamily") -> set[str]:
    """Divisions whose centroid lies inside the region's hexagon union."""
    return {
        d.division_id
        for d in divisions.values()
        if cell_containing(*ring_centroid(d.polygon[0]), family) in region.cells
    }
