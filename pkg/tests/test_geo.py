"""Hex-grid geometry: centers, containment, lassos, boundaries, divisions.

Boundary and lasso results are checked against brute-force oracles that
recompute the answer from first principles (per-edge cancellation counts,
point-in-polygon over every candidate cell) rather than trusting the
implementation's bookkeeping.
"""
import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hexalect import geo
from hexalect.errors import ConflictingEdit, DegeneratePolygon, OutOfBounds, UnknownDivision
from hexalect.geo import AdminDivision, HexCell, HexRegion
from hexalect.store import LanguageFamily

SQRT3 = math.sqrt(3.0)

FAM = LanguageFamily("fam", "Fam", (5.0, 45.0, 7.0, 47.0), 0.1)


def region_of(family, cells):
    return HexRegion(family.family_id, frozenset(HexCell(q, r) for q, r in cells))


def neighbors(cell):
    q, r = cell
    return {HexCell(q + 1, r), HexCell(q - 1, r), HexCell(q, r + 1),
            HexCell(q, r - 1), HexCell(q + 1, r - 1), HexCell(q - 1, r + 1)}


def adjacent_pairs(cells):
    return sum(1 for a in cells for b in neighbors(a) if b in cells) // 2


def lonlat_to_lattice(point, family):
    """Invert the exact lattice->lonlat map (test-side only)."""
    lon_min, lat_min, _, _ = family.bounding_box
    res = family.hex_resolution
    x = (point[0] - lon_min) / (SQRT3 * res / 2.0)
    y = (point[1] - lat_min) / (res / 2.0)
    xi, yi = round(x), round(y)
    assert abs(x - xi) < 1e-6 and abs(y - yi) < 1e-6
    return xi, yi


def brute_boundary_edges(cells):
    """Undirected lattice edges used by exactly one hexagon."""
    counts = Counter()
    for cell in cells:
        verts = geo.cell_vertices(cell)
        for i in range(6):
            a, b = verts[i], verts[(i + 1) % 6]
            counts[frozenset((a, b))] += 1
    assert set(counts.values()) <= {1, 2}
    return {e for e, n in counts.items() if n == 1}


class TestHexCenter:
    def test_origin_cell_sits_at_box_corner(self, family):
        assert geo.hex_center(HexCell(0, 0), family) == (5.0, 45.0)

    def test_unit_q_step(self, family):
        lon, lat = geo.hex_center(HexCell(1, 0), family)
        assert lon == pytest.approx(5.17321, abs=5e-6)
        assert lat == pytest.approx(45.0)

    def test_unit_r_step(self, family):
        lon, lat = geo.hex_center(HexCell(0, 1), family)
        assert lon == pytest.approx(5.08660, abs=5e-6)
        assert lat == pytest.approx(45.15)

    def test_negative_axial_coordinates(self, family):
        lon, lat = geo.hex_center(HexCell(-2, 3), family)
        assert lon == pytest.approx(5.0 + 0.1 * SQRT3 * (-2 + 1.5))
        assert lat == pytest.approx(45.45)


class TestCellContaining:
    @given(q=st.integers(-30, 30), r=st.integers(-30, 30))
    def test_center_round_trip(self, q, r):
        family = FAM
        cell = HexCell(q, r)
        lon, lat = geo.hex_center(cell, family)
        assert geo.cell_containing(lon, lat, family) == cell

    @given(lon=st.floats(5.0, 7.0), lat=st.floats(45.0, 47.0))
    @settings(max_examples=200)
    def test_matches_nearest_center(self, lon, lat):
        family = FAM
        got = geo.cell_containing(lon, lat, family)
        # brute-force Voronoi oracle over a window of candidate cells
        res = family.hex_resolution
        r0 = round((lat - 45.0) / (1.5 * res))
        q0 = round((lon - 5.0) / (SQRT3 * res) - r0 / 2.0)
        best = None
        dists = []
        for dq in range(-2, 3):
            for dr in range(-2, 3):
                cell = HexCell(q0 + dq, r0 + dr)
                cx, cy = geo.hex_center(cell, family)
                d = (cx - lon) ** 2 + (cy - lat) ** 2
                dists.append(d)
                if best is None or d < best[0]:
                    best = (d, cell)
        dists.sort()
        if dists[1] - dists[0] < 1e-12:  # boundary tie: either winner is fine
            got_d = (geo.hex_center(got, family)[0] - lon) ** 2 + \
                    (geo.hex_center(got, family)[1] - lat) ** 2
            assert got_d == pytest.approx(dists[0], abs=1e-9)
        else:
            assert got == best[1]

    def test_point_clearly_inside_neighbor(self, family):
        # just past the shared edge between (0,0) and (1,0)
        assert geo.cell_containing(5.0 + 0.1 * SQRT3 * 0.55, 45.0, family) == HexCell(1, 0)


class TestRegionBoundary:
    def test_single_cell_is_a_closed_hexagon(self, family):
        rings = geo.region_boundary(region_of(family, [(0, 0)]), family)
        assert len(rings) == 1
        ring = rings[0]
        assert len(ring) == 7
        assert ring[0] == ring[-1]
        # all six corners at distance R from the center
        for x, y in ring[:-1]:
            d = math.hypot(x - 5.0, y - 45.0)
            assert d == pytest.approx(0.1, rel=1e-9)

    def test_two_adjacent_cells_share_one_edge(self, family):
        rings = geo.region_boundary(region_of(family, [(0, 0), (1, 0)]), family)
        assert len(rings) == 1
        assert len(rings[0]) == 11  # 10 edges: 6 + 6 - 2 shared

    def test_empty_region(self, family):
        assert geo.region_boundary(HexRegion("fam", frozenset()), family) == []

    def test_ring_of_cells_encloses_a_hole(self, family):
        ring_cells = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]
        rings = geo.region_boundary(region_of(family, ring_cells), family)
        assert len(rings) == 2  # outer boundary plus the hole around (0,0)
        sizes = sorted(len(r) for r in rings)
        assert sizes[0] == 7  # the hole is a single hexagon

    def test_disconnected_cells_make_separate_rings(self, family):
        rings = geo.region_boundary(region_of(family, [(0, 0), (5, 5)]), family)
        assert len(rings) == 2
        assert all(len(r) == 7 for r in rings)

    def test_deterministic_output(self, family):
        region = region_of(family, [(0, 0), (1, 0), (0, 1), (2, 1), (4, 4)])
        assert geo.region_boundary(region, family) == geo.region_boundary(region, family)

    @given(st.sets(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=50))
    @settings(max_examples=60, deadline=None)
    def test_matches_edge_cancellation_oracle(self, cells):
        family = FAM
        region = region_of(family, cells)
        rings = geo.region_boundary(region, family)
        got = set()
        for ring in rings:
            lattice = [lonlat_to_lattice(p, family) for p in ring]
            assert lattice[0] == lattice[-1]
            for a, b in zip(lattice, lattice[1:]):
                assert a != b
                got.add(frozenset((a, b)))
        expected = brute_boundary_edges(region.cells)
        assert got == expected
        assert geo.boundary_edge_count(region, family) == len(expected)

    @given(st.sets(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=50))
    @settings(max_examples=60, deadline=None)
    def test_edge_count_formula(self, cells):
        family = FAM
        region = region_of(family, cells)
        n_edges = geo.boundary_edge_count(region, family)
        assert n_edges == 6 * len(cells) - 2 * adjacent_pairs(cells)


class TestLasso:
    def brute_force(self, polygon, family):
        lon_min, lat_min, lon_max, lat_max = family.bounding_box
        res = family.hex_resolution
        hits = set()
        for r in range(-2, int((lat_max - lat_min) / (1.5 * res)) + 3):
            for q in range(-20, int((lon_max - lon_min) / (SQRT3 * res)) + 21):
                cell = HexCell(q, r)
                lon, lat = geo.hex_center(cell, family)
                if geo.in_bounding_box(lon, lat, family) and \
                        geo.point_in_polygon((lon, lat), polygon):
                    hits.add(cell)
        return hits

    def test_rectangle_lasso(self, family):
        polygon = [(5.0, 45.0), (5.5, 45.0), (5.5, 45.5), (5.0, 45.5)]
        got = geo.cells_in_lasso(polygon, family)
        assert got == self.brute_force(polygon, family)
        assert HexCell(1, 1) in got

    def test_triangle_lasso(self, family):
        polygon = [(5.1, 45.1), (6.4, 45.2), (5.7, 46.3)]
        got = geo.cells_in_lasso(polygon, family)
        assert got == self.brute_force(polygon, family)
        assert got  # non-trivial selection

    def test_concave_lasso(self, family):
        polygon = [(5.0, 45.0), (6.0, 45.0), (6.0, 46.0),
                   (5.5, 45.2), (5.0, 46.0)]
        got = geo.cells_in_lasso(polygon, family)
        assert got == self.brute_force(polygon, family)

    def test_lasso_outside_box_selects_nothing(self, family):
        polygon = [(10.0, 50.0), (11.0, 50.0), (10.5, 51.0)]
        assert geo.cells_in_lasso(polygon, family) == set()

    def test_lasso_clipped_to_bounding_box(self, family):
        polygon = [(4.0, 44.0), (8.0, 44.0), (8.0, 48.0), (4.0, 48.0)]
        got = geo.cells_in_lasso(polygon, family)
        assert got == self.brute_force(polygon, family)
        for cell in got:
            assert geo.in_bounding_box(*geo.hex_center(cell, family), family)

    def test_degenerate_polygon_rejected(self, family):
        with pytest.raises(DegeneratePolygon):
            geo.cells_in_lasso([(5.0, 45.0), (5.5, 45.5)], family)
        with pytest.raises(DegeneratePolygon):
            geo.cells_in_lasso([(5.0, 45.0), (5.0, 45.0), (5.5, 45.5)], family)

    @given(st.lists(st.tuples(st.floats(4.5, 7.5), st.floats(44.5, 47.5)),
                    min_size=3, max_size=8))
    @settings(max_examples=40, deadline=None)
    def test_matches_brute_force(self, points):
        family = FAM
        if len({(x, y) for x, y in points}) < 3:
            return
        assert geo.cells_in_lasso(points, family) == self.brute_force(points, family)


class TestPointInPolygon:
    square = [(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)]

    def test_interior_and_exterior(self):
        assert geo.point_in_polygon((1.0, 1.0), self.square)
        assert not geo.point_in_polygon((3.0, 1.0), self.square)

    def test_boundary_counts_as_inside(self):
        assert geo.point_in_polygon((0.0, 1.0), self.square)
        assert geo.point_in_polygon((2.0, 2.0), self.square)
        assert geo.point_in_polygon((1.0, 0.0), self.square)

    def test_concave_notch(self):
        poly = [(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (2.0, 1.5), (0.0, 4.0)]
        assert geo.point_in_polygon((0.5, 0.5), poly)
        assert not geo.point_in_polygon((2.0, 3.0), poly)  # inside the notch


class TestEditedRegion:
    def test_add_and_remove(self, family):
        region = region_of(family, [(0, 0), (1, 0)])
        out = geo.edited_region(region, {HexCell(2, 0)}, {HexCell(0, 0)}, family)
        assert out.cells == frozenset({HexCell(1, 0), HexCell(2, 0)})

    def test_overlap_rejected_before_any_change(self, family):
        region = region_of(family, [(0, 0)])
        with pytest.raises(ConflictingEdit):
            geo.edited_region(region, {HexCell(1, 0)}, {HexCell(1, 0)}, family)

    def test_out_of_bounds_cell_rejected(self, family):
        region = region_of(family, [(0, 0)])
        with pytest.raises(OutOfBounds):
            geo.edited_region(region, {HexCell(500, 0)}, set(), family)
        with pytest.raises(OutOfBounds):
            geo.edited_region(region, set(), {HexCell(0, -50)}, family)

    def test_removing_absent_cell_is_a_no_op(self, family):
        region = region_of(family, [(0, 0)])
        out = geo.edited_region(region, set(), {HexCell(3, 3)}, family)
        assert out.cells == region.cells

    @given(
        base=st.sets(st.tuples(st.integers(0, 5), st.integers(0, 5)), max_size=12),
        add=st.sets(st.tuples(st.integers(0, 5), st.integers(0, 5)), max_size=6),
        rem=st.sets(st.tuples(st.integers(0, 5), st.integers(0, 5)), max_size=6),
    )
    @settings(max_examples=80)
    def test_set_algebra_and_idempotence(self, base, add, rem):
        family = FAM
        add_cells = {HexCell(*c) for c in add}
        rem_cells = {HexCell(*c) for c in rem} - add_cells
        region = region_of(family, base)
        once = geo.edited_region(region, add_cells, rem_cells, family)
        assert once.cells == (region.cells | add_cells) - rem_cells
        twice = geo.edited_region(once, add_cells, rem_cells, family)
        assert twice == once


def square_division(division_id, x0, y0, size=0.5, name=None):
    ring = [(x0, y0), (x0 + size, y0), (x0 + size, y0 + size), (x0, y0 + size), (x0, y0)]
    return AdminDivision(division_id, name or division_id.title(), [ring])


class TestDivisions:
    @pytest.fixture
    def divisions(self):
        return {
            "west": square_division("west", 5.0, 45.0),
            "east": square_division("east", 6.0, 45.0),
            "north": square_division("north", 5.5, 46.0),
        }

    def test_by_ids(self, divisions):
        assert geo.divisions_hit(["west", "north"], divisions) == {"west", "north"}

    def test_unknown_id_rejected(self, divisions):
        with pytest.raises(UnknownDivision):
            geo.divisions_hit(["west", "atlantis"], divisions)

    def test_by_lasso_centroid(self, divisions):
        lasso = [(4.9, 44.9), (5.6, 44.9), (5.6, 45.6), (4.9, 45.6)]
        assert geo.divisions_hit(lasso, divisions) == {"west"}

    def test_lasso_spanning_two(self, divisions):
        lasso = [(4.9, 44.9), (6.6, 44.9), (6.6, 45.6), (4.9, 45.6)]
        assert geo.divisions_hit(lasso, divisions) == {"west", "east"}

    def test_region_divisions_uses_centroid_cell(self, family, divisions):
        # region around the centroid of "west" (5.25, 45.25)
        cell = geo.cell_containing(5.25, 45.25, family)
        region = HexRegion("fam", frozenset({cell}))
        assert geo.region_divisions(region, divisions, family) == {"west"}

    def test_region_far_from_all_divisions(self, family, divisions):
        region = region_of(family, [(12, 12)])
        assert geo.region_divisions(region, divisions, family) == set()

    def test_malformed_division_rejected(self):
        with pytest.raises(ValueError):
            AdminDivision("bad", "Bad", [[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0)]])
        with pytest.raises(ValueError):
            AdminDivision("open", "Open", [[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]])

    def test_ring_centroid_of_square(self):
        ring = [(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0), (0.0, 0.0)]
        assert geo.ring_centroid(ring) == pytest.approx((1.0, 1.0))
