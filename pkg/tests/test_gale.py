"""Tests for hypercox.gale.

The face-test oracle here is deliberately independent of the library's
cyclic-gap criterion: it builds exact rational coordinates for the
polygon directions and decides origin-in-convex-hull by scanning
Caratheodory triples with exact cross products.  Soundness of the
rational approximation: when no antipodal direction pair is present the
origin is strictly inside or strictly outside the hull, at distance at
least sin(pi/(2k)) >= 0.1 for k <= 15 (the minimal origin-to-chord
distance over non-antipodal chords of the unit circle), which dwarfs
the ~1e-15 coordinate error of Fraction(math.cos(...)).  Antipodal
pairs (the only boundary cases, where closed hulls contain the origin)
are detected exactly from the integer direction indices first.
"""

import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercox.gale import (
    FacetAssignment,
    GaleDiagram,
    GaleParseError,
    InvalidSubset,
    RuleViolation,
    TooLarge,
    arc_facets,
    enumerate_standard,
    face_lattice_json,
    faces,
    is_face,
    is_pyramid,
    iter_standard,
    parse_gale,
    serialize_gale,
    validate,
    vertices,
)
from hypercox.gale import _dihedral_canonical


# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------

def rational_direction(k, d):
    """Exact rational point close to (cos, sin) of angle pi*d/k."""
    angle = math.pi * d / k
    return (Fraction(math.cos(angle)), Fraction(math.sin(angle)))


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _origin_in_triangle(pa, pb, pc):
    zero = (Fraction(0), Fraction(0))
    s1 = _cross(pa, pb, zero)
    s2 = _cross(pb, pc, zero)
    s3 = _cross(pc, pa, zero)
    return (s1 >= 0 and s2 >= 0 and s3 >= 0) or (s1 <= 0 and s2 <= 0 and s3 <= 0)


def oracle_contains_origin(k, dirs):
    """Exact: origin in the closed convex hull of the given directions."""
    dirs = sorted(set(dirs))
    for d in dirs:
        if (d + k) % (2 * k) in dirs:
            return True
    points = [rational_direction(k, d) for d in dirs]
    return any(
        _origin_in_triangle(pa, pb, pc)
        for pa, pb, pc in itertools.combinations(points, 3)
    )


def oracle_is_face(g, asg, subset):
    subset = set(subset)
    if any(f not in subset for f in asg.origin_facets):
        return True
    dirs = [
        pos
        for pos, fs in enumerate(asg.vertex_facets)
        if any(f not in subset for f in fs)
    ]
    return oracle_contains_origin(g.k, dirs)


def brute_standard_orbits(n, k_max):
    """Exhaustive product scan; only affordable for tiny label sums."""
    total = n + 3
    out = set()
    for k in range(2, k_max + 1):
        for origin in range(total + 1):
            s = total - origin
            for labels in itertools.product(range(s + 1), repeat=2 * k):
                if sum(labels) != s:
                    continue
                if validate(GaleDiagram(k, labels, origin)):
                    continue
                out.add((k, _dihedral_canonical(labels), origin))
    return out


def dp_raw_count(k, total_sum):
    """Count raw label vectors of length 2k with the given sum, no two
    cyclically adjacent zeros and no opposite pair both zero, via a
    transfer-style DP over opposite pairs (independent of the library's
    DFS).  Valid as a standardness count only for k >= 5, where the
    half-plane rule follows from the adjacency rule."""

    def pair_ways(za, zb, s):
        if za and zb:
            return 0
        if za or zb:
            return 1 if s >= 1 else 0
        return max(0, s - 1)

    flags = [(za, zb) for za in (False, True) for zb in (False, True)]
    count = 0
    for first in flags:
        # state[(za, zb)][partial_sum] = ways, with the first pair's
        # flags fixed so the two wrap adjacencies can be checked at the end
        state = {}
        for s in range(total_sum + 1):
            w = pair_ways(*first, s)
            if w:
                state.setdefault(first, [0] * (total_sum + 1))
                state[first][s] += w
        for _ in range(k - 1):
            nxt = {}
            for (za, zb), sums in state.items():
                for nza, nzb in flags:
                    if (za and nza) or (zb and nzb):
                        continue
                    for s, w in enumerate(sums):
                        if not w:
                            continue
                        for extra in range(total_sum - s + 1):
                            pw = pair_ways(nza, nzb, extra)
                            if pw:
                                arr = nxt.setdefault(
                                    (nza, nzb), [0] * (total_sum + 1)
                                )
                                arr[s + extra] += w * pw
            state = nxt
        fza, fzb = first
        for (za, zb), sums in state.items():
            # wrap adjacencies: position k-1 with k, and 2k-1 with 0
            if (za and fzb) or (zb and fza):
                continue
            count += sums[total_sum]
    return count


def orbit_size(labels):
    period = len(labels)
    doubled = labels + labels
    images = {tuple(doubled[s : s + period]) for s in range(period)}
    rev = labels[::-1]
    doubled = rev + rev
    images |= {tuple(doubled[s : s + period]) for s in range(period)}
    return len(images)


PENTAGON = GaleDiagram(5, (1, 0, 1, 0, 1, 0, 1, 0, 1, 0), 0)
PENTAGON_ASG = FacetAssignment.standard(PENTAGON)
PYR_CUBE = GaleDiagram(3, (2, 0, 2, 0, 2, 0), 1)
PYR_CUBE_ASG = FacetAssignment.standard(PYR_CUBE)
ALL_ONES = GaleDiagram(3, (1, 1, 1, 1, 1, 1), 1)
ALL_ONES_ASG = FacetAssignment.standard(ALL_ONES)


def small_pool():
    pool = [PENTAGON, PYR_CUBE, ALL_ONES]
    pool += enumerate_standard(3, 4)
    pool += enumerate_standard(4, 4)[:8]
    return pool


# ---------------------------------------------------------------------------
# GaleDiagram basics
# ---------------------------------------------------------------------------

class TestGaleDiagram:
    def test_fields(self):
        g = PENTAGON
        assert g.k == 5
        assert g.total == 5
        assert g.dimension == 2
        assert g.facet_count == 5
        assert not is_pyramid(g)
        assert is_pyramid(PYR_CUBE)

    def test_label_is_one_based_and_cyclic(self):
        g = GaleDiagram(2, (1, 2, 3, 4), 0)
        assert [g.label(i) for i in (1, 2, 3, 4)] == [1, 2, 3, 4]
        assert g.label(5) == 1
        assert g.label(0) == 4
        assert g.label(-1) == 3

    def test_rejects_bad_k(self):
        with pytest.raises(ValueError, match="k must be"):
            GaleDiagram(1, (1, 1), 0)
        with pytest.raises(ValueError, match="k must be"):
            GaleDiagram("3", (1,) * 6, 0)

    def test_rejects_wrong_label_count(self):
        with pytest.raises(ValueError, match="need 6 labels"):
            GaleDiagram(3, (1, 1, 1, 1), 0)

    def test_rejects_non_integer_or_negative_labels(self):
        with pytest.raises(ValueError, match="non-negative integers"):
            GaleDiagram(2, (1, -1, 1, 1), 0)
        with pytest.raises(ValueError, match="non-negative integers"):
            GaleDiagram(2, (1, 1.5, 1, 1), 0)
        with pytest.raises(ValueError, match="non-negative integers"):
            GaleDiagram(2, (1, True, 1, 1), 0)
        with pytest.raises(ValueError, match="non-negative integers"):
            GaleDiagram(2, (1, 1, 1, 1), -2)

    def test_immutable_and_hashable(self):
        g = GaleDiagram(2, (2, 2, 2, 2), 0)
        with pytest.raises(Exception):
            g.k = 3
        assert g == GaleDiagram(2, (2, 2, 2, 2), 0)
        assert hash(g) == hash(GaleDiagram(2, (2, 2, 2, 2), 0))

    def test_list_labels_normalized_to_tuple(self):
        g = GaleDiagram(2, [1, 1, 1, 1], 0)
        assert g.labels == (1, 1, 1, 1)


# ---------------------------------------------------------------------------
# Standardness rules
# ---------------------------------------------------------------------------

class TestValidate:
    def test_pentagon_is_standard(self):
        assert validate(PENTAGON) == []

    def test_pyramid_examples_are_standard(self):
        assert validate(PYR_CUBE) == []
        assert validate(ALL_ONES) == []

    def test_rule1_total_too_small(self):
        got = validate(GaleDiagram(2, (1, 1, 1, 1), 0))
        assert any(v.rule == 1 for v in got)

    def test_rule2_adjacent_zeros(self):
        got = validate(GaleDiagram(3, (0, 0, 3, 1, 1, 1), 0))
        hits = [v for v in got if v.rule == 2]
        assert len(hits) == 1
        assert hits[0].positions == (1, 2)

    def test_rule2_wraparound(self):
        got = validate(GaleDiagram(3, (0, 3, 1, 1, 1, 0), 0))
        hits = [v for v in got if v.rule == 2]
        assert len(hits) == 1
        assert hits[0].positions == (6, 1)

    def test_rule3_opposite_zeros(self):
        got = validate(GaleDiagram(2, (1, 0, 1, 0), 0))
        hits = [v for v in got if v.rule == 3]
        assert len(hits) == 1
        assert hits[0].positions == (2, 4)

    def test_rule4_half_plane(self):
        # k=2: each open half-plane bounded by a diagonal sees a single
        # vertex, so every label must be >= 2
        got = validate(GaleDiagram(2, (2, 2, 1, 2), 0))
        hits = [v for v in got if v.rule == 4]
        assert len(hits) == 1
        assert hits[0].positions == (3,)
        assert validate(GaleDiagram(2, (2, 2, 2, 2), 0)) == []

    def test_rule4_k3(self):
        # k=3: windows of two consecutive vertices must sum to >= 2;
        # (1, 0) neighbors fail even though rules 2 and 3 hold
        got = validate(GaleDiagram(3, (1, 0, 1, 1, 3, 1), 0))
        assert any(v.rule == 4 for v in got)
        assert validate(GaleDiagram(3, (1, 1, 1, 1, 2, 1), 0)) == []

    def test_rule4_never_fires_alone_for_k5(self):
        # adjacency already forces two consecutive vertices to carry
        # weight, and windows of length k-1 >= 4 contain such a pair
        rng = random.Random(7)
        for _ in range(300):
            labels = tuple(rng.randrange(3) for _ in range(10))
            got = validate(GaleDiagram(5, labels, 0))
            if not any(v.rule == 2 for v in got):
                assert not any(v.rule == 4 for v in got)

    def test_violation_reports_are_descriptive(self):
        v = validate(GaleDiagram(2, (1, 0, 1, 0), 0))
        assert all(isinstance(x, RuleViolation) for x in v)
        assert any("opposite" in str(x) for x in v)


# ---------------------------------------------------------------------------
# Facet assignments
# ---------------------------------------------------------------------------

class TestFacetAssignment:
    def test_standard_layout(self):
        assert PENTAGON_ASG.vertex_facets == (
            (0,), (), (1,), (), (2,), (), (3,), (), (4,), (),
        )
        assert PENTAGON_ASG.origin_facets == ()
        assert PYR_CUBE_ASG.vertex_facets == (
            (0, 1), (), (2, 3), (), (4, 5), (),
        )
        assert PYR_CUBE_ASG.origin_facets == (6,)

    def test_partition_enforced(self):
        with pytest.raises(ValueError, match="partition"):
            FacetAssignment(((0,), (0,)), ())
        with pytest.raises(ValueError, match="partition"):
            FacetAssignment(((0,), (2,)), ())

    def test_matches(self):
        assert PENTAGON_ASG.matches(PENTAGON)
        assert not PENTAGON_ASG.matches(PYR_CUBE)

    def test_facets_at_cyclic(self):
        assert PYR_CUBE_ASG.facets_at(1) == (0, 1)
        assert PYR_CUBE_ASG.facets_at(7) == (0, 1)
        assert PYR_CUBE_ASG.facets_at(5) == (4, 5)

    def test_position_of(self):
        where = PYR_CUBE_ASG.position_of
        assert where[0] == 0 and where[3] == 2 and where[6] is None

    def test_mismatched_assignment_rejected_by_operations(self):
        with pytest.raises(ValueError, match="does not match"):
            is_face(PYR_CUBE, PENTAGON_ASG, ())


# ---------------------------------------------------------------------------
# Face tests
# ---------------------------------------------------------------------------

class TestIsFace:
    def test_pentagon_examples(self):
        assert is_face(PENTAGON, PENTAGON_ASG, ()) is True
        assert is_face(PENTAGON, PENTAGON_ASG, (0, 1)) is False
        assert is_face(PENTAGON, PENTAGON_ASG, (0, 2)) is True

    def test_every_singleton_is_a_face(self):
        for g in small_pool():
            asg = FacetAssignment.standard(g)
            for f in range(g.facet_count):
                assert is_face(g, asg, (f,))

    def test_full_set_is_not_a_face(self):
        for g in small_pool():
            asg = FacetAssignment.standard(g)
            assert not is_face(g, asg, range(g.facet_count))

    def test_origin_facet_short_circuit(self):
        # all six polygon facets of the pyramid leave only the origin
        # facet outside, and its point is the origin itself: the apex
        assert is_face(PYR_CUBE, PYR_CUBE_ASG, range(6))

    def test_invalid_subset(self):
        with pytest.raises(InvalidSubset):
            is_face(PENTAGON, PENTAGON_ASG, (0, 5))
        with pytest.raises(InvalidSubset):
            is_face(PENTAGON, PENTAGON_ASG, (-1,))

    def test_agrees_with_rational_hull_oracle_exhaustively(self):
        for g in (PENTAGON, PYR_CUBE, ALL_ONES):
            asg = FacetAssignment.standard(g)
            total = g.facet_count
            for r in range(total + 1):
                for subset in itertools.combinations(range(total), r):
                    assert is_face(g, asg, subset) == oracle_is_face(
                        g, asg, subset
                    ), (g, subset)

    def test_agrees_with_rational_hull_oracle_randomly(self):
        rng = random.Random(20260819)
        pool = [g for n in (3, 4, 5) for g in enumerate_standard(n, 6)]
        for _ in range(200):
            g = rng.choice(pool)
            asg = FacetAssignment.standard(g)
            total = g.facet_count
            subset = [f for f in range(total) if rng.random() < 0.5]
            assert is_face(g, asg, subset) == oracle_is_face(g, asg, subset)

    def test_monotone_decreasing(self):
        rng = random.Random(11)
        for g in small_pool():
            asg = FacetAssignment.standard(g)
            total = g.facet_count
            for _ in range(30):
                big = [f for f in range(total) if rng.random() < 0.6]
                small = [f for f in big if rng.random() < 0.6]
                if is_face(g, asg, big):
                    assert is_face(g, asg, small)


# ---------------------------------------------------------------------------
# Face lattice and vertices
# ---------------------------------------------------------------------------

class TestFacesVertices:
    def test_pentagon_faces(self):
        got = faces(PENTAGON, PENTAGON_ASG)
        singles = [(f,) for f in range(5)]
        pairs = [(0, 2), (0, 3), (1, 3), (1, 4), (2, 4)]
        assert got == sorted([()] + singles + pairs)

    def test_pentagon_vertices_form_a_five_cycle(self):
        vs = vertices(PENTAGON, PENTAGON_ASG)
        assert vs == [(0, 2), (0, 3), (1, 3), (1, 4), (2, 4)]
        # adjacency by shared facet: every vertex has exactly two
        # neighbors and the graph is a single 5-cycle
        neighbors = {
            v: [w for w in vs if w != v and set(v) & set(w)] for v in vs
        }
        assert all(len(ns) == 2 for ns in neighbors.values())
        seen = {vs[0]}
        cur, prev = vs[0], None
        for _ in range(4):
            nxt = [w for w in neighbors[cur] if w != prev]
            prev, cur = cur, nxt[0]
            assert cur not in seen
            seen.add(cur)
        assert len(seen) == 5

    def test_pyramid_over_cube_vertices(self):
        vs = vertices(PYR_CUBE, PYR_CUBE_ASG)
        assert len(vs) == 9
        apex = [v for v in vs if len(v) == 6]
        assert apex == [(0, 1, 2, 3, 4, 5)]
        base = [v for v in vs if len(v) == 4]
        assert len(base) == 8
        # every base vertex lies on the base facet (the origin one)
        assert all(6 in v for v in base)

    def test_all_ones_pyramid_has_six_vertices(self):
        vs = vertices(ALL_ONES, ALL_ONES_ASG)
        assert len(vs) == 6
        assert [len(v) for v in vs].count(6) == 1

    def test_vertices_are_maximal_faces(self):
        for g in small_pool():
            asg = FacetAssignment.standard(g)
            all_faces = set(faces(g, asg))
            expect = {
                f
                for f in all_faces
                if not any(set(f) < set(other) for other in all_faces)
            }
            assert set(vertices(g, asg)) == expect, g

    def test_faces_too_large(self):
        g = GaleDiagram(2, (7, 6, 6, 6), 0)
        with pytest.raises(TooLarge):
            faces(g, FacetAssignment.standard(g))
        # vertices stay available beyond the scan bound
        assert vertices(g, FacetAssignment.standard(g))

    def test_lattice_json(self):
        got = face_lattice_json(PENTAGON, PENTAGON_ASG)
        assert got["vertices"] == [[0, 2], [0, 3], [1, 3], [1, 4], [2, 4]]
        assert [] in got["faces"]
        assert all(isinstance(f, list) for f in got["faces"])


# ---------------------------------------------------------------------------
# Arcs
# ---------------------------------------------------------------------------

class TestArcFacets:
    def test_pentagon_examples(self):
        assert arc_facets(PENTAGON, PENTAGON_ASG, 2, 4) == (1,)
        assert arc_facets(PENTAGON, PENTAGON_ASG, 9, 1) == (0, 4)

    def test_single_vertex_arc(self):
        assert arc_facets(PYR_CUBE, PYR_CUBE_ASG, 3, 3) == (2, 3)

    def test_full_circle_minus_one(self):
        got = arc_facets(PENTAGON, PENTAGON_ASG, 2, 10)
        assert got == (1, 2, 3, 4)

    def test_wraparound(self):
        got = arc_facets(PYR_CUBE, PYR_CUBE_ASG, 5, 1)
        assert got == (0, 1, 4, 5)

    def test_bad_indices(self):
        with pytest.raises(ValueError, match="1..10"):
            arc_facets(PENTAGON, PENTAGON_ASG, 0, 3)
        with pytest.raises(ValueError, match="1..10"):
            arc_facets(PENTAGON, PENTAGON_ASG, 1, 11)


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

class TestEnumerateStandard:
    def test_matches_brute_force_n2(self):
        got = {(g.k, g.labels, g.origin_label) for g in enumerate_standard(2, 4)}
        assert got == brute_standard_orbits(2, 4) == set()

    def test_matches_brute_force_n3(self):
        got = {(g.k, g.labels, g.origin_label) for g in enumerate_standard(3, 4)}
        want = brute_standard_orbits(3, 4)
        assert got == want
        assert len(want) == 4

    def test_matches_brute_force_n4(self):
        got = {(g.k, g.labels, g.origin_label) for g in enumerate_standard(4, 4)}
        want = brute_standard_orbits(4, 4)
        assert got == want
        assert len(want) == 16

    def test_pentagon_is_the_unique_two_dimensional_diagram(self):
        got = enumerate_standard(2, 5)
        assert len(got) == 1
        assert got[0].k == 5 and got[0].origin_label == 0
        assert _dihedral_canonical(got[0].labels) == _dihedral_canonical(
            PENTAGON.labels
        )

    def test_raw_count_matches_transfer_dp(self):
        # expand each orbit back to raw vectors and compare against an
        # independent pair-transfer DP (k >= 5 so the half-plane rule is
        # implied and the DP's two rules are the whole story)
        for n, k in ((5, 5), (5, 6), (6, 5), (7, 7)):
            orbits = [g for g in enumerate_standard(n, k) if g.k == k
                      and g.origin_label == 0]
            raw = sum(orbit_size(g.labels) for g in orbits)
            assert raw == dp_raw_count(k, n + 3), (n, k)

    def test_results_are_canonical_and_standard(self):
        for g in enumerate_standard(5, 6):
            assert g.labels == _dihedral_canonical(g.labels)
            assert validate(g) == []
            assert g.dimension == 5

    def test_no_duplicates_and_deterministic(self):
        a = enumerate_standard(4, 6)
        b = enumerate_standard(4, 6)
        assert a == b
        assert len({(g.k, g.labels, g.origin_label) for g in a}) == len(a)

    def test_k_max_respected(self):
        assert all(g.k <= 3 for g in enumerate_standard(6, 3))
        small = {(g.k, g.labels, g.origin_label) for g in enumerate_standard(6, 3)}
        full = {
            (g.k, g.labels, g.origin_label)
            for g in enumerate_standard(6, 9)
            if g.k <= 3
        }
        assert small == full

    def test_origin_zero_only(self):
        got = list(iter_standard(4, 4, origin_zero_only=True))
        assert all(g.origin_label == 0 for g in got)
        want = [g for g in enumerate_standard(4, 4) if g.origin_label == 0]
        assert got == want

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            enumerate_standard(1, 5)
        with pytest.raises(ValueError):
            enumerate_standard(4, 1)


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

class TestParseSerialize:
    def test_round_trip(self):
        for g in small_pool():
            assert parse_gale(serialize_gale(g)) == g

    def test_comments_and_blank_lines(self):
        text = "# header\n\ngale v1\nk 2  # half\nlabels 2 2 2 2\n\norigin 0\n"
        assert parse_gale(text) == GaleDiagram(2, (2, 2, 2, 2), 0)

    def test_serialize_with_comment(self):
        text = serialize_gale(PENTAGON, comment="a\nb")
        assert text.startswith("# a\n# b\ngale v1\n")
        assert parse_gale(text) == PENTAGON

    @pytest.mark.parametrize(
        "text,line,fragment",
        [
            ("", 1, "empty"),
            ("gale v2\nk 2\nlabels 2 2 2 2\norigin 0", 1, "header"),
            ("gale v1\nq 2\nlabels 2 2 2 2\norigin 0", 2, "expected 'k K'"),
            ("gale v1\nk x\nlabels 2 2 2 2\norigin 0", 2, "bad k"),
            ("gale v1\nk 1\nlabels 2 2\norigin 0", 2, "k must be >= 2"),
            ("gale v1\nk 2\nsizes 2 2 2 2\norigin 0", 3, "expected 'labels"),
            ("gale v1\nk 2\nlabels 2 2 2\norigin 0", 3, "expected 4 labels"),
            ("gale v1\nk 2\nlabels 2 2 2 x\norigin 0", 3, "integers"),
            ("gale v1\nk 2\nlabels 2 2 2 -2\norigin 0", 3, "non-negative"),
            ("gale v1\nk 2\nlabels 2 2 2 2\nzero 0", 4, "expected 'origin"),
            ("gale v1\nk 2\nlabels 2 2 2 2\norigin x", 4, "bad origin"),
            ("gale v1\nk 2\nlabels 2 2 2 2\norigin -1", 4, "non-negative"),
            ("gale v1\nk 2\nlabels 2 2 2 2\norigin 0\nk 3", 5, "extra"),
            ("gale v1\nk 2", 1, "missing"),
        ],
    )
    def test_errors_carry_line_numbers(self, text, line, fragment):
        with pytest.raises(GaleParseError) as err:
            parse_gale(text)
        assert err.value.line == line
        assert fragment in str(err.value)


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------

@st.composite
def standard_diagrams(draw):
    pool = standard_diagrams.pool
    return draw(st.sampled_from(pool))


standard_diagrams.pool = (
    enumerate_standard(3, 4) + enumerate_standard(4, 5) + enumerate_standard(5, 5)
)


class TestProperties:
    @given(standard_diagrams(), st.data())
    @settings(max_examples=120, deadline=None)
    def test_face_test_matches_oracle(self, g, data):
        asg = FacetAssignment.standard(g)
        subset = data.draw(
            st.sets(st.integers(0, g.facet_count - 1)), label="subset"
        )
        assert is_face(g, asg, subset) == oracle_is_face(g, asg, subset)

    @given(standard_diagrams(), st.data())
    @settings(max_examples=80, deadline=None)
    def test_supersets_of_non_faces_are_non_faces(self, g, data):
        asg = FacetAssignment.standard(g)
        base = data.draw(st.sets(st.integers(0, g.facet_count - 1)))
        extra = data.draw(st.sets(st.integers(0, g.facet_count - 1)))
        if not is_face(g, asg, base):
            assert not is_face(g, asg, base | extra)

    @given(standard_diagrams())
    @settings(max_examples=60, deadline=None)
    def test_vertex_census_matches_subset_scan(self, g):
        asg = FacetAssignment.standard(g)
        all_faces = set(faces(g, asg))
        maximal = {
            f for f in all_faces if not any(set(f) < set(o) for o in all_faces)
        }
        assert set(vertices(g, asg)) == maximal

    @given(standard_diagrams())
    @settings(max_examples=60, deadline=None)
    def test_every_facet_is_on_some_vertex(self, g):
        asg = FacetAssignment.standard(g)
        vs = vertices(g, asg)
        covered = {f for v in vs for f in v}
        assert covered == set(range(g.facet_count))

    @given(standard_diagrams())
    @settings(max_examples=40, deadline=None)
    def test_serialization_round_trip(self, g):
        assert parse_gale(serialize_gale(g)) == g

    @given(st.integers(2, 6), st.integers(0, 3), st.data())
    @settings(max_examples=60, deadline=None)
    def test_canonical_form_is_idempotent_and_minimal(self, k, origin, data):
        labels = tuple(
            data.draw(st.integers(0, 3)) for _ in range(2 * k)
        )
        canon = _dihedral_canonical(labels)
        assert _dihedral_canonical(canon) == canon
        assert canon <= labels
        assert orbit_size(canon) == orbit_size(labels)
