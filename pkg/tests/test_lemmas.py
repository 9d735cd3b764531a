"""Tests for hypercox.lemmas.

Positive cases are worked by hand: a hexagonal Gale diagram whose
Coxeter diagram is a six-cycle of bold edges satisfies every
opposite-pair constraint (each open side arc is a bold pair, i.e.
connected parabolic; each extended arc is a bold path on three nodes,
which is quasi-Lanner); a (3,3,7) triangle on a three-facet polygon
vertex satisfies the zero-pair constraint (it is Lanner).
"""

import pytest

from hypercox.diagram import (
    BOLD,
    Angle,
    CoxeterDiagram,
    Dotted,
    UnknownEntry,
)
from hypercox.gale import FacetAssignment, GaleDiagram, validate
from hypercox.lemmas import (
    ArcConstraint,
    ConstraintReport,
    check_lemma_kv,
    check_lemma_l,
    gale_prefilter,
)

PENTAGON = GaleDiagram(5, (1, 0, 1, 0, 1, 0, 1, 0, 1, 0), 0)
PENTAGON_ASG = FacetAssignment.standard(PENTAGON)

# all six opposite pairs nonzero; facet f_i sits at polygon position i+1
HEXAGON = GaleDiagram(3, (1, 1, 1, 1, 1, 1), 0)
HEXAGON_ASG = FacetAssignment.standard(HEXAGON)
BOLD_SIX_CYCLE = CoxeterDiagram(
    6, [(i, (i + 1) % 6, BOLD) for i in range(6)]
)


def empty_diagram(n):
    return CoxeterDiagram(n)


class TestCheckLemmaKv:
    def test_vacuous_on_pentagon(self):
        # opposite pairs are (1,6),(2,7),...: each has a zero side
        report = check_lemma_kv(PENTAGON, PENTAGON_ASG, empty_diagram(5))
        assert report.evaluated == 0
        assert report.ok
        assert report.violations == ()

    def test_bold_six_cycle_satisfies_everything(self):
        report = check_lemma_kv(HEXAGON, HEXAGON_ASG, BOLD_SIX_CYCLE)
        # 3 unordered pairs: one label check + two side-arc checks each,
        # plus one extended-arc check per ordered pair
        assert report.evaluated == 3 * 3 + 6
        assert report.ok, report.violations

    def test_label_violation(self):
        g = GaleDiagram(3, (2, 1, 1, 1, 1, 1), 0)
        asg = FacetAssignment.standard(g)
        report = check_lemma_kv(g, asg, empty_diagram(7))
        bad = [
            v
            for v in report.violations
            if v.constraint_id == "opposite-pair-labels"
        ]
        assert len(bad) == 1
        assert bad[0].trigger == (1, 4)
        assert bad[0].expected == "labels (1, 1)"
        assert bad[0].observed == "labels (2, 1)"

    def test_side_arc_must_be_connected_parabolic(self):
        # right angles everywhere: side arcs classify as elliptic
        report = check_lemma_kv(HEXAGON, HEXAGON_ASG, empty_diagram(6))
        side = [
            v
            for v in report.violations
            if v.constraint_id == "opposite-pair-side-parabolic"
        ]
        assert len(side) == 6
        assert all(v.observed == "elliptic" for v in side)

    def test_disconnected_parabolic_side_arc_is_flagged(self):
        # four facets on one side: two separate bold pairs are parabolic
        # but disconnected, which the constraint must reject
        g = GaleDiagram(4, (1, 2, 1, 1, 1, 1, 1, 1), 0)
        assert validate(g) == []
        asg = FacetAssignment.standard(g)
        # facets: pos1=(0,), pos2=(1,2), pos3=(3,), pos4=(4,), pos5=(5,), ...
        d = CoxeterDiagram(9, [(1, 2, BOLD), (3, 4, BOLD)])
        report = check_lemma_kv(g, asg, d)
        side = [
            v
            for v in report.violations
            if v.constraint_id == "opposite-pair-side-parabolic"
            and v.arc == (2, 4)
        ]
        assert len(side) == 1
        assert side[0].observed == "parabolic(disconnected)"
        assert side[0].facets == (1, 2, 3, 4)

    def test_extended_arc_quasi_lanner_and_skip_variant(self):
        # pair (1, 5) nonzero with label(2) == 0 takes the skip variant:
        # the arc starts at position 3 instead of 2
        g = GaleDiagram(4, (1, 0, 2, 1, 1, 1, 1, 1), 0)
        asg = FacetAssignment.standard(g)
        report = check_lemma_kv(g, asg, empty_diagram(8))
        skip = [
            c
            for c in report.constraints
            if c.constraint_id == "opposite-pair-skip-quasi-lanner"
        ]
        assert any(c.trigger == (1, 5) and c.arc == (3, 5) for c in skip)
        both = [
            c
            for c in report.constraints
            if c.constraint_id == "opposite-pair-extended-quasi-lanner"
        ]
        # e.g. pair (4, 8): label(5) and label(1) both nonzero
        assert any(c.trigger == (4, 8) and c.arc == (5, 8) for c in both)

    def test_hand_pinned_arcs_k3(self):
        report = check_lemma_kv(HEXAGON, HEXAGON_ASG, BOLD_SIX_CYCLE)
        sides = {
            (c.trigger, c.arc): c.facets
            for c in report.constraints
            if c.constraint_id == "opposite-pair-side-parabolic"
        }
        assert sides[((1, 4), (2, 3))] == (1, 2)
        assert sides[((1, 4), (5, 6))] == (4, 5)
        assert sides[((3, 6), (4, 5))] == (3, 4)
        assert sides[((3, 6), (1, 2))] == (0, 1)
        extended = {
            c.trigger: (c.arc, c.facets)
            for c in report.constraints
            if c.constraint_id == "opposite-pair-extended-quasi-lanner"
        }
        assert extended[(1, 4)] == ((2, 4), (1, 2, 3))
        assert extended[(6, 3)] == ((1, 3), (0, 1, 2))

    def test_unknown_dotted_in_arc_propagates(self):
        d = CoxeterDiagram(
            6,
            [(i, (i + 1) % 6, BOLD) for i in range(2, 5)]
            + [(1, 2, Dotted()), (0, 1, BOLD), (5, 0, BOLD)],
        )
        with pytest.raises(UnknownEntry):
            check_lemma_kv(HEXAGON, HEXAGON_ASG, d)

    def test_mismatched_assignment_rejected(self):
        with pytest.raises(ValueError, match="does not match"):
            check_lemma_kv(HEXAGON, PENTAGON_ASG, BOLD_SIX_CYCLE)


class TestCheckLemmaL:
    def test_pentagon_two_facet_arcs_always_violate(self):
        # five zero pairs at distance k-1, each enclosing a two-facet
        # arc; no Lanner diagram has two nodes, so every edge choice
        # fails — right angles give elliptic, dotted pairs give other
        report = check_lemma_l(PENTAGON, PENTAGON_ASG, empty_diagram(5))
        assert report.evaluated == 5
        assert len(report.violations) == 5
        assert all(v.observed == "elliptic" for v in report.violations)

        dotted = CoxeterDiagram(
            5, [(i, j, Dotted(2)) for i in range(5) for j in range(i + 1, 5)]
        )
        report = check_lemma_l(PENTAGON, PENTAGON_ASG, dotted)
        assert all(v.observed == "other" for v in report.violations)

    def test_pentagon_pinned_arcs(self):
        report = check_lemma_l(PENTAGON, PENTAGON_ASG, empty_diagram(5))
        arcs = {c.trigger: (c.arc, c.facets) for c in report.constraints}
        assert arcs[(2, 6)] == ((3, 5), (1, 2))
        assert arcs[(4, 8)] == ((5, 7), (2, 3))
        assert arcs[(6, 10)] == ((7, 9), (3, 4))
        assert arcs[(8, 2)] == ((9, 1), (0, 4))
        assert arcs[(10, 4)] == ((1, 3), (0, 1))

    def test_vacuous_without_zero_pairs(self):
        report = check_lemma_l(HEXAGON, HEXAGON_ASG, BOLD_SIX_CYCLE)
        assert report.evaluated == 0
        assert report.ok

    def test_lanner_triangle_arc_passes(self):
        g = GaleDiagram(3, (0, 3, 0, 2, 1, 2), 0)
        assert validate(g) == []
        asg = FacetAssignment.standard(g)
        # zero pair (1, 3) encloses position 2 with facets 0, 1, 2
        d = CoxeterDiagram(
            8, [(0, 1, Angle(3)), (1, 2, Angle(3)), (0, 2, Angle(7))]
        )
        report = check_lemma_l(g, asg, d)
        assert report.evaluated == 1
        assert report.ok
        assert report.constraints[0].facets == (0, 1, 2)
        assert report.constraints[0].observed == "lanner"

    def test_non_lanner_arc_violates(self):
        g = GaleDiagram(3, (0, 3, 0, 2, 1, 2), 0)
        asg = FacetAssignment.standard(g)
        report = check_lemma_l(g, asg, empty_diagram(8))
        assert report.evaluated == 1
        assert not report.ok
        assert report.violations[0].expected == "lanner"
        assert report.violations[0].observed == "elliptic"


class TestConstraintReport:
    def test_json_shape(self):
        g = GaleDiagram(3, (0, 3, 0, 2, 1, 2), 0)
        asg = FacetAssignment.standard(g)
        report = check_lemma_l(g, asg, empty_diagram(8))
        blob = report.to_json()
        assert blob["evaluated"] == 1
        (v,) = blob["violations"]
        assert v["constraint"] == "zero-pair-enclosed-lanner"
        assert v["trigger"] == [1, 3]
        assert v["arc"] == [2, 2]
        assert v["facets"] == [0, 1, 2]
        assert v["expected"] == "lanner"
        assert v["observed"] == "elliptic"
        assert v["ok"] is False

    def test_report_is_immutable(self):
        report = ConstraintReport(())
        with pytest.raises(Exception):
            report.constraints = (1,)
        assert report.evaluated == 0 and report.ok


class TestGalePrefilter:
    def test_pentagon_passes(self):
        assert gale_prefilter(PENTAGON)
        assert gale_prefilter(PENTAGON).rule is None

    def test_pyramid_over_cube_passes(self):
        assert gale_prefilter(GaleDiagram(3, (2, 0, 2, 0, 2, 0), 1))

    def test_distance_two_zero_pair_caps_sum_at_20(self):
        g = GaleDiagram(3, (0, 10, 0, 5, 1, 5), 0)
        assert validate(g) == []
        decision = gale_prefilter(g)
        assert not decision
        assert decision.rule == "lemma3-sum"
        assert "21 > 20" in decision.reason

    def test_sum_20_with_zero_pair_passes_rule_a(self):
        g = GaleDiagram(3, (0, 10, 0, 5, 1, 4), 0)
        assert validate(g) == []
        decision = gale_prefilter(g)
        # rejected, but only by a structural rule, never the sum rule
        assert decision.rule != "lemma3-sum"

    def test_k_bound_at_dimension_16(self):
        # k = 14 is even, so an alternating pattern would put zeros on
        # opposite pairs; cluster the zeros in one half instead
        zeros = {1, 3, 5, 7, 9, 11, 13, 16, 18}
        labels = tuple(0 if i in zeros else 1 for i in range(28))
        g = GaleDiagram(14, labels, 0)
        assert sum(labels) == 19 and g.dimension == 16
        assert validate(g) == []
        decision = gale_prefilter(g)
        assert not decision
        assert decision.rule == "k-bound"

    def test_two_disjoint_zero_pairs_at_dimension_16(self):
        g = GaleDiagram(5, (0, 4, 0, 4, 0, 4, 0, 4, 2, 1), 0)
        assert validate(g) == []
        assert g.dimension == 16
        decision = gale_prefilter(g)
        assert not decision
        assert decision.rule == "two-lanner"

    def test_same_pattern_passes_at_low_dimension(self):
        g = GaleDiagram(5, (0, 1, 0, 1, 0, 1, 0, 1, 2, 1), 0)
        assert validate(g) == []
        assert g.dimension == 4
        decision = gale_prefilter(g)
        assert decision.rule not in ("two-lanner", "k-bound", "lemma3-sum")

    def test_opposite_pair_label_rule(self):
        g = GaleDiagram(3, (1, 1, 2, 1, 1, 1), 0)
        assert validate(g) == []
        decision = gale_prefilter(g)
        assert not decision
        assert decision.rule == "opposite-pair-labels"
        assert "(2, 1)" in decision.reason

    def test_zero_pair_arc_size_rule(self):
        g = GaleDiagram(3, (0, 6, 0, 2, 0, 2), 0)
        assert validate(g) == []
        decision = gale_prefilter(g)
        assert not decision
        assert decision.rule == "zero-pair-arc-size"
        assert "6 facets" in decision.reason

    def test_small_zero_pair_arcs_are_left_to_the_checker(self):
        # two-facet arcs are realizable by divergent facet pairs (ideal
        # polygons), so the prefilter must not reject on the small side;
        # the pentagon is exactly this case
        assert gale_prefilter(PENTAGON)

    def test_quasi_lanner_arc_size_rule(self):
        g = GaleDiagram(4, (1, 1, 1, 0, 1, 1, 1, 9), 0)
        assert validate(g) == []
        decision = gale_prefilter(g)
        assert not decision
        assert decision.rule == "quasi-lanner-arc-size"

    def test_pyramids_skip_structural_rules(self):
        # same labels as the structural rejections above, origin nonzero
        for labels, k in (
            ((1, 1, 2, 1, 1, 1), 3),
            ((0, 6, 0, 2, 1, 2), 3),
            ((1, 1, 1, 0, 1, 1, 1, 9), 4),
        ):
            g = GaleDiagram(k, labels, 2)
            assert gale_prefilter(g), (labels, k)

    def test_small_lanner_arc_passes(self):
        g = GaleDiagram(3, (0, 3, 0, 2, 0, 2), 0)
        assert validate(g) == []
        assert gale_prefilter(g)

    def test_overlapping_zero_pair_arcs_are_not_two_lanner(self):
        # zeros at 0-based 0, 3, 7, 10 with k = 8: the zero pairs
        # {0, 7} and {3, 10} are disjoint as pairs, but their enclosed
        # arcs share the facets at positions 4..6, so they cannot force
        # two disjoint compact-simplex diagrams.  The diagram is still
        # rejected, but by an arc-size rule, never the two-arc rule.
        g = GaleDiagram(8, (0, 1, 1, 0, 1, 1, 1, 0, 1, 1, 0, 5, 1, 1, 1, 4), 0)
        assert validate(g) == []
        assert g.dimension == 16
        decision = gale_prefilter(g)
        assert not decision
        assert decision.rule == "quasi-lanner-arc-size"

    def test_disjoint_arcs_from_pairs_sharing_a_zero(self):
        # zeros at 0-based 0, 7, 9 with k = 8: the pairs {0, 7} and
        # {9, 0} share the zero at 0, yet their enclosed arcs (1..6 and
        # 10..15) are facet-disjoint, which is what actually forces two
        # disjoint compact-simplex diagrams.
        g = GaleDiagram(8, (0, 1, 1, 1, 1, 1, 1, 0, 7, 0, 1, 1, 1, 1, 1, 1), 0)
        assert validate(g) == []
        assert g.dimension == 16
        decision = gale_prefilter(g)
        assert not decision
        assert decision.rule == "two-lanner"

    def test_three_facet_pyramid_arcs_pass_at_dimension_16(self):
        # an apex facet breaks the chain reading behind every rule, so
        # a pyramid-patterned diagram passes even at dimension 16 with
        # facet-disjoint zero-pair arcs between its label blocks
        g = GaleDiagram(3, (6, 0, 6, 0, 6, 0), 1)
        assert validate(g) == []
        assert g.dimension == 16
        assert gale_prefilter(g)

    def test_decision_json(self):
        blob = gale_prefilter(PENTAGON).to_json()
        assert blob == {"passed": True, "rule": None, "reason": None}
