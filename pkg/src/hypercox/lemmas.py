"""Arc constraints linking a Gale diagram to its Coxeter diagram.

For a polytope whose Gale diagram is standard and not a pyramid, the
facets sitting on specific polygon arcs must induce subdiagrams of
specific classes:

* an opposite pair of nonzero labels forces both labels to be 1, both
  open side arcs to induce connected parabolic diagrams, and the side
  arcs extended by one endpoint (skipping a zero neighbor) to induce
  quasi-Lanner diagrams;
* a zero pair at positions (i, k+i-1) forces the enclosed arc to induce
  a Lanner diagram.

Both checks consume a (GaleDiagram, FacetAssignment, CoxeterDiagram)
triple where Coxeter node x is facet x.  They are necessary conditions:
certified polytopes always yield empty reports.

gale_prefilter applies the label-only consequences of these constraints
(plus global bounds) to a bare Gale diagram, rejecting label patterns
that no edge assignment could ever rescue.  Every rejection is
re-derivable by the full verifier, and the search pipeline's audit mode
re-examines samples of rejected diagrams with the prefilter off.
"""

import itertools
from dataclasses import dataclass

from .diagram import DiagramClass, classify

__all__ = [
    "ArcConstraint",
    "ConstraintReport",
    "PrefilterDecision",
    "check_lemma_kv",
    "check_lemma_l",
    "gale_prefilter",
]

# node-count ranges of the bounded classes (hyperbolic simplices):
# compact ones exist on 3..5 nodes, finite-volume non-compact on 3..10
_LANNER_SIZES = range(3, 6)
_QL_SIZES = range(3, 11)


@dataclass(frozen=True)
class ArcConstraint:
    """One evaluated arc requirement.

    arc is the 1-based inclusive polygon index range (m, l); trigger is
    the index pair whose labels made the constraint applicable; facets
    are the Coxeter nodes the arc carries.  expected/observed are class
    descriptions; ok tells whether the requirement held.
    """

    constraint_id: str
    trigger: tuple
    arc: tuple
    facets: tuple
    expected: str
    observed: str
    ok: bool

    def to_json(self):
        return {
            "constraint": self.constraint_id,
            "trigger": list(self.trigger),
            "arc": list(self.arc),
            "facets": list(self.facets),
            "expected": self.expected,
            "observed": self.observed,
            "ok": self.ok,
        }


@dataclass(frozen=True)
class ConstraintReport:
    """Every evaluated constraint plus the failing subset.

    evaluated counts applicable constraint instances, so an empty report
    with evaluated == 0 means the hypotheses never fired (vacuous pass)
    while evaluated > 0 means real checks ran and held.
    """

    constraints: tuple

    @property
    def evaluated(self):
        return len(self.constraints)

    @property
    def violations(self):
        return tuple(c for c in self.constraints if not c.ok)

    @property
    def ok(self):
        return not self.violations

    def to_json(self):
        return {
            "evaluated": self.evaluated,
            "violations": [c.to_json() for c in self.violations],
        }


def _arc_class(g, asg, d, m, l):
    """(facets, observed description) for the arc a_m..a_l."""
    from .gale import arc_facets

    facets = arc_facets(g, asg, m, l)
    if not facets:
        return facets, "empty"
    return facets, str(classify(d.subdiagram(facets)))


def _constraint(g, asg, d, cid, trigger, m, l, expected, accept):
    m = (m - 1) % (2 * g.k) + 1
    l = (l - 1) % (2 * g.k) + 1
    facets, observed = _arc_class(g, asg, d, m, l)
    return ArcConstraint(
        constraint_id=cid,
        trigger=tuple((t - 1) % (2 * g.k) + 1 for t in trigger),
        arc=(m, l),
        facets=facets,
        expected=expected,
        observed=observed,
        ok=accept(observed),
    )


def check_lemma_kv(g, asg, d):
    """Constraints triggered by opposite label pairs both nonzero.

    For each polygon index i with label(i) and label(k+i) both nonzero:
    both labels must equal 1, and the two open side arcs strictly
    between the pair must induce connected parabolic diagrams (the pair
    itself is checked once per unordered pair).  Additionally, per side:
    if the neighbor labels label(i+1) and label(k+i+1) are both nonzero,
    the arc a_{i+1}..a_{k+i} must induce a quasi-Lanner diagram; if
    label(i+1) is zero, the arc a_{i+2}..a_{k+i} must.
    """
    if not asg.matches(g):
        raise ValueError("facet assignment does not match the diagram's labels")
    k = g.k
    out = []
    for i in range(1, 2 * k + 1):
        if g.label(i) == 0 or g.label(k + i) == 0:
            continue
        if i <= k:  # the unordered-pair constraints, once per pair
            labels = (g.label(i), g.label(k + i))
            out.append(
                ArcConstraint(
                    constraint_id="opposite-pair-labels",
                    trigger=(i, k + i),
                    arc=(i, (k + i - 1) % (2 * k) + 1),
                    facets=tuple(
                        sorted(asg.facets_at(i) + asg.facets_at(k + i))
                    ),
                    expected="labels (1, 1)",
                    observed=f"labels {labels}",
                    ok=labels == (1, 1),
                )
            )
            for m, l in ((i + 1, k + i - 1), (k + i + 1, i - 1)):
                out.append(
                    _constraint(
                        g, asg, d,
                        "opposite-pair-side-parabolic",
                        (i, k + i), m, l,
                        "parabolic(connected)",
                        lambda obs: obs == "parabolic(connected)",
                    )
                )
        if g.label(i + 1) != 0 and g.label(k + i + 1) != 0:
            out.append(
                _constraint(
                    g, asg, d,
                    "opposite-pair-extended-quasi-lanner",
                    (i, k + i), i + 1, k + i,
                    "quasi_lanner",
                    lambda obs: obs == "quasi_lanner",
                )
            )
        elif g.label(i + 1) == 0:
            out.append(
                _constraint(
                    g, asg, d,
                    "opposite-pair-skip-quasi-lanner",
                    (i, k + i), i + 2, k + i,
                    "quasi_lanner",
                    lambda obs: obs == "quasi_lanner",
                )
            )
    return ConstraintReport(tuple(out))


def check_lemma_l(g, asg, d):
    """Constraints triggered by zero pairs at positions (i, k+i-1): the
    enclosed arc a_{i+1}..a_{k+i-2} must induce a Lanner diagram."""
    if not asg.matches(g):
        raise ValueError("facet assignment does not match the diagram's labels")
    k = g.k
    out = []
    for i in range(1, 2 * k + 1):
        if g.label(i) != 0 or g.label(k + i - 1) != 0:
            continue
        out.append(
            _constraint(
                g, asg, d,
                "zero-pair-enclosed-lanner",
                (i, k + i - 1), i + 1, k + i - 2,
                "lanner",
                lambda obs: obs == "lanner",
            )
        )
    return ConstraintReport(tuple(out))


@dataclass(frozen=True)
class PrefilterDecision:
    """pass/reject verdict for a bare Gale diagram, with the rule that
    fired; truthy iff the diagram passed."""

    passed: bool
    rule: str = None
    reason: str = None

    def __bool__(self):
        return self.passed

    def to_json(self):
        return {"passed": self.passed, "rule": self.rule, "reason": self.reason}


def _arc_label_sum(g, m, l):
    count = (l - m) % (2 * g.k) + 1
    return sum(g.label(m + t) for t in range(count))


def gale_prefilter(g):
    """Label-only screening of a standard Gale diagram.

    Every rule reads the polygon as facet chains between distinguished
    pairs, a reading that breaks when an apex facet sits at the origin,
    so diagrams with a nonzero origin label always pass.  The rules:
    (a) a zero pair at distance two caps the total label sum at 20;
    (b) dimensions 16 and up force k <= 13; (c) dimensions 16 and up
    exclude two zero pairs at distance k-1 whose enclosed arcs are
    facet-disjoint and each carry at least 3 facets (each arc would
    force its own compact-simplex diagram on disjoint facet sets —
    overlapping arcs or tiny arcs force no such thing and are left to
    the full pipeline); (d) opposite nonzero labels must both be 1;
    (e) the arc enclosed by a distance-(k-1) zero pair must not carry
    more than 5 facets (no compact-simplex diagram is bigger; arcs
    below 3 facets are left to the constraint checker, which can see
    the edges — two divergent facets legitimately realize a 2-facet
    arc, as in ideal polygons); (f) the side arcs of an opposite
    nonzero pair must carry at least 2 facets each, and any side arc
    designated quasi-Lanner by the neighbor-label pattern must, with
    its endpoint, carry 3..10.

    Rejections are necessary-condition failures only; the verifier can
    re-derive each one from scratch in audit mode.
    """
    k = g.k
    total = g.total
    n = g.dimension
    if g.origin_label != 0:
        return PrefilterDecision(True)
    for i in range(1, 2 * k + 1):
        if g.label(i) == 0 and g.label(i + 2) == 0 and total > 20:
            return PrefilterDecision(
                False,
                "lemma3-sum",
                f"labels at {i} and {(i + 1) % (2 * k) + 1} are zero but the "
                f"total label sum is {total} > 20",
            )
    if n >= 16 and k > 13:
        return PrefilterDecision(
            False, "k-bound", f"dimension {n} >= 16 needs k <= 13, got {k}"
        )
    if n >= 16:
        arcs = []
        for i in range(1, 2 * k + 1):
            if g.label(i) == 0 and g.label(k + i - 1) == 0:
                occupied = frozenset(
                    (p - 1) % (2 * k)
                    for p in range(i + 1, k + i - 1)
                    if g.label(p) != 0
                )
                if _arc_label_sum(g, i + 1, k + i - 2) >= min(_LANNER_SIZES):
                    arcs.append(occupied)
        for a, b in itertools.combinations(arcs, 2):
            if not (a & b):
                return PrefilterDecision(
                    False,
                    "two-lanner",
                    "two zero pairs at distance k-1 enclose facet-disjoint "
                    "arcs, forcing two disjoint compact-simplex diagrams: "
                    f"positions {sorted(a)} and {sorted(b)} (0-based)",
                )
    for i in range(1, k + 1):
        if g.label(i) == 0 or g.label(k + i) == 0:
            continue
        if (g.label(i), g.label(k + i)) != (1, 1):
            return PrefilterDecision(
                False,
                "opposite-pair-labels",
                f"opposite labels at ({i}, {k + i}) are "
                f"({g.label(i)}, {g.label(k + i)}), not (1, 1)",
            )
    for i in range(1, 2 * k + 1):
        if g.label(i) == 0 and g.label(k + i - 1) == 0:
            inner = _arc_label_sum(g, i + 1, k + i - 2)
            if inner > max(_LANNER_SIZES):
                return PrefilterDecision(
                    False,
                    "zero-pair-arc-size",
                    f"zero pair at ({(i - 1) % (2 * k) + 1}, "
                    f"{(k + i - 2) % (2 * k) + 1}) encloses "
                    f"{inner} facets, more than 5",
                )
        if g.label(i) != 0 and g.label(k + i) != 0:
            side = _arc_label_sum(g, i + 1, k + i - 1)
            if side < 2:
                return PrefilterDecision(
                    False,
                    "opposite-pair-side-size",
                    f"side arc of opposite pair ({i}, {k + i}) carries "
                    f"{side} < 2 facets",
                )
            designated = (
                g.label(i + 1) != 0 and g.label(k + i + 1) != 0
            ) or g.label(i + 1) == 0
            if designated and side + g.label(k + i) not in _QL_SIZES:
                return PrefilterDecision(
                    False,
                    "quasi-lanner-arc-size",
                    f"designated arc beside opposite pair ({i}, {k + i}) "
                    f"carries {side + g.label(k + i)} facets, outside 3..10",
                )
    return PrefilterDecision(True)
