"""Pyramid polytopes: the nonzero-origin branch of the classification.

A Gale diagram with nonzero origin label describes a pyramid.  For the
polytopes in scope, every valid pyramid is combinatorially a pyramid
over a product of three simplices; this module builds those reference
face lattices, decides whether a candidate Gale diagram matches one,
and runs the completion pipeline over the matching diagrams for every
dimension up to 17, checking that no certified pyramid exceeds
dimension 11.

The lattice test works on vertex-facet incidences: the face family of
a polytope (every facet subset with nonempty intersection) is exactly
the family of subsets of vertex incidence sets, so two diagrams have
isomorphic face lattices precisely when a facet bijection carries one
vertex-set family onto the other.  For the pyramid-over-product target
the test is a direct structure recovery — find the apex, find the
base, split the lateral facets into three families from the vertices'
missing triples — rather than a backtracking isomorphism search; the
test suite checks it against a brute-force isomorphism oracle on small
diagrams.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .field import CertificationFailure
from .gale import FacetAssignment, is_pyramid, vertices

__all__ = [
    "PyramidShape",
    "audit_non_product_pyramids",
    "enumerate_pyramids",
    "is_pyramid_over_three_simplices",
    "reference_lattice",
    "reference_vertex_sets",
    "shapes_for_dimension",
]

MAX_PYRAMID_DIMENSION = 11
_DIMENSION_RANGE = range(2, 18)


@dataclass(frozen=True)
class PyramidShape:
    """Simplex dimensions (d1 <= d2 <= d3) of the product the pyramid
    stands over; the polytope dimension is d1 + d2 + d3 + 1.

    Facet numbering convention used throughout: the three lateral
    families occupy 0..d1, d1+1..d1+d2+1, d1+d2+2..d1+d2+d3+2 and the
    base facet comes last (matching FacetAssignment.standard, which
    puts origin facets after polygon facets).
    """

    d1: int
    d2: int
    d3: int

    def __post_init__(self):
        dims = (self.d1, self.d2, self.d3)
        if any(not isinstance(d, int) or d < 1 for d in dims):
            raise ValueError("simplex dimensions must be integers >= 1")
        if list(dims) != sorted(dims):
            raise ValueError("simplex dimensions must be sorted ascending")

    @property
    def dimension(self):
        return self.d1 + self.d2 + self.d3 + 1

    @property
    def facet_count(self):
        return self.dimension + 3

    @property
    def vertex_count(self):
        return (self.d1 + 1) * (self.d2 + 1) * (self.d3 + 1) + 1

    @property
    def base_facet(self):
        return self.facet_count - 1

    @property
    def families(self):
        sizes = (self.d1 + 1, self.d2 + 1, self.d3 + 1)
        out = []
        start = 0
        for size in sizes:
            out.append(tuple(range(start, start + size)))
            start += size
        return tuple(out)

    def to_json(self):
        return [self.d1, self.d2, self.d3]


def shapes_for_dimension(n):
    """Every PyramidShape of polytope dimension n, deterministically
    ordered; empty below dimension 4 (three factors of dimension >= 1
    need d1+d2+d3 = n-1 >= 3)."""
    target = n - 1
    out = []
    for d1 in range(1, target + 1):
        for d2 in range(d1, target + 1):
            d3 = target - d1 - d2
            if d3 >= d2:
                out.append(PyramidShape(d1, d2, d3))
    return tuple(out)


def reference_vertex_sets(shape):
    """Vertex incidence sets of the pyramid over the product of three
    simplices: the apex lies on every lateral facet, and each product
    vertex lies on the base plus all laterals except one per family
    (a simplex vertex misses exactly one of its facets).  Deterministic
    order: apex first, then product vertices lexicographically by
    missing triple."""
    everything = frozenset(range(shape.facet_count))
    out = [tuple(sorted(everything - {shape.base_facet}))]
    fam_a, fam_b, fam_c = shape.families
    for a in fam_a:
        for b in fam_b:
            for c in fam_c:
                out.append(tuple(sorted(everything - {a, b, c})))
    return tuple(out)


def reference_lattice(shape):
    """The face family of the reference pyramid in the encoding of
    gale.faces: every facet subset with nonempty intersection, as a
    sorted list of sorted tuples.  A subset has nonempty intersection
    exactly when some vertex lies on all its facets, so the family is
    the union of the power sets of the vertex incidence sets."""
    out = set()
    for vert in reference_vertex_sets(shape):
        for r in range(len(vert) + 1):
            out.update(itertools.combinations(vert, r))
    return sorted(out)


def is_pyramid_over_three_simplices(g, asg):
    """The PyramidShape whose reference face lattice is isomorphic to
    this diagram's, or None.

    Recovers the structure directly from the vertex census: exactly one
    vertex may miss exactly one facet (the apex; its missed facet is
    the base), every other vertex must miss exactly three facets, none
    of them the base; facets are in the same lateral family exactly
    when no vertex misses both, the families must number three, and the
    missing triples must realize every cross-family choice exactly
    once.  Success pins down a facet bijection onto the reference
    construction, i.e. a face-lattice isomorphism.
    """
    if not is_pyramid(g):
        raise ValueError(
            "the diagram has origin label 0; pyramid detection applies "
            "only to nonzero origin labels"
        )
    total = g.total
    everything = frozenset(range(total))
    incidences = [frozenset(v) for v in vertices(g, asg)]
    apexes = [v for v in incidences if len(v) == total - 1]
    product_verts = [v for v in incidences if len(v) == total - 3]
    if len(apexes) != 1 or len(apexes) + len(product_verts) != len(incidences):
        return None
    base = next(iter(everything - apexes[0]))
    triples = [everything - v for v in product_verts]
    if any(base in t for t in triples):
        return None
    laterals = sorted(everything - {base})
    co_missed = set()
    for t in triples:
        co_missed.update(itertools.combinations(sorted(t), 2))
    # same family <=> never missed together; families are the
    # components of the never-missed-together graph
    parent = {f: f for f in laterals}

    def find(f):
        while parent[f] != f:
            parent[f] = parent[parent[f]]
            f = parent[f]
        return f

    for fa, fb in itertools.combinations(laterals, 2):
        if (fa, fb) not in co_missed:
            parent[find(fa)] = find(fb)
    families = {}
    for f in laterals:
        families.setdefault(find(f), []).append(f)
    parts = sorted(families.values(), key=len)
    if len(parts) != 3 or any(len(p) < 2 for p in parts):
        return None
    part_of = {}
    for idx, p in enumerate(parts):
        for f in p:
            part_of[f] = idx
    for t in triples:
        if sorted(part_of[f] for f in t) != [0, 1, 2]:
            return None
    if len(triples) != len(parts[0]) * len(parts[1]) * len(parts[2]):
        return None
    return PyramidShape(*(len(p) - 1 for p in parts))


def _spec_for(n, template):
    from .search import SearchSpec

    if template is None:
        return SearchSpec(n)
    return SearchSpec(
        n,
        prefilter=template.prefilter,
        lemma_pruning=template.lemma_pruning,
        lanner_cap=template.lanner_cap,
        quasi_lanner_cap=template.quasi_lanner_cap,
        max_angle=template.max_angle,
    )


def enumerate_pyramids(spec=None, *, dims=None, budget_seconds=None,
                       jobs=1, checkpoint_dir=None):
    """All certified pyramid polytopes (nonzero origin label) over every
    dimension in dims (default 2..17), with their shapes attached.

    Each dimension runs the pyramid branch of the search pipeline under
    its own wall budget; spec, when given, supplies the policy knobs
    (its dimension field is ignored).  Raises CertificationFailure if
    any certified pyramid exceeds dimension 11 — that would contradict
    the classification this module encodes — and ResourceBudgetExceeded
    (resumable per dimension when checkpoint_dir is set) if a budget
    expires.
    """
    import os

    from .search import run_enumeration

    certificates = []
    for n in (dims if dims is not None else _DIMENSION_RANGE):
        checkpoint_path = None
        if checkpoint_dir:
            checkpoint_path = os.path.join(
                checkpoint_dir, f"hypercox-pyramids-dim{n}.checkpoint.json")
        report = run_enumeration(
            n, _spec_for(n, spec), origins="positive",
            budget_seconds=budget_seconds, checkpoint_path=checkpoint_path,
            jobs=jobs,
        )
        for hit in report.hits:
            cert = hit.certificate
            if cert.dimension > MAX_PYRAMID_DIMENSION:
                raise CertificationFailure(
                    f"a certified pyramid polytope has dimension "
                    f"{cert.dimension} > {MAX_PYRAMID_DIMENSION}: "
                    f"{hit.gale!r}"
                )
            certificates.append(cert)
    return certificates


def audit_non_product_pyramids(n, *, budget_seconds=None, jobs=1):
    """Audit of the pyramid restriction at one small dimension: run the
    unrestricted pipeline over every nonzero-origin Gale diagram that
    does NOT match a product-of-three-simplices lattice and report how
    many polytopes it certifies.  The restriction is sound exactly when
    that count is zero — the test suite asserts it at small n.
    """
    from .search import SearchSpec, run_enumeration

    spec = SearchSpec(n, prefilter=False, lemma_pruning=False)
    report = run_enumeration(
        n, spec, origins="positive", budget_seconds=budget_seconds,
        jobs=jobs,
    )
    offenders = []
    matched = 0
    for hit in report.hits:
        asg = FacetAssignment.standard(hit.gale)
        if is_pyramid_over_three_simplices(hit.gale, asg) is None:
            offenders.append(hit.to_json())
        else:
            matched += 1
    return {
        "dimension": n,
        "branches": report.counters.get("branches", 0),
        "certified": len(report.hits),
        "product_pyramids": matched,
        "non_product_certified": len(offenders),
        "offenders": offenders,
    }
