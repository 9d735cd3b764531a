"""Coxeter diagrams: Gram matrices, certified signatures, classification,
class generation, canonical keys, and a line-based text format.

Nodes are integers 0..n-1 (one per facet).  An absent edge means the
facets meet at a right angle (Gram entry 0); Angle(m) means dihedral
angle pi/m (entry -cos(pi/m)); Bold means parallel facets (entry -1);
Dotted(w) means diverging facets at distance with entry -w, w > 1, where
w may be an exact rational, an exact algebraic number (a sympy
expression), or None when not yet determined.
"""

import itertools
import math
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import numpy
import sympy

from .field import (
    CertificationFailure,
    cos_field,
    field_from_sympy,
    float_inertia,
    inertia,
    _sympy_enclosure,
)
from .interval import Interval

__all__ = [
    "Angle",
    "BOLD",
    "Bold",
    "CapTooSmall",
    "Classification",
    "CoxeterDiagram",
    "CoxeterParseError",
    "DiagramClass",
    "Dotted",
    "GramMatrix",
    "UnknownEntry",
    "canonical_key",
    "classify",
    "generate_class",
    "gram_matrix",
    "parse_coxeter",
    "serialize_coxeter",
    "signature",
]


class UnknownEntry(Exception):
    """An operation needed a Gram entry whose value is not determined."""


class CapTooSmall(Exception):
    """The dynamic edge-label cap was reached by an admissible diagram."""


class CoxeterParseError(ValueError):
    """Malformed Coxeter diagram text; carries the 1-based line number."""

    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


# ---------------------------------------------------------------------------
# Edges and diagrams
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Angle:
    """Dihedral angle pi/m between intersecting facets, m >= 3 (m = 2 is
    encoded by the absence of an edge)."""

    m: int

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 3:
            raise ValueError(f"Angle label must be an integer >= 3, got {self.m}")


@dataclass(frozen=True)
class Bold:
    """Parallel facets (Gram entry -1)."""


BOLD = Bold()


@dataclass(frozen=True)
class Dotted:
    """Diverging facets (Gram entry -w with weight w > 1).

    weight may be None (undetermined), an exact rational (int or
    Fraction), or a sympy expression for an exact algebraic value.
    """

    weight: object = None

    def __post_init__(self):
        w = self.weight
        if w is None:
            return
        if isinstance(w, float):
            raise ValueError("dotted weight must be exact; floats are ambiguous")
        if isinstance(w, int):
            object.__setattr__(self, "weight", Fraction(w))
            w = self.weight
        if isinstance(w, Fraction):
            if w <= 1:
                raise ValueError(f"dotted weight must exceed 1, got {w}")
        elif not isinstance(w, sympy.Expr):
            raise ValueError(f"unsupported dotted weight type {type(w).__name__}")

    @property
    def known(self):
        return self.weight is not None


class CoxeterDiagram:
    """An edge-labeled graph on nodes 0..n-1; immutable and hashable."""

    __slots__ = ("n_nodes", "_edges", "_emap", "_hash")

    def __init__(self, n_nodes, edges=()):
        if n_nodes < 1:
            raise ValueError("diagram needs at least one node")
        normalized = {}
        items = edges.items() if isinstance(edges, dict) else edges
        for entry in items:
            if isinstance(edges, dict):
                (i, j), e = entry
            else:
                i, j, e = entry
            if not (0 <= i < n_nodes and 0 <= j < n_nodes) or i == j:
                raise ValueError(f"bad node pair ({i}, {j}) for {n_nodes} nodes")
            key = (i, j) if i < j else (j, i)
            if key in normalized:
                raise ValueError(f"duplicate edge for pair {key}")
            if not isinstance(e, (Angle, Bold, Dotted)):
                raise ValueError(f"unsupported edge kind {e!r}")
            normalized[key] = e
        object.__setattr__(self, "n_nodes", n_nodes)
        object.__setattr__(self, "_edges", tuple(sorted(normalized.items())))
        object.__setattr__(self, "_emap", normalized)
        object.__setattr__(self, "_hash", hash((n_nodes, self._edges)))

    def __setattr__(self, name, value):
        raise AttributeError("CoxeterDiagram is immutable")

    @property
    def edges(self):
        return dict(self._emap)

    def edge(self, i, j):
        key = (i, j) if i < j else (j, i)
        return self._emap.get(key)

    def edge_items(self):
        return self._edges

    def __eq__(self, other):
        return (
            isinstance(other, CoxeterDiagram)
            and self.n_nodes == other.n_nodes
            and self._edges == other._edges
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"CoxeterDiagram({self.n_nodes}, {list(self._edges)!r})"

    # -- structure ---------------------------------------------------------

    def has_dotted(self):
        return any(isinstance(e, Dotted) for _, e in self._edges)

    def has_unknown_dotted(self):
        return any(isinstance(e, Dotted) and not e.known for _, e in self._edges)

    def neighbors(self):
        adj = [[] for _ in range(self.n_nodes)]
        for (i, j), _ in self._edges:
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def components(self):
        adj = self.neighbors()
        seen = [False] * self.n_nodes
        comps = []
        for start in range(self.n_nodes):
            if seen[start]:
                continue
            stack = [start]
            seen[start] = True
            comp = []
            while stack:
                v = stack.pop()
                comp.append(v)
                for u in adj[v]:
                    if not seen[u]:
                        seen[u] = True
                        stack.append(u)
            comps.append(sorted(comp))
        return comps

    def is_connected(self):
        return len(self.components()) == 1

    def subdiagram(self, nodes):
        """Induced diagram on the given nodes, relabeled 0..k-1 in sorted
        order of the original indices."""
        nodes = sorted(set(nodes))
        if not nodes:
            raise ValueError("subdiagram needs at least one node")
        index = {v: i for i, v in enumerate(nodes)}
        sub = []
        for (i, j), e in self._edges:
            if i in index and j in index:
                sub.append((index[i], index[j], e))
        return CoxeterDiagram(len(nodes), sub)

    def remove_node(self, y):
        return self.subdiagram([v for v in range(self.n_nodes) if v != y])


# ---------------------------------------------------------------------------
# Gram matrices and signatures
# ---------------------------------------------------------------------------

class GramMatrix:
    """The symmetric Gram matrix of a diagram, kept in tagged exact form
    and realized as float intervals or exact field elements on demand."""

    def __init__(self, diagram):
        self.diagram = diagram
        self.size = diagram.n_nodes
        self._exact = None

    @property
    def has_unknown(self):
        return self.diagram.has_unknown_dotted()

    def entry_description(self, i, j):
        """Human/JSON-facing exact description of entry (i, j)."""
        if i == j:
            return "1"
        e = self.diagram.edge(i, j)
        if e is None:
            return "0"
        if isinstance(e, Angle):
            return "-1/2" if e.m == 3 else f"-cos(pi/{e.m})"
        if isinstance(e, Bold):
            return "-1"
        if e.weight is None:
            return "unknown"
        if isinstance(e.weight, Fraction):
            return f"-{e.weight}"
        return f"-({e.weight})"

    def float_intervals(self):
        """Outward-rounded interval matrix enclosing the exact Gram."""
        if self.has_unknown:
            raise UnknownEntry("Gram matrix has undetermined dotted entries")
        n = self.size
        rows = [[Interval.exact(0.0)] * n for _ in range(n)]
        for i in range(n):
            rows[i][i] = Interval.exact(1.0)
        for (i, j), e in self.diagram.edge_items():
            rows[i][j] = rows[j][i] = _edge_float_interval(e)
        return rows

    def exact(self):
        """(field, matrix of field elements), exact."""
        if self._exact is not None:
            return self._exact
        if self.has_unknown:
            raise UnknownEntry("Gram matrix has undetermined dotted entries")
        labels = [e.m for _, e in self.diagram.edge_items() if isinstance(e, Angle)]
        sympy_weights = []
        for _, e in self.diagram.edge_items():
            if isinstance(e, Dotted) and isinstance(e.weight, sympy.Expr):
                sympy_weights.append(e.weight)
        if sympy_weights:
            field, rows = self._exact_via_sympy(labels, sympy_weights)
        else:
            field, rows = self._exact_in_cos_field(labels)
        self._exact = (field, rows)
        return self._exact

    def _exact_in_cos_field(self, labels):
        lcm = 1
        for m in labels:
            lcm = lcm * m // math.gcd(lcm, m)
        field = cos_field(lcm)
        n = self.size
        zero = field.zero
        rows = [[zero] * n for _ in range(n)]
        for i in range(n):
            rows[i][i] = field.one
        for (i, j), e in self.diagram.edge_items():
            if isinstance(e, Angle):
                val = field.neg(field.cos_pi_over(e.m))
            elif isinstance(e, Bold):
                val = field.from_rational(-1)
            else:
                val = field.from_rational(-e.weight)
            rows[i][j] = rows[j][i] = val
        return field, rows

    def _exact_via_sympy(self, labels, _sympy_weights):
        exprs = []
        slots = []
        for (i, j), e in self.diagram.edge_items():
            if isinstance(e, Angle):
                exprs.append(-sympy.cos(sympy.pi / e.m))
            elif isinstance(e, Bold):
                exprs.append(sympy.Integer(-1))
            else:
                w = e.weight
                exprs.append(-(w if isinstance(w, sympy.Expr) else sympy.Rational(w)))
            slots.append((i, j))
        field, elems = field_from_sympy(exprs)
        n = self.size
        rows = [[field.zero] * n for _ in range(n)]
        for i in range(n):
            rows[i][i] = field.one
        for (i, j), val in zip(slots, elems):
            rows[i][j] = rows[j][i] = val
        return field, rows


def _edge_float_interval(e):
    if isinstance(e, Angle):
        c = _cos_interval(e.m)
        return Interval(-c.hi, -c.lo)
    if isinstance(e, Bold):
        return Interval.exact(-1.0)
    w = e.weight
    if isinstance(w, Fraction):
        itv = Interval.from_rational(w)
    else:
        lo, hi = _sympy_enclosure(w, 80)
        itv = Interval(
            math.nextafter(float(lo), -math.inf),
            math.nextafter(float(hi), math.inf),
        )
    return Interval(-itv.hi, -itv.lo)


@lru_cache(maxsize=None)
def _cos_interval(m):
    """Outward float interval around cos(pi/m)."""
    v = math.cos(math.pi / m)
    return Interval(
        math.nextafter(math.nextafter(v, -math.inf), -math.inf),
        math.nextafter(math.nextafter(v, math.inf), math.inf),
    )


def gram_matrix(d):
    """The Gram matrix of a Coxeter diagram."""
    return GramMatrix(d)


def signature(m):
    """Certified (positive, negative, zero) eigenvalue counts of a
    GramMatrix: float-interval screening first, exact congruence when the
    intervals cannot decide (in particular whenever the matrix is
    singular, since an exact zero is never float-certifiable)."""
    if m.has_unknown:
        raise UnknownEntry("signature needs all Gram entries known")
    screened = float_inertia(m.float_intervals())
    if screened is not None:
        return screened
    field, rows = m.exact()
    return inertia(field, rows)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

class DiagramClass(Enum):
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    LANNER = "lanner"
    QUASI_LANNER = "quasi_lanner"
    OTHER = "other"


@dataclass(frozen=True)
class Classification:
    kind: DiagramClass
    connected: bool

    def __str__(self):
        if self.kind is DiagramClass.PARABOLIC:
            return f"parabolic({'connected' if self.connected else 'disconnected'})"
        return self.kind.value


# Profiles of connected diagrams: positive definite, connected affine
# (positive semidefinite and singular), or admitting a negative direction.
_PD, _AFFINE, _NEG = "pd", "affine", "neg"

# Certified screening margin for float eigenvalues: entries are O(1) and
# exact up to 2 ulp, so Weyl perturbation plus LAPACK backward error stay
# far below this; eigenvalues closer to zero go to exact arithmetic.
_EIG_MARGIN = 1e-9


@lru_cache(maxsize=1 << 18)
def _connected_profile(comp):
    """Profile of a connected diagram (caller guarantees connectivity)."""
    n = comp.n_nodes
    for _, e in comp.edge_items():
        if isinstance(e, Dotted):
            # entry -w with w > 1 gives a 2x2 principal minor 1 - w^2 < 0
            return _NEG
        if isinstance(e, Bold) and n >= 3:
            # connectivity gives the bold pair a neighbor; the 3-node
            # subdiagram has determinant -(cos a + cos b)^2 < 0, and a
            # negative direction persists upward by eigenvalue interlacing
            return _NEG
    a = numpy.eye(n)
    for (i, j), e in comp.edge_items():
        v = -1.0 if isinstance(e, Bold) else -math.cos(math.pi / e.m)
        a[i, j] = a[j, i] = v
    eigs = numpy.linalg.eigvalsh(a)
    if eigs[0] < -_EIG_MARGIN:
        return _NEG
    if eigs[0] > _EIG_MARGIN:
        return _PD
    m = GramMatrix(comp)
    field, rows = m.exact()
    pos, neg, zero = inertia(field, rows, stop_on_negative=True)
    if neg:
        return _NEG
    return _AFFINE if zero else _PD


def _profiles(d):
    comps = d.components()
    if len(comps) == 1:
        return [_connected_profile(d)]
    return [_connected_profile(d.subdiagram(comp)) for comp in comps]


def _one_level_kind(d):
    """Coarse kind of a node-deleted subdiagram, for the one-level
    classification test: 'elliptic', 'parabolic_connected',
    'parabolic_disconnected', or 'neither'."""
    profs = _profiles(d)
    if all(p == _PD for p in profs):
        return "elliptic"
    if all(p == _AFFINE for p in profs):
        return "parabolic_connected" if len(profs) == 1 else "parabolic_disconnected"
    return "neither"


@lru_cache(maxsize=1 << 16)
def classify(d):
    """Classify a diagram by the definitional scheme.

    Elliptic: positive definite.  Parabolic: positive semidefinite,
    singular, with every connected component singular.  Lanner:
    connected, neither of the above, every proper subdiagram elliptic.
    QuasiLanner: connected, neither elliptic nor parabolic nor Lanner,
    every proper subdiagram elliptic or parabolic.  Other: the rest.

    The proper-subdiagram conditions are decided by examining only the
    node-deleted subdiagrams: positive definiteness is hereditary, and
    any singular positive-semidefinite subdiagram of a Lanner/QuasiLanner
    candidate must be connected for the definitional check to succeed on
    deeper levels, so the one-level test is exact.

    Diagrams containing dotted edges are never Lanner or QuasiLanner (a
    dotted pair is neither elliptic nor parabolic); with known weights
    they classify as Other when not elliptic/parabolic.  Undetermined
    dotted weights raise UnknownEntry.
    """
    if d.has_unknown_dotted():
        raise UnknownEntry("classification needs dotted weights to be known")
    profs = _profiles(d)
    connected = len(profs) == 1
    if all(p == _PD for p in profs):
        return Classification(DiagramClass.ELLIPTIC, connected)
    if all(p == _AFFINE for p in profs):
        return Classification(DiagramClass.PARABOLIC, connected)
    if not connected:
        return Classification(DiagramClass.OTHER, False)
    if d.has_dotted() or d.n_nodes < 3:
        return Classification(DiagramClass.OTHER, True)
    all_elliptic = True
    for y in range(d.n_nodes):
        kind = _one_level_kind(d.remove_node(y))
        if kind == "elliptic":
            continue
        if kind == "parabolic_connected":
            all_elliptic = False
            continue
        return Classification(DiagramClass.OTHER, True)
    if all_elliptic:
        return Classification(DiagramClass.LANNER, True)
    return Classification(DiagramClass.QUASI_LANNER, True)


# ---------------------------------------------------------------------------
# Canonical keys
# ---------------------------------------------------------------------------

def _edge_token(e, include_dotted_weights):
    if isinstance(e, Angle):
        return (0, e.m)
    if isinstance(e, Bold):
        return (1,)
    if not include_dotted_weights or e.weight is None:
        return (2,)
    return (2,) + _weight_token(e.weight)


@lru_cache(maxsize=None)
def _weight_token_algebraic(expr):
    x = sympy.Symbol("x")
    poly = sympy.Poly(sympy.minimal_polynomial(expr, x), x)
    n_real = poly.count_roots(-sympy.oo, sympy.oo)
    from .field import _locate_real_root

    root = _locate_real_root(poly, expr)
    index = next(
        i for i in range(n_real) if sympy.CRootOf(poly, i) == root
    )
    coeffs = tuple(int(c) for c in poly.all_coeffs())
    return ("alg", coeffs, index)


def _weight_token(w):
    if isinstance(w, Fraction):
        return ("rat", w.numerator, w.denominator)
    if isinstance(w, sympy.Expr) and w.is_Rational:
        return ("rat", int(w.p), int(w.q))
    return _weight_token_algebraic(w)


def canonical_key(d, include_dotted_weights=True):
    """Opaque comparable key equal for two diagrams iff they are
    isomorphic as edge-labeled graphs.

    With include_dotted_weights=False, all dotted edges compare equal
    regardless of weight (used to match enumeration output, whose dotted
    weights are derived, against externally stored fixtures).

    Color refinement plus individualization; exact for any diagram (the
    final key is minimized over all refinement-compatible labelings).
    """
    n = d.n_nodes
    comps = d.components()
    if len(comps) > 1:
        # canonicalize per component and forget the grouping: the sorted
        # multiset of component keys is a complete isomorphism invariant
        # and sidesteps the symmetric-diagram search blowup that unions
        # of identical components would otherwise cause
        return (
            n,
            tuple(
                sorted(
                    canonical_key(d.subdiagram(c), include_dotted_weights)
                    for c in comps
                )
            ),
        )
    tokens = {}
    for (i, j), e in d.edge_items():
        t = _edge_token(e, include_dotted_weights)
        tokens.setdefault(i, {})[j] = t
        tokens.setdefault(j, {})[i] = t

    def refine(colors):
        while True:
            sigs = []
            for v in range(n):
                nb = sorted(
                    (tokens.get(v, {}).get(u), colors[u])
                    for u in tokens.get(v, {})
                )
                sigs.append((colors[v], tuple(nb)))
            ranking = {s: r for r, s in enumerate(sorted(set(sigs)))}
            new = tuple(ranking[s] for s in sigs)
            if new == colors:
                return colors
            colors = new

    best = [None]

    def edge_code(perm_inv):
        # perm_inv[v] = canonical position of node v
        code = []
        for (i, j), e in d.edge_items():
            a, b = perm_inv[i], perm_inv[j]
            if a > b:
                a, b = b, a
            code.append((a, b, _edge_token(e, include_dotted_weights)))
        return tuple(sorted(code))

    def search(colors, assigned):
        # assigned: nodes already given singleton colors 0..k-1
        cells = {}
        for v, c in enumerate(colors):
            cells.setdefault(c, []).append(v)
        multi = [c for c, vs in sorted(cells.items()) if len(vs) > 1]
        if not multi:
            order = sorted(range(n), key=lambda v: colors[v])
            perm_inv = [0] * n
            for pos, v in enumerate(order):
                perm_inv[v] = pos
            code = edge_code(perm_inv)
            if best[0] is None or code < best[0]:
                best[0] = code
            return
        target = multi[0]
        for v in cells[target]:
            new = list(colors)
            new[v] = -1 - assigned  # fresh color below all others
            search(refine(tuple(new)), assigned + 1)

    search(refine((0,) * n), 0)
    return (n, best[0])


# ---------------------------------------------------------------------------
# Class generation
# ---------------------------------------------------------------------------

# Proven label caps for target diagrams on >= 4 nodes: every edge of a
# connected diagram on >= 3 nodes lies in a connected 3-node subdiagram,
# which must be elliptic (Lanner targets: det 1 - cos^2(pi/m) - cos^2(pi/m')
# > 0 with m' >= 3 forces m <= 5) or elliptic/parabolic (QuasiLanner:
# m <= 6).  The generator still searches one label beyond the cap and
# raises CapTooSmall if a target ever uses it.
_PROVEN_CAP = {DiagramClass.LANNER: 5, DiagramClass.QUASI_LANNER: 6}


def generate_class(target, max_nodes, max_label=12):
    """All diagrams of the target class (Lanner or QuasiLanner) with at
    most max_nodes nodes, as a set of canonical representatives.

    Diagrams on >= 4 nodes are enumerated completely (their edge labels
    are provably capped).  Three-node target diagrams form infinite
    families — triangles (p, q, r) with 1/p + 1/q + 1/r < 1 and paths
    with cos^2(pi/p) + cos^2(pi/q) > 1, plus bold-edge variants in the
    QuasiLanner case — so finite edge labels are enumerated only up to
    max_label there, by explicit policy.

    Dotted edges never occur (a dotted pair is neither elliptic nor
    parabolic, so it cannot be a subdiagram of a target diagram and the
    target itself is classified Other).
    """
    if target not in (DiagramClass.LANNER, DiagramClass.QUASI_LANNER):
        raise ValueError("generate_class targets Lanner or QuasiLanner")
    if max_nodes < 2:
        raise ValueError("max_nodes must be >= 2")
    found = {}
    if max_nodes >= 3:
        for d in _three_node_targets(target, max_label):
            found.setdefault(canonical_key(d), d)
    if max_nodes >= 4:
        for d in _grown_targets(target, max_nodes):
            found.setdefault(canonical_key(d), d)
    return set(found.values())


def _three_node_targets(target, max_label):
    labels = list(range(2, max_label + 1))
    alphabet = labels + ["inf"]
    for l01, l02, l12 in itertools.product(alphabet, repeat=3):
        edges = []
        for (i, j), lab in (((0, 1), l01), ((0, 2), l02), ((1, 2), l12)):
            if lab == "inf":
                edges.append((i, j, BOLD))
            elif lab != 2:
                edges.append((i, j, Angle(lab)))
        d = CoxeterDiagram(3, edges)
        if not d.is_connected():
            continue
        if classify(d).kind is target:
            yield d


def _grown_targets(target, max_nodes):
    """Targets on 4..max_nodes nodes, grown node by node through
    connected states.

    A state is a connected diagram that is elliptic or, for QuasiLanner
    targets, parabolic.  Growth through connected states reaches every
    target: a target is connected, so it has a build order in which
    every node attaches to an earlier one (breadth-first from any
    node); each prefix of that order induces a connected proper
    subdiagram; and a proper subdiagram of a target is elliptic or
    parabolic by definition, a connected parabolic one being exactly
    the extra state shape QuasiLanner growth allows.  Restricting to
    connected states keeps the state space to the classical irreducible
    families instead of all their disjoint unions, and makes candidate
    connectivity an O(1) fact (the new node is attached or not).

    Candidates are screened with float spectra before any exact work:
    a clearly positive-definite extension is an elliptic state, a
    clearly indefinite one can only be a target, and a target must
    additionally pass the one-node-deleted screen (no such minor
    clearly indefinite); classify then certifies survivors exactly.
    The screen trusts the same eigenvalue margin as the profile cache.
    """
    cap = _PROVEN_CAP[target]
    labels = list(range(3, cap + 2))  # include cap + 1 as the self-check
    allow_affine = target is DiagramClass.QUASI_LANNER
    edge_of = {m: Angle(m) for m in labels}
    edge_of[-1] = BOLD

    states = {}
    for t in labels + ([-1] if allow_affine else []):
        d = CoxeterDiagram(2, [(0, 1, edge_of[t])])
        states.setdefault(canonical_key(d), d)

    for size in range(3, max_nodes + 1):
        q = size - 1
        next_states = {}
        for s in states.values():
            stok = _state_tokens(s)
            base = numpy.eye(size)
            for i in range(q):
                row = stok[i]
                for j in range(i + 1, q):
                    if row[j]:
                        base[i, j] = base[j, i] = _TOKEN_FLOAT[row[j]]
            base_edges = [(i, j, e) for (i, j), e in s.edge_items()]

            def build(assignment, base_edges=base_edges, q=q):
                edges = list(base_edges)
                for i, t in enumerate(assignment):
                    if t:
                        edges.append((i, q, edge_of[t]))
                return CoxeterDiagram(q + 1, edges)

            for assignment in _raw_extensions(stok, labels):
                if not any(assignment):
                    continue  # detached new node: not connected
                a = base.copy()
                for i, t in enumerate(assignment):
                    if t:
                        a[i, q] = a[q, i] = _TOKEN_FLOAT[t]
                low = numpy.linalg.eigvalsh(a)[0]
                d = None
                if low > _EIG_MARGIN:
                    prof = _PD
                elif low < -_EIG_MARGIN:
                    prof = _NEG
                else:
                    d = build(assignment)
                    prof = _connected_profile(d)
                if prof == _NEG:
                    if size < 4:
                        continue  # 3-node targets are enumerated directly
                    minors = numpy.stack(
                        [
                            numpy.delete(numpy.delete(a, k, 0), k, 1)
                            for k in range(size)
                        ]
                    )
                    lows = numpy.linalg.eigvalsh(minors)[:, 0]
                    if (lows < -_EIG_MARGIN).any():
                        continue  # a node-deleted subdiagram is indefinite
                    if d is None:
                        d = build(assignment)
                    if classify(d).kind is target:
                        if any(
                            isinstance(e, Angle) and e.m > cap
                            for _, e in d.edge_items()
                        ):
                            raise CapTooSmall(
                                f"target diagram found at edge label "
                                f"{cap + 1}, beyond the proven cap {cap}"
                            )
                        yield d
                elif size < max_nodes and (prof == _PD or allow_affine):
                    if d is None:
                        d = build(assignment)
                    next_states.setdefault(canonical_key(d), d)
        states = next_states


def _has_negative(d):
    return any(p == _NEG for p in _profiles(d))


def _state_tokens(s):
    """Symmetric integer-token adjacency of a dotted-free diagram:
    0 no edge, -1 bold, m >= 3 for Angle(m)."""
    q = s.n_nodes
    stok = [[0] * q for _ in range(q)]
    for (i, j), e in s.edge_items():
        t = -1 if isinstance(e, Bold) else e.m
        stok[i][j] = stok[j][i] = t
    return stok


class _TokenFloatTable(dict):
    def __missing__(self, t):
        v = -1.0 if t == -1 else -math.cos(math.pi / t)
        self[t] = v
        return v


_TOKEN_FLOAT = _TokenFloatTable()


# Prune cache keyed by tiny integer-token tuples.  A hit costs one dict
# lookup instead of building and classifying a diagram.
_PRUNE_CACHE = {}


def _token_edge(t):
    if t == 0:
        return None
    return BOLD if t == -1 else Angle(t)


def _prune_neg(key):
    """Whether the small diagram encoded by the token tuple admits a
    negative direction.  key = (n, ((i, j, token), ...)) with the tokens
    above; certified float screening with exact fallback."""
    r = _PRUNE_CACHE.get(key)
    if r is not None:
        return r
    n, items = key
    a = numpy.eye(n)
    for i, j, t in items:
        a[i, j] = a[j, i] = _TOKEN_FLOAT[t]
    low = numpy.linalg.eigvalsh(a)[0]
    if low < -_EIG_MARGIN:
        r = True
    elif low > _EIG_MARGIN:
        r = False
    else:
        d = CoxeterDiagram(n, [(i, j, _token_edge(t)) for i, j, t in items])
        r = _has_negative(d)
    _PRUNE_CACHE[key] = r
    return r


def _raw_extensions(stok, labels):
    """Token assignments (0 none, -1 bold, m >= 3 Angle(m); one entry per
    state node) for attaching one new node to the state encoded by the
    token matrix stok.

    Partial assignments are pruned through their 3- and 4-node
    subdiagrams containing the new node: Gram entries only grow in
    magnitude as the assignment fills in, and the minimal eigenvalue of
    I - C is monotone non-increasing in the entries of the non-negative
    matrix C (Perron-Frobenius), so a subdiagram that already admits a
    negative direction dooms every completion.

    Only proper subdiagrams of the grown diagram may be tested this
    way: the grown diagram itself is allowed to be indefinite (that is
    what a target is).  The 4-node test therefore only runs for states
    on >= 4 nodes.  The 3-node test on a 2-node state does cover the
    whole 3-node result, but extensions of 2-node states are only ever
    kept as states, which admit no negative direction anywhere.
    """
    q = len(stok)
    tok_choices = [0] + list(labels) + [-1]
    assignment = [0] * q

    # Interchangeable-node reduction: if swapping two state nodes is an
    # automorphism (identical edge rows away from the pair), assignments
    # differing only by how labels are distributed over such a pair are
    # isomorphic, so tokens are forced non-decreasing along each class.
    # The relation "rows agree off the pair" is transitive (mutual edges
    # inside a class are forced equal), so classes are well defined.
    prev_twin = [-1] * q
    for pos in range(q):
        for i in range(pos - 1, -1, -1):
            if all(
                stok[i][x] == stok[pos][x]
                for x in range(q)
                if x != i and x != pos
            ):
                prev_twin[pos] = i
                break

    def prune(pos):
        tp = assignment[pos]
        for i in range(q):
            if i == pos:
                continue
            ti = assignment[i] if i < pos else 0
            tij = stok[i][pos]
            if ti == 0 and tij == 0:
                continue
            if _prune_neg(
                (3, ((0, 2, ti), (1, 2, tp), (0, 1, tij)))
                if ti and tij
                else (3, ((1, 2, tp), (0, 1, tij)))
                if tij
                else (3, ((0, 2, ti), (1, 2, tp)))
            ):
                return True
        if q == 3:
            return False
        for i in range(pos):
            ti = assignment[i]
            if ti == 0:
                continue
            for j in range(i + 1, pos):
                tj = assignment[j]
                if tj == 0:
                    continue
                items = [(0, 3, ti), (1, 3, tj), (2, 3, tp)]
                if stok[i][j]:
                    items.append((0, 1, stok[i][j]))
                if stok[i][pos]:
                    items.append((0, 2, stok[i][pos]))
                if stok[j][pos]:
                    items.append((1, 2, stok[j][pos]))
                if _prune_neg((4, tuple(items))):
                    return True
        return False

    def rec(pos):
        if pos == q:
            yield tuple(assignment)
            return
        floor = assignment[prev_twin[pos]] if prev_twin[pos] >= 0 else -1
        for choice in tok_choices:
            if choice < floor:
                continue
            assignment[pos] = choice
            if choice == 0 or not prune(pos):
                yield from rec(pos + 1)
        assignment[pos] = 0

    yield from rec(0)


def _extensions(s, labels):
    """All diagrams obtained from state s by adding one node with any
    combination of edges (including none) to the existing nodes, pruned
    as in _raw_extensions."""
    q = s.n_nodes
    edge_of = {m: Angle(m) for m in labels}
    edge_of[-1] = BOLD
    base = [(i, j, e) for (i, j), e in s.edge_items()]
    for assignment in _raw_extensions(_state_tokens(s), labels):
        edges = list(base)
        for i, t in enumerate(assignment):
            if t:
                edges.append((i, q, edge_of[t]))
        yield CoxeterDiagram(q + 1, edges)


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

_DECIMAL_RE = re.compile(r"^\d+(\.\d+)?$")


def parse_coxeter(text):
    """Parse the line-based Coxeter diagram format.

    Line 1: ``coxeter v1``; line 2: ``nodes N``; then any number of
    ``edge i j m`` (m >= 3), ``edge i j inf``, or ``edge i j dotted [w]``
    lines.  ``#`` starts a comment; unlisted pairs are right angles.
    """
    n_nodes = None
    edges = {}
    stage = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if stage == 0:
            if parts != ["coxeter", "v1"]:
                raise CoxeterParseError("expected header 'coxeter v1'", lineno)
            stage = 1
            continue
        if stage == 1:
            if len(parts) != 2 or parts[0] != "nodes":
                raise CoxeterParseError("expected 'nodes N'", lineno)
            try:
                n_nodes = int(parts[1])
            except ValueError:
                raise CoxeterParseError(f"bad node count {parts[1]!r}", lineno)
            if n_nodes < 1:
                raise CoxeterParseError("node count must be >= 1", lineno)
            stage = 2
            continue
        if parts[0] != "edge" or len(parts) < 4:
            raise CoxeterParseError(f"expected 'edge i j <label>', got {line!r}", lineno)
        try:
            i, j = int(parts[1]), int(parts[2])
        except ValueError:
            raise CoxeterParseError("edge endpoints must be integers", lineno)
        if i == j:
            raise CoxeterParseError("edge endpoints must differ", lineno)
        if not (0 <= i < n_nodes and 0 <= j < n_nodes):
            raise CoxeterParseError(
                f"edge endpoints out of range for {n_nodes} nodes", lineno
            )
        key = (min(i, j), max(i, j))
        if key in edges:
            raise CoxeterParseError(f"duplicate edge for pair {key}", lineno)
        label = parts[3]
        if label == "inf":
            if len(parts) != 4:
                raise CoxeterParseError("unexpected tokens after 'inf'", lineno)
            edges[key] = BOLD
        elif label == "dotted":
            if len(parts) == 4:
                edges[key] = Dotted()
            elif len(parts) == 5:
                if not _DECIMAL_RE.match(parts[4]):
                    raise CoxeterParseError(
                        f"bad dotted weight {parts[4]!r}", lineno
                    )
                w = Fraction(parts[4])
                if w <= 1:
                    raise CoxeterParseError("dotted weight must exceed 1", lineno)
                edges[key] = Dotted(w)
            else:
                raise CoxeterParseError("too many tokens after 'dotted'", lineno)
        else:
            if len(parts) != 4:
                raise CoxeterParseError(f"unexpected tokens after {label!r}", lineno)
            try:
                m = int(label)
            except ValueError:
                raise CoxeterParseError(f"bad edge label {label!r}", lineno)
            if m < 3:
                raise CoxeterParseError(
                    "edge labels must be >= 3 (omit the pair for a right angle)",
                    lineno,
                )
            edges[key] = Angle(m)
    if stage == 0:
        raise CoxeterParseError("empty input; expected 'coxeter v1'", 1)
    if stage == 1:
        raise CoxeterParseError("missing 'nodes N' line", 1)
    return CoxeterDiagram(n_nodes, edges)


def serialize_coxeter(d, comment=None):
    """Serialize a diagram to the text format.

    Exact rational dotted weights with terminating decimal expansions
    round-trip exactly; other weights are written as 17-significant-digit
    decimals (a re-certification hint, not an exact value), since the
    format carries only decimals.
    """
    lines = []
    if comment:
        for c in comment.splitlines():
            lines.append(f"# {c}")
    lines.append("coxeter v1")
    lines.append(f"nodes {d.n_nodes}")
    for (i, j), e in d.edge_items():
        if isinstance(e, Angle):
            lines.append(f"edge {i} {j} {e.m}")
        elif isinstance(e, Bold):
            lines.append(f"edge {i} {j} inf")
        elif e.weight is None:
            lines.append(f"edge {i} {j} dotted")
        else:
            lines.append(f"edge {i} {j} dotted {_weight_decimal(e.weight)}")
    return "\n".join(lines) + "\n"


def _weight_decimal(w):
    if isinstance(w, Fraction):
        den = w.denominator
        while den % 2 == 0:
            den //= 2
        while den % 5 == 0:
            den //= 5
        if den == 1:  # terminating decimal: write it exactly
            num, d = w.numerator, w.denominator
            scale = 1
            while d > 1:
                if d % 2 == 0:
                    d //= 2
                    scale *= 5
                else:
                    d //= 5
                    scale *= 2
            digits = str(num * scale)
            exp = len(str(w.denominator * scale)) - 1
            if exp == 0:
                return digits
            whole, frac = digits[:-exp] or "0", digits[-exp:].rstrip("0")
            return f"{whole}.{frac}" if frac else whole
        return repr(float(w))
    # sympy expression: high-precision decimal hint
    val = sympy.N(w, 17)
    return f"{float(val):.17g}"
