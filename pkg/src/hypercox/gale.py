"""Standard two-dimensional Gale diagrams for n-polytopes with n+3 facets.

A diagram places non-negative integer labels on the vertices of a
regular 2k-gon (vertex i at angle pi*(i-1)/k, indices 1..2k) and on the
origin.  Standardness is four rules: the labels sum to n+3 for the
represented dimension n; no two neighboring polygon vertices are both
zero; no two opposite vertices are both zero; and the labels strictly
inside any open half-plane through the origin sum to at least two.

All geometry here is exact integer arithmetic: a polygon vertex is only
ever its direction index (units of pi/k), and origin-in-convex-hull
questions reduce to cyclic gap comparisons — the origin lies in the
hull of a set of polygon vertices iff no open semicircle contains them
all, i.e. iff the maximal cyclic gap between occupied directions is at
most k units.  The boundary case (antipodal support, gap exactly k)
counts as containment, matching closed convex hulls.
"""

import itertools
from dataclasses import dataclass
from functools import cached_property

__all__ = [
    "FacetAssignment",
    "GaleDiagram",
    "GaleParseError",
    "InvalidSubset",
    "RuleViolation",
    "TooLarge",
    "arc_facets",
    "enumerate_standard",
    "face_lattice_json",
    "faces",
    "is_face",
    "is_pyramid",
    "parse_gale",
    "serialize_gale",
    "validate",
    "vertices",
]

# faces() scans all facet subsets; beyond this many facets the scan is
# refused (vertices() uses a closed-form census and has no such bound)
_SCAN_LIMIT = 24


class InvalidSubset(ValueError):
    """A facet subset refers to facets the assignment does not have."""


class TooLarge(Exception):
    """The exhaustive face scan was asked for more facets than it scans."""


class GaleParseError(ValueError):
    """Malformed Gale diagram text; carries the 1-based line number."""

    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class GaleDiagram:
    """Labels of a standard two-dimensional Gale diagram.

    k is half the polygon vertex count; labels is the tuple
    (mu_1, ..., mu_2k) in polygon order; origin_label is mu_0.
    Construction checks only well-formedness (shapes and types); rule
    conformance is a separate question answered by validate().
    """

    k: int
    labels: tuple
    origin_label: int = 0

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 2:
            raise ValueError(f"k must be an integer >= 2, got {self.k!r}")
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) != 2 * self.k:
            raise ValueError(
                f"need {2 * self.k} labels for k={self.k}, got {len(labels)}"
            )
        for mu in labels + (self.origin_label,):
            if not isinstance(mu, int) or isinstance(mu, bool) or mu < 0:
                raise ValueError(f"labels are non-negative integers, got {mu!r}")

    def label(self, i):
        """Label of polygon vertex a_i; i is 1-based and cyclic."""
        return self.labels[(i - 1) % (2 * self.k)]

    @property
    def total(self):
        """Sum of all labels including the origin."""
        return sum(self.labels) + self.origin_label

    @property
    def dimension(self):
        """The represented polytope dimension n (total label sum - 3)."""
        return self.total - 3

    @property
    def facet_count(self):
        return self.total

    def __str__(self):
        return (
            f"k={self.k} labels=({', '.join(map(str, self.labels))}) "
            f"origin={self.origin_label}"
        )


@dataclass(frozen=True)
class RuleViolation:
    """One failed standardness rule, with the offending 1-based indices."""

    rule: int
    positions: tuple
    message: str

    def __str__(self):
        return f"rule {self.rule}: {self.message}"


def validate(g):
    """All standardness violations of g (empty list = standard).

    Rule 1: the total label sum is n+3 for a polytope dimension n >= 2,
    so it must be at least 5 (non-negativity and integrality are already
    enforced by construction).  Rule 2: no two cyclically neighboring
    polygon labels are both zero.  Rule 3: no opposite pair (a_i,
    a_{k+i}) is all zero.  Rule 4: every open half-plane through the
    origin sees label sum >= 2; it suffices to check the 2k half-planes
    bounded by the lines through polygon vertices, whose strict insides
    are exactly the runs of k-1 consecutive positions (half-planes whose
    boundary misses all vertices see longer runs, hence larger sums).
    """
    k, labels = g.k, g.labels
    out = []
    if g.total < 5:
        out.append(
            RuleViolation(
                1,
                (),
                f"total label sum {g.total} represents dimension "
                f"{g.total - 3} < 2",
            )
        )
    for i in range(2 * k):
        j = (i + 1) % (2 * k)
        if labels[i] == 0 and labels[j] == 0:
            out.append(
                RuleViolation(
                    2, (i + 1, j + 1), f"neighbors a_{i + 1}, a_{j + 1} both zero"
                )
            )
    for i in range(k):
        if labels[i] == 0 and labels[i + k] == 0:
            out.append(
                RuleViolation(
                    3,
                    (i + 1, i + k + 1),
                    f"opposite vertices a_{i + 1}, a_{i + k + 1} both zero",
                )
            )
    for start in range(2 * k):
        window = [(start + t) % (2 * k) for t in range(k - 1)]
        if sum(labels[p] for p in window) < 2:
            out.append(
                RuleViolation(
                    4,
                    tuple(p + 1 for p in window),
                    "open half-plane through "
                    f"a_{(start - 1) % (2 * k) + 1} has label sum "
                    f"{sum(labels[p] for p in window)} < 2",
                )
            )
    return out


@dataclass(frozen=True)
class FacetAssignment:
    """Which facet indices live at which Gale point.

    vertex_facets[i] lists the facets of polygon vertex a_{i+1} (so the
    tuple is 0-based like GaleDiagram.labels); origin_facets lists the
    facets carried by the origin.  All facet indices together partition
    0..n+2.
    """

    vertex_facets: tuple
    origin_facets: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "vertex_facets", tuple(tuple(fs) for fs in self.vertex_facets)
        )
        object.__setattr__(self, "origin_facets", tuple(self.origin_facets))
        everything = [f for fs in self.vertex_facets for f in fs]
        everything += list(self.origin_facets)
        if sorted(everything) != list(range(len(everything))):
            raise ValueError("facet indices must partition 0..n+2")

    @classmethod
    def standard(cls, g):
        """Facets 0..n+2 dealt out in polygon order, origin last."""
        nxt = itertools.count()
        vertex_facets = tuple(
            tuple(next(nxt) for _ in range(mu)) for mu in g.labels
        )
        origin_facets = tuple(next(nxt) for _ in range(g.origin_label))
        return cls(vertex_facets, origin_facets)

    @property
    def facet_count(self):
        return sum(len(fs) for fs in self.vertex_facets) + len(self.origin_facets)

    def matches(self, g):
        return len(self.vertex_facets) == 2 * g.k and all(
            len(fs) == mu for fs, mu in zip(self.vertex_facets, g.labels)
        ) and len(self.origin_facets) == g.origin_label

    @cached_property
    def position_of(self):
        """facet index -> 0-based polygon position, or None for origin."""
        where = {}
        for pos, fs in enumerate(self.vertex_facets):
            for f in fs:
                where[f] = pos
        for f in self.origin_facets:
            where[f] = None
        return where

    def facets_at(self, i):
        """Facets of polygon vertex a_i; i is 1-based and cyclic."""
        return self.vertex_facets[(i - 1) % len(self.vertex_facets)]


def _check_assignment(g, asg):
    if not asg.matches(g):
        raise ValueError("facet assignment does not match the diagram's labels")


def _max_cyclic_gap(dirs, period):
    """Largest gap between cyclically consecutive members of dirs."""
    ordered = sorted(dirs)
    best = ordered[0] + period - ordered[-1]
    for a, b in zip(ordered, ordered[1:]):
        best = max(best, b - a)
    return best


def is_face(g, asg, subset):
    """Whether the facets in subset intersect in a (possibly empty-
    dimensional) face of the polytope.

    The criterion: the origin must lie in the convex hull of the Gale
    points still carrying a facet outside the subset.  If an
    origin-resident facet is outside, the hull trivially contains the
    origin; otherwise the hull of the occupied polygon directions
    contains the origin iff their maximal cyclic gap is at most k units
    of pi/k (no open semicircle swallows them all).
    """
    _check_assignment(g, asg)
    subset = frozenset(subset)
    known = asg.position_of
    for f in subset:
        if f not in known:
            raise InvalidSubset(f"unknown facet index {f!r}")
    if any(f not in subset for f in asg.origin_facets):
        return True
    occupied = {
        pos
        for pos, fs in enumerate(asg.vertex_facets)
        if any(f not in subset for f in fs)
    }
    if not occupied:
        return False
    return _max_cyclic_gap(occupied, 2 * g.k) <= g.k


def faces(g, asg):
    """Every facet subset that is a face, sorted; exhaustive scan."""
    _check_assignment(g, asg)
    total = asg.facet_count
    if total > _SCAN_LIMIT:
        raise TooLarge(f"face scan over {total} facets exceeds {_SCAN_LIMIT}")
    origin_mask = 0
    for f in asg.origin_facets:
        origin_mask |= 1 << f
    dir_masks = []
    for fs in asg.vertex_facets:
        m = 0
        for f in fs:
            m |= 1 << f
        dir_masks.append(m)
    period = 2 * g.k
    out = []
    for bits in range(1 << total):
        if origin_mask & ~bits:
            out.append(bits)
            continue
        occupied = [pos for pos, m in enumerate(dir_masks) if m & ~bits]
        if occupied and _max_cyclic_gap(occupied, period) <= g.k:
            out.append(bits)
    return sorted(
        tuple(f for f in range(total) if bits >> f & 1) for bits in out
    )


def vertices(g, asg):
    """The combinatorial vertices: maximal proper face subsets.

    Computed in closed form rather than by scanning subsets: a face is
    maximal iff its complement is a minimal origin-capturing facet set,
    and on a 2k-gon those are exactly (i) one origin-resident facet,
    (ii) one facet from each side of an occupied antipodal direction
    pair, or (iii) one facet from each corner of a direction triple
    whose cyclic gaps are all strictly below k (the origin strictly
    inside; a gap of exactly k would contain an antipodal pair, making
    the triple non-minimal).
    """
    _check_assignment(g, asg)
    total = asg.facet_count
    everything = frozenset(range(total))
    period = 2 * g.k
    out = set()
    for f in asg.origin_facets:
        out.add(everything - {f})
    occupied = [pos for pos, fs in enumerate(asg.vertex_facets) if fs]
    occ = set(occupied)
    for pos in occupied:
        opposite = (pos + g.k) % period
        if pos < opposite and opposite in occ:
            for fa in asg.vertex_facets[pos]:
                for fb in asg.vertex_facets[opposite]:
                    out.add(everything - {fa, fb})
    for d1, d2, d3 in itertools.combinations(occupied, 3):
        if (d2 - d1) < g.k and (d3 - d2) < g.k and (d1 + period - d3) < g.k:
            for fa in asg.vertex_facets[d1]:
                for fb in asg.vertex_facets[d2]:
                    for fc in asg.vertex_facets[d3]:
                        out.add(everything - {fa, fb, fc})
    return sorted(tuple(sorted(v)) for v in out)


def face_lattice_json(g, asg):
    """JSON-ready face lattice: all faces plus the vertex list."""
    return {
        "faces": [list(f) for f in faces(g, asg)],
        "vertices": [list(v) for v in vertices(g, asg)],
    }


def is_pyramid(g):
    """A polytope is a pyramid iff its origin label is nonzero."""
    return g.origin_label > 0


def arc_facets(g, asg, m, l):
    """Facets of the consecutive polygon vertices a_m, ..., a_l (cyclic,
    inclusive); m and l are 1-based.  The vertex count of the arc is
    (l - m) mod 2k + 1; zero-labeled vertices contribute no facets."""
    _check_assignment(g, asg)
    period = 2 * g.k
    if not (1 <= m <= period and 1 <= l <= period):
        raise ValueError(f"arc indices must lie in 1..{period}")
    count = (l - m) % period + 1
    out = []
    for t in range(count):
        out.extend(asg.facets_at(m + t))
    return tuple(sorted(out))


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def _dihedral_canonical(labels):
    """Lexicographically smallest dihedral image of the label tuple."""
    period = len(labels)
    doubled = labels + labels
    best = labels
    for s in range(period):
        cand = doubled[s : s + period]
        if cand < best:
            best = cand
    reversed_labels = labels[::-1]
    doubled = reversed_labels + reversed_labels
    for s in range(period):
        cand = doubled[s : s + period]
        if cand < best:
            best = cand
    return best


def placement_order(k):
    """The order in which the census fills the 2k polygon positions:
    each position is followed immediately by its antipodal partner
    (0, k, 1, k+1, ...), so that antipodal-pair constraints bite after
    two placements instead of k+1.  Exposed so window pruners can know
    exactly which positions are already set when they are consulted."""
    order = []
    for i in range(k):
        order.append(i)
        order.append(k + i)
    return tuple(order)


def _label_vectors(k, polygon_sum, window_pruner=None):
    """DFS over label tuples of length 2k with the given sum, no two
    cyclically adjacent zeros, and no opposite pair both zero.

    Positions are filled in placement_order(k).  After step s the
    placed positions are 0..ceil((s+1)/2)-1 and k..k+floor((s+1)/2)-1;
    all other entries of the working array are stale zeros.

    window_pruner(labels, position) may veto a prefix (used by the
    search pipeline to fuse sound windowed prefilters into the walk);
    it is consulted right after `position` is set and must read only
    placed positions, which it can derive from `position` and the
    documented order.
    """
    period = 2 * k
    labels = [0] * period
    order = placement_order(k)

    def extend(step, used):
        if step == period:
            if used == polygon_sum:
                yield tuple(labels)
            return
        pos = order[step]
        # Placed-position counts after this step: i1 in the first half
        # (positions 0..i1-1), i2 in the second (positions k..k+i2-1).
        i1 = (step + 2) // 2
        i2 = (step + 1) // 2
        # Feasibility floor for the sum still owed after this step:
        # each fully unplaced antipodal pair needs >= 1 (no opposite
        # zeros), and when a lone second-half cell remains its partner
        # or placed neighbour may force it nonzero (no adjacent zeros).
        floor_base = k - i1
        prev_zero = pos not in (0, k) and labels[pos - 1] == 0
        for value in range(polygon_sum - used + 1):
            if value == 0:
                # No two cyclically adjacent zeros, checked against every
                # neighbour that is already placed when pos is placed:
                # pos-1 (except for pos 0 and pos k, whose predecessors
                # come later), pos k for pos k-1, and pos 0 for pos 2k-1.
                if prev_zero:
                    continue
                if pos == k - 1 and labels[k] == 0:
                    continue
                if pos == period - 1 and labels[0] == 0:
                    continue
                # no opposite pair both zero (partner already placed
                # exactly when pos is in the second half)
                if pos >= k and labels[pos - k] == 0:
                    continue
            labels[pos] = value
            if step % 2 == 0:
                # lone second-half cell k+i2 remains in this rank:
                # forced nonzero if its antipodal partner i2 or its
                # placed left neighbour k+i2-1 is zero
                lone = 1 if (
                    labels[i2] == 0
                    or (i2 >= 1 and labels[k + i2 - 1] == 0)
                ) else 0
            else:
                lone = 0
            if used + value + floor_base + lone > polygon_sum:
                labels[pos] = 0
                continue
            if window_pruner is not None and window_pruner(labels, pos):
                labels[pos] = 0
                continue
            yield from extend(step + 1, used + value)
        labels[pos] = 0

    yield from extend(0, 0)


def iter_standard(n, k_max, window_pruner=None, origin_zero_only=False,
                  origins=None):
    """Yield every standard Gale diagram of dimension n with k <= k_max,
    one canonical representative per dihedral orbit, in deterministic
    order (k ascending, then origin label, then canonical label tuple).

    window_pruner, when given, must be SOUND: it may only veto prefixes
    that cannot extend to any diagram the caller would keep — results
    are then exactly the unpruned results that survive the caller's own
    post-filter.  origin_zero_only restricts to non-pyramid diagrams;
    origins gives finer control: "all", "zero", "positive", or an
    iterable of origin labels.
    """
    if n < 2:
        raise ValueError("dimension must be at least 2")
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    total = n + 3
    if origins is None:
        origins = "zero" if origin_zero_only else "all"
    elif origin_zero_only:
        raise ValueError("pass either origin_zero_only or origins, not both")
    if origins == "all":
        origin_values = tuple(range(total + 1))
    elif origins == "zero":
        origin_values = (0,)
    elif origins == "positive":
        origin_values = tuple(range(1, total + 1))
    else:
        origin_values = tuple(sorted(set(origins)))
        if not all(isinstance(o, int) and 0 <= o <= total
                   for o in origin_values):
            raise ValueError(f"origin labels must be integers in 0..{total}")
    for k in range(2, k_max + 1):
        for origin in origin_values:
            polygon_sum = total - origin
            if polygon_sum < k:  # rule 2 needs >= k nonzero positions
                continue
            seen = set()
            for labels in _label_vectors(k, polygon_sum, window_pruner):
                seen.add(_dihedral_canonical(labels))
            for canon in sorted(seen):
                g = GaleDiagram(k, canon, origin)
                if any(v.rule == 4 for v in validate(g)):
                    continue
                yield g


def enumerate_standard(n, k_max):
    """All standard Gale diagrams with label sum n+3 and 2 <= k <= k_max,
    exactly one representative per dihedral orbit, in deterministic
    order."""
    return list(iter_standard(n, k_max))


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

def parse_gale(text):
    """Parse the line-based Gale diagram format.

    Line 1: ``gale v1``; line 2: ``k K``; line 3: ``labels m1 ... m2K``;
    line 4: ``origin M``.  ``#`` starts a comment.
    """
    stage = 0
    k = None
    labels = None
    origin = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if stage == 0:
            if parts != ["gale", "v1"]:
                raise GaleParseError("expected header 'gale v1'", lineno)
            stage = 1
        elif stage == 1:
            if len(parts) != 2 or parts[0] != "k":
                raise GaleParseError("expected 'k K'", lineno)
            try:
                k = int(parts[1])
            except ValueError:
                raise GaleParseError(f"bad k value {parts[1]!r}", lineno)
            if k < 2:
                raise GaleParseError("k must be >= 2", lineno)
            stage = 2
        elif stage == 2:
            if parts[0] != "labels":
                raise GaleParseError("expected 'labels m1 m2 ...'", lineno)
            try:
                labels = tuple(int(p) for p in parts[1:])
            except ValueError:
                raise GaleParseError("labels must be integers", lineno)
            if len(labels) != 2 * k:
                raise GaleParseError(
                    f"expected {2 * k} labels, got {len(labels)}", lineno
                )
            if any(mu < 0 for mu in labels):
                raise GaleParseError("labels must be non-negative", lineno)
            stage = 3
        elif stage == 3:
            if len(parts) != 2 or parts[0] != "origin":
                raise GaleParseError("expected 'origin M'", lineno)
            try:
                origin = int(parts[1])
            except ValueError:
                raise GaleParseError(f"bad origin label {parts[1]!r}", lineno)
            if origin < 0:
                raise GaleParseError("origin label must be non-negative", lineno)
            stage = 4
        else:
            raise GaleParseError(f"unexpected extra line {line!r}", lineno)
    if stage == 0:
        raise GaleParseError("empty input; expected 'gale v1'", 1)
    if stage < 4:
        missing = {1: "'k K'", 2: "'labels ...'", 3: "'origin M'"}[stage]
        raise GaleParseError(f"missing {missing} line", 1)
    return GaleDiagram(k, labels, origin)


def serialize_gale(g, comment=None):
    lines = []
    if comment:
        for c in comment.splitlines():
            lines.append(f"# {c}")
    lines.append("gale v1")
    lines.append(f"k {g.k}")
    lines.append("labels " + " ".join(str(mu) for mu in g.labels))
    lines.append(f"origin {g.origin_label}")
    return "\n".join(lines) + "\n"
