"""Finite-volume certificates and divergence-weight solving.

A candidate polytope is a quadruple (Coxeter diagram, Gale diagram, facet
assignment, dimension n) on n + 3 facets.  verify_polytope certifies it:
the Gram matrix must have signature (n, 1) with corank 2, every
combinatorial vertex must be the apex of an elliptic rank-n star (finite
vertex) or a parabolic rank-(n-1) star (ideal vertex), and every facet
pair's edge kind must agree with the vertices the pair shares.  The
result is a Certificate that is valid or carries the failing checks; it
never raises on a merely-wrong candidate.

solve_dotted_weights instantiates undetermined dotted-edge weights: the
Gram matrix of n + 3 facet hyperplanes has rank exactly n + 1, so the
elementary symmetric functions e_{n+2} and e_{n+3} of its eigenvalues
vanish (for a real symmetric matrix, two consecutive vanishing
characteristic coefficients force all later ones to vanish, because a
real-rooted polynomial admits no isolated double zero of its derivative).
Those two coefficients are recovered exactly as polynomials in the
unknown weights by Lagrange interpolation over rational trial values,
with each trial Gram evaluated in exact algebraic-field arithmetic; their
common real roots are isolated exactly, and every admissible candidate is
re-certified by the independent interval/congruence signature routine.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction

import sympy
from sympy.polys.matrices import DomainMatrix

from .diagram import (
    Angle,
    Bold,
    CoxeterDiagram,
    DiagramClass,
    Dotted,
    UnknownEntry,
    classify,
    gram_matrix,
    signature,
)
from .field import CertificationFailure
from .gale import is_face, vertices
from .lemmas import check_lemma_kv, check_lemma_l

__all__ = [
    "Certificate",
    "CheckFailure",
    "NoSolution",
    "Underdetermined",
    "VertexWitness",
    "solve_dotted_weights",
    "verify_polytope",
]

FINITE = "finite"
IDEAL = "ideal"
INVALID = "invalid"


class NoSolution(Exception):
    """No weights > 1 give the Gram matrix the required rank and signature."""


class Underdetermined(Exception):
    """The weights are not pinned down by the rank condition; refusing to
    guess a point of a positive-dimensional (or ambiguous) solution set."""


@dataclass(frozen=True)
class VertexWitness:
    """One combinatorial vertex with its certified kind.

    kind is "finite" (elliptic star on exactly n facets), "ideal"
    (parabolic star of Gram rank n - 1), or "invalid" (anything else;
    such a witness always comes with a CheckFailure on the certificate).
    """

    facets: tuple
    kind: str

    def to_json(self):
        return {"facets": list(self.facets), "kind": self.kind}


@dataclass(frozen=True)
class CheckFailure:
    """One failed certificate check.

    check is "signature", "pair", or "vertex"; subject lists the facets
    involved (empty for the global signature check).
    """

    check: str
    subject: tuple
    expected: str
    observed: str

    def to_json(self):
        return {
            "check": self.check,
            "subject": list(self.subject),
            "expected": self.expected,
            "observed": self.observed,
        }


@dataclass(frozen=True)
class Certificate:
    """Outcome of verifying one candidate polytope.

    pyramid_shape is set only on certificates of pyramid polytopes
    (nonzero origin label): the simplex dimensions (d1, d2, d3) of the
    product the pyramid stands over.
    """

    dimension: int
    diagram: CoxeterDiagram
    signature: tuple
    vertices: tuple
    compact: bool
    constraint_reports: dict
    failures: tuple
    pyramid_shape: tuple = None

    @property
    def facet_count(self):
        return self.diagram.n_nodes

    @property
    def valid(self):
        return not self.failures

    @property
    def verdict(self):
        return "valid" if self.valid else "invalid"

    def to_json(self):
        out = {
            "dimension": self.dimension,
            "facets": self.facet_count,
            "signature": list(self.signature),
            "vertices": [w.to_json() for w in self.vertices],
            "compact": self.compact,
            "constraint_reports": {
                name: report.to_json()
                for name, report in sorted(self.constraint_reports.items())
            },
            "verdict": self.verdict,
            "failures": [f.to_json() for f in self.failures],
            "gram": {
                "exact_terms": _gram_exact_terms(self.diagram),
                "float64": _gram_float64(self.diagram),
            },
        }
        if self.pyramid_shape is not None:
            out["pyramid_shape"] = list(self.pyramid_shape)
        return out


def _edge_kind_name(e):
    if e is None:
        return "right angle"
    if isinstance(e, Angle):
        return f"Angle({e.m})"
    if isinstance(e, Bold):
        return "Bold"
    return "Dotted"


def _dotted_term(weight):
    value = _weight_to_sympy(weight)
    return f"-{float(value.evalf(25)):.10f}…(dotted)"


def _gram_exact_terms(d):
    m = gram_matrix(d)
    terms = []
    for i in range(d.n_nodes):
        row = []
        for j in range(d.n_nodes):
            e = d.edge(i, j) if i != j else None
            if isinstance(e, Dotted) and e.known:
                row.append(_dotted_term(e.weight))
            else:
                row.append(m.entry_description(i, j))
        terms.append(row)
    return terms


def _gram_float64(d):
    intervals = gram_matrix(d).float_intervals()
    return [[(iv.lo + iv.hi) / 2.0 for iv in row] for row in intervals]


def _vertex_witness(d, V, n):
    """(witness, failure-or-None) for the vertex on facet set V."""
    sub = d.subdiagram(V)
    cls = classify(sub)
    if cls.kind is DiagramClass.ELLIPTIC:
        rank = len(V)  # positive definite
        if rank == n:
            return VertexWitness(tuple(V), FINITE), None
    elif cls.kind is DiagramClass.PARABOLIC:
        rank = signature(gram_matrix(sub))[0]
        if rank == n - 1:
            return VertexWitness(tuple(V), IDEAL), None
    else:
        rank = sum(signature(gram_matrix(sub))[:2])
    failure = CheckFailure(
        check="vertex",
        subject=tuple(V),
        expected=f"elliptic star of rank {n} or parabolic star of rank {n - 1}",
        observed=f"{cls} star of rank {rank}",
    )
    return VertexWitness(tuple(V), INVALID), failure


def _pair_failure(d, i, j, shared):
    """CheckFailure for facet pair (i, j), or None if its edge kind is
    consistent with the vertices (VertexWitness list) the pair shares."""
    e = d.edge(i, j)
    observed = _edge_kind_name(e)
    if not shared:
        if isinstance(e, (Bold, Dotted)):
            return None
        expected = "Bold or Dotted edge (facets share no vertex)"
    elif isinstance(e, Dotted):
        expected = "non-Dotted edge (facets share a vertex)"
    elif any(w.kind == INVALID for w in shared):
        return None  # already reported as a vertex failure; kind undecidable
    elif len(shared) == 1 and shared[0].kind == IDEAL:
        if isinstance(e, Bold):
            return None
        expected = "Bold edge (facets meet only at one ideal vertex)"
    else:
        if e is None or isinstance(e, Angle):
            return None
        expected = "Angle edge or right angle (facets share a face)"
    return CheckFailure(check="pair", subject=(i, j), expected=expected, observed=observed)


def verify_polytope(d, g, asg, n):
    """Certify that (d, g, asg) describes a finite-volume hyperbolic
    Coxeter n-polytope; returns a Certificate (valid or not).

    Checks, in order: the Gram matrix of d has certified signature
    (n, 1) with corank 2; every facet pair's edge kind matches the
    vertices the pair shares (no shared vertex: Bold or Dotted, the
    choice being geometric data the combinatorics cannot see; exactly
    one shared vertex and it is ideal: Bold; otherwise: Angle or right
    angle); every combinatorial vertex star is elliptic of rank n
    (finite) or parabolic of rank n - 1 (ideal).  The compactness flag
    is False iff an ideal vertex exists.  The arc-constraint reports are
    attached for information and do not affect the verdict.

    Raises UnknownEntry if d still has undetermined dotted weights (run
    solve_dotted_weights first) and ValueError on shape mismatches;
    propagates CertificationFailure from the signature routine.
    """
    if g.dimension != n:
        raise ValueError(f"Gale diagram has dimension {g.dimension}, not {n}")
    if d.n_nodes != g.total:
        raise ValueError(
            f"diagram has {d.n_nodes} nodes but the Gale diagram has {g.total} facets"
        )
    if not asg.matches(g):
        raise ValueError("facet assignment does not match the Gale diagram")
    if d.has_unknown_dotted():
        raise UnknownEntry("verification needs all dotted weights instantiated")

    sig = signature(gram_matrix(d))
    signature_failures = []
    target = (n, 1, 2)
    if sig != target:
        signature_failures.append(
            CheckFailure(
                check="signature",
                subject=(),
                expected=str(target),
                observed=str(sig),
            )
        )

    witnesses = []
    vertex_failures = []
    for V in vertices(g, asg):
        witness, failure = _vertex_witness(d, V, n)
        witnesses.append(witness)
        if failure is not None:
            vertex_failures.append(failure)

    pair_failures = []
    for i, j in itertools.combinations(range(d.n_nodes), 2):
        shared = [w for w in witnesses if i in w.facets and j in w.facets]
        if bool(shared) != is_face(g, asg, (i, j)):
            raise CertificationFailure(
                f"vertex census and face criterion disagree on facet pair ({i}, {j})"
            )
        failure = _pair_failure(d, i, j, shared)
        if failure is not None:
            pair_failures.append(failure)

    return Certificate(
        dimension=n,
        diagram=d,
        signature=sig,
        vertices=tuple(witnesses),
        compact=not any(w.kind == IDEAL for w in witnesses),
        constraint_reports={
            "kv": check_lemma_kv(g, asg, d),
            "l": check_lemma_l(g, asg, d),
        },
        failures=tuple(signature_failures + pair_failures + vertex_failures),
    )


# ---------------------------------------------------------------------------
# Dotted-weight solving
# ---------------------------------------------------------------------------

def _weight_to_sympy(w):
    if isinstance(w, Fraction):
        return sympy.Rational(w.numerator, w.denominator)
    return w


def _sympy_gram(d, unknown_values):
    """The Gram matrix as a sympy Matrix, with each unknown dotted edge
    taken from unknown_values (a mapping pair -> sympy value)."""
    m = sympy.eye(d.n_nodes)
    for (i, j), e in d.edge_items():
        if isinstance(e, Angle):
            value = -sympy.cos(sympy.pi / e.m)
        elif isinstance(e, Bold):
            value = sympy.Integer(-1)
        elif e.known:
            value = -_weight_to_sympy(e.weight)
        else:
            value = -unknown_values[(i, j)]
        m[i, j] = m[j, i] = value
    return m


def _validate_symmetry(d, perm):
    n = d.n_nodes
    if sorted(perm) != list(range(n)):
        raise ValueError(f"not a permutation of 0..{n - 1}: {perm}")
    for i in range(n):
        for j in range(i + 1, n):
            if d.edge(i, j) != d.edge(perm[i], perm[j]):
                raise ValueError(
                    f"permutation {perm} is not a diagram symmetry: edge "
                    f"({i}, {j}) maps onto a different kind"
                )


def _weight_orbits(d, unknown_edges, symmetry):
    """Partition the unknown dotted edges into equal-weight orbits under
    the supplied node permutations (each validated as a diagram symmetry)."""
    parent = {edge: edge for edge in unknown_edges}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for perm in symmetry or ():
        perm = tuple(perm)
        _validate_symmetry(d, perm)
        for i, j in unknown_edges:
            image = (perm[i], perm[j]) if perm[i] < perm[j] else (perm[j], perm[i])
            ri, rj = find((i, j)), find(image)
            if ri != rj:
                parent[ri] = rj
    orbits = {}
    for edge in unknown_edges:
        orbits.setdefault(find(edge), []).append(edge)
    return [sorted(v) for _, v in sorted(orbits.items())]


def _char_tail(matrix, wanted):
    """Exact e_j (elementary symmetric functions of the eigenvalues) for
    the indices in wanted, for a sympy Matrix with algebraic entries."""
    dm = DomainMatrix.from_Matrix(matrix, extension=True)
    coeffs = dm.charpoly()  # det(lam*I - A), leading coefficient first
    domain = dm.domain
    return [(-1) ** j * sympy.sympify(domain.to_sympy(coeffs[j])) for j in wanted]


def _interpolate(grids, syms, table):
    """Multivariate Lagrange interpolation: table maps grid-point tuples
    to exact sympy values; returns the polynomial in syms through them."""
    if not syms:
        return table[()]
    x, grid = syms[0], grids[0]
    total = sympy.Integer(0)
    for a in grid:
        value = _interpolate(grids[1:], syms[1:], {pt[1:]: v for pt, v in table.items() if pt[0] == a})
        basis = sympy.Integer(1)
        for b in grid:
            if b != a:
                basis *= (x - b) / (a - b)
        total += value * basis
    return total


def _rank_equations(d, orbits, syms, n):
    """e_{n+2} and e_{n+3} of the Gram eigenvalues as exact polynomials in
    the orbit weight symbols (identically-zero ones dropped): their common
    vanishing is equivalent, over real weights, to Gram rank <= n + 1."""
    N = d.n_nodes
    wanted = [j for j in (n + 2, n + 3) if j <= N]
    if not wanted:
        return []
    grids = []
    for orbit in orbits:
        degree = min(2 * len(orbit), N)
        grids.append([sympy.Rational(2 + step) for step in range(degree + 1)])
    table = {point: None for point in itertools.product(*grids)}
    for point in table:
        values = {}
        for orbit, value in zip(orbits, point):
            for edge in orbit:
                values[edge] = value
        table[point] = _char_tail(_sympy_gram(d, values), wanted)
    equations = []
    for idx in range(len(wanted)):
        expr = sympy.expand(
            _interpolate(grids, list(syms), {pt: vals[idx] for pt, vals in table.items()})
        )
        if expr != 0:
            equations.append(expr)
    return equations


def _solve_univariate(equations, sym):
    """Exact common real roots of the equations, via polynomial gcd and
    certified real-root isolation."""
    polys = []
    for expr in equations:
        poly = sympy.Poly(expr, sym, extension=True)
        if not poly.is_zero:
            polys.append(poly)
    if not polys:
        return None  # no constraint at all
    common = polys[0]
    for poly in polys[1:]:
        common = common.gcd(poly)
    if common.degree() == 0:
        return []
    return list(dict.fromkeys(common.real_roots()))


def _solve_pair(equations, syms):
    """Exact common roots of the equations in two unknowns; None marks a
    positive-dimensional solution set."""
    try:
        solutions = sympy.solve(equations, list(syms), dict=True)
    except NotImplementedError as exc:
        raise CertificationFailure(f"cannot solve the rank equations: {exc}") from exc
    points = []
    symset = set(syms)
    for solution in solutions:
        if set(solution) != symset or any(
            value.free_symbols & symset for value in solution.values()
        ):
            return None
        points.append(tuple(solution[s] for s in syms))
    return points


def _certainly_real(value):
    if value.is_real is not None:
        return value.is_real
    simplified = sympy.simplify(value)
    if simplified.is_real is not None:
        return simplified.is_real
    return abs(sympy.im(value).evalf(60)) < sympy.Rational(1, 10**40)


def _exceeds_one(value):
    verdict = (value - 1).is_positive
    if verdict is not None:
        return verdict
    return value.evalf(60) > 1 + sympy.Rational(1, 10**40)


def _as_weight(value):
    value = sympy.nsimplify(value, rational=False) if value.is_Float else value
    if value.is_Rational:
        return Fraction(int(value.p), int(value.q))
    return value


def solve_dotted_weights(d, g, asg, n, *, symmetry=None):
    """Instantiate the undetermined dotted weights of d so its Gram matrix
    has rank exactly n + 1 with signature (n, 1); returns the completed
    diagram (d itself when nothing is undetermined).

    symmetry, when supplied, is an iterable of node permutations (each a
    diagram symmetry); unknown weights on the same edge orbit are
    constrained equal.  g and asg are accepted for interface parity with
    verify_polytope and may be None; when given they are shape-checked.

    Raises NoSolution when no admissible weights (each > 1) meet the rank
    and signature demand, Underdetermined when the solution set is not a
    single point, and CertificationFailure when certification breaks down.
    """
    if g is not None:
        if d.n_nodes != g.total:
            raise ValueError(
                f"diagram has {d.n_nodes} nodes but the Gale diagram has {g.total} facets"
            )
        if asg is not None and not asg.matches(g):
            raise ValueError("facet assignment does not match the Gale diagram")
    unknown_edges = sorted(
        pair for pair, e in d.edge_items() if isinstance(e, Dotted) and not e.known
    )
    if not unknown_edges:
        return d
    if d.n_nodes < n + 1:
        raise NoSolution(f"{d.n_nodes} hyperplanes cannot have Gram rank {n + 1}")

    orbits = _weight_orbits(d, unknown_edges, symmetry)
    syms = sympy.symbols(f"w:{len(orbits)}", positive=True)
    syms = (syms,) if not isinstance(syms, tuple) else syms
    equations = _rank_equations(d, orbits, syms, n)
    if not equations:
        raise Underdetermined(
            "the rank condition imposes no constraint on the unknown weights"
        )
    if len(orbits) == 1:
        roots = _solve_univariate(equations, syms[0])
        if roots is None:
            raise Underdetermined(
                "the rank condition imposes no constraint on the unknown weights"
            )
        candidates = [(root,) for root in roots]
    elif len(orbits) == 2:
        candidates = _solve_pair(equations, syms)
        if candidates is None:
            raise Underdetermined("the rank equations have a solution family")
    else:
        raise Underdetermined(
            f"{len(orbits)} independent weights are constrained by only "
            f"{len(equations)} rank equations; refusing to guess"
        )

    if not candidates:
        raise NoSolution("the rank condition has no solution in the weights")
    target = (n, 1, d.n_nodes - n - 1)
    admissible = []
    uncertified = []
    for point in candidates:
        if not all(_certainly_real(value) for value in point):
            continue
        if not all(_exceeds_one(value) for value in point):
            continue
        weights = {}
        for orbit, value in zip(orbits, point):
            weight = _as_weight(value)
            for edge in orbit:
                weights[edge] = weight
        completed = CoxeterDiagram(
            d.n_nodes,
            [
                (i, j, Dotted(weights[(i, j)]) if (i, j) in weights else e)
                for (i, j), e in d.edge_items()
            ],
        )
        try:
            if signature(gram_matrix(completed)) == target:
                admissible.append(completed)
        except CertificationFailure as exc:
            uncertified.append(exc)
    if not admissible:
        if uncertified:
            raise uncertified[0]
        raise NoSolution(
            f"no weights > 1 give the Gram matrix rank {n + 1} with "
            f"signature ({n}, 1)"
        )
    if len(admissible) > 1:
        raise Underdetermined(
            f"{len(admissible)} distinct admissible weight assignments exist; "
            "refusing to guess"
        )
    return admissible[0]
