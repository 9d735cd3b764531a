"""Exact arithmetic in real algebraic number fields, certified signs,
and exact symmetric inertia.

Gram matrices of Coxeter diagrams have entries -cos(pi/m) (plus
rationals for bold edges and dotted weights), so most exact work happens
in Q(cos(pi/N)) with N the lcm of the edge labels.  Solved dotted-edge
weights can be irrational but algebraic, in which case all entries are
moved into a single primitive extension Q(theta) via sympy.

Elements are dense coefficient tuples over exact rationals, reduced
modulo the field's monic minimal polynomial.  Equality with zero is a
coefficient test (valid by minimality); nonzero signs are certified by
outward-rounded interval evaluation at escalating precision: floats
first, then exact rational intervals around certified root enclosures.

The symmetric-inertia routine at the bottom is the engine behind every
signature/classification decision in the package: exact Gaussian
congruence with certified pivot signs, including hyperbolic 2x2 blocks
when the remaining diagonal vanishes.
"""

import math
from fractions import Fraction
from functools import lru_cache

import mpmath
import sympy

try:
    from gmpy2 import mpq as RAT
except ImportError:  # pragma: no cover
    RAT = Fraction

from .interval import Interval

RAT_ZERO = RAT(0)
RAT_ONE = RAT(1)

_MAX_SIGN_PREC_BITS = 40000


class CertificationFailure(Exception):
    """A sign could not be certified at the maximum configured precision."""


# ---------------------------------------------------------------------------
# Rational interval arithmetic (exact endpoints)
# ---------------------------------------------------------------------------

def _iv_mul(a, b):
    p1, p2, p3, p4 = a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]
    return min(p1, p2, p3, p4), max(p1, p2, p3, p4)


def _iv_horner(coeffs, root):
    """Evaluate sum(coeffs[i] * x^i) over the exact rational interval root."""
    lo = hi = RAT_ZERO
    for c in reversed(coeffs):
        lo, hi = _iv_mul((lo, hi), root)
        lo, hi = lo + c, hi + c
    return lo, hi


def _raw_mpf_to_rat(raw):
    """Exact rational value of a raw mpmath mpf tuple (sign, man, exp, bc)."""
    sign, man, exp, _ = raw
    if not isinstance(exp, int):
        raise CertificationFailure("non-finite interval endpoint")
    man = int(man)
    val = RAT(man) * RAT(2) ** exp if exp >= 0 else RAT(man, 2 ** -exp)
    return -val if sign else val


# ---------------------------------------------------------------------------
# Number fields
# ---------------------------------------------------------------------------

class NumberField:
    """Q(theta) for a real algebraic theta with monic minimal polynomial.

    Elements are tuples of exact rationals, length = degree, constant
    term first.  Subclasses supply certified enclosures of theta.
    """

    def __init__(self, lower_coeffs):
        # monic minpoly = x^d + sum(lower_coeffs[i] * x^i)
        lower = tuple(RAT(c) for c in lower_coeffs)
        self.degree = d = len(lower)
        self._lower = lower
        # Reduction table for powers theta^d .. theta^(2d-2).
        reduction = []
        if d >= 1:
            power = tuple(-a for a in lower)
            reduction.append(power)
            for _ in range(d - 2):
                shifted = (RAT_ZERO,) + power[: d - 1]
                top = power[d - 1]
                power = tuple(s - top * a for s, a in zip(shifted, lower))
                reduction.append(power)
        self._reduction = reduction
        self.zero = (RAT_ZERO,) * d
        self.one = (RAT_ONE,) + (RAT_ZERO,) * (d - 1)
        self._float_root = None
        self._root_cache = {}

    # -- root enclosures (subclass responsibility) -----------------------

    def _root_enclosure_bits(self, prec):
        """Certified (lo, hi) exact-rational enclosure of theta, with
        width roughly 2^-prec.  Must be implemented by subclasses."""
        raise NotImplementedError

    def _root_enclosure(self, prec):
        enc = self._root_cache.get(prec)
        if enc is None:
            enc = self._root_enclosure_bits(prec)
            self._root_cache[prec] = enc
        return enc

    def _float_root_interval(self):
        if self._float_root is None:
            lo, hi = self._root_enclosure(80)
            self._float_root = Interval(
                math.nextafter(float(lo), -math.inf),
                math.nextafter(float(hi), math.inf),
            )
        return self._float_root

    # -- construction ------------------------------------------------------

    def from_rational(self, q):
        if isinstance(q, float):
            raise TypeError("floats are not exact; pass a rational")
        return (RAT(q),) + (RAT_ZERO,) * (self.degree - 1)

    # -- arithmetic --------------------------------------------------------

    def add(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple(x - y for x, y in zip(a, b))

    def neg(self, a):
        return tuple(-x for x in a)

    def scale(self, a, q):
        return tuple(x * q for x in a)

    def mul(self, a, b):
        d = self.degree
        if d == 1:
            return (a[0] * b[0],)
        prod = [RAT_ZERO] * (2 * d - 1)
        for i, x in enumerate(a):
            if not x:
                continue
            for j, y in enumerate(b):
                if y:
                    prod[i + j] += x * y
        out = prod[:d]
        for i in range(d, 2 * d - 1):
            coeff = prod[i]
            if coeff:
                red = self._reduction[i - d]
                for j in range(d):
                    out[j] += coeff * red[j]
        return tuple(out)

    def div(self, a, b):
        return self.mul(a, self.inverse(b))

    def inverse(self, b):
        """1 / b via the extended Euclidean algorithm modulo the minpoly."""
        if self.is_zero(b):
            raise ZeroDivisionError("field element is zero")
        d = self.degree
        if d == 1:
            return (RAT_ONE / b[0],)
        r0 = list(self._lower) + [RAT_ONE]
        r1 = list(b)
        _trim(r1)
        s0, s1 = [RAT_ZERO], [RAT_ONE]
        while True:
            if len(r1) == 1:
                inv = RAT_ONE / r1[0]
                coeffs = [c * inv for c in s1]
                coeffs += [RAT_ZERO] * (d - len(coeffs))
                return tuple(coeffs[:d])
            q, r = _poly_divmod(r0, r1)
            r0, r1 = r1, r
            _trim(r1)
            s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1))

    # -- predicates and certified signs --------------------------------------

    def is_zero(self, a):
        return not any(a)

    def is_rational(self, a):
        return not any(a[1:])

    def rational_value(self, a):
        if any(a[1:]):
            raise ValueError("element is irrational")
        return Fraction(int(a[0].numerator), int(a[0].denominator))

    def sign(self, a):
        """Certified sign in {-1, 0, +1}.

        Zero is exact (coefficient test, valid by minimality of the
        minpoly); nonzero signs are decided by interval evaluation at
        escalating precision, which terminates because a is nonzero.
        """
        if not any(a):
            return 0
        if not any(a[1:]):
            return 1 if a[0] > 0 else -1
        s = self.float_interval(a).sign()
        if s is not None:
            return s
        prec = 128
        while prec <= _MAX_SIGN_PREC_BITS:
            lo, hi = _iv_horner(a, self._root_enclosure(prec))
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            prec *= 2
        raise CertificationFailure(
            f"sign of field element undecided at {_MAX_SIGN_PREC_BITS} bits"
        )

    def float_interval(self, a):
        """Outward-rounded float interval enclosing the element's value."""
        c = self._float_root_interval()
        acc = Interval.exact(0.0)
        for coeff in reversed(a):
            acc = acc * c + Interval.from_rational(coeff)
        return acc

    def enclosure(self, a, max_width=Fraction(1, 10**12)):
        """(lo, hi) Fractions enclosing the element's value, hi-lo <= max_width."""
        max_width = RAT(Fraction(max_width))
        prec = 128
        while prec <= _MAX_SIGN_PREC_BITS:
            lo, hi = _iv_horner(a, self._root_enclosure(prec))
            if hi - lo <= max_width:
                return (
                    Fraction(int(lo.numerator), int(lo.denominator)),
                    Fraction(int(hi.numerator), int(hi.denominator)),
                )
            prec *= 2
        raise CertificationFailure("enclosure did not reach requested width")

    def to_float(self, a):
        itv = self.float_interval(a)
        return (itv.lo + itv.hi) / 2.0


class CosNumberField(NumberField):
    """Q(c) with c = cos(pi/n)."""

    def __init__(self, n):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = n
        super().__init__(_cos_minpoly_lower(n))
        self._cos_cache = {}

    def _root_enclosure_bits(self, prec):
        iv = mpmath.iv
        old = iv.prec
        try:
            iv.prec = prec + 10
            c = iv.cos(iv.pi / self.n)
            raw_lo, raw_hi = c._mpi_
        finally:
            iv.prec = old
        return _raw_mpf_to_rat(raw_lo), _raw_mpf_to_rat(raw_hi)

    def cos_pi_over(self, m):
        """cos(pi/m) as a field element; m must divide n."""
        elem = self._cos_cache.get(m)
        if elem is not None:
            return elem
        if self.n % m:
            raise ValueError(f"cos(pi/{m}) does not lie in Q(cos(pi/{self.n}))")
        k = self.n // m
        # cos(k*t) = T_k(cos t) with t = pi/n.
        elem = self.zero
        c_power = self.one
        coeffs = _chebyshev_t(k)
        for i, a in enumerate(coeffs):
            if a:
                elem = self.add(elem, self.scale(c_power, RAT(a)))
            if i + 1 < len(coeffs):
                c_power = self._mul_by_theta(c_power)
        self._cos_cache[m] = elem
        return elem

    def _mul_by_theta(self, a):
        d = self.degree
        top = a[d - 1]
        shifted = (RAT_ZERO,) + a[: d - 1]
        if not top:
            return shifted
        red = self._reduction[0]
        return tuple(s + top * r for s, r in zip(shifted, red))


class AlgebraicNumberField(NumberField):
    """Q(theta) for theta a designated real root of an irreducible
    polynomial, with enclosures from sympy's certified root isolation."""

    def __init__(self, lower_coeffs, root_expr):
        super().__init__(lower_coeffs)
        self._root = root_expr

    def _root_enclosure_bits(self, prec):
        # the root may be a bare CRootOf or a rational multiple of one
        # (sympy rescales roots of non-content-free polynomials)
        return _sympy_enclosure(self._root, prec)


@lru_cache(maxsize=None)
def _cos_minpoly_lower(n):
    """Lower coefficients (constant first) of the monic minimal polynomial
    of cos(pi/n) over Q."""
    poly = sympy.minimal_polynomial(
        sympy.cos(sympy.pi / n), sympy.Symbol("x"), polys=True
    )
    coeffs = poly.all_coeffs()  # leading first
    lead = coeffs[0]
    monic = [RAT(int(c.p), int(c.q)) / RAT(int(lead.p), int(lead.q)) for c in coeffs[1:]]
    monic.reverse()
    return tuple(monic)


@lru_cache(maxsize=None)
def cos_field(n):
    return CosNumberField(n)


@lru_cache(maxsize=None)
def _chebyshev_t(k):
    """Integer coefficients of the Chebyshev polynomial T_k, constant first."""
    if k == 0:
        return (1,)
    if k == 1:
        return (0, 1)
    prev = (1,)
    cur = (0, 1)
    for _ in range(k - 1):
        doubled = (0,) + tuple(2 * c for c in cur)
        nxt = tuple(
            d - p for d, p in zip(doubled, prev + (0,) * (len(doubled) - len(prev)))
        )
        prev, cur = cur, nxt
    return cur


# ---------------------------------------------------------------------------
# Joint fields from sympy expressions
# ---------------------------------------------------------------------------

def field_from_sympy(exprs):
    """Build one AlgebraicNumberField containing every expression in exprs
    (real algebraic sympy expressions) and return (field, elements).

    Uses sympy's primitive element theorem; the right real root of the
    primitive polynomial is identified by certified enclosures.
    """
    exprs = [sympy.nsimplify(e, rational=False) if isinstance(e, float) else sympy.sympify(e) for e in exprs]
    if all(e.is_Rational for e in exprs):
        field = cos_field(2)  # degree-1 field: the rationals
        return field, [field.from_rational(Fraction(int(e.p), int(e.q))) for e in exprs]
    x = sympy.Symbol("x")
    f, combo, reps = sympy.primitive_element(exprs, x, ex=True, polys=True)
    f = f.monic()
    all_coeffs = f.all_coeffs()  # leading first, = 1
    lower = tuple(RAT(int(c.p), int(c.q)) for c in reversed(all_coeffs[1:]))
    degree = len(lower)
    theta_expr = sympy.Add(*[c * e for c, e in zip(combo, exprs)])
    root = _locate_real_root(f, theta_expr)
    field = AlgebraicNumberField(lower, root)
    elements = []
    for rep in reps:  # rep: coefficients of theta powers, highest first
        coeffs = [RAT(int(sympy.Rational(c).p), int(sympy.Rational(c).q)) for c in rep]
        coeffs.reverse()
        coeffs += [RAT_ZERO] * (degree - len(coeffs))
        elements.append(tuple(coeffs[:degree]))
    return field, elements


def _locate_real_root(poly, theta_expr):
    """Return the CRootOf of poly equal to theta_expr, by shrinking
    certified enclosures until exactly one real root remains."""
    n_real = poly.count_roots(-sympy.oo, sympy.oo)
    candidates = [sympy.CRootOf(poly, i) for i in range(n_real)]
    prec = 64
    while prec <= _MAX_SIGN_PREC_BITS:
        t_lo, t_hi = _sympy_enclosure(theta_expr, prec)
        alive = []
        for r in candidates:
            r_lo, r_hi = _sympy_enclosure(r, prec)
            if not (r_hi < t_lo or r_lo > t_hi):
                alive.append(r)
        if len(alive) == 1:
            return alive[0]
        candidates = alive
        prec *= 2
    raise CertificationFailure("could not isolate the primitive root")


def _sympy_enclosure(expr, prec):
    """Certified exact-rational enclosure of a real algebraic sympy
    expression built from rationals, cos(pi/q), sqrt, CRootOf, +, *, **."""
    if expr.is_Rational:
        v = RAT(int(expr.p), int(expr.q))
        return v, v
    if isinstance(expr, sympy.CRootOf):
        dx = sympy.Rational(1, sympy.Integer(2) ** prec)
        approx = expr.eval_rational(dx=dx)
        a = RAT(int(approx.p), int(approx.q))
        return a - RAT(1, 2 ** prec), a + RAT(1, 2 ** prec)
    if isinstance(expr, sympy.Add):
        lo = hi = RAT_ZERO
        for term in expr.args:
            tlo, thi = _sympy_enclosure(term, prec)
            lo, hi = lo + tlo, hi + thi
        return lo, hi
    if isinstance(expr, sympy.Mul):
        lo, hi = RAT_ONE, RAT_ONE
        for term in expr.args:
            lo, hi = _iv_mul((lo, hi), _sympy_enclosure(term, prec))
        return lo, hi
    if isinstance(expr, sympy.Pow):
        base, expo = expr.args
        if expo == sympy.Rational(1, 2):
            blo, bhi = _sympy_enclosure(base, prec)
            if blo < 0:
                raise CertificationFailure("sqrt of possibly-negative enclosure")
            return _rat_sqrt_down(blo, prec), _rat_sqrt_up(bhi, prec)
        if expo.is_Integer and expo > 0:
            lo, hi = RAT_ONE, RAT_ONE
            benc = _sympy_enclosure(base, prec)
            for _ in range(int(expo)):
                lo, hi = _iv_mul((lo, hi), benc)
            return lo, hi
        if expo.is_Integer and expo < 0:
            lo, hi = _sympy_enclosure(base ** (-expo), prec)
            if lo <= 0 <= hi:
                raise CertificationFailure("division by enclosure containing zero")
            return min(1 / lo, 1 / hi), max(1 / lo, 1 / hi)
    if expr.func is sympy.cos:
        (arg,) = expr.args
        ratio = sympy.simplify(arg / sympy.pi)
        if ratio.is_Rational:
            iv = mpmath.iv
            old = iv.prec
            try:
                iv.prec = prec + 10
                c = iv.cos(iv.pi * int(ratio.p) / int(ratio.q))
                raw_lo, raw_hi = c._mpi_
            finally:
                iv.prec = old
            return _raw_mpf_to_rat(raw_lo), _raw_mpf_to_rat(raw_hi)
    raise CertificationFailure(f"no certified enclosure rule for {expr}")


def _rat_sqrt_down(q, prec):
    """Rational lower bound on sqrt(q), within 2^-prec."""
    if q == 0:
        return RAT_ZERO
    num, den = int(q.numerator), int(q.denominator)
    shift = 2 * prec
    val = math.isqrt((num << shift) // den)  # floor(sqrt(num/den) * 2^prec)
    return RAT(val, 1 << prec)


def _rat_sqrt_up(q, prec):
    if q == 0:
        return RAT_ZERO
    num, den = int(q.numerator), int(q.denominator)
    shift = 2 * prec
    val = math.isqrt((num << shift) // den) + 1
    return RAT(val, 1 << prec)


# ---------------------------------------------------------------------------
# Polynomial helpers over exact rationals (constant term first)
# ---------------------------------------------------------------------------

def _trim(p):
    while len(p) > 1 and not p[-1]:
        p.pop()


def _poly_divmod(num, den):
    num = list(num)
    q = [RAT_ZERO] * max(1, len(num) - len(den) + 1)
    inv_lead = RAT_ONE / den[-1]
    for i in range(len(num) - len(den), -1, -1):
        coeff = num[i + len(den) - 1] * inv_lead
        if coeff:
            q[i] = coeff
            for j, dcoeff in enumerate(den):
                num[i + j] -= coeff * dcoeff
    rem = num[: len(den) - 1] or [RAT_ZERO]
    return q, rem


def _poly_mul(a, b):
    out = [RAT_ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return out


def _poly_sub(a, b):
    length = max(len(a), len(b))
    a = list(a) + [RAT_ZERO] * (length - len(a))
    b = list(b) + [RAT_ZERO] * (length - len(b))
    return [x - y for x, y in zip(a, b)]


# ---------------------------------------------------------------------------
# Certified symmetric inertia
# ---------------------------------------------------------------------------

def inertia(field, matrix, stop_on_negative=False):
    """Certified inertia (positive, negative, zero) of a symmetric matrix
    of field elements, by exact Gaussian congruence.

    Nonzero diagonal pivots are eliminated symmetrically; when the whole
    remaining diagonal is exactly zero, a nonzero off-diagonal entry a
    yields a hyperbolic 2x2 block [[0, a], [a, 0]] contributing (+1, -1);
    an all-zero remainder contributes only zeros.  Every pivot-sign
    decision goes through the certified field sign.

    With stop_on_negative, returns as soon as one negative direction is
    found (for callers that only need positive semidefiniteness); the
    counts are then truncated.
    """
    m = [row[:] for row in matrix]
    idx = list(range(len(m)))
    pos = neg = zero = 0
    while idx:
        pivot = None
        for i in idx:
            s = field.sign(m[i][i])
            if s != 0:
                pivot = (i, s)
                break
        if pivot is not None:
            i, s = pivot
            if s > 0:
                pos += 1
            else:
                neg += 1
                if stop_on_negative:
                    return pos, neg, zero
            idx.remove(i)
            col = {j: m[i][j] for j in idx}
            inv = field.inverse(m[i][i])
            for a_pos, j in enumerate(idx):
                cj = col[j]
                if field.is_zero(cj):
                    continue
                factor = field.mul(cj, inv)
                for l in idx[a_pos:]:
                    cl = col[l]
                    if field.is_zero(cl):
                        continue
                    m[j][l] = field.sub(m[j][l], field.mul(factor, cl))
                    m[l][j] = m[j][l]
            continue
        # whole remaining diagonal is exactly zero
        off = None
        for a_pos, i in enumerate(idx):
            for j in idx[a_pos + 1:]:
                if not field.is_zero(m[i][j]):
                    off = (i, j)
                    break
            if off:
                break
        if off is None:
            zero += len(idx)
            break
        i, j = off
        pos += 1
        neg += 1
        if stop_on_negative:
            return pos, neg, zero
        idx.remove(i)
        idx.remove(j)
        inv = field.inverse(m[i][j])
        coli = {l: m[l][i] for l in idx}
        colj = {l: m[l][j] for l in idx}
        for a_pos, k in enumerate(idx):
            for l in idx[a_pos:]:
                # Schur complement of the hyperbolic block:
                # m[k][l] -= (m[k][i]*m[j][l] + m[k][j]*m[i][l]) / m[i][j]
                term = field.add(
                    field.mul(coli[k], colj[l]),
                    field.mul(colj[k], coli[l]),
                )
                if field.is_zero(term):
                    continue
                m[k][l] = field.sub(m[k][l], field.mul(term, inv))
                m[l][k] = m[k][l]
    return pos, neg, zero


def float_inertia(entries_float):
    """Fast screening inertia using outward-rounded float intervals.

    entries_float is a square list of Interval objects.  Returns
    (pos, neg, 0) only when every pivot sign was certified by the
    intervals alone (so the matrix is provably nonsingular); returns
    None whenever a pivot interval straddles zero, meaning "escalate
    to exact arithmetic".
    """
    m = [row[:] for row in entries_float]
    pos = neg = 0
    idx = list(range(len(m)))
    while idx:
        best = None
        best_mag = 0.0
        for i in idx:
            s = m[i][i].sign()
            if s is not None:
                mag = min(abs(m[i][i].lo), abs(m[i][i].hi))
                if best is None or mag > best_mag:
                    best = (i, s)
                    best_mag = mag
        if best is None:
            return None
        i, s = best
        if s > 0:
            pos += 1
        else:
            neg += 1
        idx.remove(i)
        pii = m[i][i]
        for a_pos, j in enumerate(idx):
            cj = m[i][j]
            if cj.lo == 0.0 and cj.hi == 0.0:
                continue
            factor = cj / pii
            for l in idx[a_pos:]:
                cl = m[i][l]
                if cl.lo == 0.0 and cl.hi == 0.0:
                    continue
                m[j][l] = m[j][l] - factor * cl
                m[l][j] = m[j][l]
    return pos, neg, 0
