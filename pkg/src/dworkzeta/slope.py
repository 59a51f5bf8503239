"""Newton polygons, p-adic slope factors, slope zeta functions, Hodge data.

Slopes are always measured in ord_q units (ord_q(q) = 1), so the Newton
polygon of a numerator over GF(p^r) uses heights v_p(coefficient)/r.  The
slope zeta function is kept as a signed multiset {slope: multiplicity},
multiplicity > 0 meaning factors (1 - u^s T) upstairs; equal slopes of
opposite sign cancel on construction, which is exactly the reduced form.

Slope factors are computed over Z_p by peeling the polygon from the bottom:
twist away the integer part of the minimal slope (divide c_i by p^{ij}),
then split the unit-root part off by Hensel lifting the coprime mod-p
factorization T^{d-h} * (unit part) of the reversed (monic) polynomial.
Separating two adjacent fractional-slope segments with no integer between
them would need a ramified base and is not supported; it cannot occur for
the numerators this package produces.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import DimensionMismatch, PrecisionTooLow
from .zeta import IntPoly, ZetaData


def _vp(c: int, p: int) -> int:
    if c == 0:
        raise ValueError("valuation of zero")
    v = 0
    while c % p == 0:
        c //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# Newton polygons
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NewtonPolygon:
    """Lower convex hull of (i, ord_q(c_i)); vertices with Fraction heights."""

    vertices: tuple

    @property
    def segments(self) -> tuple:
        """((slope, horizontal length), ...) with strictly increasing slopes."""
        out = []
        for (x0, y0), (x1, y1) in zip(self.vertices, self.vertices[1:]):
            out.append((Fraction(y1 - y0, x1 - x0), x1 - x0))
        return tuple(out)

    def slope_multiset(self) -> dict:
        out = {}
        for s, ln in self.segments:
            out[s] = out.get(s, 0) + ln
        return out

    @property
    def total_length(self) -> int:
        return self.vertices[-1][0] - self.vertices[0][0]

    def height_at(self, x) -> Fraction:
        xs = [v[0] for v in self.vertices]
        if not xs[0] <= x <= xs[-1]:
            raise ValueError(f"x = {x} outside the polygon support")
        for (x0, y0), (x1, y1) in zip(self.vertices, self.vertices[1:]):
            if x0 <= x <= x1:
                return Fraction(y0) + Fraction(y1 - y0, x1 - x0) * (x - x0)
        return Fraction(self.vertices[-1][1])


def _lower_hull(points) -> tuple:
    """Monotone-chain lower hull; points sorted by x, heights exact."""
    hull = []
    for x, y in points:
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            # drop the middle point unless it turns strictly upward
            if (y1 - y0) * (x - x0) >= (y - y0) * (x1 - x0):
                hull.pop()
            else:
                break
        hull.append((x, y))
    return tuple(hull)


def newton_polygon(P: IntPoly, p: int, r: int) -> NewtonPolygon:
    pts = [(i, Fraction(_vp(c, p), r)) for i, c in enumerate(P.coeffs) if c]
    return NewtonPolygon(_lower_hull(pts))


def hodge_polygon(row: Sequence) -> NewtonPolygon:
    """Polygon with slope j of multiplicity m for every (j, m) in `row`."""
    verts = [(0, Fraction(0))]
    x, y = 0, Fraction(0)
    for j, m in sorted(row):
        if m < 0:
            raise ValueError("Hodge multiplicities must be nonnegative")
        if m == 0:
            continue
        x += m
        y += Fraction(j) * m
        verts.append((x, y))
    return NewtonPolygon(tuple(verts))


def ordinarity_test(np_: NewtonPolygon, row: Sequence) -> bool:
    """True iff the Newton polygon equals the Hodge polygon of `row`."""
    hp = hodge_polygon(row)
    if np_.total_length != hp.total_length:
        raise DimensionMismatch(
            f"polygon length {np_.total_length} != Hodge length {hp.total_length}")
    return np_.vertices == hp.vertices


def newton_above_hodge(np_: NewtonPolygon, row: Sequence) -> bool:
    """The Newton polygon never dips below the Hodge polygon."""
    hp = hodge_polygon(row)
    if np_.total_length != hp.total_length:
        raise DimensionMismatch(
            f"polygon length {np_.total_length} != Hodge length {hp.total_length}")
    return all(np_.height_at(x) >= hp.height_at(x)
               for x in range(np_.total_length + 1))


# ---------------------------------------------------------------------------
# slope zeta functions
# ---------------------------------------------------------------------------

class SlopeZeta:
    """Signed multiset of slopes: prod_s (1 - u^s T)^{m_s} in reduced form."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        t = {}
        for s, m in (terms or {}).items():
            if m:
                t[Fraction(s)] = t.get(Fraction(s), 0) + m
        self.terms = {s: m for s, m in t.items() if m}

    def __mul__(self, other: "SlopeZeta") -> "SlopeZeta":
        t = dict(self.terms)
        for s, m in other.terms.items():
            t[s] = t.get(s, 0) + m
        return SlopeZeta(t)

    def inverse(self) -> "SlopeZeta":
        return SlopeZeta({s: -m for s, m in self.terms.items()})

    def __pow__(self, e: int) -> "SlopeZeta":
        return SlopeZeta({s: m * e for s, m in self.terms.items()})

    def __eq__(self, other):
        if isinstance(other, SlopeZeta):
            return self.terms == other.terms
        if other == 1:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    @property
    def is_one(self) -> bool:
        return not self.terms

    @property
    def total_multiplicity(self) -> int:
        """sum m_s; equals -e(X) for the slope zeta of a variety."""
        return sum(self.terms.values())

    def to_json_dict(self) -> dict:
        return {f"{s.numerator}/{s.denominator}": m
                for s, m in sorted(self.terms.items())}

    @classmethod
    def from_json_dict(cls, d: dict) -> "SlopeZeta":
        return cls({Fraction(k): int(v) for k, v in d.items()})

    def render(self) -> str:
        """Human-readable product form, e.g. (1-T)^-2 (1-uT)^-20 (1-u^2T)^-2."""
        if not self.terms:
            return "1"
        parts = []
        for s, m in sorted(self.terms.items()):
            if s == 0:
                base = "(1-T)"
            elif s == 1:
                base = "(1-uT)"
            elif s.denominator == 1:
                base = f"(1-u^{s.numerator}T)"
            else:
                base = f"(1-u^({s.numerator}/{s.denominator})T)"
            parts.append(base if m == 1 else f"{base}^{m}")
        return " ".join(parts)

    def __repr__(self):
        return f"SlopeZeta({self.render()})"


def slope_zeta(z: ZetaData, p: Optional[int] = None,
               r: Optional[int] = None) -> SlopeZeta:
    """Slope zeta of a factored zeta function: numerator slopes from its
    Newton polygon (signed by the numerator exponent) plus trivial factors."""
    p = p or z.p
    r = r or z.r
    terms: dict = {}
    if z.numerator.degree > 0:
        for s, ln in newton_polygon(z.numerator, p, r).segments:
            terms[s] = terms.get(s, 0) + z.numerator_exponent * ln
    for i, e in z.trivial:
        s = Fraction(i)
        terms[s] = terms.get(s, 0) + e
    return SlopeZeta(terms)


def slope_fe_check(S: SlopeZeta, d: int, e: Optional[int] = None) -> bool:
    """Multiset form of S_p(X, u, 1/(u^d T)) = S_p(X, u, T) (-u^{d/2} T)^{e}:
    slopes symmetric under s -> d - s, the weighted sum sits at d/2 of the
    total, and e (when given) matches -sum m_s."""
    t = S.terms
    if any(t.get(Fraction(d) - s, 0) != m for s, m in t.items()):
        return False
    weighted = sum(s * m for s, m in t.items())
    total = S.total_multiplicity
    if weighted * 2 != Fraction(d) * total:
        return False
    if e is not None and total != -e:
        return False
    return True


# ---------------------------------------------------------------------------
# Hodge data for the pencil
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HodgeData:
    d: int
    h: tuple  # (d+1) x (d+1) Hodge numbers

    def __post_init__(self):
        for i in range(self.d + 1):
            for j in range(self.d + 1):
                if self.h[i][j] != self.h[j][i]:
                    raise ValueError("Hodge numbers must be symmetric")

    @property
    def euler(self) -> int:
        return sum((-1) ** (i + j) * self.h[i][j]
                   for i in range(self.d + 1) for j in range(self.d + 1))

    def e_j(self, j: int) -> int:
        # (-1)^(i+1) to keep the arithmetic in int: (-1)**(i-1) at i = 0
        # would be a float in Python
        return (-1) ** j * sum(
            (-1) ** (i + 1) * self.h[j][i] for i in range(self.d + 1))

    @property
    def e_vector(self) -> tuple:
        return tuple(self.e_j(j) for j in range(self.d + 1))

    def middle_row(self, primitive: bool = False) -> tuple:
        """[(j, h^{j, d-j})] with the hyperplane class removed if primitive."""
        out = []
        for j in range(self.d + 1):
            m = self.h[j][self.d - j]
            if primitive and self.d % 2 == 0 and j == self.d // 2:
                m -= 1
            if m:
                out.append((j, m))
        return tuple(out)


def _middle_primitive_counts(n: int) -> list:
    """Primitive middle Hodge numbers of a degree-(n+1) hypersurface in P^n:
    h^{j, d-j}_prim counts integer tuples a in [1, n]^{n+1} with
    sum a_i = (n+1)(j+1)."""
    m = n + 1
    nvars = n + 1
    # dp over the number of variables; values in [1, m-1]
    dp = {0: 1}
    for _ in range(nvars):
        nxt = {}
        for total, ways in dp.items():
            for a in range(1, m):
                nxt[total + a] = nxt.get(total + a, 0) + ways
        dp = nxt
    return [dp.get(m * (j + 1), 0) for j in range(n)]


def hodge_numbers_dwork(n: int) -> HodgeData:
    """Hodge diamond of a smooth degree-(n+1) hypersurface in P^n."""
    if n < 2:
        raise ValueError("n must be >= 2")
    d = n - 1
    h = [[0] * (d + 1) for _ in range(d + 1)]
    for i in range(d + 1):
        h[i][i] += 1  # powers of the hyperplane class
    prim = _middle_primitive_counts(n)
    for j in range(d + 1):
        h[j][d - j] += prim[j]
    return HodgeData(d=d, h=tuple(tuple(row) for row in h))


def mirror_flip(hd: HodgeData) -> HodgeData:
    """Hodge data of a mirror partner: h^{i,j} -> h^{d-i,j}."""
    d = hd.d
    h = tuple(tuple(hd.h[d - i][j] for j in range(d + 1)) for i in range(d + 1))
    return HodgeData(d=d, h=h)


def ordinary_slope_zeta(hd: HodgeData) -> SlopeZeta:
    """S_p for an ordinary variety: prod_j (1 - u^j T)^{e_j}."""
    return SlopeZeta({Fraction(j): hd.e_j(j) for j in range(hd.d + 1)})


# ---------------------------------------------------------------------------
# p-adic slope factors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PadicFactor:
    """A factor of the numerator over Z_p, exact mod p^precision.

    slope is the common ord_q of the reciprocal roots for single-segment
    factors and None for products over wider slope intervals."""

    slope: Optional[Fraction]
    coeffs: tuple  # ascending, constant term 1, reduced mod p^precision
    precision: int

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


def _poly_mul_mod(a, b, mod):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % mod
    return out


def slope_factorization(P: IntPoly, p: int, r: int, N: int) -> list:
    """Single-segment factors of P over Z_p, slopes ascending, mod p^N."""
    if P.degree == 0:
        return []
    d = P.degree
    top_vp = _vp(P.coeffs[-1], p)
    work = N + d * (top_vp + 1) + 2
    prec = work
    remaining = [c % p ** work for c in P.coeffs]
    twist = 0  # ord_p units already divided out
    factors = []

    def hull_of(coeffs, cap):
        pts = []
        for i, c in enumerate(coeffs):
            if c % p ** cap == 0:
                continue
            pts.append((i, _vp(c, p)))
        return _lower_hull(pts)

    while len(remaining) - 1 > 0:
        dd = len(remaining) - 1
        hull = hull_of(remaining, prec)
        if hull[-1][0] != dd:
            raise PrecisionTooLow(
                "leading coefficient lost below the working precision")
        segs = NewtonPolygon(tuple((x, Fraction(y)) for x, y in hull)).segments
        if len(segs) == 1:
            s_abs = segs[0][0] + twist
            coeffs = tuple(
                (c * p ** (i * twist)) % p ** N for i, c in enumerate(remaining))
            factors.append(PadicFactor(Fraction(s_abs, r), coeffs, N))
            remaining = [1]
            break
        s0 = segs[0][0]
        if s0.denominator != 1:
            raise PrecisionTooLow(
                "cannot separate adjacent fractional-slope segments over Z_p")
        j = int(s0)
        if j > 0:
            pj = p ** j
            remaining = [c // pj ** i for i, c in enumerate(remaining)]
            prec -= dd * j
            if prec < N:
                raise PrecisionTooLow("working precision exhausted by twisting")
            remaining = [c % p ** prec for c in remaining]
            twist += j
            segs = NewtonPolygon(
                tuple((x, Fraction(y - j * x)) for x, y in hull)).segments
        h = segs[0][1]
        factor, remaining = _hensel_unit_split(remaining, h, p, prec, N, twist, r)
        factors.append(factor)
    # validate the product against P mod p^N
    pN = p ** N
    prod = [1]
    for f in factors:
        prod = _poly_mul_mod(prod, list(f.coeffs), pN)
    want = [c % pN for c in P.coeffs]
    got = list(prod) + [0] * (len(want) - len(prod))
    if got[: len(want)] != want or any(c for c in got[len(want):]):
        raise PrecisionTooLow("slope factor product fails to reproduce P")
    return factors


def _hensel_unit_split(remaining, h, p, prec, N, twist, r):
    """Split the slope-0 part of length h off `remaining` (mod p^prec).

    The reversed polynomial is monic, so its dup (descending) coefficient
    list is the ascending list of `remaining` verbatim; mod p it factors as
    T^{d-h} times a unit part coprime to it, and Hensel lifting that pair
    keeps both factors exact mod p^prec.  Returns the untwisted PadicFactor
    and the ascending cofactor for further peeling.
    """
    from sympy.polys.domains import ZZ
    from sympy.polys.factortools import dup_zz_hensel_lift

    dd = len(remaining) - 1
    f_dup = [ZZ(c) for c in remaining]
    a0 = [ZZ(1)] + [ZZ(0)] * (dd - h)
    b0 = [ZZ(c % p) for c in remaining[: h + 1]]
    a_l, b_l = dup_zz_hensel_lift(ZZ(p), f_dup, [a0, b0], prec, ZZ)
    pprec = p ** prec
    unit_coeffs = [int(c) % pprec for c in b_l]   # ascending, constant term 1
    cofactor = [int(c) % pprec for c in a_l]      # ascending, constant term 1
    if unit_coeffs[0] != 1 or cofactor[0] != 1:
        raise PrecisionTooLow("Hensel split lost monicity (bug)")
    pN = p ** N
    emitted = tuple((c * p ** (i * twist)) % pN for i, c in enumerate(unit_coeffs))
    return PadicFactor(Fraction(twist, r), emitted, N), cofactor


def slope_part(P: IntPoly, p: int, r: int, lo, hi, N: int,
               include_hi: bool = True) -> PadicFactor:
    """The factor of P whose reciprocal roots have ord_q in [lo, hi] (or
    [lo, hi) with include_hi=False), as coefficients mod p^N."""
    lo, hi = Fraction(lo), Fraction(hi)
    if P.degree == 0:
        return PadicFactor(None, (1,), N)

    def inside(s):
        return (lo <= s <= hi) if include_hi else (lo <= s < hi)

    slopes = newton_polygon(P, p, r).slope_multiset()
    chosen = [s for s in slopes if inside(s)]
    if not chosen:
        return PadicFactor(None, (1,), N)
    if len(chosen) == len(slopes):
        pN = p ** N
        coeffs = tuple(c % pN for c in P.coeffs)
        sl = chosen[0] if len(chosen) == 1 else None
        return PadicFactor(sl, coeffs, N)
    pN = p ** N
    prod = [1]
    picked = []
    for f in slope_factorization(P, p, r, N):
        if inside(f.slope):
            picked.append(f)
            prod = _poly_mul_mod(prod, list(f.coeffs), pN)
    sl = picked[0].slope if len(picked) == 1 else None
    return PadicFactor(sl, tuple(prod), N)
