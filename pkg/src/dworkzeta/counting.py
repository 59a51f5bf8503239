"""Point counting for the Dwork pencil and its toric mirror.

The pencil (projective, in P^n) is cut out by

    f = x_1^{n+1} + ... + x_{n+1}^{n+1} + lam * x_1...x_{n+1},

its mirror is the projective closure Y of the torus hypersurface

    g = x_1 + ... + x_n + 1/(x_1...x_n) + lam = 0.

Counts come two ways: exhaustive evaluation, and the Gauss-sum character
formula.  Writing the monomial exponents of x_0*f (resp. x_0*g) as the
columns of an integer matrix, the character formula for the affine count is

    q N_f = sum over M k = 0 mod (q-1), k in [0, q-1]^m, of
            (q-1)^{s(k)-m} q^{v-s(k)} (prod_j G(k_j)) chi(lam)^{k_m},

with v = number of ambient variables including x_0, m = number of
monomials, and s(k) = number of nonzero entries of the integer vector M k.
Both boundary lifts of a zero residue (0 and q-1) are distinct terms.  For
the torus count the x_0 = 0 stratum contributes (q-1)^{v-1} and every
solution carries the flat coefficient (q-1)^{v} / (q-1)^m.

When lam = 0 the product monomial is absent: the last exponent k_m is
pinned to 0 and the character factor is dropped.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from typing import Iterator, Optional

from .config import Caps, DEFAULT_CAPS
from .errors import (
    DivisibilityViolation,
    EnumerationTooLarge,
    NonIntegralResult,
    PrecisionInsufficient,
)
from .ff import FieldCtx, build_field, extend
from .padic import TowerCtx, build_tower


def dwork_matrix_M(n: int) -> tuple:
    """(n+2) x (n+2) exponent matrix of x_0*f: row 0 all ones, then n+1 on
    the diagonal with a final column of ones."""
    rows = [tuple([1] * (n + 2))]
    for i in range(n + 1):
        row = [0] * (n + 2)
        row[i] = n + 1
        row[n + 1] = 1
        rows.append(tuple(row))
    return tuple(rows)


def dwork_matrix_N(n: int) -> tuple:
    """(n+1) x (n+2) exponent matrix of x_0*g: row 0 all ones, then the
    identity block against a column of -1 and a zero column for lam."""
    rows = [tuple([1] * (n + 2))]
    for i in range(n):
        row = [0] * (n + 2)
        row[i] = 1
        row[n] = -1
        rows.append(tuple(row))
    return tuple(rows)


@dataclass
class DworkInstance:
    """The pair (f, g) for parameters (n, lam) over a base field model."""

    n: int
    field: FieldCtx
    lam: int  # element code in `field`
    M: tuple = dc_field(init=False)
    Nmat: tuple = dc_field(init=False)
    f_exponents: tuple = dc_field(init=False)
    g_exponents: tuple = dc_field(init=False)
    smoothness_status: str = "unknown"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not 0 <= self.lam < self.field.pp.q:
            raise ValueError("lam is not an element code of the base field")
        n = self.n
        self.M = dwork_matrix_M(n)
        self.Nmat = dwork_matrix_N(n)
        self.f_exponents = tuple(
            tuple(self.M[i][j] for i in range(n + 2)) for j in range(n + 2))
        self.g_exponents = tuple(
            tuple(self.Nmat[i][j] for i in range(n + 1)) for j in range(n + 2))

    def extension(self, k: int, cap: int = 1 << 26):
        """(field of GF(q^k), image of lam) under the canonical embedding."""
        if k == 1:
            return self.field, self.lam
        ext = extend(self.field, k, cap=cap)
        return ext.ext, ext.embed(self.lam)

    def __repr__(self):
        return (f"DworkInstance(n={self.n}, q={self.field.pp.q}, "
                f"lam={self.lam}, smooth={self.smoothness_status})")


# ---------------------------------------------------------------------------
# brute-force counts
# ---------------------------------------------------------------------------

def count_affine_brute(inst: DworkInstance, k: int = 1,
                       caps: Caps = DEFAULT_CAPS) -> int:
    """N_f over GF(q^k): zeros of f in affine (n+1)-space."""
    F, lam = inst.extension(k)
    n = inst.n
    q = F.pp.q
    if q ** (n + 1) > caps.affine_enum_max:
        raise EnumerationTooLarge(q ** (n + 1), caps.affine_enum_max)
    q1 = q - 1
    powd = [0] + [F.gen_pow((F.dlog(x) * (n + 1)) % q1) for x in range(1, q)]
    lam_pow = None
    if lam:
        lam_pow = [F.mul(lam, F.gen_pow(e)) for e in range(q1)]
    add = F.add
    log = F.log_table
    count = 0
    # depth-first walk keeping the running diagonal sum and product dlog
    stack = [(0, 0, 0, False)]  # (depth, diag_sum, prod_dlog, has_zero)
    nvars = n + 1
    while stack:
        depth, s, lsum, zero = stack.pop()
        if depth == nvars:
            if lam and not zero:
                s = add(s, lam_pow[lsum % q1])
            if s == 0:
                count += 1
            continue
        for x in range(q):
            if x == 0:
                stack.append((depth + 1, s, lsum, True))
            else:
                stack.append((depth + 1, add(s, powd[x]), lsum + log[x], zero))
    return count


def count_torus_brute(inst: DworkInstance, k: int = 1,
                      caps: Caps = DEFAULT_CAPS) -> int:
    """N_g* over GF(q^k): zeros of g with all coordinates nonzero."""
    F, lam = inst.extension(k)
    n = inst.n
    q = F.pp.q
    q1 = q - 1
    if q1 ** n > caps.torus_enum_max:
        raise EnumerationTooLarge(q1 ** n, caps.torus_enum_max)
    add = F.add
    log = F.log_table
    exp = F.exp_table
    units = exp
    count = 0
    stack = [(0, 0, 0)]
    while stack:
        depth, s, lsum = stack.pop()
        if depth == n:
            v = add(add(s, exp[(-lsum) % q1]), lam)
            if v == 0:
                count += 1
            continue
        for x in units:
            stack.append((depth + 1, add(s, x), lsum + log[x]))
    return count


def count_torus_f_brute(inst: DworkInstance, k: int = 1,
                        caps: Caps = DEFAULT_CAPS) -> int:
    """N_f*: zeros of f with all n+1 coordinates nonzero."""
    F, lam = inst.extension(k)
    n = inst.n
    q = F.pp.q
    q1 = q - 1
    if q1 ** (n + 1) > caps.torus_enum_max:
        raise EnumerationTooLarge(q1 ** (n + 1), caps.torus_enum_max)
    powd = [0] + [F.gen_pow((F.dlog(x) * (n + 1)) % q1) for x in range(1, q)]
    lam_pow = [F.mul(lam, F.gen_pow(e)) for e in range(q1)] if lam else None
    add = F.add
    log = F.log_table
    count = 0
    stack = [(0, 0, 0)]
    while stack:
        depth, s, lsum = stack.pop()
        if depth == n + 1:
            if lam:
                s = add(s, lam_pow[lsum % q1])
            if s == 0:
                count += 1
            continue
        for x in range(1, q):
            stack.append((depth + 1, add(s, powd[x]), lsum + log[x]))
    return count


def count_X(n_f: int, q: int) -> int:
    """Projective count (N_f - 1)/(q - 1); exact by construction."""
    if (n_f - 1) % (q - 1):
        raise DivisibilityViolation(
            f"(N_f - 1) = {n_f - 1} not divisible by q - 1 = {q - 1}")
    return (n_f - 1) // (q - 1)


def count_Y(n_g_star: int, n: int, q: int) -> int:
    """#Y = N_g* - ((q-1)^n + (-1)^{n+1})/q + (q^n - 1)/(q - 1)."""
    t1 = (q - 1) ** n + (-1) ** (n + 1)
    if t1 % q:
        raise DivisibilityViolation(f"(q-1)^n + (-1)^(n+1) = {t1} not divisible by {q}")
    t2 = q ** n - 1
    if t2 % (q - 1):
        raise DivisibilityViolation(f"q^n - 1 not divisible by q - 1")
    return n_g_star - t1 // q + t2 // (q - 1)


def count_Y_strata_brute(inst: DworkInstance, k: int = 1,
                         caps: Caps = DEFAULT_CAPS) -> int:
    """Independent #Y oracle: sum the counts of the torus hypersurface over
    every face of the simplex.  Proper faces of dimension d are cut out by
    1 + x_1 + ... + x_d = 0 in a d-torus and there are C(n+1, d+1) of them;
    vertices contribute nothing; the big cell contributes N_g*."""
    from math import comb

    F, _lam = inst.extension(k)
    n = inst.n
    q = F.pp.q
    total = count_torus_brute(inst, k, caps)
    add = F.add
    for d in range(1, n):
        cnt = 0
        for xs in itertools.product(range(1, q), repeat=d):
            s = 1
            for x in xs:
                s = add(s, x)
            if s == 0:
                cnt += 1
        total += comb(n + 1, d + 1) * cnt
    return total


# ---------------------------------------------------------------------------
# structural enumeration of character-sum solutions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolutionVector:
    k: tuple
    s_of_k: int
    cls: str  # zero | trivial | diagonal | admissible | other


def is_boundary_vector(k, q: int) -> bool:
    """Every coordinate is 0 or q-1: the 'trivial terms' of the mirror
    subtotal.  Independent of the class label, since a boundary vector with
    s = n+2 and unequal head coordinates still counts as admissible."""
    return all(ki in (0, q - 1) for ki in k)


def _matvec(matrix, k):
    return tuple(sum(mij * kj for mij, kj in zip(row, k)) for row in matrix)


def _classify(k, s, n, q) -> str:
    # admissibility (s(k) = n+2, head coordinates not all equal) takes
    # precedence over the boundary label: the ord_q >= 2 bound must cover
    # boundary-mixed vectors like (0, q-1, ..., q-1)
    if all(ki == 0 for ki in k):
        return "zero"
    head = k[: n + 1]
    if 0 < head[0] < q - 1 and all(ki == head[0] for ki in head):
        return "diagonal"
    if s == n + 2 and any(ki != head[0] for ki in head):
        return "admissible"
    if all(ki in (0, q - 1) for ki in k):
        return "trivial"
    return "other"


def _lift_zero_residues(res, q, fixed_last: bool):
    """All lifts of a residue tuple into [0, q-1]: coordinates with residue 0
    may be 0 or q-1; the last coordinate stays 0 when pinned (lam = 0)."""
    options = []
    for idx, r in enumerate(res):
        if r == 0:
            if fixed_last and idx == len(res) - 1:
                options.append((0,))
            else:
                options.append((0, q - 1))
        else:
            options.append((r,))
    return itertools.product(*options)


def enumerate_solutions(matrix, q: int, lam_zero: bool = False) -> Iterator[SolutionVector]:
    """Solutions k in [0, q-1]^{n+2} of matrix*k = 0 mod (q-1), classified.

    Uses the structure of the two Dwork matrices instead of scanning q^{n+2}
    tuples: for M the first n+1 coordinates agree mod (q-1)/gcd(n+1, q-1)
    and the last is determined; for N the first n+1 residues are equal.
    Every yielded vector is re-verified against the matrix.
    """
    nrows = len(matrix)
    ncols = len(matrix[0])
    n = ncols - 2
    q1 = q - 1
    is_m = nrows == ncols

    def emit(res):
        for k in _lift_zero_residues(res, q, lam_zero):
            v = _matvec(matrix, k)
            if any(x % q1 for x in v):
                raise RuntimeError(f"enumerated non-solution {k} (bug)")
            s = sum(1 for x in v if x != 0)
            yield SolutionVector(k, s, _classify(k, s, n, q))

    if is_m:
        from math import gcd

        g = gcd(n + 1, q1)
        d = q1 // g
        a_values = (0,) if lam_zero else range(d)
        for a in a_values:
            k_last = (-(n + 1) * a) % q1
            for ms in itertools.product(range(g), repeat=n):
                m_last = (-sum(ms)) % g
                res = tuple(a + d * m for m in ms) + (a + d * m_last, k_last)
                yield from emit(res)
    else:
        for a in range(q1):
            if lam_zero and ((n + 1) * a) % q1:
                continue
            k_last = (-(n + 1) * a) % q1
            res = (a,) * (n + 1) + (k_last,)
            yield from emit(res)


# ---------------------------------------------------------------------------
# the character-sum engine
# ---------------------------------------------------------------------------

def required_precision(p: int, q: int, n: int) -> int:
    """Smallest N with p^N > 2 q^{n+2}; enough to pin q*N_f as an integer."""
    bound = 2 * q ** (n + 2)
    N, pN = 1, p
    while pN <= bound:
        pN *= p
        N += 1
    return N


@dataclass
class CountRecord:
    n: int
    p: int
    r: int
    k: int
    lam_dlog: Optional[int]  # None encodes lam = 0
    Nf: int
    Nfstar: Optional[int]
    Ngstar: int
    X: int
    Y: int
    method: str
    precision: Optional[int] = None

    def to_json_dict(self) -> dict:
        return {
            "schema": 1,
            "n": self.n,
            "p": self.p,
            "r": self.r,
            "k": self.k,
            "lambda_dlog": self.lam_dlog,
            "Nf": str(self.Nf),
            "Nfstar": None if self.Nfstar is None else str(self.Nfstar),
            "Ngstar": str(self.Ngstar),
            "X": str(self.X),
            "Y": str(self.Y),
            "method": self.method,
            "precision": self.precision,
        }


def _certified_count(elem, q: int, bound: int, what: str) -> int:
    """De-truncate a tower element certified to be q * (a count)."""
    v = elem.as_integer()
    if v > bound:
        raise NonIntegralResult(
            f"{what} = {v} exceeds its a-priori bound {bound}; precision bug")
    if v % q:
        raise NonIntegralResult(f"{what} = {v} is not divisible by q = {q}")
    return v // q


def charsum_qcounts(inst: DworkInstance, k: int = 1,
                    tower: Optional[TowerCtx] = None,
                    caps: Caps = DEFAULT_CAPS,
                    with_nfstar: bool = False):
    """(N_f, N_f*, N_g*) over GF(q^k) from the Gauss-sum formulas."""
    F, lam = inst.extension(k, cap=caps.field_table_max_q)
    n = inst.n
    p, q = F.pp.p, F.pp.q
    q1 = q - 1
    if tower is None:
        N = caps.precision_override or required_precision(p, q, n)
        tower = build_tower(F, N)
    elif tower.field is not F:
        raise ValueError("tower was built over a different field model")
    if tower.pN <= 2 * q ** (n + 2):
        raise PrecisionInsufficient(2 * q ** (n + 2), tower.pN)
    pN = tower.pN
    table = tower.gauss_table()
    tp = tower.teich_pows()
    lam_zero = lam == 0
    lam_dlog = None if lam_zero else F.dlog(lam)

    inv_q1 = pow(q1 % pN, -1, pN)
    # coefficient (q-1)^{s-(n+2)} q^{(n+2)-s} = (q * inv(q-1))^{(n+2)-s}
    co = [pow((q * inv_q1) % pN, (n + 2) - s, pN) for s in range(n + 3)]

    def chi_lam(k_last):
        if lam_zero or k_last % q1 == 0:
            return None  # factor 1
        return tp[(lam_dlog * k_last) % q1]

    acc_f = tower.zero()
    acc_fstar = tower.zero()
    for sol in enumerate_solutions(inst.M, q, lam_zero):
        prod = table[sol.k[0]]
        for kj in sol.k[1:]:
            prod = prod * table[kj]
        ch = chi_lam(sol.k[-1])
        if ch is not None:
            prod = prod * tower.from_w(ch)
        acc_f = acc_f + prod.scale(co[sol.s_of_k])
        if with_nfstar:
            acc_fstar = acc_fstar + prod
    qNf = acc_f
    nf = _certified_count(qNf, q, q ** (n + 2), "q*N_f")

    nfstar = None
    if with_nfstar:
        qNfstar = acc_fstar + tower.from_int(q1 ** (n + 1))
        nfstar = _certified_count(qNfstar, q, q ** (n + 2), "q*N_f*")

    acc_g = tower.zero()
    for sol in enumerate_solutions(inst.Nmat, q, lam_zero):
        prod = table[sol.k[0]]
        for kj in sol.k[1:]:
            prod = prod * table[kj]
        ch = chi_lam(sol.k[-1])
        if ch is not None:
            prod = prod * tower.from_w(ch)
        acc_g = acc_g + prod
    qNgstar = acc_g.scale(inv_q1) + tower.from_int(q1 ** n)
    ngstar = _certified_count(qNgstar, q, q ** (n + 1), "q*N_g*")

    return nf, nfstar, ngstar, tower.N


def count_record(inst: DworkInstance, k: int = 1, method: str = "charsum",
                 caps: Caps = DEFAULT_CAPS,
                 tower: Optional[TowerCtx] = None,
                 with_nfstar: bool = False) -> CountRecord:
    """One CountRecord over GF(q^k); `both` asserts charsum == brute."""
    F, lam = inst.extension(k, cap=caps.field_table_max_q)
    q = F.pp.q
    precision = None
    if method in ("charsum", "both"):
        nf, nfstar, ngstar, precision = charsum_qcounts(
            inst, k, tower=tower, caps=caps, with_nfstar=with_nfstar)
        if method == "both":
            nf_b = count_affine_brute(inst, k, caps)
            ngstar_b = count_torus_brute(inst, k, caps)
            if (nf, ngstar) != (nf_b, ngstar_b):
                raise NonIntegralResult(
                    f"charsum ({nf}, {ngstar}) != brute ({nf_b}, {ngstar_b})")
            if with_nfstar and nfstar != count_torus_f_brute(inst, k, caps):
                raise NonIntegralResult("charsum N_f* disagrees with brute force")
    elif method == "brute":
        nf = count_affine_brute(inst, k, caps)
        ngstar = count_torus_brute(inst, k, caps)
        nfstar = count_torus_f_brute(inst, k, caps) if with_nfstar else None
    else:
        raise ValueError(f"unknown method {method!r}")
    lam_dlog = None if lam == 0 else F.dlog(lam)
    return CountRecord(
        n=inst.n, p=F.pp.p, r=inst.field.pp.r, k=k, lam_dlog=lam_dlog,
        Nf=nf, Nfstar=nfstar, Ngstar=ngstar,
        X=count_X(nf, q), Y=count_Y(ngstar, inst.n, q),
        method=method, precision=precision)


# ---------------------------------------------------------------------------
# smoothness probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothnessReport:
    status: str  # singular | unknown   ("unknown" = probably smooth)
    witness: Optional[tuple]  # (extension degree, projective point codes)
    printed_delta_regular: bool  # lam^n != (n+1)^{n+1} in GF(q), as printed


def smoothness_probe(inst: DworkInstance, k_max: int = 2,
                     caps: Caps = DEFAULT_CAPS) -> SmoothnessReport:
    """Search for common zeros of f and its partials over GF(q^s), s <= k_max.

    Finding one certifies `singular`; finding none only reports `unknown`.
    The delta-regularity condition is evaluated exactly as printed; whether
    its exponent should read n+1 is left as an open question, so both
    verdicts are recorded independently.
    """
    F0 = inst.field
    n = inst.n
    lhs = F0.pow(inst.lam, n)
    rhs = F0.from_int((n + 1) ** (n + 1))
    printed_ok = lhs != rhs

    witness = None
    for s in range(1, k_max + 1):
        F, lam = inst.extension(s, cap=caps.field_table_max_q)
        q = F.pp.q
        if q ** n > caps.probe_enum_max:
            break
        pt = _find_singular_point(F, n, lam)
        if pt is not None:
            witness = (s, pt)
            break
    status = "singular" if witness else "unknown"
    inst.smoothness_status = status
    return SmoothnessReport(status=status, witness=witness,
                            printed_delta_regular=printed_ok)


def _find_singular_point(F: FieldCtx, n: int, lam: int):
    """First projective point with f = 0 and all partials zero, else None."""
    q = F.pp.q
    q1 = q - 1
    d = n + 1
    pow_d = [0] + [F.gen_pow((F.dlog(x) * d) % q1) for x in range(1, q)]
    pow_n = [0] + [F.gen_pow((F.dlog(x) * n) % q1) for x in range(1, q)]
    d_mod = F.from_int(d)
    add, mul = F.add, F.mul

    for pivot in range(d):
        # x_0 = ... = x_{pivot-1} = 0, x_pivot = 1, rest free
        for rest in itertools.product(range(q), repeat=d - pivot - 1):
            x = (0,) * pivot + (1,) + rest
            zeros = [i for i, xi in enumerate(x) if xi == 0]
            if len(zeros) == 0:
                prod_all = 0
                lsum = 0
                for xi in x:
                    lsum += F.log_table[xi]
                prod_all = F.gen_pow(lsum % q1)
            f_val = 0
            for xi in x:
                f_val = add(f_val, pow_d[xi])
            if lam and not zeros:
                f_val = add(f_val, mul(lam, prod_all))
            if f_val != 0:
                continue
            singular = True
            for i in range(d):
                # partial_i = (n+1) x_i^n + lam * prod_{j != i} x_j
                term = mul(d_mod, pow_n[x[i]])
                if lam:
                    if not zeros:
                        prod_others = F.div(prod_all, x[i])
                    elif zeros == [i]:
                        lsum = sum(F.log_table[xj] for j, xj in enumerate(x) if j != i)
                        prod_others = F.gen_pow(lsum % q1)
                    else:
                        prod_others = 0
                    term = add(term, mul(lam, prod_others))
                if term != 0:
                    singular = False
                    break
            if singular:
                return x
    return None
