import itertools
from math import comb, gcd

import pytest

from dworkzeta.config import Caps
from dworkzeta.counting import (
    CountRecord,
    DworkInstance,
    charsum_qcounts,
    count_affine_brute,
    count_record,
    count_torus_brute,
    count_torus_f_brute,
    count_X,
    count_Y,
    count_Y_strata_brute,
    dwork_matrix_M,
    dwork_matrix_N,
    enumerate_solutions,
    required_precision,
    smoothness_probe,
)
from dworkzeta.errors import DivisibilityViolation, PrecisionInsufficient
from dworkzeta.ff import build_field
from dworkzeta.padic import build_tower, pi_valuation


def inst(n, p, r, lam, seed=0):
    return DworkInstance(n=n, field=build_field(p, r, seed), lam=lam)


def test_matrices_match_their_displays():
    assert dwork_matrix_M(2) == (
        (1, 1, 1, 1),
        (3, 0, 0, 1),
        (0, 3, 0, 1),
        (0, 0, 3, 1),
    )
    assert dwork_matrix_N(2) == (
        (1, 1, 1, 1),
        (1, 0, -1, 0),
        (0, 1, -1, 0),
    )
    M4 = dwork_matrix_M(4)
    assert len(M4) == 6 and all(len(r) == 6 for r in M4)
    assert all(M4[i][i - 1] == 5 and M4[i][5] == 1 for i in range(1, 6))


def brute_solutions(matrix, q, lam_zero):
    q1 = q - 1
    ncols = len(matrix[0])
    out = set()
    for k in itertools.product(range(q), repeat=ncols):
        if lam_zero and k[-1] != 0:
            continue
        v = [sum(m * kk for m, kk in zip(row, k)) for row in matrix]
        if all(x % q1 == 0 for x in v):
            out.add(k)
    return out


@pytest.mark.parametrize("n,q_spec", [(2, (2, 1)), (2, (5, 1)), (2, (7, 1)),
                                      (3, (2, 2)), (3, (5, 1)), (2, (3, 2))])
@pytest.mark.parametrize("lam_zero", [False, True])
def test_enumerate_solutions_matches_brute_scan(n, q_spec, lam_zero):
    p, r = q_spec
    q = p ** r
    for matrix in (dwork_matrix_M(n), dwork_matrix_N(n)):
        got = {sol.k for sol in enumerate_solutions(matrix, q, lam_zero)}
        want = brute_solutions(matrix, q, lam_zero)
        assert got == want
        # no duplicates
        count = sum(1 for _ in enumerate_solutions(matrix, q, lam_zero))
        assert count == len(got)


def test_solution_classification():
    n, q = 2, 7
    sols = {sol.k: sol for sol in enumerate_solutions(dwork_matrix_M(n), q)}
    zero = sols[(0, 0, 0, 0)]
    assert zero.cls == "zero" and zero.s_of_k == 0
    boundary = sols[(0, 0, 0, 6)]
    assert boundary.cls == "trivial" and boundary.s_of_k == n + 2
    diag = [s for s in sols.values() if s.cls == "diagonal"]
    assert diag and all(0 < s.k[0] == s.k[1] == s.k[2] < 6 for s in diag)
    adm = [s for s in sols.values() if s.cls == "admissible"]
    assert adm and all(s.s_of_k == n + 2 for s in adm)
    for s in adm:
        assert len(set(s.k[: n + 1])) > 1


def test_affine_brute_examples():
    assert count_affine_brute(inst(2, 2, 1, 0)) == 4
    assert count_affine_brute(inst(2, 2, 2, 0)) == 28
    # the origin is always a solution
    assert count_affine_brute(inst(3, 3, 1, 1)) >= 1


def test_torus_brute_examples():
    assert count_torus_brute(inst(2, 2, 1, 0)) == 0
    F3 = build_field(3, 1, 0)
    got = count_torus_brute(DworkInstance(n=2, field=F3, lam=1))
    by_hand = 0
    for x in (1, 2):
        for y in (1, 2):
            inv = pow(x * y, -1, 3) if (x * y) % 3 else 0
            by_hand += (x + y + inv + 1) % 3 == 0
    assert got == by_hand
    assert count_torus_brute(inst(3, 2, 2, 0)) <= 27


def brute_projective_count(n, F, lam):
    q = F.pp.q
    q1 = q - 1
    d = n + 1
    pow_d = [0] + [F.gen_pow((F.dlog(x) * d) % q1) for x in range(1, q)]
    cnt = 0
    for pivot in range(d):
        for rest in itertools.product(range(q), repeat=d - pivot - 1):
            x = (0,) * pivot + (1,) + rest
            v = 0
            for xi in x:
                v = F.add(v, pow_d[xi])
            if lam and all(x):
                lsum = sum(F.log_table[xi] for xi in x)
                v = F.add(v, F.mul(lam, F.gen_pow(lsum % q1)))
            if v == 0:
                cnt += 1
    return cnt


def test_count_X_examples_and_independent_oracle():
    assert count_X(4, 2) == 3
    assert count_X(28, 4) == 9
    with pytest.raises(DivisibilityViolation):
        count_X(5, 4)
    for (n, p, lam) in [(3, 5, 0), (2, 7, 3), (3, 3, 1)]:
        F = build_field(p, 1, 0)
        nf = count_affine_brute(DworkInstance(n=n, field=F, lam=lam))
        assert count_X(nf, p) == brute_projective_count(n, F, lam)


def test_count_Y_examples():
    assert count_Y(0, 2, 2) == 3
    # congruence (12): #Y = N_g* + 1 - n(-1)^{n-1} mod q
    for (n, p, lam) in [(2, 5, 1), (3, 5, 2), (2, 7, 0), (4, 3, 1)]:
        F = build_field(p, 1, 0)
        ng = count_torus_brute(DworkInstance(n=n, field=F, lam=lam))
        y = count_Y(ng, n, p)
        assert (y - (ng + 1 - n * (-1) ** (n - 1))) % p == 0


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("p,r", [(3, 1), (2, 2), (5, 1)])
def test_count_Y_matches_strata_oracle(n, p, r):
    F = build_field(p, r, 0)
    for lam in range(F.pp.q):
        ii = DworkInstance(n=n, field=F, lam=lam)
        ng = count_torus_brute(ii)
        assert count_Y(ng, n, F.pp.q) == count_Y_strata_brute(ii)


def test_stratum_identity_symbolic():
    # sum over faces ((q-1)^dim + (-1)^{dim+1}) = q (q^n - 1)/(q - 1)
    for n in range(2, 7):
        for q in (2, 3, 4, 5, 7, 9, 25):
            total = sum(
                comb(n + 1, d + 1) * ((q - 1) ** d + (-1) ** (d + 1))
                for d in range(n + 1))
            assert total == q * (q ** n - 1) // (q - 1)


@pytest.mark.parametrize("n,p,r", [(2, 2, 1), (2, 3, 1), (2, 2, 2), (2, 5, 1),
                                   (3, 2, 1), (3, 3, 1)])
def test_charsum_matches_brute_all_lambda(n, p, r):
    F = build_field(p, r, 0)
    for lam in range(F.pp.q):
        ii = DworkInstance(n=n, field=F, lam=lam)
        nf, nfstar, ngstar, _prec = charsum_qcounts(ii, with_nfstar=True)
        assert nf == count_affine_brute(ii), (n, p, r, lam)
        assert ngstar == count_torus_brute(ii), (n, p, r, lam)
        assert nfstar == count_torus_f_brute(ii), (n, p, r, lam)


def test_charsum_extension_field_consistency():
    # counting over GF(q^2) directly == counting the same lam upstairs
    ii = inst(2, 3, 1, 2)
    nf2, _, ng2, _ = charsum_qcounts(ii, k=2)
    F9 = build_field(3, 2, 0)
    from dworkzeta.ff import extend

    lam9 = extend(build_field(3, 1, 0), 2).embed(2)
    ii9 = DworkInstance(n=2, field=F9, lam=lam9)
    nf9, _, ng9, _ = charsum_qcounts(ii9)
    assert (nf2, ng2) == (nf9, ng9)
    assert nf2 == count_affine_brute(ii, k=2)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_charsum_matches_brute_n4(p):
    F = build_field(p, 1, 0)
    for lam in range(p):
        ii = DworkInstance(n=4, field=F, lam=lam)
        nf, _, ngstar, _ = charsum_qcounts(ii)
        assert nf == count_affine_brute(ii), (p, lam)
        assert ngstar == count_torus_brute(ii), (p, lam)


def test_charsum_extension_over_nonprime_base():
    # base GF(4), counted over GF(16): the engine and brute force agree
    ii = inst(2, 2, 2, 3)
    nf, _, ng, _ = charsum_qcounts(ii, k=2)
    assert nf == count_affine_brute(ii, k=2)
    assert ng == count_torus_brute(ii, k=2)


def test_charsum_trivial_part_identity():
    # the all-boundary terms of the mirror sum add up to (-1)^n/(q-1)
    from dworkzeta.counting import is_boundary_vector

    for (n, p, r, lam) in [(2, 5, 1, 2), (3, 3, 1, 1), (2, 2, 2, 2)]:
        F = build_field(p, r, 0)
        q = F.pp.q
        ii = DworkInstance(n=n, field=F, lam=lam)
        T = build_tower(F, required_precision(p, q, n))
        table = T.gauss_table()
        acc = T.zero()
        for sol in enumerate_solutions(ii.Nmat, q):
            if not is_boundary_vector(sol.k, q):
                continue
            prod = T.one()
            for kj in sol.k:
                prod = prod * table[kj]
            acc = acc + prod  # chi(lam)^{k_last} = 1 on boundary lifts
        inv_q1 = pow(q - 1, -1, T.pN)
        assert acc.scale(inv_q1) == T.from_int((-1) ** n).scale(inv_q1)


@pytest.mark.parametrize("n,p,r", [(2, 5, 1), (3, 2, 2), (2, 7, 1), (4, 3, 1),
                                   (3, 5, 1), (2, 2, 2), (3, 2, 6), (4, 2, 6)])
def test_gauss_product_valuations_small(n, p, r):
    # every nonzero solution has ord_q(prod G) >= 1; admissible ones >= 2
    F = build_field(p, r, 0)
    q = F.pp.q
    T = build_tower(F, (n + 2) * r + 2)
    table = T.gauss_table()
    units = r * (p - 1)
    for sol in enumerate_solutions(dwork_matrix_M(n), q):
        if sol.cls == "zero":
            continue
        prod = T.one()
        for kj in sol.k:
            prod = prod * table[kj]
        v = pi_valuation(prod)
        assert v.exact
        assert v.numerator >= units, (sol, v)
        if sol.cls == "admissible":
            assert v.numerator >= 2 * units, (sol, v)


def test_admissible_closed_under_digit_rotation():
    n, p, r = 2, 3, 2
    q = p ** r
    sols = {s.k: s for s in enumerate_solutions(dwork_matrix_M(n), q)}

    def rot(ki):
        if ki == 0:
            return 0
        v = (p * ki) % (q - 1)
        return q - 1 if v == 0 else v

    admissible = [s for s in sols.values() if s.cls == "admissible"]
    assert admissible
    for s in admissible:
        rk = tuple(rot(ki) for ki in s.k)
        assert rk in sols and sols[rk].cls == "admissible"


def test_smoothness_probe_examples():
    rep = smoothness_probe(inst(2, 7, 1, 0), k_max=3)
    assert rep.status == "unknown"  # Fermat cubic, p does not divide 3

    rep2 = smoothness_probe(inst(3, 2, 1, 1), k_max=2)
    assert rep2.status == "singular"  # char 2 divides n+1 = 4

    # lam^3 = -27 over F_7 at lam = 1, 2, 4: the pencil degenerates
    for lam in (1, 2, 4):
        assert smoothness_probe(inst(2, 7, 1, lam), k_max=2).status == "singular"
    for lam in (0, 3, 5, 6):
        assert smoothness_probe(inst(2, 7, 1, lam), k_max=2).status == "unknown"


def test_smoothness_printed_condition_recorded():
    # printed condition lam^n != (n+1)^{n+1}; n=2, q=7: 27 = 6 is a non-square
    for lam in range(7):
        rep = smoothness_probe(inst(2, 7, 1, lam), k_max=1)
        assert rep.printed_delta_regular == (pow(lam, 2, 7) != 27 % 7)


def test_count_record_json_and_both_method():
    rec = count_record(inst(2, 5, 1, 1), method="both", with_nfstar=True)
    d = rec.to_json_dict()
    assert d["schema"] == 1
    assert d["lambda_dlog"] == 0  # dlog(1) = 0
    assert isinstance(d["Nf"], str) and int(d["Nf"]) == rec.Nf
    assert rec.X * 4 == rec.Nf - 1

    rec0 = count_record(inst(2, 5, 1, 0), method="brute")
    assert rec0.to_json_dict()["lambda_dlog"] is None
    assert rec0.precision is None


def test_charsum_precision_guard():
    with pytest.raises(PrecisionInsufficient):
        charsum_qcounts(inst(2, 5, 1, 1), caps=Caps(precision_override=2))


def test_model_independence_across_seeds():
    # lam in the prime subfield has the same code in every model
    for seed in (0, 3):
        F = build_field(7, 1, seed)
        ii = DworkInstance(n=2, field=F, lam=3)
        assert count_affine_brute(ii) == count_affine_brute(inst(2, 7, 1, 3))
        nf, _, ng, _ = charsum_qcounts(ii)
        assert nf == count_affine_brute(ii)
        assert ng == count_torus_brute(ii)


def test_required_precision():
    assert 5 ** required_precision(5, 5, 2) > 2 * 5 ** 4
    assert 2 ** required_precision(2, 4, 3) > 2 * 4 ** 5
