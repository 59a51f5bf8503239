"""Command-line driver: count, congruence, zeta, slope, sweep, gauss.

All machine-readable output is JSONL with a schema field and decimal strings
for unbounded integers.  Exit codes: 2 bad configuration, 3 cap exceeded,
4 oracle mismatch, 5 congruence failure, 6 zeta recovery failure,
7 slope functional-equation failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .config import Caps, DEFAULT_CAPS, SweepConfig
from .counting import (
    DworkInstance,
    charsum_qcounts,
    count_record,
    count_X,
    count_Y,
    smoothness_probe,
)
from .errors import (
    DworkZetaError,
    EnumerationTooLarge,
    FieldTooLarge,
    InsufficientData,
    NoConsistentSign,
    NonIntegralCoefficient,
    NonIntegralResult,
    NotDivisible,
    PrecisionInsufficient,
    SubstitutionNotIntegral,
)
from .ff import build_field
from .padic import build_tower
from .slope import (
    hodge_numbers_dwork,
    newton_above_hodge,
    newton_polygon,
    ordinarity_test,
    ordinary_slope_zeta,
    slope_fe_check,
    slope_zeta,
)
from .zeta import (
    expected_degree_P,
    r_poly,
    recover_mirror_zeta,
    recover_pencil_zeta,
    weight_purity_check,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAP = 3
EXIT_ORACLE = 4
EXIT_CONGRUENCE = 5
EXIT_RECOVERY = 6
EXIT_SLOPE_FE = 7


def _emit(line: dict, out):
    out.write(json.dumps(line, sort_keys=True) + "\n")


def _parse_lambdas(spec: str, field) -> list:
    """Element codes for a lambda specification: all | zero | subfield | dlog."""
    q, p = field.pp.q, field.pp.p
    if spec == "all":
        return list(range(q))
    if spec == "zero":
        return [0]
    if spec == "subfield":
        return list(range(p))
    try:
        e = int(spec)
    except ValueError:
        raise SystemExit(EXIT_CONFIG)
    return [field.gen_pow(e)]


def _open_out(args, name: str):
    if args.out:
        path = Path(args.out)
        path.mkdir(parents=True, exist_ok=True)
        return open(path / name, "w", encoding="utf-8")
    return sys.stdout


def cmd_count(args) -> int:
    caps = _caps_for(args)
    field = build_field(args.p, args.r, _seed_of(args), cap=caps.field_table_max_q)
    out = _open_out(args, "counts.jsonl")
    try:
        for lam in _parse_lambdas(args.lam_spec, field):
            inst = DworkInstance(n=args.n, field=field, lam=lam)
            for k in range(1, args.k + 1):
                rec = count_record(inst, k, method=args.method, caps=caps,
                                   with_nfstar=args.nfstar)
                _emit(rec.to_json_dict(), out)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_congruence(args) -> int:
    caps = _caps_for(args)
    field = build_field(args.p, args.r, _seed_of(args), cap=caps.field_table_max_q)
    out = _open_out(args, "congruence.jsonl")
    failures = 0
    rows = 0
    try:
        for lam in _parse_lambdas(args.lam_spec, field):
            inst = DworkInstance(n=args.n, field=field, lam=lam)
            lam_dlog = None if lam == 0 else field.dlog(lam)
            for k in range(1, args.k + 1):
                F_k, _ = inst.extension(k, cap=caps.field_table_max_q)
                qk = F_k.pp.q
                nf, _, ngstar, prec = charsum_qcounts(inst, k, caps=caps)
                x = count_X(nf, qk)
                y = count_Y(ngstar, args.n, qk)
                diff = (x - y) % qk
                ok = diff == 0
                # the direct form of the congruence against the raw torus count
                t51 = (x - (ngstar + 1 - args.n * (-1) ** (args.n - 1))) % qk == 0
                rows += 1
                if not (ok and t51):
                    failures += 1
                _emit({
                    "schema": 1, "n": args.n, "p": args.p, "r": args.r,
                    "lambda_dlog": lam_dlog, "k": k, "modulus": str(qk),
                    "X": str(x), "Y": str(y),
                    "residue_diff": str(diff),
                    "verdict": "pass" if ok else "fail",
                    "x_torus_form": "pass" if t51 else "fail",
                    "precision": prec,
                }, out)
        _emit({"schema": 1, "summary": True, "rows": rows,
               "failures": failures}, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK if failures == 0 else EXIT_CONGRUENCE


def _zeta_bundle(inst, caps, tier: str, max_k=None):
    """Recover mirror (and pencil, when affordable) zeta data plus checks."""
    n = inst.n
    q = inst.field.pp.q
    probe = smoothness_probe(inst, k_max=2, caps=caps)
    singular = probe.status == "singular"
    bundle = {"probe": probe, "singular": singular}
    if singular:
        # degenerate fibers: no functional-equation completion, allow a
        # degree drop in the numerator; the pencil side is not recovered
        zy = recover_mirror_zeta(inst, caps=caps, use_fe=False, k_budget=n)
        bundle["Y"] = zy
        bundle["X"] = None
        return bundle
    zy = recover_mirror_zeta(inst, caps=caps)
    bundle["Y"] = zy
    deg_p = expected_degree_P(n)
    feasible = n == 2 or (tier == "extended")
    if feasible:
        zx = recover_pencil_zeta(inst, caps=caps, k_budget=max_k)
        bundle["X"] = zx
        quotient_R = r_poly(zx.numerator, zy.numerator, q, n)
        bundle["R"] = quotient_R
        bundle["purity_X"] = weight_purity_check(zx.numerator, q, n - 1)
    else:
        bundle["X"] = None
    bundle["purity_Y"] = weight_purity_check(zy.numerator, q, n - 1)
    bundle["deg_P_expected"] = deg_p
    return bundle


def cmd_zeta(args) -> int:
    caps = _caps_for(args)
    field = build_field(args.p, args.r, _seed_of(args), cap=caps.field_table_max_q)
    out = _open_out(args, "zeta.jsonl")
    code = EXIT_OK
    try:
        for lam in _parse_lambdas(args.lam_spec, field):
            inst = DworkInstance(n=args.n, field=field, lam=lam)
            try:
                bundle = _zeta_bundle(inst, caps, args.tier, args.max_k)
            except (InsufficientData, NoConsistentSign, NonIntegralCoefficient,
                    NotDivisible, SubstitutionNotIntegral) as exc:
                _emit({"schema": 1, "n": args.n, "p": args.p, "r": args.r,
                       "lambda": args.lam_spec, "error": str(exc)}, out)
                code = EXIT_RECOVERY
                continue
            row = {"schema": 1, "smoothness": bundle["probe"].status}
            row["Y"] = bundle["Y"].to_json_dict()
            if bundle["X"] is not None:
                row["X"] = bundle["X"].to_json_dict()
                row["R_coeffs"] = [str(c) for c in bundle["R"].coeffs]
                row["purity_X_dev"] = f"{bundle['purity_X'].max_deviation:.3e}"
            if "purity_Y" in bundle:
                row["purity_Y_dev"] = f"{bundle['purity_Y'].max_deviation:.3e}"
            _emit(row, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return code


def _np_json(np_):
    return [[x, f"{y.numerator}/{y.denominator}"] for x, y in np_.vertices]


def cmd_slope(args) -> int:
    caps = _caps_for(args)
    field = build_field(args.p, args.r, _seed_of(args), cap=caps.field_table_max_q)
    out = _open_out(args, "slopes.jsonl")
    code = EXIT_OK
    try:
        for lam in _parse_lambdas(args.lam_spec, field):
            inst = DworkInstance(n=args.n, field=field, lam=lam)
            bundle = _zeta_bundle(inst, caps, args.tier, args.max_k)
            row = {"schema": 1, "n": args.n, "p": args.p, "r": args.r,
                   "lambda_dlog": bundle["Y"].lam_dlog,
                   "smoothness": bundle["probe"].status}
            d = args.n - 1
            sy = slope_zeta(bundle["Y"])
            row["slope_zeta_Y"] = sy.to_json_dict()
            fe_y = slope_fe_check(sy, d)
            row["fe_Y"] = "pass" if fe_y else "fail"
            if not fe_y and not bundle["singular"]:
                code = EXIT_SLOPE_FE
            row["slope_zeta_Y_display"] = sy.render()
            np_y = newton_polygon(bundle["Y"].numerator, args.p, args.r)
            row["newton_vertices_Y"] = _np_json(np_y)
            mirror_row = [(j, 1) for j in range(args.n)]
            if np_y.total_length == args.n:
                row["Y_ordinary"] = ordinarity_test(np_y, mirror_row)
                row["Y_newton_above_hodge"] = newton_above_hodge(np_y, mirror_row)
            if bundle["X"] is not None:
                sx = slope_zeta(bundle["X"])
                row["slope_zeta_X"] = sx.to_json_dict()
                row["slope_zeta_X_display"] = sx.render()
                fe_x = slope_fe_check(sx, d)
                row["fe_X"] = "pass" if fe_x else "fail"
                if not fe_x:
                    code = EXIT_SLOPE_FE
                mirror_cmp = sx == (sy ** ((-1) ** d))
                row["slope_mirror_symmetry"] = mirror_cmp
                np_x = newton_polygon(bundle["X"].numerator, args.p, args.r)
                row["newton_vertices_X"] = _np_json(np_x)
                prim = hodge_numbers_dwork(args.n).middle_row(primitive=True)
                row["X_ordinary"] = ordinarity_test(np_x, prim)
                row["X_newton_above_hodge"] = newton_above_hodge(np_x, prim)
            row["ordinary_closed_form_X"] = \
                ordinary_slope_zeta(hodge_numbers_dwork(args.n)).to_json_dict()
            _emit(row, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return code


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _sweep_instance(job: dict) -> dict:
    """One (n, p, r, lambda) cell of the sweep grid; pickle-friendly."""
    n, p, r = job["n"], job["p"], job["r"]
    seed, k_max = job["seed"], job["k_max"]
    caps = Caps(**job["caps"])
    field = build_field(p, r, seed, cap=caps.field_table_max_q)
    lam = job["lam"]
    inst = DworkInstance(n=n, field=field, lam=lam)
    lam_dlog = None if lam == 0 else field.dlog(lam)
    out = {"key": [n, p, r, lam], "counts": [], "congruence": [],
           "zeta": None, "slope": None, "ok": True, "error": None}
    try:
        probe = smoothness_probe(inst, k_max=2, caps=caps)
        out["smoothness"] = probe.status
        out["printed_delta_regular"] = probe.printed_delta_regular
        for k in range(1, k_max + 1):
            F_k, _ = inst.extension(k, cap=caps.field_table_max_q)
            qk = F_k.pp.q
            nf, _, ngstar, prec = charsum_qcounts(inst, k, caps=caps)
            x, y = count_X(nf, qk), count_Y(ngstar, n, qk)
            out["counts"].append({
                "schema": 1, "n": n, "p": p, "r": r, "k": k,
                "lambda_dlog": lam_dlog, "Nf": str(nf), "Ngstar": str(ngstar),
                "X": str(x), "Y": str(y), "method": "charsum",
                "precision": prec,
            })
            diff = (x - y) % qk
            out["congruence"].append({
                "schema": 1, "n": n, "p": p, "r": r, "k": k,
                "lambda_dlog": lam_dlog, "modulus": str(qk),
                "residue_diff": str(diff),
                "verdict": "pass" if diff == 0 else "fail",
            })
        if n <= job["zeta_n_max"] and probe.status != "singular":
            zy = recover_mirror_zeta(inst, caps=caps)
            zx = recover_pencil_zeta(inst, caps=caps) if n == 2 else None
            d = n - 1
            sy = slope_zeta(zy)
            np_y = newton_polygon(zy.numerator, p, r)
            mirror_row = [(j, 1) for j in range(n)]
            zrow = {"Y": zy.to_json_dict(),
                    "slope_zeta_Y": sy.to_json_dict(),
                    "fe_Y": slope_fe_check(sy, d),
                    "Y_ordinary": ordinarity_test(np_y, mirror_row),
                    "Y_newton_above_hodge": newton_above_hodge(np_y, mirror_row)}
            if zx is not None:
                sx = slope_zeta(zx)
                np_x = newton_polygon(zx.numerator, p, r)
                prim = hodge_numbers_dwork(n).middle_row(primitive=True)
                zrow.update({
                    "X": zx.to_json_dict(),
                    "R_coeffs": [str(c) for c in
                                 r_poly(zx.numerator, zy.numerator,
                                        field.pp.q, n).coeffs],
                    "slope_zeta_X": sx.to_json_dict(),
                    "fe_X": slope_fe_check(sx, d),
                    "slope_mirror_symmetry": sx == sy ** ((-1) ** d),
                    "X_ordinary": ordinarity_test(np_x, prim),
                    "X_newton_above_hodge": newton_above_hodge(np_x, prim),
                })
            out["zeta"] = zrow
    except DworkZetaError as exc:
        out["ok"] = False
        out["error"] = f"{type(exc).__name__}: {exc}"
    return out


def cmd_sweep(args) -> int:
    if args.config:
        cfg = SweepConfig.from_json(args.config)
    else:
        cfg = SweepConfig()
    if args.out:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads:
        cfg.threads = args.threads
    if args.tier:
        cfg.tier = args.tier
    caps = cfg.caps.with_tier(cfg.tier)

    jobs = []
    for n in cfg.n_list:
        for p in cfg.prime_list:
            for r in cfg.r_list:
                field = build_field(p, r, cfg.seed, cap=caps.field_table_max_q)
                if cfg.lambda_mode == "all":
                    lams = list(range(field.pp.q))
                elif cfg.lambda_mode == "subfield":
                    lams = list(range(p))
                elif cfg.lambda_mode == "zero":
                    lams = [0]
                elif cfg.lambda_mode == "list":
                    lams = [field.gen_pow(e) if e >= 0 else 0
                            for e in cfg.lambda_list]
                else:
                    sys.stderr.write(f"unknown lambda_mode {cfg.lambda_mode!r}\n")
                    return EXIT_CONFIG
                for lam in lams:
                    jobs.append({"n": n, "p": p, "r": r, "lam": lam,
                                 "seed": cfg.seed, "k_max": cfg.k_max,
                                 "zeta_n_max": cfg.zeta_n_max,
                                 "caps": caps.__dict__.copy()})

    # guard the grid against the caps up front
    for job in jobs:
        q_top = job["p"] ** (job["r"] * job["k_max"])
        if q_top > caps.field_table_max_q:
            sys.stderr.write(
                f"instance {job['n']},{job['p']},{job['r']} exceeds caps\n")
            return EXIT_CAP

    t0 = time.time()
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(_sweep_instance, jobs))
    else:
        results = [_sweep_instance(job) for job in jobs]
    elapsed = time.time() - t0

    outdir = Path(cfg.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    counts_f = open(outdir / "counts.jsonl", "w", encoding="utf-8")
    cong_f = open(outdir / "congruence.jsonl", "w", encoding="utf-8")
    zeta_f = open(outdir / "zeta.jsonl", "w", encoding="utf-8")
    failures = []
    cong_failures = 0
    ordinary_stats: dict = {}
    slope_sets: dict = {}
    for res in results:
        n, p, r, lam = res["key"]
        if not res["ok"]:
            failures.append({"key": res["key"], "error": res["error"]})
            continue
        for row in res["counts"]:
            _emit(row, counts_f)
        for row in res["congruence"]:
            if row["verdict"] != "pass":
                cong_failures += 1
            _emit(row, cong_f)
        if res["zeta"] is not None:
            _emit({"key": res["key"], **res["zeta"]}, zeta_f)
            fam = f"n={n},p={p},r={r}"
            stats = ordinary_stats.setdefault(fam, [0, 0])
            stats[1] += 1
            if res["zeta"]["Y_ordinary"]:
                stats[0] += 1
            sset = slope_sets.setdefault(fam, set())
            sset.add(json.dumps(res["zeta"]["slope_zeta_Y"], sort_keys=True))
    counts_f.close()
    cong_f.close()
    zeta_f.close()

    summary = {
        "schema": 1,
        "instances": len(jobs),
        "completed": len(jobs) - len(failures),
        "congruence_failures": cong_failures,
        "ordinarity_fractions": {
            fam: {"ordinary": s[0], "tested": s[1]}
            for fam, s in sorted(ordinary_stats.items())},
        "observed_slope_zeta_sets": {
            fam: sorted(ss) for fam, ss in sorted(slope_sets.items())},
    }
    cfg_echo = cfg.to_dict()
    # execution-only parameters do not affect results and would break
    # byte-identical reproducibility of the manifest
    cfg_echo.pop("out_dir", None)
    cfg_echo.pop("threads", None)
    manifest = {
        "schema": 1,
        "version": __version__,
        "config": cfg_echo,
        "failures": failures,
        "summary": summary,
    }
    with open(outdir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, sort_keys=True, indent=1)
        fh.write("\n")
    with open(outdir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
        fh.write("\n")
    with open(outdir / "timings.json", "w", encoding="utf-8") as fh:
        json.dump({"elapsed_seconds": elapsed, "finished_at": time.time(),
                   "threads": cfg.threads, "out_dir": str(outdir)}, fh)
        fh.write("\n")
    if failures:
        return EXIT_CAP if all("TooLarge" in f["error"] for f in failures) \
            else EXIT_ORACLE
    if cong_failures:
        return EXIT_CONGRUENCE
    return EXIT_OK


def cmd_gauss(args) -> int:
    caps = _caps_for(args)
    field = build_field(args.p, args.r, _seed_of(args), cap=caps.field_table_max_q)
    tower = build_tower(field, args.N)
    out = _open_out(args, "gauss.jsonl")
    try:
        _emit({"schema": 1, "p": args.p, "r": args.r, "N": args.N,
               "seed": _seed_of(args),
               "modulus": [int(c) for c in field.modulus]}, out)
        table = tower.gauss_table()
        for k, g in enumerate(table):
            coords = [str(c) for row in g.rows for c in row]  # pi-major
            _emit({"k": k, "coords": coords}, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _seed_of(args) -> int:
    return args.seed if args.seed is not None else 0


def _caps_for(args) -> Caps:
    caps = DEFAULT_CAPS
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        if "caps" in raw:
            caps = Caps(**raw["caps"])
    return caps.with_tier(getattr(args, "tier", "ci") or "ci")


def _add_common(sp, with_lambda=True, with_k=False):
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--r", type=int, default=1)
    if with_lambda:
        sp.add_argument("--lambda", dest="lam_spec", default="all",
                        help="all | zero | subfield | <dlog exponent>")
    if with_k:
        sp.add_argument("--k", type=int, default=1,
                        help="count over GF(q^j) for j = 1..k")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON config file")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--tier", choices=["ci", "extended"], default="ci")

    ap = argparse.ArgumentParser(
        prog="dworkzeta",
        description="Point counts, congruences, zeta functions and slope "
                    "invariants for the Dwork pencil and its toric mirror.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("count", help="point counts", parents=[common])
    _add_common(sp, with_k=True)
    sp.add_argument("--method", choices=["brute", "charsum", "both"],
                    default="both")
    sp.add_argument("--nfstar", action="store_true",
                    help="also count f = 0 on the torus")
    sp.set_defaults(func=cmd_count)

    sp = sub.add_parser("congruence", help="mirror congruence checks",
                        parents=[common])
    _add_common(sp, with_k=True)
    sp.set_defaults(func=cmd_congruence)

    sp = sub.add_parser("zeta", help="numerator recovery and R_n",
                        parents=[common])
    _add_common(sp)
    sp.add_argument("--max-k", type=int, default=None,
                    help="override the extension-degree budget")
    sp.set_defaults(func=cmd_zeta)

    sp = sub.add_parser("slope", help="slope zeta functions and polygons",
                        parents=[common])
    _add_common(sp)
    sp.add_argument("--max-k", type=int, default=None)
    sp.set_defaults(func=cmd_slope)

    sp = sub.add_parser("sweep", help="run the full grid from a config",
                        parents=[common])
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("gauss", help="dump a Gauss-sum table",
                        parents=[common])
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("--N", type=int, required=True)
    sp.set_defaults(func=cmd_gauss)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, which matches our config exit code
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (EnumerationTooLarge, FieldTooLarge) as exc:
        sys.stderr.write(f"cap exceeded: {exc}\n")
        return EXIT_CAP
    except (NonIntegralResult, PrecisionInsufficient) as exc:
        sys.stderr.write(f"oracle mismatch: {exc}\n")
        return EXIT_ORACLE
    except (InsufficientData, NoConsistentSign, NonIntegralCoefficient,
            NotDivisible, SubstitutionNotIntegral) as exc:
        sys.stderr.write(f"recovery failure: {exc}\n")
        return EXIT_RECOVERY
    except DworkZetaError as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_RECOVERY
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
