"""Command-line entry points: batch workflows over file artifacts.

Every command writes a manifest JSON next to its outputs recording the
parameters, seed, input hashes, and produced files, so runs are reproducible.
Exit codes: 0 success, 1 usage, 2 data error, 3 decode failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import tempfile
from fractions import Fraction

import numpy as np

from . import __version__
from . import analysis, bch, fcs, pipeline, plots, rodata, transforms

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DECODE_FAILURE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _atomic_write(path, writer) -> None:
    """Write via a temp file + rename so failures leave no partial output."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-pufkit-")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            writer(f)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_base, command: str, params: dict, inputs: list, outputs: list, seed=None):
    manifest = {
        "command": command,
        "parameters": params,
        "seed": seed,
        "input_hashes": {str(p): _sha256(p) for p in inputs},
        "tool_version": __version__,
        "outputs": [str(o) for o in outputs],
    }
    path = f"{out_base}.manifest.json"
    _atomic_write(path, lambda f: json.dump(manifest, f, indent=2))
    return path


def _parse_code(spec: str) -> bch.BchCode:
    try:
        m_str, t_str = spec.split(",")
        return bch.build_code(int(m_str), int(t_str))
    except ValueError as e:
        raise SystemExit(EXIT_USAGE) from e


def cmd_search_transforms(args) -> int:
    catalog = transforms.build_catalog()
    _atomic_write(args.out, lambda f: _dump_catalog(catalog, f))
    print(f"catalog members: {len(catalog)}")
    _write_manifest(args.out, "search-transforms", {"out": args.out}, [], [args.out])
    return 0


def _dump_catalog(catalog, f):
    records = []
    for i, (m, prov) in enumerate(zip(catalog.members, catalog.provenance)):
        rows = ["".join("+" if v > 0 else "-" for v in row) for row in m.entries]
        records.append(
            {"id": i, "seed_index": prov[0], "construction_pair": [prov[1], prov[2]], "rows": rows}
        )
    json.dump(records, f, separators=(",", ":"))
    f.write("\n")


def cmd_gen_data(args) -> int:
    model = rodata.SyntheticModel(
        variation_std=args.variation_std,
        correlation=args.correlation,
        noise_std=args.noise_std,
        mean=args.mean,
    )
    dataset = rodata.generate_synthetic(model, args.devices, args.measurements, args.seed)
    rodata.save_csv(dataset, args.out)
    print(f"wrote {args.devices} devices x {args.measurements} measurements")
    _write_manifest(
        args.out,
        "gen-data",
        {k: getattr(args, k) for k in ("devices", "measurements", "variation_std", "correlation", "noise_std", "mean")},
        [],
        [args.out],
        seed=args.seed,
    )
    return 0


def _load_member(catalog_path, transform_id):
    catalog = transforms.load_catalog(catalog_path)
    if not 0 <= transform_id < len(catalog):
        raise ValueError(f"transform id {transform_id} outside catalog of {len(catalog)}")
    return catalog, catalog.members[transform_id]


def cmd_eval(args) -> int:
    dataset = rodata.load_csv(args.dataset)
    _, member = _load_member(args.catalog, args.transform_id)
    q = pipeline.quantizer_boundaries(args.bits_per_coeff)
    eq = pipeline.fit_equalization(dataset, member)
    q1 = pipeline.quantizer_boundaries(1)
    errors = rodata.estimate_error_profile(dataset, member, eq, q1)
    bits = [pipeline.extract_bits(dataset.arrays[d, 0], member, eq, q) for d in range(dataset.devices)]
    uniq = rodata.uniqueness(bits) if dataset.devices >= 2 else (float("nan"), float("nan"))
    smoke = rodata.randomness_smoke(bits[0])

    profile_path = f"{args.out}.profile.json"
    errors_path = f"{args.out}.errors.csv"
    fig_path = f"{args.out}.errors.png"
    report_path = f"{args.out}.report.json"
    pipeline.save_profile(eq, profile_path)
    _atomic_write(errors_path, lambda f: _dump_errors(errors.p, f))
    plots.render_error_profile(errors.p, fig_path, title=f"transform {args.transform_id}")
    report = {
        "transform_id": args.transform_id,
        "bits_per_coeff": args.bits_per_coeff,
        "p_max": errors.p_max,
        "p_mean": errors.p_mean,
        "uniqueness_mean_hd": uniq[0],
        "uniqueness_var_hd": uniq[1],
        "randomness_smoke": smoke,
    }
    _atomic_write(report_path, lambda f: json.dump(report, f, indent=2))
    print(f"p_max={errors.p_max:.6f} p_mean={errors.p_mean:.6f} mean_hd={uniq[0]:.4f}")
    _write_manifest(
        args.out,
        "eval",
        {"dataset": args.dataset, "catalog": args.catalog, "transform_id": args.transform_id, "bits_per_coeff": args.bits_per_coeff},
        [args.dataset, args.catalog],
        [profile_path, errors_path, fig_path, report_path],
    )
    return 0


def _dump_errors(p, f):
    w = csv.writer(f)
    w.writerow(["index", "p_i"])
    for i, v in enumerate(p):
        w.writerow([i + 1, repr(float(v))])


def cmd_select(args) -> int:
    dataset = rodata.load_csv(args.dataset)
    catalog = transforms.load_catalog(args.catalog)
    q = pipeline.quantizer_boundaries(1)
    subset = None
    mode = "full"
    if args.subset is not None:
        if args.seed is None:
            print("error: --subset requires --seed", file=sys.stderr)
            return EXIT_USAGE
        rng = np.random.default_rng(args.seed)
        subset = sorted(rng.choice(len(catalog), size=args.subset, replace=False).tolist())
        mode = f"subset:{args.subset}"
    member_id, profile = analysis.select_transform(catalog, dataset, q, subset=subset)
    result = {
        "transform_id": member_id,
        "p_max": profile.p_max,
        "p_mean": profile.p_mean,
        "mode": mode,
    }
    _atomic_write(args.out, lambda f: json.dump(result, f, indent=2))
    errors_path = f"{args.out}.errors.csv"
    _atomic_write(errors_path, lambda f: _dump_errors(profile.p, f))
    print(f"selected transform {member_id}: p_max={profile.p_max:.6f} ({mode})")
    _write_manifest(
        args.out,
        "select",
        {"dataset": args.dataset, "catalog": args.catalog, "subset": args.subset},
        [args.dataset, args.catalog],
        [args.out, errors_path],
        seed=args.seed,
    )
    return 0


def cmd_enroll(args) -> int:
    dataset = rodata.load_csv(args.dataset)
    _, member = _load_member(args.catalog, args.transform_id)
    eq = pipeline.load_profile(args.profile)
    q = pipeline.quantizer_boundaries(1)
    code = _parse_code(args.code)
    x = pipeline.extract_bits(dataset.arrays[args.device, 0], member, eq, q)
    rng = np.random.default_rng(args.key_seed)
    key = fcs.SecretKey(rng.integers(0, 2, code.k, dtype=np.uint8))
    helper = fcs.enroll(code, key, x, transform_id=args.transform_id, profile_ref=args.profile)
    fcs.save_helper(helper, args.out)
    print(f"key: {key.hex()}")
    _write_manifest(
        args.out,
        "enroll",
        {"dataset": args.dataset, "catalog": args.catalog, "transform_id": args.transform_id, "device": args.device, "code": args.code, "profile": args.profile},
        [args.dataset, args.catalog, args.profile],
        [args.out],
        seed=args.key_seed,
    )
    return 0


def cmd_reconstruct(args) -> int:
    dataset = rodata.load_csv(args.dataset)
    helper = fcs.load_helper(args.helper)
    _, member = _load_member(args.catalog, helper.transform_id)
    eq = pipeline.load_profile(args.profile if args.profile else helper.profile_ref)
    q = pipeline.quantizer_boundaries(1)
    code = bch.code_from_descriptor(helper.code_descriptor)
    y = pipeline.extract_bits(dataset.arrays[args.device, args.measurement - 1], member, eq, q)
    key = fcs.reconstruct(code, y, helper)
    if key is None:
        print("decode failure", file=sys.stderr)
        return EXIT_DECODE_FAILURE
    print(f"key: {key.hex()}")
    return 0


def cmd_analyze_code(args) -> int:
    result = {"n": args.n, "target": args.target}
    if args.errors:
        p = _load_error_csv(args.errors)
        result["p_max"] = float(p.max())
        result["p_mean"] = float(p.mean())
    elif args.p_max is not None:
        result["p_max"] = args.p_max
    else:
        print("error: provide --p-max or --errors", file=sys.stderr)
        return EXIT_USAGE
    d = analysis.required_min_distance(args.n, result["p_max"], args.target)
    result["required_d_min"] = d
    result["gv_dimension"] = analysis.gv_dimension(args.n, d)
    if args.t is not None:
        if args.errors:
            result["block_error_dp"] = analysis.block_error_probability_dp(p, args.t)
            result["block_error_dftcf"] = analysis.block_error_probability_dftcf(p, args.t)
        else:
            pv = np.full(args.n, result["p_max"])
            result["block_error_dp"] = analysis.block_error_probability_dp(pv, args.t)
    if args.out:
        _atomic_write(args.out, lambda f: json.dump(result, f, indent=2))
        _write_manifest(
            args.out,
            "analyze-code",
            {"n": args.n, "p_max": args.p_max, "t": args.t, "target": args.target, "errors": args.errors},
            [args.errors] if args.errors else [],
            [args.out],
        )
    print(f"required d_min: {d}  gv dimension: {result['gv_dimension']}")
    if "block_error_dp" in result:
        print(f"block error (dp): {result['block_error_dp']:.4e}")
    return 0


def _load_error_csv(path) -> np.ndarray:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        vals = [(int(r["index"]), float(r["p_i"])) for r in reader]
    vals.sort()
    return np.array([v for _, v in vals])


def cmd_rate_region(args) -> int:
    fcs_b = analysis.fcs_region(args.p, grid=args.grid)
    cs_b = analysis.cs_region_mgl(args.p, grid=args.grid)
    code = bch.build_code(8, 18)
    code_point = analysis.RatePoint(
        float(Fraction(code.k, code.n)), float(Fraction(code.n - code.k, code.n))
    )
    fl = analysis.finite_length_point(args.n, args.p, args.eps)

    csv_path = f"{args.out}.csv"
    fig_path = f"{args.out}.png"
    _atomic_write(csv_path, lambda f: _dump_region(f, fcs_b, cs_b, code_point, fl))
    plots.render_rate_regions(fcs_b, cs_b, code_point, fl, fig_path)
    rs_max = max(q.secret_key_rate for q in fcs_b.points)
    print(f"max secret-key rate: {rs_max:.4f}")
    print(f"finite-length point: ({fl.secret_key_rate:.4f}, {fl.privacy_leakage_rate:.4f})")
    print(
        f"BCH operating point: ({code.k}/{code.n}, {code.n - code.k}/{code.n}) "
        f"= ({code_point.secret_key_rate:.4f}, {code_point.privacy_leakage_rate:.4f})"
    )
    _write_manifest(
        args.out,
        "rate-region",
        {"p": args.p, "eps": args.eps, "n": args.n, "grid": args.grid},
        [],
        [csv_path, fig_path],
    )
    return 0


def _dump_region(f, fcs_b, cs_b, code_point, fl):
    w = csv.writer(f)
    w.writerow(["kind", "R_s", "R_ell"])
    for b in (fcs_b, cs_b):
        for q in b.points:
            w.writerow([b.kind, repr(q.secret_key_rate), repr(q.privacy_leakage_rate)])
    w.writerow(["BCH", repr(code_point.secret_key_rate), repr(code_point.privacy_leakage_rate)])
    w.writerow(["finite-length", repr(fl.secret_key_rate), repr(fl.privacy_leakage_rate)])


def build_parser() -> _Parser:
    parser = _Parser(prog="pufkit", description="RO-PUF key generation toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search-transforms", help="build the 16x16 transform catalog")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_search_transforms)

    p = sub.add_parser("gen-data", help="generate a seeded synthetic RO dataset")
    p.add_argument("--devices", type=int, required=True)
    p.add_argument("--measurements", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--variation-std", type=float, default=1.0)
    p.add_argument("--correlation", type=float, default=0.6)
    p.add_argument("--noise-std", type=float, default=0.05)
    p.add_argument("--mean", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("eval", help="evaluate one transform on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--transform-id", type=int, required=True)
    p.add_argument("--bits-per-coeff", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("select", help="min-max transform selection over the catalog")
    p.add_argument("--dataset", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--subset", type=int, default=None, help="evaluate a random subset of this size")
    p.add_argument("--seed", type=int, default=None, help="subset sampling seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("enroll", help="bind a fresh key to a device measurement")
    p.add_argument("--dataset", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--transform-id", type=int, required=True)
    p.add_argument("--device", type=int, default=0)
    p.add_argument("--profile", required=True, help="equalization profile JSON")
    p.add_argument("--code", default="8,18", help="BCH parameters m,t")
    p.add_argument("--key-seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("reconstruct", help="recover the key from a noisy measurement")
    p.add_argument("--dataset", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--helper", required=True)
    p.add_argument("--device", type=int, default=0)
    p.add_argument("--measurement", type=int, default=2, help="1-based measurement index")
    p.add_argument("--profile", default=None, help="override the helper's profile reference")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("analyze-code", help="required distance, GV bound, block error")
    p.add_argument("--n", type=int, default=255)
    p.add_argument("--p-max", type=float, default=None)
    p.add_argument("--errors", default=None, help="error-profile CSV (index, p_i)")
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--target", type=float, default=1e-9)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_analyze_code)

    p = sub.add_parser("rate-region", help="rate-region boundaries, CSV + figure")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--eps", type=float, default=1e-9)
    p.add_argument("--n", type=int, default=255)
    p.add_argument("--grid", type=int, default=1024)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rate_region)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if e.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, IndexError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
