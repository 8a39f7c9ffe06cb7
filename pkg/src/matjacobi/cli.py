"""Command-line interface: reproducible experiments with JSON/CSV/PNG artifacts.

Subcommands: ``sample`` (draw an ensemble spectral measure), ``decompose``
(measure -> recursion chain -> canonical moments), ``identities`` (exact
identity checks), ``sumrule`` (both sides of the sum rule on a structured
measure or a closed-form family) and ``mc-test`` (Monte Carlo suites).

Exit codes: 0 all checks pass, 1 a check failed (reports are still
written), 2 usage error, 3 numeric degeneracy.  Every JSON artifact embeds
its run manifest; CSV and PNG siblings reference it by file name.  Reruns
with identical flags are byte-identical up to the manifest timestamp.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__, plots, serialize
from .canonical import canonical_from_recursion, canonical_to_recursion
from .chains import gram_schmidt
from .ensembles import EnsembleSpec, spectral_sample
from .exceptions import NumericDegeneracy
from .identities import (check_det_identities, check_phi_det_product,
                         check_schur_recursion, check_ym,
                         verblunsky_from_canonical)
from .kmk import kmk_params
from .measures import MatrixMeasure
from .mcverify import (McTestConfig, run_gue_coefficient_test,
                       run_jacobi_canonical_test, run_kmk_limit_test)
from .sumrule import (canonical_source_from_file, evaluate_sum_rule, gem_check,
                      kmk_mismatch_family, measure_side, structured_from_dict,
                      uniform_vs_arcsine_family)

OUTDIR_ENV = "MATJACOBI_OUTDIR"


def _default_out(name):
    base = os.environ.get(OUTDIR_ENV, ".")
    os.makedirs(base, exist_ok=True)
    return os.path.join(base, name)


def _manifest(args, seed, outputs, started):
    # the argv record is rebuilt from the parsed namespace so programmatic
    # and shell invocations produce the same (deterministic) manifest
    argv = [f"{k}={v}" for k, v in sorted(vars(args).items()) if k != "func"]
    return {
        "subcommand": args.command,
        "argv": argv,
        "seed": seed,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "wall_clock_s": round(time.perf_counter() - started, 6),
        "outputs": outputs,
    }


def _write_report(doc, path, manifest):
    doc = dict(doc)
    doc["manifest"] = manifest
    serialize.dump_json(doc, path)


def _sibling(path, suffix):
    root, _ = os.path.splitext(path)
    return root + suffix


def _write_csv(path, header, rows, manifest_name):
    with open(path, "w", newline="") as fh:
        fh.write(f"# manifest: {manifest_name}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _print_table(header, rows):
    widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
              for i, h in enumerate(header)]
    line = "  ".join(str(h).ljust(w) for h, w in zip(header, widths))
    print(line)
    print("-" * len(line))
    for r in rows:
        print("  ".join(str(c).ljust(w) for c, w in zip(r, widths)))


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.6g}"
    return x


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return value


def _kappa_pair(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated values")
    return float(parts[0]), float(parts[1])


# -- sample -----------------------------------------------------------------


def cmd_sample(args):
    started = time.perf_counter()
    spec = EnsembleSpec(kind=args.kind, size=args.N, dim=args.p,
                        a=args.a, b=args.b, seed=args.seed)
    sample = spectral_sample(spec, method=args.method)
    out = args.out or _default_out("measure.json")
    csv_path = _sibling(out, ".atoms.csv")
    outputs = [out, csv_path]
    png_path = _sibling(out, ".png")
    if not args.no_plot:
        outputs.append(png_path)
    manifest = _manifest(args, args.seed, outputs, started)

    doc = sample.measure.to_dict()
    doc["ensemble"] = {"kind": spec.kind, "N": spec.size, "p": spec.dim,
                       "a": spec.a, "b": spec.b, "seed": spec.seed,
                       "method": args.method}
    _write_report(doc, out, manifest)

    rows = []
    for x, w in zip(sample.measure.atom_locations, sample.measure.atom_weights):
        rows.append([repr(float(x)), repr(float(np.trace(w).real))])
    _write_csv(csv_path, ["x", "trace_weight"], rows, os.path.basename(out))
    if not args.no_plot:
        plots.plot_measure(sample.measure, png_path)
    print(f"wrote {out} ({len(sample.measure.atom_locations)} atoms)")
    return 0


# -- decompose ---------------------------------------------------------------


def cmd_decompose(args):
    started = time.perf_counter()
    measure = MatrixMeasure.load(args.measure)
    depth = args.depth or len(measure.atom_locations) // measure.dim
    chain = gram_schmidt(measure, depth)
    canon = canonical_from_recursion(chain)

    rebuilt = canonical_to_recursion(canon)
    residual = max(float(np.abs(chain.u - rebuilt.u).max()),
                   float(np.abs(chain.v - rebuilt.v).max()))

    out = args.out or _default_out("decompose.json")
    canonical_path = _sibling(out, ".canonical.json")
    recursion_path = _sibling(out, ".recursion.json")
    csv_path = _sibling(out, ".csv")
    outputs = [out, canonical_path, recursion_path, csv_path]
    png_path = _sibling(out, ".png")
    if not args.no_plot:
        outputs.append(png_path)
    manifest = _manifest(args, None, outputs, started)
    manifest["round_trip_residual"] = residual

    serialize.dump_json({**canon.to_dict(), "manifest": manifest}, canonical_path)
    serialize.dump_json({**chain.to_dict(), "manifest": manifest}, recursion_path)
    _write_report({"depth": depth, "round_trip_residual": residual,
                   "canonical": os.path.basename(canonical_path),
                   "recursion": os.path.basename(recursion_path)}, out, manifest)

    rows = []
    for k in range(canon.length):
        lam = np.linalg.eigvalsh(canon.u_herm[k])
        rows.append([k + 1] + [repr(float(x)) for x in lam])
    _write_csv(csv_path, ["k"] + [f"eig_{i + 1}" for i in range(canon.dim)],
               rows, os.path.basename(out))
    if not args.no_plot:
        plots.plot_canonical(canon, png_path)
    print(f"decomposed to depth {depth}; round-trip residual {residual:.3e}")
    return 0


# -- identities ---------------------------------------------------------------


def cmd_identities(args):
    started = time.perf_counter()
    measure = MatrixMeasure.load(args.measure)
    reports = list(check_det_identities(measure, args.depth, tol=args.tol))
    chain = gram_schmidt(measure, args.depth)
    canon = canonical_from_recursion(chain)
    reports += check_schur_recursion(chain, canon, tol=args.schur_tol)
    if canon.length >= 3:
        seq = verblunsky_from_canonical(canon)
        n_phi = (canon.length - 1) // 2
        reports.append(check_phi_det_product(seq, n_phi, tol=args.tol))
    n_atoms = len(measure.atom_locations)
    if n_atoms >= (args.depth + 1) * measure.dim:
        reports.append(check_ym(measure, args.depth, tol=args.ym_tol))

    out = args.out or _default_out("identities.json")
    csv_path = _sibling(out, ".csv")
    outputs = [out, csv_path]
    png_path = _sibling(out, ".png")
    if not args.no_plot:
        outputs.append(png_path)
    manifest = _manifest(args, None, outputs, started)
    _write_report({"reports": [{
        "name": r.name, "lhs_re": r.lhs.real if isinstance(r.lhs, complex) else r.lhs,
        "rhs_re": r.rhs.real if isinstance(r.rhs, complex) else r.rhs,
        "residual": r.residual, "passed": r.passed} for r in reports]},
        out, manifest)
    rows = [[r.name, _fmt(r.residual), r.passed] for r in reports]
    _write_csv(csv_path, ["name", "residual", "passed"], rows, os.path.basename(out))
    if not args.no_plot:
        plots.plot_identities(reports, png_path)
    _print_table(["identity", "residual", "pass"], rows)
    return 0 if all(r.passed for r in reports) else 1


# -- sumrule ------------------------------------------------------------------


def cmd_sumrule(args):
    started = time.perf_counter()
    if args.family:
        if args.family == "kmk-mismatch":
            kappa = args.kappa or (0.0, 0.0)
            kappa_prime = args.kappa_prime or kappa
            sm, source = kmk_mismatch_family(kappa, kappa_prime, dim=args.p,
                                             n_nodes=args.nodes)
        else:
            sm, source = uniform_vs_arcsine_family(dim=args.p, n_nodes=args.nodes)
    else:
        if not args.measure:
            raise SystemExit(2)
        params = kmk_params(args.kappa1, args.kappa2)
        doc = serialize.load_json(args.measure)
        sm = structured_from_dict(doc, params=params, n_nodes=args.nodes)
        source = canonical_source_from_file(args.chain) if args.chain else None

    if source is not None:
        report = evaluate_sum_rule(sm, source, args.depth)
        gem = gem_check(source, sm.params, args.depth, sm=sm)
        doc = report.to_dict()
        residual = report.residual
        checked = True
    else:
        mside = measure_side(sm)
        gem = None
        doc = {"measure_side": {"kl": mside.kl, "outliers_plus": mside.outliers_plus,
                                "outliers_minus": mside.outliers_minus,
                                "total": mside.total},
               "coefficient_side": None, "residual": None}
        residual = 0.0
        checked = False
    if gem is not None:
        doc["gem"] = {"ell2_sum": gem.ell2_sum, "plateaued": gem.plateaued,
                      "conditions": gem.conditions}

    out = args.out or _default_out("sumrule.json")
    csv_path = _sibling(out, ".csv")
    outputs = [out, csv_path]
    png_path = _sibling(out, ".png")
    if not args.no_plot and checked:
        outputs.append(png_path)
    manifest = _manifest(args, None, outputs, started)
    _write_report(doc, out, manifest)
    if checked:
        rows = [[i + 1, repr(float(s))] for i, s in
                enumerate(report.coefficient_side.partial_sums)]
        _write_csv(csv_path, ["pair", "partial_sum"], rows, os.path.basename(out))
        if not args.no_plot:
            plots.plot_sumrule(report, png_path)
        print(f"measure side  = {doc['measure_side']['total']}")
        print(f"coefficient side = {doc['coefficient_side']['total']}")
        print(f"residual = {residual}")
        return 0 if residual < args.tol else 1
    _write_csv(csv_path, ["quantity", "value"],
               [[k, _fmt(v)] for k, v in doc["measure_side"].items()],
               os.path.basename(out))
    print(f"measure side = {doc['measure_side']['total']} (no coefficient data supplied)")
    return 0


# -- mc-test ------------------------------------------------------------------


def cmd_mc_test(args):
    started = time.perf_counter()
    if args.suite == "jacobi-canonical":
        cfg = McTestConfig(dim=args.p, depth=args.n, a=args.a, b=args.b,
                           samples=args.samples, seed=args.seed,
                           tolerance_sigmas=args.sigmas, threads=args.threads)
        report = run_jacobi_canonical_test(cfg)
    elif args.suite == "gue-coefficients":
        report = run_gue_coefficient_test(args.p, args.n, args.samples, args.seed,
                                          tolerance_sigmas=args.sigmas,
                                          threads=args.threads)
    else:
        n_list = [int(x) for x in args.n_list.split(",")]
        report = run_kmk_limit_test(args.p, n_list, args.kappa1, args.kappa2,
                                    args.samples, args.seed,
                                    tolerance_sigmas=args.sigmas)

    out = args.out or _default_out("mc_report.json")
    csv_path = _sibling(out, ".csv")
    outputs = [out, csv_path]
    png_path = _sibling(out, ".png")
    if not args.no_plot:
        outputs.append(png_path)
    manifest = _manifest(args, args.seed, outputs, started)
    _write_report(report.to_dict(), out, manifest)
    rows = [[c.label, c.statistic, _fmt(c.mean_pipeline), _fmt(c.mean_reference),
             _fmt(c.stderr), _fmt(c.z), c.passed] for c in report.cells]
    _write_csv(csv_path, ["label", "statistic", "mean_pipeline", "mean_reference",
                          "stderr", "z", "passed"], rows, os.path.basename(out))
    if not args.no_plot:
        plots.plot_mc(report, png_path)
    _print_table(["cell", "stat", "pipeline", "reference", "stderr", "z", "pass"], rows)
    if report.correlation is not None:
        print(f"max |corr| = {report.max_correlation:.4f} "
              f"(bound {report.correlation_bound:.4f})")
    print(f"degeneracy events: {report.degeneracy_events}")
    print("PASS" if report.passed else "FAIL")
    return 0 if report.passed else 1


# -- parser -------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="matjacobi",
        description="Matrix measures on [0,1]: ensembles, canonical moments, "
                    "identities and sum-rule verification.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="draw an ensemble spectral measure")
    p_sample.add_argument("--kind", choices=("gue", "lue", "jue"), required=True)
    p_sample.add_argument("--N", type=int, required=True, help="matrix size")
    p_sample.add_argument("--p", type=int, default=1, help="spectral dimension")
    p_sample.add_argument("--a", type=_nonneg_int, default=0)
    p_sample.add_argument("--b", type=_nonneg_int, default=0)
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--method", choices=("full", "split"), default="full")
    p_sample.add_argument("--out")
    p_sample.add_argument("--no-plot", action="store_true")
    p_sample.set_defaults(func=cmd_sample)

    p_dec = sub.add_parser("decompose", help="measure -> chain -> canonical moments")
    p_dec.add_argument("--measure", required=True)
    p_dec.add_argument("--depth", type=int)
    p_dec.add_argument("--out")
    p_dec.add_argument("--no-plot", action="store_true")
    p_dec.set_defaults(func=cmd_decompose)

    p_id = sub.add_parser("identities", help="exact identity checks on a measure")
    p_id.add_argument("--measure", required=True)
    p_id.add_argument("--depth", type=int, required=True)
    p_id.add_argument("--tol", type=float, default=1e-8)
    p_id.add_argument("--schur-tol", type=float, default=1e-9)
    p_id.add_argument("--ym-tol", type=float, default=1e-7)
    p_id.add_argument("--out")
    p_id.add_argument("--no-plot", action="store_true")
    p_id.set_defaults(func=cmd_identities)

    p_sr = sub.add_parser("sumrule", help="evaluate both sides of the sum rule")
    p_sr.add_argument("--measure", help="structured measure JSON")
    p_sr.add_argument("--chain", help="canonical chain JSON for the coefficient side")
    p_sr.add_argument("--family", choices=("kmk-mismatch", "uniform-arcsine"))
    p_sr.add_argument("--kappa", type=_kappa_pair, help="reference kappa pair k1,k2")
    p_sr.add_argument("--kappa-prime", type=_kappa_pair, help="measure kappa pair")
    p_sr.add_argument("--kappa1", type=float, default=0.0)
    p_sr.add_argument("--kappa2", type=float, default=0.0)
    p_sr.add_argument("--p", type=int, default=1)
    p_sr.add_argument("--depth", type=int, default=20)
    p_sr.add_argument("--nodes", type=int, default=400)
    p_sr.add_argument("--tol", type=float, default=1e-5)
    p_sr.add_argument("--out")
    p_sr.add_argument("--no-plot", action="store_true")
    p_sr.set_defaults(func=cmd_sumrule)

    p_mc = sub.add_parser("mc-test", help="Monte Carlo verification suites")
    p_mc.add_argument("--suite", choices=("jacobi-canonical", "gue-coefficients",
                                          "kmk-limit"), required=True)
    p_mc.add_argument("--p", type=int, default=1)
    p_mc.add_argument("--n", type=int, default=2)
    p_mc.add_argument("--a", type=_nonneg_int, default=0)
    p_mc.add_argument("--b", type=_nonneg_int, default=0)
    p_mc.add_argument("--kappa1", type=float, default=0.0)
    p_mc.add_argument("--kappa2", type=float, default=0.0)
    p_mc.add_argument("--n-list", default="8,16")
    p_mc.add_argument("--samples", type=int, default=10000)
    p_mc.add_argument("--seed", type=int, default=0)
    p_mc.add_argument("--sigmas", type=float, default=4.0)
    p_mc.add_argument("--threads", type=int, default=1)
    p_mc.add_argument("--out")
    p_mc.add_argument("--no-plot", action="store_true")
    p_mc.set_defaults(func=cmd_mc_test)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericDegeneracy as exc:
        print(f"numeric degeneracy: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
