"""Command line front end.

Subcommands
-----------
analytic   evaluate the loss-rate formulas over a config's grid
simulate   Monte Carlo estimates over a config's grid
validate   paired analytic/simulation run with a pass/fail verdict
optimize   solve the optimal caching distribution for a config
preset     run a built-in experiment: fig2 (sweep) or fig3 (optimize)

Artifacts are CSV tables (RFC-4180, header row, floats at 12 significant
digits, rows sorted by key) plus optional SVG charts, written under
``--out``. Exit codes: 0 success, 2 config error, 3 numerical failure,
4 validation mismatch.
"""

import argparse
import csv
import os
import sys
from dataclasses import replace

from .analytics import average_plr, plr_partial_csi
from .config import load_config, preset
from .exceptions import CacheCancelError, ConfigError, NumericalError
from .model import sinr_threshold
from .montecarlo import sweep
from .optimizer import optimize_distributed_caching, result_to_json
from .svgplot import Series, render_chart

__all__ = ["main"]

# Validation rule: the Monte Carlo estimate must sit within three standard
# errors of the formula, with an absolute floor for very tight estimates.
_ABS_FLOOR = 0.005


def _fnum(v):
    return format(float(v), ".12g")


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def _out_path(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _load_spec(args, expected_kinds):
    if not args.config:
        raise ConfigError("--config is required for this subcommand")
    spec = load_config(args.config)
    if spec.kind not in expected_kinds:
        raise ConfigError(
            f"config kind {spec.kind!r} does not fit this subcommand "
            f"(expected one of {', '.join(expected_kinds)})")
    if args.trials is not None or args.seed is not None:
        spec = replace(
            spec,
            trials=spec.trials if args.trials is None else args.trials,
            seed=spec.seed if args.seed is None else args.seed)
    return spec


def _analytic_rows(spec):
    rows = []
    for r_b in sorted(spec.r_b_grid):
        for eta in sorted(spec.eta_grid):
            value = plr_partial_csi(replace(spec.params, r_b=r_b), eta)
            rows.append((r_b, eta, value))
    return rows


def _mc_rows(spec):
    points = sweep(spec.params, sorted(spec.r_b_grid), sorted(spec.eta_grid),
                   trials=spec.trials, seed=spec.seed,
                   window_radius=spec.window_radius,
                   far_field_correction=spec.far_field_correction)
    return [(p.r_b, p.eta_i, p.estimate.mean, p.estimate.std_error)
            for p in points]


def _sweep_series(rows, y_index, err_index=None, marker=True, line=True,
                  tag=""):
    by_eta = {}
    for row in rows:
        by_eta.setdefault(row[1], []).append(row)
    series = []
    for eta in sorted(by_eta):
        pts = [(r[0], r[y_index],
                r[err_index] if err_index is not None else None)
               for r in by_eta[eta]]
        series.append(Series(f"{tag}eta={eta:g}", pts,
                             marker=marker, line=line))
    return series


def _emit_sweep_svg(args, spec, name, analytic_rows=None, mc_rows=None):
    series = []
    if analytic_rows:
        series += _sweep_series(analytic_rows, 2, marker=False, line=True,
                                tag="formula ")
    if mc_rows:
        series += _sweep_series(mc_rows, 2, err_index=3, marker=True,
                                line=False, tag="simulated ")
    doc = render_chart(series, x_label="CSI radius (m)",
                       y_label="packet loss rate",
                       title="loss rate for uncached requests")
    path = _out_path(args, name)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(doc)
    return path


def _cmd_analytic(args):
    spec = _load_spec(args, ("analytic_sweep", "mc_validate", "fig2"))
    rows = _analytic_rows(spec)
    out_rows = [(_fnum(r), _fnum(e), _fnum(v)) for r, e, v in rows]
    path = _out_path(args, spec.csv_name or "analytic.csv")
    _write_csv(path, ("r_b", "eta", "plr_analytic"), out_rows)
    print(f"analytic sweep: {len(rows)} points -> {path}")
    if args.svg:
        svg = _emit_sweep_svg(args, spec, spec.svg_name or "analytic.svg",
                              analytic_rows=rows)
        print(f"chart -> {svg}")
    return 0


def _cmd_simulate(args):
    spec = _load_spec(args, ("analytic_sweep", "mc_validate", "fig2"))
    rows = _mc_rows(spec)
    out_rows = [(_fnum(r), _fnum(e), _fnum(v), _fnum(s))
                for r, e, v, s in rows]
    path = _out_path(args, spec.csv_name or "simulate.csv")
    _write_csv(path, ("r_b", "eta", "plr_mc", "std_err"), out_rows)
    print(f"simulation sweep: {len(rows)} points, {spec.trials} trials "
          f"each, seed {spec.seed} -> {path}")
    if args.svg:
        svg = _emit_sweep_svg(args, spec, spec.svg_name or "simulate.svg",
                              mc_rows=rows)
        print(f"chart -> {svg}")
    return 0


def _paired_rows(spec):
    analytic = _analytic_rows(spec)
    mc = _mc_rows(spec)
    paired = []
    for (r_b, eta, value), (r2, e2, est, err) in zip(analytic, mc):
        assert (r_b, eta) == (r2, e2)
        paired.append((r_b, eta, value, est, err))
    return paired


def _cmd_validate(args):
    spec = _load_spec(args, ("mc_validate", "analytic_sweep", "fig2"))
    paired = _paired_rows(spec)
    failures = 0
    out_rows = []
    for r_b, eta, value, est, err in paired:
        tol = max(3.0 * err, _ABS_FLOOR)
        diff = abs(value - est)
        ok = diff <= tol
        failures += 0 if ok else 1
        out_rows.append((_fnum(r_b), _fnum(eta), _fnum(value), _fnum(est),
                         _fnum(err), _fnum(diff), _fnum(tol),
                         "pass" if ok else "fail"))
        status = "pass" if ok else "FAIL"
        print(f"  r_b={r_b:g} eta={eta:g}: formula {value:.6f} "
              f"simulated {est:.6f} |diff| {diff:.6f} tol {tol:.6f} "
              f"[{status}]")
    path = _out_path(args, spec.csv_name or "validate.csv")
    _write_csv(path, ("r_b", "eta", "plr_analytic", "plr_mc", "std_err",
                      "abs_diff", "tolerance", "status"), out_rows)
    print(f"validation: {len(paired) - failures}/{len(paired)} points "
          f"pass -> {path}")
    if args.svg:
        svg = _emit_sweep_svg(
            args, spec, spec.svg_name or "validate.svg",
            analytic_rows=[(r, e, v) for r, e, v, _, _ in paired],
            mc_rows=[(r, e, m, s) for r, e, _, m, s in paired])
        print(f"chart -> {svg}")
    return 4 if failures else 0


def _optimize_result(spec):
    t_bar = sinr_threshold(spec.params)
    return optimize_distributed_caching(
        spec.library, spec.cache_size, t_bar, spec.params.beta,
        subset_cap=spec.subset_cap, max_iterations=spec.max_iterations)


def _scheme_rows(result):
    scheme = result.scheme
    rows = []
    for rank, (subset, density) in enumerate(
            zip(scheme.subsets(), scheme.densities), start=1):
        packets = "|".join(str(j + 1) for j in subset)
        rows.append((str(rank), packets, _fnum(density)))
    return rows


def _emit_scheme_svg(args, result, name):
    scheme = result.scheme
    pts = []
    for rank, subset in enumerate(scheme.subsets(), start=1):
        for j in subset:
            pts.append((rank, j + 1))
    series = [Series("cached packet", pts, marker=True, line=False)]
    doc = render_chart(series, x_label="subset rank (by density)",
                       y_label="packet index",
                       title=f"optimal caching scheme, "
                             f"loss rate {result.objective:.6f}")
    path = _out_path(args, name)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(doc)
    return path


def _run_optimize(args, spec):
    result = _optimize_result(spec)
    if result.status != "optimal":
        print(f"optimization failed: status {result.status} after "
              f"{result.iterations} iterations", file=sys.stderr)
        return 3
    csv_name = spec.csv_name or "optimize.csv"
    path = _out_path(args, csv_name)
    _write_csv(path, ("subset_rank", "packet_indices", "density"),
               _scheme_rows(result))
    stem = os.path.splitext(csv_name)[0]
    json_path = _out_path(args, stem + ".json")
    with open(json_path, "w", encoding="utf-8") as handle:
        handle.write(result_to_json(result))
    check = average_plr(spec.params, spec.library, result.scheme,
                        regime="full_cancel")
    print(f"optimal caching scheme: objective {result.objective:.12g}, "
          f"support {result.support_size}, {result.iterations} iterations")
    print(f"re-evaluated through the averaged formula: {check:.12g} "
          f"(|diff| {abs(check - result.objective):.3g})")
    print(f"scheme -> {path}")
    print(f"diagnostics -> {json_path}")
    if args.svg:
        svg = _emit_scheme_svg(args, result, spec.svg_name or stem + ".svg")
        print(f"chart -> {svg}")
    return 0


def _cmd_optimize(args):
    spec = _load_spec(args, ("optimize", "fig3"))
    return _run_optimize(args, spec)


def _cmd_preset(args):
    spec = preset(args.name, trials=args.trials, seed=args.seed)
    if spec.kind == "fig3":
        return _run_optimize(args, spec)
    paired = _paired_rows(spec)
    out_rows = [(_fnum(r), _fnum(e), _fnum(v), _fnum(m), _fnum(s))
                for r, e, v, m, s in paired]
    path = _out_path(args, spec.csv_name)
    _write_csv(path, ("r_b", "eta", "plr_analytic", "plr_mc", "std_err"),
               out_rows)
    worst = max(abs(v - m) for _, _, v, m, _ in paired)
    print(f"fig2 sweep: {len(paired)} points, {spec.trials} trials each, "
          f"seed {spec.seed} -> {path}")
    print(f"worst |formula - simulation| = {worst:.6f}")
    if args.svg:
        svg = _emit_sweep_svg(
            args, spec, spec.svg_name,
            analytic_rows=[(r, e, v) for r, e, v, _, _ in paired],
            mc_rows=[(r, e, m, s) for r, e, _, m, s in paired])
        print(f"chart -> {svg}")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="cachecancel",
        description="loss-rate analytics, simulation, and cache "
                    "optimization for interference-cancelling networks")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        if config_required:
            p.add_argument("--config", required=True,
                           help="TOML experiment config")
        p.add_argument("--out", default=".",
                       help="output directory (created if missing)")
        p.add_argument("--trials", type=int, default=None,
                       help="override the trial count")
        p.add_argument("--seed", type=int, default=None,
                       help="override the top-level seed")
        p.add_argument("--svg", action="store_true",
                       help="also write an SVG chart")

    p = sub.add_parser("analytic", help="formula sweep over a grid")
    add_common(p)
    p.set_defaults(func=_cmd_analytic)

    p = sub.add_parser("simulate", help="Monte Carlo sweep over a grid")
    add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("validate",
                       help="paired formula/simulation check")
    add_common(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("optimize", help="solve the caching distribution")
    add_common(p)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("preset", help="run a built-in experiment")
    p.add_argument("name", choices=("fig2", "fig3"))
    add_common(p, config_required=False)
    p.set_defaults(func=_cmd_preset)

    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except CacheCancelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
