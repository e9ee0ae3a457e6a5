"""Command line front end.

One experiment per invocation, selected with --experiment.  Every output file
starts with '#' header lines carrying the full parameter set and the seed, so
reruns with the same arguments are byte identical.

Exit codes: 0 ok, 2 bad arguments or unsupported parameter combination,
3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .errors import ResourceError, ValidationError
from . import analysis, qham, sim
from .encodings import KINDS
from .qham import BUILDERS, term_stats
from .spincore import Spin, two_site

FLOAT_FMT = "%.12g"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return FLOAT_FMT % value
    return str(value)


def _header(args: argparse.Namespace, extra: dict | None = None) -> list[str]:
    params = {
        "experiment": args.experiment,
        "mapping": args.mapping,
        "two_s": args.spin,
        "sites": args.sites,
        "dtau": args.dtau,
        "steps": args.steps,
        "shots": args.shots,
        "noise": args.noise,
    }
    if extra:
        params.update(extra)
    parts = " ".join("%s=%s" % (k, _fmt(v)) for k, v in params.items())
    return ["# params: " + parts, "# seed: %d" % args.seed]


def _write_csv(path: str, header: list[str], columns: list[str],
               rows: list[tuple]) -> None:
    lines = list(header)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _ensure_out(args: argparse.Namespace) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


# ---------------------------------------------------------------------------
# terms


def cmd_terms(args: argparse.Namespace) -> int:
    out = _ensure_out(args)
    rows = []
    for two_s in range(1, args.smax + 1):
        spin = Spin(two_s)
        lat = two_site(spin)
        for kind in KINDS:
            try:
                ham = BUILDERS[kind](lat)
            except ResourceError as err:
                print("terms: skipping %s at 2S=%d (%s)" % (kind, two_s, err),
                      file=sys.stderr)
                continue
            stats = term_stats(ham)
            rows.append((two_s, kind, stats.n_terms, stats.n_multiqubit))
    _write_csv(os.path.join(out, "fig2_terms.csv"),
               _header(args, {"smax": args.smax}),
               ["two_s", "mapping", "n_terms", "n_multiqubit"], rows)

    per_s, fit_power, fit_avg = qham.compact_scaling_study()
    header = _header(args, {"smax": args.smax})
    header.append("# fit_power: a=%s b=%s residual=%s"
                  % (_fmt(fit_power.a), _fmt(fit_power.b),
                     _fmt(fit_power.residual)))
    header.append("# fit_averaged: a=%s b=%s residual=%s"
                  % (_fmt(fit_avg.a), _fmt(fit_avg.b), _fmt(fit_avg.residual)))
    _write_csv(os.path.join(out, "appendixA.csv"), header,
               ["two_s", "n_terms"],
               [(two_s, count) for two_s, count in per_s])
    if args.plot:
        _plot_csv(os.path.join(out, "fig2_terms.csv"))
    return 0


# ---------------------------------------------------------------------------
# evolve (two sites)


def _evolve_filename(two_s: int) -> str:
    if two_s == 2:
        return "fig4_populations.csv"
    if two_s == 3:
        return "fig5_populations.csv"
    return "populations.csv"


def cmd_evolve(args: argparse.Namespace) -> int:
    if args.sites != 2:
        raise ValidationError("evolve runs on 2 sites, got %d" % args.sites)
    spin = Spin(args.spin)
    out = _ensure_out(args)
    n_list = list(range(0, args.steps + 1))
    shots = args.shots if args.shots > 0 else None

    clean = analysis.p0_series(spin, args.mapping, args.dtau, n_list,
                               noise=None, n_shots=shots, seed=args.seed)
    exact = analysis.exact_p0_series(spin, clean.times)
    columns = ["n_st", "t", "p0_exact", "p0"]
    series = [n_list, clean.times, exact.values, clean.values]
    if clean.sigma is not None:
        columns.append("sigma_p0")
        series.append(clean.sigma)

    noisy = None
    if args.noise > 0.0:
        noise = sim.NoiseConfig(eps2q=args.noise)
        noisy = analysis.p0_series(spin, args.mapping, args.dtau, n_list,
                                   noise=noise, n_shots=shots,
                                   seed=args.seed + 1)
        columns.append("p0_noisy")
        series.append(noisy.values)
        if noisy.sigma is not None:
            columns.append("sigma_noisy")
            series.append(noisy.sigma)
        eps_bar = analysis.average_error(noisy, clean,
                                         analysis.TWO_SITE_T_CUTOFF)
        columns.append("eps_bar")
        series.append([eps_bar] * len(n_list))

    rows = list(zip(*series))
    path = os.path.join(out, _evolve_filename(args.spin))
    _write_csv(path, _header(args), columns, rows)
    if args.plot:
        _plot_csv(path)
    return 0


# ---------------------------------------------------------------------------
# chain4 (four sites, swap-symmetric mapping only)


def cmd_chain4(args: argparse.Namespace) -> int:
    if args.mapping != "dicke":
        raise ValidationError("chain4 supports only the dicke mapping")
    if args.sites != 4:
        raise ValidationError("chain4 runs on 4 sites, got %d" % args.sites)
    if args.spin > 5:
        raise ResourceError("chain4 capped at 2S<=5, got %d" % args.spin)
    spin = Spin(args.spin)
    out = _ensure_out(args)
    steps = args.steps if args.steps is not None else (12 if args.spin == 2
                                                      else 11)
    shots = args.shots if args.shots > 0 else None
    res = analysis.chain4_series(spin, steps, dtau=args.dtau,
                                 n_shots=shots, seed=args.seed)
    s = spin.s
    scale = s * s
    rows = []
    for k, t in enumerate(res.times):
        norm = res.normalized[k]
        rows.append((k, t,
                     res.raw[k] / scale,
                     None if norm is None else norm / scale,
                     res.p_sector[k],
                     res.exact[k] / scale,
                     res.pt2[k] / scale))
    path = os.path.join(out, "fig6_correlator.csv")
    _write_csv(path, _header(args, {"steps": steps}),
               ["n_st", "t", "corr_raw", "corr_norm", "p_sector",
                "corr_exact", "corr_pt2"], rows)
    if args.plot:
        _plot_csv(path)
    return 0


# ---------------------------------------------------------------------------
# scaling (two-site Trotter discrepancy sweep)


def cmd_scaling(args: argparse.Namespace) -> int:
    out = _ensure_out(args)
    shots = args.shots if args.shots > 0 else None
    if args.noise > 0.0:
        noise = sim.NoiseConfig(eps2q=args.noise)
        spin = Spin(args.spin)
        report = analysis.trotter_discrepancy(
            spin, n_steps_list=(2, 4, 8, 16, 32), noise=noise,
            n_shots=shots, seed=args.seed)
        rows = [(args.spin, n, d, dn, report.mixed)
                for n, d, dn in report.per_n]
        path = os.path.join(out, "fig8_discrepancy.csv")
        _write_csv(path, _header(args),
                   ["two_s", "n_st", "delta", "delta_norm", "mixed"], rows)
        fits = {"two_s": args.spin, "b": report.b, "b_norm": report.b_norm,
                "slope": report.slope, "slope_norm": report.slope_norm}
        with open(os.path.join(out, "fig8_fits.json"), "w") as fh:
            json.dump(fits, fh, indent=2, sort_keys=True)
            fh.write("\n")
        if args.plot:
            _plot_csv(path)
        return 0

    rows = []
    fits: dict = {"per_spin": {}}
    dtaus = []
    s_values = []
    dtaus_norm = []
    for two_s in range(1, args.spin + 1):
        spin = Spin(two_s)
        report = analysis.trotter_discrepancy(spin, n_shots=shots,
                                              seed=args.seed)
        for n, d, dn in report.per_n:
            rows.append((two_s, n, d, dn, report.mixed))
        fits["per_spin"][str(two_s)] = {
            "b": report.b, "b_norm": report.b_norm,
            "slope": report.slope, "slope_norm": report.slope_norm,
        }
        if two_s >= 4:
            s_values.append(spin.s)
            dtaus.append(analysis.required_dtau(report.b, 0.01))
            dtaus_norm.append(analysis.required_dtau(report.b_norm, 0.01))
    if s_values:
        fits["c"] = analysis.fit_inverse_s(s_values, dtaus)
        fits["c_norm"] = analysis.fit_inverse_s(s_values, dtaus_norm)
    path = os.path.join(out, "fig7_discrepancy.csv")
    _write_csv(path, _header(args),
               ["two_s", "n_st", "delta", "delta_norm", "mixed"], rows)
    with open(os.path.join(out, "fig7_fits.json"), "w") as fh:
        json.dump(fits, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if args.plot:
        _plot_csv(path)
    return 0


# ---------------------------------------------------------------------------
# plot


LOG_PREFIXES = ("fig2", "fig7", "fig8", "appendixA")


def _plot_csv(path: str) -> str:
    import matplotlib
    matplotlib.use("svg")
    import matplotlib.pyplot as plt
    matplotlib.rcParams["svg.hashsalt"] = "spinchain"

    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    columns = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]

    def col(i):
        xs, ys = [], []
        for k, row in enumerate(rows):
            if row[i] == "":
                continue
            try:
                ys.append(float(row[i]))
            except ValueError:
                return None, None
            xs.append(k)
        return xs, ys

    name = os.path.basename(path)
    log = any(name.startswith(p) for p in LOG_PREFIXES)
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    # x axis: first numeric column; categorical columns are skipped.
    x_all, _ = col(0)
    for i in range(1, len(columns)):
        xs, ys = col(i)
        if ys is None or not ys:
            continue
        xv = [float(rows[k][0]) for k in xs] if x_all is not None else xs
        ax.plot(xv, ys, marker="o", markersize=3, linewidth=1.0,
                label=columns[i])
    ax.set_xlabel(columns[0])
    if log:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.legend(fontsize=7)
    fig.tight_layout()
    svg_path = os.path.splitext(path)[0] + ".svg"
    fig.savefig(svg_path, metadata={"Date": None})
    plt.close(fig)
    return svg_path


def cmd_plot(args: argparse.Namespace) -> int:
    if not args.infile:
        raise ValidationError("plot needs --infile pointing at a CSV")
    if not os.path.exists(args.infile):
        raise ValidationError("no such file: %s" % args.infile)
    svg = _plot_csv(args.infile)
    print(svg)
    return 0


# ---------------------------------------------------------------------------


COMMANDS = {
    "terms": cmd_terms,
    "evolve": cmd_evolve,
    "chain4": cmd_chain4,
    "scaling": cmd_scaling,
    "plot": cmd_plot,
}


def build_parser() -> argparse.ArgumentParser:
    par = argparse.ArgumentParser(
        prog="spinchain",
        description="Heisenberg spin-S chain experiments on qubit and qudit "
                    "registers.")
    par.add_argument("--experiment", required=True, choices=sorted(COMMANDS))
    par.add_argument("--mapping", default="dicke", choices=KINDS)
    par.add_argument("--spin", type=int, default=2, metavar="TWO_S",
                     help="twice the spin quantum number (integer)")
    par.add_argument("--sites", type=int, default=None)
    par.add_argument("--dtau", type=float, default=None)
    par.add_argument("--steps", type=int, default=None)
    par.add_argument("--shots", type=int, default=0,
                     help="0 means amplitude-level probabilities")
    par.add_argument("--seed", type=int, default=1234)
    par.add_argument("--noise", type=float, default=0.0,
                     help="two-body depolarizing probability per gate")
    par.add_argument("--out", default=".")
    par.add_argument("--plot", action="store_true",
                     help="also write an SVG next to each CSV")
    par.add_argument("--smax", type=int, default=10, metavar="TWO_S",
                     help="largest 2S for the terms experiment")
    par.add_argument("--infile", default=None,
                     help="CSV to render (plot experiment)")
    return par


def _apply_defaults(args: argparse.Namespace) -> None:
    if args.sites is None:
        args.sites = 4 if args.experiment == "chain4" else 2
    if args.dtau is None:
        args.dtau = math.pi / 10.0 if args.experiment == "chain4" else 0.2
    if args.steps is None and args.experiment == "evolve":
        args.steps = 31


def _validate(args: argparse.Namespace) -> None:
    if args.spin < 1:
        raise ValidationError("--spin must be a positive integer (2S)")
    if args.smax < 1:
        raise ValidationError("--smax must be a positive integer (2S)")
    if args.shots < 0:
        raise ValidationError("--shots must be >= 0")
    if not 0.0 <= args.noise < 1.0:
        raise ValidationError("--noise must lie in [0, 1)")
    if args.dtau is not None and args.dtau <= 0.0:
        raise ValidationError("--dtau must be positive")
    if args.steps is not None and args.steps < 0:
        raise ValidationError("--steps must be >= 0")


def main(argv=None) -> int:
    par = build_parser()
    args = par.parse_args(argv)
    _apply_defaults(args)
    try:
        _validate(args)
        return COMMANDS[args.experiment](args)
    except ValidationError as err:
        print("error: %s" % err, file=sys.stderr)
        return 2
    except ResourceError as err:
        print("resource limit: %s" % err, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
