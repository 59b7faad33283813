"""
Command-line entry point.

Exit codes (all subcommands):
  0  success
  2  usage error (bad or unknown flags)
  3  data or validation error (unreadable input, bad parameters, empty band)
  4  an optimizer did not converge (results are still written)

Frequencies always carry a unit suffix: ``cpy`` (cycles per time unit of
the input, e.g. cycles per year for polar motion) or ``rad`` (radians per
time unit). Diagnostics go to stderr; data go to files or stdout.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .dataio import IngestError, ingest_eop, read_json, series_to_csv, write_results
from .fourier import boxcar_bandpass, dft
from .params import EllipticalParams, ParameterError, to_geometric
from .sampling import SimConfig, simulate
from .spectral import DEFAULT_K, fourier_grid, spectral_matrix

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NOCONV = 0, 2, 3, 4


class DataError(Exception):
    pass


class NotConverged(Exception):
    pass


# --- parsing helpers ------------------------------------------------------


def parse_frequency(text: str) -> float:
    """'1cpy' -> 2 pi, '0.5rad' -> 0.5 (radians per time unit)."""
    t = text.strip().lower()
    for suffix, factor in (("cpy", 2 * math.pi), ("rad", 1.0)):
        if t.endswith(suffix):
            try:
                return float(t[: -len(suffix)]) * factor
            except ValueError:
                break
    raise argparse.ArgumentTypeError(f"frequency {text!r} needs a number followed by 'cpy' or 'rad'")


def parse_bands(text: str):
    """'all' or comma-separated 'lo:hi<unit>' intervals, e.g. '-0.97:-0.70cpy'."""
    t = text.strip()
    if t.lower() == "all":
        return "all"
    bands = []
    for part in t.split(","):
        part = part.strip()
        unit = next((u for u in ("cpy", "rad") if part.lower().endswith(u)), None)
        if unit is None:
            raise argparse.ArgumentTypeError(f"band {part!r} needs a 'cpy' or 'rad' suffix")
        body = part[: -len(unit)]
        try:
            lo, hi = (float(v) for v in body.split(":"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"band {part!r} must look like lo:hi{unit}") from None
        f = 2 * math.pi if unit == "cpy" else 1.0
        bands.append((min(lo, hi) * f, max(lo, hi) * f))
    return bands


def _params_from(path: str) -> EllipticalParams:
    try:
        d = read_json(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read parameters from {path}: {exc}") from None
    if "ell" in d:
        d = d["ell"]
    try:
        p = EllipticalParams.from_dict(d)
    except (KeyError, TypeError) as exc:
        raise DataError(f"parameter file {path} lacks field {exc}") from None
    p.validate()
    return p


def _read_series(args):
    if args.input == "-":
        return ingest_eop(sys.stdin, args.columns, args.unit)
    try:
        with open(args.input) as fh:
            return ingest_eop(fh, args.columns, args.unit)
    except OSError as exc:
        raise DataError(str(exc)) from None


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        from .dataio import atomic_write

        atomic_write(Path(out), text)


def _emit_json(obj, out: str | None) -> None:
    if out in (None, "-"):
        from .dataio import to_jsonable

        sys.stdout.write(json.dumps(to_jsonable(obj), indent=2) + "\n")
    else:
        write_results(obj, out)


# --- subcommands ----------------------------------------------------------


def cmd_simulate(args) -> int:
    p = _params_from(args.params)
    cfg = SimConfig(
        n_out=args.n,
        delta_out=args.delta,
        substeps=args.substeps,
        burn_in=args.burn_in,
        seed=args.seed,
        z0="stationary" if args.z0 == "stationary" else 0j,
        method=args.method,
    )
    s = simulate(p, cfg)
    lines = ["t,x,y"] + [f"{t!r},{v.real!r},{v.imag!r}" for t, v in zip(s.times.tolist(), s.values.tolist())]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    if args.input is None and args.params is None:
        raise DataError("spectrum needs --input (periodogram) and/or --params (model spectrum)")
    cols = {}
    if args.input is not None:
        s = _read_series(args)
        sd = dft(s, mean_subtract=args.mean_subtract)
        grid = sd.grid
        cols["I"] = sd.periodogram
    else:
        grid = fourier_grid(args.n, args.delta)
    if args.params is not None:
        g = to_geometric(_params_from(args.params))
        sv = spectral_matrix(g, grid.omegas, grid.delta, args.k_max)
        cols["s_pos"], cols["s_neg"] = sv.s_pos, sv.s_neg
        cols["r_re"], cols["r_im"] = sv.r_val.real, sv.r_val.imag
    header = ["omega"] + list(cols)
    lines = [",".join(header)]
    for i, w in enumerate(grid.omegas.tolist()):
        lines.append(",".join([repr(w)] + [repr(float(cols[k][i])) for k in cols]))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _fit_spec(args):
    from .whittle import FitSpec, OptimizerConfig

    if args.model == "elliptical-fixed-beta" and args.beta is None:
        raise DataError("--model elliptical-fixed-beta needs --beta")
    opt = OptimizerConfig(restarts=args.restarts, seed=args.seed, max_iters=args.max_iters)
    return FitSpec(
        model=args.model,
        likelihood=args.likelihood,
        bands=args.bands,
        k_max=None if args.k_max < 0 else args.k_max,
        mean_subtract=not args.keep_mean,
        beta=args.beta,
        optimizer=opt,
    )


def cmd_fit(args) -> int:
    from .whittle import fit

    s = _read_series(args)
    spec = _fit_spec(args)
    res = fit(dft(s, mean_subtract=spec.mean_subtract), spec)
    _emit_json(res, args.out)
    if not res.converged:
        raise NotConverged(f"optimizer did not converge ({res.message}); flags {res.boundary_flags}")
    return EXIT_OK


def cmd_bootstrap(args) -> int:
    from .uncertainty import BootstrapConfig, bootstrap
    from .whittle import fit

    s = _read_series(args)
    spec = _fit_spec(args)
    sd = dft(s, mean_subtract=spec.mean_subtract)
    base = fit(sd, spec)
    if not base.converged:
        _emit_json({"fit": base}, args.out)
        raise NotConverged("point estimate did not converge; bootstrap not run")
    cfg = BootstrapConfig(
        n_boot=args.n_boot,
        spectral_estimator="raw_periodogram" if args.estimator == "periodogram" else "epanechnikov",
        bandwidth=args.bandwidth,
        seed=args.seed,
        ci_level=args.ci_level,
    )
    res = bootstrap(sd, base, spec, cfg, n_jobs=args.jobs)
    _emit_json({"fit": base, "bootstrap": res}, args.out)
    if args.draws:
        from .uncertainty import COLUMNS

        rows = [dict(zip(("rep",) + COLUMNS, [i] + row.tolist())) for i, row in enumerate(res.estimates)]
        write_results(rows, args.draws)
    if res.failed:
        raise NotConverged(f"{res.n_failed} of {res.n_boot} bootstrap replicates failed")
    return EXIT_OK


def _parse_method(text: str):
    """LABEL=LIKELIHOOD@BANDS, e.g. nb=marginal@-0.897:-0.725rad,0.725:0.897rad."""
    from .whittle import FitSpec

    try:
        label, rest = text.split("=", 1)
        lik, bands = rest.split("@", 1)
    except ValueError:
        raise argparse.ArgumentTypeError(f"method {text!r} must look like LABEL=LIKELIHOOD@BANDS") from None
    if lik not in ("full", "marginal"):
        raise argparse.ArgumentTypeError(f"likelihood {lik!r} must be full or marginal")
    return label, FitSpec(likelihood=lik, bands=parse_bands(bands))


def cmd_mc(args) -> int:
    from .uncertainty import McConfig, run_monte_carlo

    p = _params_from(args.params)
    methods = dict(args.method) if args.method else {"marginal-all": _parse_method("m=marginal@all")[1]}
    cfg = McConfig(args.reps, p, args.n, args.delta, methods, args.seed, args.substeps)
    res = run_monte_carlo(cfg, n_jobs=args.jobs)
    summary = {"n_reps": args.reps, "table": res.table()}
    _emit_json(summary, args.out)
    if args.estimates:
        rows = []
        for label, m in res.methods.items():
            for i, row in enumerate(m.estimates):
                rows.append({"method": label, "rep": i, **dict(zip(("alpha1", "beta1", "alpha2", "beta2", "sigma2"), row.tolist()))})
        write_results(rows, args.estimates)
    return EXIT_OK


def cmd_filter(args) -> int:
    s = _read_series(args)
    if s.n < 2:
        raise DataError("need at least two samples")
    out = boxcar_bandpass(s, args.bands)
    lines = ["t,x,y"] + [f"{t!r},{v.real!r},{v.imag!r}" for t, v in zip(out.times.tolist(), out.values.tolist())]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_ingest(args) -> int:
    s = _read_series(args)
    _emit(series_to_csv(s), args.out)
    print(f"ingested {s.n} rows, delta={s.delta!r}, t0={s.t0!r}", file=sys.stderr)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    from . import reproduce

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return reproduce.run(args.target, args.scale, out, seed=args.seed, jobs=args.jobs)


# --- parser ---------------------------------------------------------------


def _add_input(p, required=True):
    p.add_argument("--input", required=required, help="delimited text file of epoch,x,y rows ('-' for stdin)")
    p.add_argument("--columns", default="epoch,x,y", help="column labels from epoch|mjd,x,y,skip (default epoch,x,y)")
    p.add_argument("--unit", choices=["mas", "arcsec"], default="mas", help="unit of x and y in the input; stored in mas")


def _add_fit_flags(p):
    p.add_argument("--model", choices=["elliptical", "circular", "elliptical-fixed-beta"], default="elliptical", help="model family")
    p.add_argument("--likelihood", choices=["full", "marginal"], default="marginal", help="Whittle likelihood variant")
    p.add_argument("--bands", type=parse_bands, default="all", help="'all' or lo:hi intervals with unit suffix cpy|rad, comma separated")
    p.add_argument("--beta", type=parse_frequency, default=None, help="fixed oscillation frequency for elliptical-fixed-beta, with unit suffix (e.g. -1cpy)")
    p.add_argument("--k-max", type=int, default=DEFAULT_K, help="aliasing terms per side; negative means untruncated closed form")
    p.add_argument("--keep-mean", action="store_true", help="do not subtract the sample mean (zero frequency then enters the fit)")
    p.add_argument("--restarts", type=int, default=3, help="random simplex restarts")
    p.add_argument("--max-iters", type=int, default=4000, help="simplex iteration cap per start")
    p.add_argument("--seed", type=int, default=0, help="seed for restarts and resampling")


def _add_jobs(p):
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default from ELLIPTICALOU_JOBS, else 1)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ellipticalou", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}", help="print version and exit")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("simulate", help="simulate a series; CSV t,x,y")
    p.add_argument("--params", required=True, help="JSON with alpha1, beta1, alpha2, beta2, sigma2 (rates per time unit)")
    p.add_argument("--n", type=int, required=True, help="number of output samples")
    p.add_argument("--delta", type=float, default=1.0, help="sampling interval in time units")
    p.add_argument("--substeps", type=int, default=100, help="Euler steps per sampling interval")
    p.add_argument("--burn-in", type=float, default=None, help="burn-in in time units (default 50/alpha1)")
    p.add_argument("--method", choices=["stepwise", "aggregated"], default="stepwise", help="stepwise Euler or exact law of the aggregated Euler steps")
    p.add_argument("--z0", choices=["zero", "stationary"], default="zero", help="starting state before burn-in")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectrum", help="periodogram (omega,I) and/or aliased model spectrum (omega,s_pos,s_neg,r_re,r_im) on the Fourier grid")
    _add_input(p, required=False)
    p.add_argument("--params", default=None, help="JSON model parameters for the aliased model spectrum")
    p.add_argument("--n", type=int, default=1024, help="grid size when no --input is given")
    p.add_argument("--delta", type=float, default=1.0, help="sampling interval when no --input is given")
    p.add_argument("--k-max", type=int, default=DEFAULT_K, help="aliasing terms per side")
    p.add_argument("--mean-subtract", action="store_true", help="remove the sample mean before the periodogram")
    p.add_argument("--out", default=None, help="output CSV path (omega in radians per time unit)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("fit", help="Whittle fit; JSON FitResult (rates in radians per time unit)")
    _add_input(p)
    _add_fit_flags(p)
    p.add_argument("--out", default=None, help="output JSON path (default stdout)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bootstrap", help="fit plus frequency-domain bootstrap; JSON summary")
    _add_input(p)
    _add_fit_flags(p)
    p.add_argument("--n-boot", type=int, default=100, help="bootstrap replicates")
    p.add_argument("--estimator", choices=["periodogram", "epanechnikov"], default="periodogram", help="spectral estimate to resample")
    p.add_argument("--bandwidth", type=float, default=0.07, help="Epanechnikov bandwidth in radians per time unit")
    p.add_argument("--ci-level", type=float, default=0.95, help="percentile interval coverage")
    p.add_argument("--draws", default=None, help="optional CSV of replicate estimates")
    p.add_argument("--out", default=None, help="output JSON path (default stdout)")
    _add_jobs(p)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("mc", help="Monte Carlo bias/RMSE study; JSON table")
    p.add_argument("--params", required=True, help="JSON true parameters")
    p.add_argument("--n", type=int, default=1759, help="series length")
    p.add_argument("--delta", type=float, default=1.0, help="sampling interval")
    p.add_argument("--reps", type=int, default=200, help="replicate series")
    p.add_argument("--substeps", type=int, default=10_000, help="Euler steps per interval (aggregated law)")
    p.add_argument("--method", action="append", type=_parse_method, help="LABEL=full|marginal@BANDS, repeatable (default marginal@all)")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--estimates", default=None, help="optional CSV of raw estimates")
    p.add_argument("--out", default=None, help="output JSON path (default stdout)")
    _add_jobs(p)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("filter", help="boxcar band-pass; CSV t,x,y")
    _add_input(p)
    p.add_argument("--bands", type=parse_bands, required=True, help="bands to keep, with unit suffix cpy|rad")
    p.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("ingest", help="validate a polar-motion record; CSV epoch,x,y in mas")
    _add_input(p)
    p.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("reproduce", help="rerun a named experiment and write its data files")
    p.add_argument("target", choices=["table2", "table3", "table4", "fig1_spectra", "fig3_densities", "chandler", "annual"], help="experiment")
    p.add_argument("--scale", choices=["paper", "desk"], default="desk", help="full replicate counts or reduced desk counts")
    p.add_argument("--out-dir", default="results", help="directory for output files")
    p.add_argument("--seed", type=int, default=2024, help="random seed")
    _add_jobs(p)
    p.set_defaults(func=cmd_reproduce)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except (DataError, IngestError, ParameterError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
