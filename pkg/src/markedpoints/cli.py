"""Batch command-line front end.

Subcommands: intensity, summary, markcorr, simulate, envelope, rerun.
Every run writes its artifacts plus a metadata JSON with the fully
resolved configuration and seed; `rerun <metadata.json>` replays a run.

Exit codes: 0 success, 2 usage error, 3 data validation error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__
from .curves import r_grid
from .envelope import envelopes, mark_correlation_study
from .errors import NumericalError, ValidationError
from .geometry import PlanarWindow, load_network, synthetic_tree_network
from .intensity import (
    KernelSpec,
    bandwidth_cvl,
    bandwidth_scott,
    intensity_heat,
    intensity_jones_diggle,
    intensity_network,
    intensity_uniform,
)
from .markcorr import (
    BEISBART_KERSCHER,
    SHIMANTANI_I,
    STOYAN,
    VARIOGRAM,
    SmoothingSpec1D,
    default_smoothing,
    mark_corr,
    mark_corr_suite,
)
from .pattern import load_pattern_csv, save_pattern_csv, split_by_type
from .simulate import (
    GaussianFieldSpec,
    constant_field_sampler,
    cosine_field_sampler,
    lgcp_network,
    linked_balanced_cox,
    model_marks,
    poisson_network,
    poisson_planar,
    replicate_rng,
    SeedSpec,
)
from .summaries import (
    f_inhom,
    h_cross_inhom,
    j_cross_inhom,
    k_cross_inhom,
    k_dot_inhom,
    mark_weighted_k,
)

_TF = {"stoyan": STOYAN, "bk": BEISBART_KERSCHER, "vario": VARIOGRAM, "shimantani": SHIMANTANI_I}


def _require_file(path, what):
    if path is None:
        raise ValidationError(f"missing required {what} file")
    if not os.path.exists(path):
        raise ValidationError(f"{what} file not found: {path}")
    return path


def _parse_window(text) -> PlanarWindow:
    try:
        xmin, xmax, ymin, ymax = (float(t) for t in text.split(","))
    except Exception:
        raise ValidationError(f"window must be xmin,xmax,ymin,ymax, got {text!r}") from None
    return PlanarWindow(xmin, xmax, ymin, ymax)


def _load_domain(args):
    if getattr(args, "network", None):
        return load_network(_require_file(args.network, "network"))
    if getattr(args, "window", None):
        return _parse_window(args.window)
    raise ValidationError("either --window or --network is required")


def _threads(args) -> int:
    env = os.environ.get("MARKEDPOINTS_THREADS")
    if env is None:
        return 1
    cap = int(env)
    return os.cpu_count() or 1 if cap == 0 else max(1, cap)


def _write_metadata(args, out_dir, extra=None):
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",)}
    doc = {"argv": list(args._argv), "config": cfg, "version": __version__}
    if extra:
        doc.update(extra)
    path = os.path.join(out_dir, f"{args.command}_metadata.json")
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2, default=str)
        fh.write("\n")
    return path


def _out_dir(args) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return args.out_dir


def _plugin_sigma(args, p) -> float:
    if args.sigma == "scott":
        sx, sy = bandwidth_scott(p)
        return float(np.sqrt(sx * sy))
    if args.sigma == "cvl":
        return bandwidth_cvl(p, (args.grid, args.grid))
    try:
        return float(args.sigma)
    except ValueError:
        raise ValidationError(f"--sigma must be a number, 'scott' or 'cvl', got {args.sigma!r}") from None


def _cmd_intensity(args):
    out = _out_dir(args)
    domain = _load_domain(args)
    p = load_pattern_csv(_require_file(args.pattern, "pattern"), domain)
    if p.is_network:
        if args.method not in ("uniform", "jd"):
            raise ValidationError("network intensity supports methods uniform/jd only")
        if args.sigma == "cvl":
            raise ValidationError("cvl bandwidth selection is planar-only")
        sigma = _plugin_sigma(args, p)
        est = intensity_network(p, KernelSpec(sigma, args.kernel))
    else:
        sigma = _plugin_sigma(args, p)
        dims = (args.grid, args.grid)
        if args.method == "uniform":
            est = intensity_uniform(p, KernelSpec(sigma, args.kernel), dims)
        elif args.method == "jd":
            est = intensity_jones_diggle(p, KernelSpec(sigma, args.kernel), dims)
        elif args.method == "heat":
            est = intensity_heat(p, sigma, dims)
        else:
            raise ValidationError(f"unknown method {args.method!r}")
    est.to_csv(os.path.join(out, "intensity.csv"))
    _write_metadata(args, out, {"resolved_sigma": est.sigma})


def _plugin_intensity(args, p):
    sigma = _plugin_sigma(args, p)
    k = KernelSpec(sigma, args.kernel)
    if p.is_network:
        return intensity_network(p, k)
    dims = (args.grid, args.grid)
    if args.intensity_method == "jd":
        return intensity_jones_diggle(p, k, dims)
    return intensity_uniform(p, k, dims)


def _summary_r(args, p):
    if args.rmax is not None:
        return r_grid(args.rmax, args.bins)
    if p.is_network:
        return r_grid(min(250.0, p.domain.total_length / 4.0), args.bins)
    return r_grid(min(p.domain.width, p.domain.height) / 4.0, args.bins)


def _cmd_summary(args):
    out = _out_dir(args)
    domain = _load_domain(args)
    p = load_pattern_csv(_require_file(args.pattern, "pattern"), domain)
    r = _summary_r(args, p)

    def lam_for(sub):
        if args.lambda_const is not None:
            return float(args.lambda_const)
        return _plugin_intensity(args, sub)

    if args.stat in ("kcross", "kdot", "hcross", "jcross"):
        groups = split_by_type(p)
        if args.type_i is None or args.type_i not in groups:
            raise ValidationError(f"--type-i must name one of {sorted(groups)}")
        pi = groups[args.type_i]
        if args.stat == "kdot":
            others = [pt for pt in p.points if pt.type_label != args.type_i]
            pj = type(p)(p.domain, others)
        else:
            if args.type_j is None or args.type_j not in groups:
                raise ValidationError(f"--type-j must name one of {sorted(groups)}")
            pj = groups[args.type_j]
        li, lj = lam_for(pi), lam_for(pj)
        if args.stat == "kcross":
            curve = k_cross_inhom(pi, pj, li, lj, args.ec, r)
        elif args.stat == "kdot":
            curve = k_dot_inhom(pi, pj, li, lj, args.ec, r)
        elif args.stat == "hcross":
            curve = h_cross_inhom(pi, pj, li, lj, r=r)
        else:
            h = h_cross_inhom(pi, pj, li, lj, r=r)
            f = f_inhom(pj, lj, grid_spacing=args.grid_spacing, r=r)
            curve = j_cross_inhom(h, f)
    elif args.stat == "f":
        groups = split_by_type(p) if args.type_j else {None: p}
        pj = groups[args.type_j] if args.type_j else p
        curve = f_inhom(pj, lam_for(pj), grid_spacing=args.grid_spacing, r=r)
    elif args.stat == "kweighted":
        curve = mark_weighted_k(p, _TF[args.tf], lam_for(p), args.ec, r)
    else:
        raise ValidationError(f"unknown statistic {args.stat!r}")
    if args.lambda_const is not None:
        curve.meta.update(intensity="constant", lam=args.lambda_const)
    else:
        curve.meta.update(intensity=args.intensity_method, sigma=args.sigma)
    curve.to_csv(os.path.join(out, f"{args.stat}.csv"))
    _write_metadata(args, out)


def _cmd_markcorr(args):
    out = _out_dir(args)
    domain = _load_domain(args)
    p = load_pattern_csv(_require_file(args.pattern, "pattern"), domain)
    r = _summary_r(args, p)
    smoothing = (
        SmoothingSpec1D(args.bandwidth, args.smoothing_kernel)
        if args.bandwidth is not None
        else default_smoothing(p)
    )
    if args.tf == "suite":
        suite = mark_corr_suite(p, smoothing, r, args.ec)
        for name, curve in suite.curves.items():
            curve.to_csv(os.path.join(out, f"markcorr_{name}.csv"))
        wide = os.path.join(out, "markcorr_suite.csv")
        names = sorted(suite.curves)
        with open(wide, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["r"] + names + [f"raw_{n}" for n in names])
            for i in range(len(r)):
                row = [format(r[i], ".12g")]
                row += [format(suite.curves[n].values[i], ".12g") for n in names]
                row += [format(suite.numerators[n].values[i], ".12g") for n in names]
                wr.writerow(row)
        from .svgplot import curves_svg

        curves_svg(
            os.path.join(out, "markcorr_suite.svg"),
            [(n, suite.curves[n]) for n in names],
            title="mark correlation functions",
        )
    else:
        curve, numer = mark_corr(
            p, _TF[args.tf], smoothing, r, args.ec, return_numerator=True
        )
        curve.to_csv(os.path.join(out, f"markcorr_{_TF[args.tf].name}.csv"))
        numer.to_csv(os.path.join(out, f"markcorr_raw_{_TF[args.tf].name}.csv"))
        from .svgplot import curves_svg

        curves_svg(
            os.path.join(out, f"markcorr_{_TF[args.tf].name}.svg"),
            [(_TF[args.tf].name, curve)],
            title=f"mark correlation: {_TF[args.tf].name}",
        )
    _write_metadata(args, out, {"resolved_bandwidth": smoothing.bandwidth})


def _simulate_pattern(args, rng):
    model = args.model
    if model in ("modelI", "modelII", "modelIII"):
        net = load_network(_require_file(args.network, "network")) if args.network else synthetic_tree_network()
        lam = args.rate if args.rate is not None else args.n_expected / net.total_length
        p = poisson_network(lam, net, rng)
        kind = model[5:]
        p = model_marks(kind, p, rng, a=args.a, b=args.b, tau=args.tau, radius=args.radius)
        return p, net
    if model == "poisson":
        if args.network:
            net = load_network(_require_file(args.network, "network"))
            if args.rate is None:
                raise ValidationError("--rate is required for poisson simulation")
            return poisson_network(args.rate, net, rng), net
        domain = _load_domain(args)
        if args.rate is None:
            raise ValidationError("--rate is required for poisson simulation")
        return poisson_planar(args.rate, domain, rng), domain
    if model == "lgcp":
        net = load_network(_require_file(args.network, "network")) if args.network else synthetic_tree_network()
        from .geometry import NetworkLocation

        var = args.lgcp_var
        mu = args.lgcp_mu
        if mu is None:
            # mean count matches --n-expected: E exp(Z) = exp(mu + var/2)
            mu = float(np.log(args.n_expected / net.total_length) - var / 2.0)

        def const_cov(d1, d2):
            shape = np.broadcast_shapes(np.shape(d1), np.shape(d2))
            return np.full(shape, var) if shape else var

        spec = GaussianFieldSpec(
            mean=mu, cov=const_cov, anchor=NetworkLocation(0, 0.5), nugget=1e-8
        )
        return lgcp_network(spec, net, args.lgcp_step, rng), net
    if model in ("linked", "balanced"):
        domain = _load_domain(args)
        if args.base_cosine is not None:
            base, amp, scale = (float(t) for t in args.base_cosine.split(","))
            sampler = cosine_field_sampler(base, amp, scale)
        else:
            sampler = constant_field_sampler(args.base_const)
        return linked_balanced_cox(model, args.nu, sampler, domain, rng), domain
    raise ValidationError(f"unknown model {args.model!r}")


def _cmd_simulate(args):
    out = _out_dir(args)
    rng = replicate_rng(SeedSpec(args.seed, 0))
    p, _ = _simulate_pattern(args, rng)
    save_pattern_csv(p, os.path.join(out, "pattern.csv"))
    _write_metadata(args, out, {"n_points": p.n})


def _cmd_envelope(args):
    out = _out_dir(args)
    jobs = _threads(args)
    if args.model in ("modelI", "modelII", "modelIII"):
        net = load_network(_require_file(args.network, "network")) if args.network else synthetic_tree_network()
        kind = args.model[5:]
        if args.stat == "suite":
            bands = mark_correlation_study(
                net,
                kind,
                out,
                nsim=args.nsim,
                level=args.level,
                master_seed=args.seed,
                n_expected=args.n_expected,
                r_max=args.rmax if args.rmax is not None else 250.0,
                bins=args.bins,
                bandwidth=args.bandwidth if args.bandwidth is not None else 10.0,
                radius=args.radius,
                n_jobs=jobs,
            )
            k = next(iter(bands.values())).k
            _write_metadata(args, out, {"k": k})
            return
        tf = _TF[args.stat]
        lam = args.n_expected / net.total_length
        r = r_grid(args.rmax if args.rmax is not None else 250.0, args.bins)
        smoothing = SmoothingSpec1D(args.bandwidth if args.bandwidth is not None else 10.0)

        def gen(rng):
            while True:
                p = poisson_network(lam, net, rng)
                if p.n >= 2:
                    return model_marks(kind, p, rng, a=args.a, b=args.b, tau=args.tau, radius=args.radius)

        def stat(p):
            return mark_corr(p, tf, smoothing, r, degenerate="nan")

        band = envelopes(gen, stat, args.nsim, args.level, args.seed, n_jobs=jobs)
        band.to_csv(os.path.join(out, f"{args.model}_{tf.name}_band.csv"))
        from .svgplot import envelope_panels_svg

        envelope_panels_svg(
            os.path.join(out, f"{args.model}_{tf.name}_band.svg"),
            [(tf.name, band)],
            title=f"{args.model}: {tf.name} envelope",
        )
        _write_metadata(args, out, {"k": band.k})
        return
    if args.model == "poisson":
        domain = _load_domain(args)
        if args.rate is None:
            raise ValidationError("--rate is required for poisson envelopes")
        if domain.__class__.__name__ == "LinearNetwork":
            raise ValidationError("poisson envelopes are planar-only in the CLI")
        r = (
            r_grid(args.rmax, args.bins)
            if args.rmax is not None
            else r_grid(min(domain.width, domain.height) / 4.0, args.bins)
        )

        def gen(rng):
            return poisson_planar(args.rate, domain, rng)

        def stat(p):
            lab = ["i"] * p.n
            pi = p.with_labels(lab)
            return k_cross_inhom(pi, pi, args.rate, args.rate, "translation", r)

        band = envelopes(gen, stat, args.nsim, args.level, args.seed, n_jobs=jobs)
        band.to_csv(os.path.join(out, "poisson_k_band.csv"))
        _write_metadata(args, out, {"k": band.k})
        return
    raise ValidationError(f"envelope does not support model {args.model!r}")


def _cmd_rerun(args):
    path = _require_file(args.metadata, "metadata")
    with open(path) as fh:
        doc = json.load(fh)
    argv = doc.get("argv")
    if not argv:
        raise ValidationError(f"metadata file {path} has no argv record")
    rc = main(argv)
    if rc != 0:
        raise ValidationError(f"rerun of {path} failed with exit code {rc}")


def _add_common(sp, with_domain=True):
    sp.add_argument("--out-dir", default=".", help="output directory")
    sp.add_argument("--seed", type=int, default=0, help="master seed")
    if with_domain:
        sp.add_argument("--window", help="planar window as xmin,xmax,ymin,ymax")
        sp.add_argument("--network", help="network JSON file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="markedpoints",
        description="Summary statistics, simulators and Monte Carlo envelopes "
        "for marked point patterns on windows and linear networks.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("intensity", help="kernel intensity estimation")
    _add_common(sp)
    sp.add_argument("--pattern", required=True)
    sp.add_argument("--method", choices=["uniform", "jd", "heat"], default="uniform")
    sp.add_argument("--sigma", default="scott", help="bandwidth value, 'scott' or 'cvl'")
    sp.add_argument("--kernel", choices=["gaussian", "epanechnikov", "box"], default="gaussian")
    sp.add_argument("--grid", type=int, default=128)
    sp.set_defaults(func=_cmd_intensity)

    sp = sub.add_parser("summary", help="K/H/F/J and mark-weighted K curves")
    _add_common(sp)
    sp.add_argument("--pattern", required=True)
    sp.add_argument(
        "--stat", choices=["kcross", "kdot", "hcross", "f", "jcross", "kweighted"], required=True
    )
    sp.add_argument("--type-i", dest="type_i")
    sp.add_argument("--type-j", dest="type_j")
    sp.add_argument("--ec", choices=["none", "translation"], default="none")
    sp.add_argument("--rmax", type=float)
    sp.add_argument("--bins", type=int, default=512)
    sp.add_argument("--sigma", default="scott")
    sp.add_argument("--kernel", choices=["gaussian", "epanechnikov", "box"], default="gaussian")
    sp.add_argument("--intensity-method", dest="intensity_method", choices=["uniform", "jd"], default="uniform")
    sp.add_argument("--lambda-const", dest="lambda_const", type=float, help="use a constant intensity instead of a plug-in estimate")
    sp.add_argument("--grid", type=int, default=128)
    sp.add_argument("--grid-spacing", dest="grid_spacing", type=float)
    sp.add_argument("--tf", choices=sorted(_TF), default="stoyan")
    sp.set_defaults(func=_cmd_summary)

    sp = sub.add_parser("markcorr", help="mark correlation functions")
    _add_common(sp)
    sp.add_argument("--pattern", required=True)
    sp.add_argument("--tf", choices=sorted(_TF) + ["suite"], default="suite")
    sp.add_argument("--bandwidth", type=float)
    sp.add_argument(
        "--smoothing-kernel",
        dest="smoothing_kernel",
        choices=["epanechnikov", "gaussian", "box"],
        default="epanechnikov",
    )
    sp.add_argument("--ec", choices=["none", "symmetricWeight"], default="none")
    sp.add_argument("--rmax", type=float)
    sp.add_argument("--bins", type=int, default=512)
    sp.set_defaults(func=_cmd_markcorr)

    sp = sub.add_parser("simulate", help="pattern simulators")
    _add_common(sp)
    sp.add_argument(
        "--model",
        choices=["poisson", "lgcp", "linked", "balanced", "modelI", "modelII", "modelIII"],
        required=True,
    )
    sp.add_argument("--rate", type=float, help="poisson intensity (per area / per length)")
    sp.add_argument("--n-expected", dest="n_expected", type=float, default=150.0)
    sp.add_argument("--nu", type=float, default=100.0)
    sp.add_argument("--base-const", dest="base_const", type=float, default=50.0)
    sp.add_argument("--base-cosine", dest="base_cosine", help="base,amplitude,scale")
    sp.add_argument("--lgcp-mu", dest="lgcp_mu", type=float, default=None)
    sp.add_argument("--lgcp-var", dest="lgcp_var", type=float, default=0.25)
    sp.add_argument("--lgcp-step", dest="lgcp_step", type=float)
    sp.add_argument("--a", type=float, default=0.0)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--tau", type=float)
    sp.add_argument("--radius", type=float, default=80.0)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("envelope", help="Monte Carlo envelope of a statistic under a null model")
    _add_common(sp)
    sp.add_argument(
        "--model",
        choices=["poisson", "modelI", "modelII", "modelIII"],
        required=True,
    )
    sp.add_argument("--stat", default="suite", help="suite | stoyan | bk | vario | shimantani")
    sp.add_argument("--nsim", type=int, default=199)
    sp.add_argument("--level", type=float, default=0.95)
    sp.add_argument("--rate", type=float)
    sp.add_argument("--n-expected", dest="n_expected", type=float, default=150.0)
    sp.add_argument("--rmax", type=float)
    sp.add_argument("--bins", type=int, default=250)
    sp.add_argument("--bandwidth", type=float)
    sp.add_argument("--a", type=float, default=0.0)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--tau", type=float)
    sp.add_argument("--radius", type=float, default=80.0)
    sp.set_defaults(func=_cmd_envelope)

    sp = sub.add_parser("rerun", help="replay a run from its metadata file")
    sp.add_argument("metadata")
    sp.set_defaults(func=_cmd_rerun, command="rerun")

    return ap


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    args._argv = list(argv)
    try:
        args.func(args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 4
    except FileNotFoundError as e:
        print(f"error: file not found: {e.filename}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
