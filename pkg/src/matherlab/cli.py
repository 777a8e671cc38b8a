"""Command-line entry point.

Subcommands: channel, annulus, pendulum-alpha, pathological, flux, gamma,
kappa, pbplus, subdiff.  Configuration precedence: CLI flags > MATHERLAB_OUT
(output dir only) > config file (--config, TOML or JSON) > built-in
defaults; resolved values are echoed into the report.  Unknown config keys
are rejected.  Seeds are mandatory for the stochastic subcommands.

Exit codes: 0 all report rows pass; 2 bad configuration; 3 numerical
failure or failing rows (the report path is printed).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import emit, scenarios
from .integrate import integrate
from .measure import occupation_measure
from .phase import BUILTIN_SYSTEMS, channel_system
from .scenarios import ScenarioReport
from .shape import (PeriodGroupInput, circle_isotopy, gamma_generator,
                    graph_isotopy, kappa_circle_estimate,
                    kappa_graph_estimate, lagrange_flux, parse_gamma_term,
                    pb_plus_estimate)
from .subdiff import (SampledFunction, clarke_subdifferential,
                      dini_lower_derivative, lebourg_witness)

STOCHASTIC = {"channel", "pendulum-alpha", "pathological", "pbplus",
              "subdiff", "kappa"}

DEFAULTS = {
    "channel": {"eps": 0.05, "K": 2.0, "T": 200.0, "dt": 1e-3,
                "n_orbits": 32, "seed": None},
    "annulus": {"T": 100.0, "dt": 1e-3},
    "pendulum-alpha": {"c_min": -2.0, "c_max": 2.0, "n_classes": 17,
                       "N": 64, "seed": None},
    "pathological": {"p0": "1,0", "r": 0.3, "T": 50.0, "dt": 1e-3,
                     "seed": None},
    "flux": {"r_start": 4.0, "r_end": 2.0, "graph_c": None},
    "gamma": {"generators": ""},
    "kappa": {"family": "circle", "r_start": 4.0, "flux": "12pi",
              "c": "0.5", "order": 2, "system": "annulus", "seed": None},
    "pbplus": {"system": "channel", "eps": 0.05, "K": 2.0, "c": "0,1",
               "order": 2, "seed": None},
    "subdiff": {"radius": 0.1, "n_samples": 128, "seed": None},
}


def _load_config(path):
    if path is None:
        return {}
    if path.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    with open(path) as fh:
        return json.load(fh)


def _resolve(subcommand, args, config):
    resolved = dict(DEFAULTS[subcommand])
    for key, val in config.items():
        if key not in resolved:
            raise KeyError(f"unknown config key {key!r} for {subcommand!r}; "
                           f"known: {sorted(resolved)}")
        resolved[key] = val
    for key in resolved:
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            resolved[key] = flag
    return resolved


def _parse_floats(text):
    return [float(t) for t in str(text).split(",") if t.strip()]


def _run_subdiff_suite(radius, n_samples, seed, outdir, emit_flags):
    report = ScenarioReport("subdiff", {"radius": radius,
                                        "n_samples": n_samples, "seed": seed})
    f_abs = SampledFunction(lambda x: float(np.abs(x[0])),
                            gradient=lambda x: np.sign(x),
                            box=(np.array([-2.0]), np.array([2.0])),
                            lipschitz=1.0)
    hull = clarke_subdifferential(f_abs, [0.0], radius=radius,
                                  n_samples=n_samples, seed=seed)
    report.check("d|x|(0) lower endpoint", hull.interval()[0], -1.0, 1e-3,
                 "DERIVED")
    report.check("d|x|(0) upper endpoint", hull.interval()[1], 1.0, 1e-3,
                 "DERIVED")
    dini = dini_lower_derivative(f_abs, [0.0], [1.0])
    report.check("Dini lower derivative of |x| at 0 in direction +1",
                 dini.value, 1.0, 1e-12, "TRIVIAL")

    f_max = SampledFunction(
        lambda x: float(np.max(x)),
        gradient=lambda x: (np.arange(2) == int(np.argmax(x))).astype(float),
        box=(np.array([-2.0, -2.0]), np.array([2.0, 2.0])), lipschitz=1.0)
    hull2 = clarke_subdifferential(f_max, [0.0, 0.0], radius=radius,
                                   n_samples=n_samples, seed=seed)
    verts = hull2.vertices[np.lexsort((hull2.vertices[:, 1],
                                       hull2.vertices[:, 0]))]
    err = float(np.max(np.abs(verts - np.array([[0.0, 1.0], [1.0, 0.0]]))))
    report.check("max(x,y) hull vertex error", err, 0.0, 1e-3, "DERIVED")

    f_smooth = SampledFunction(lambda x: float(np.sum(x ** 2)),
                               box=(np.array([-2.0]), np.array([2.0])),
                               lipschitz=4.0)
    wit = lebourg_witness(f_smooth, [-1.0], [1.5])
    report.check("mean-value witness residual (smooth convex)", wit.residual,
                 0.0, 1e-6, "DERIVED")
    wit_kink = lebourg_witness(f_abs, [-1.0], [2.0])
    report.check("mean-value witness residual (kink)", wit_kink.residual,
                 0.0, 1e-6, "DERIVED")
    if outdir is not None:
        os.makedirs(outdir, exist_ok=True)
        report.artifacts.append(hull.to_json(
            os.path.join(outdir, "abs_subdifferential.json")))
        report.artifacts.append(hull2.to_json(
            os.path.join(outdir, "max_subdifferential.json")))
        report.write(outdir)
    return report


def _run_flux(resolved, outdir, emit_flags):
    report = ScenarioReport("flux", dict(resolved))
    if resolved.get("graph_c"):
        c = _parse_floats(resolved["graph_c"])
        vals = lagrange_flux(graph_isotopy(c))
        for i, (got, want) in enumerate(zip(vals, c)):
            report.check(f"graph flux component {i + 1}", got, want, 1e-6,
                         "DERIVED")
    else:
        r0, r1 = float(resolved["r_start"]), float(resolved["r_end"])
        val = lagrange_flux(circle_isotopy(r0, r1))[0]
        report.check("circle flux pairing", val,
                     math.pi * (r0 ** 2 - r1 ** 2), 1e-6, "DERIVED")
    if outdir is not None:
        report.write(outdir)
    return report


def _run_gamma(resolved, outdir, emit_flags):
    result = gamma_generator(PeriodGroupInput.parse(resolved["generators"]))
    print(result)
    report = ScenarioReport("gamma", dict(resolved))
    report.check_flag("generator computed", True, "DERIVED",
                      value=str(result))
    if outdir is not None:
        report.write(outdir)
    return report


def _run_kappa(resolved, outdir, emit_flags):
    report = ScenarioReport("kappa", dict(resolved))
    if resolved["family"] == "circle":
        system = BUILTIN_SYSTEMS[resolved["system"]]()
        pairing = parse_gamma_term(resolved["flux"]).numeric()
        est = kappa_circle_estimate(system, float(resolved["r_start"]),
                                    pairing)
        report.check_flag(
            "upper bound computed", True, "DERIVED",
            value=f"kappa <= {est.bound:.6g} at r_end="
                  f"{est.witness['r_end']:.6g}")
    else:
        name = resolved["system"]
        if name == "annulus":
            raise ValueError("graph families need a torus system")
        system = BUILTIN_SYSTEMS[name]()
        c = _parse_floats(resolved["c"])
        est = kappa_graph_estimate(system, c, order=int(resolved["order"]),
                                   seed=int(resolved["seed"]))
        report.check_flag("upper bound computed", True, "DERIVED",
                          value=f"kappa <= {est.bound:.6g}")
    if outdir is not None:
        report.write(outdir)
    return report


def _run_pbplus(resolved, outdir, emit_flags):
    report = ScenarioReport("pbplus", dict(resolved))
    system = channel_system(float(resolved["eps"]), float(resolved["K"]))
    traj = integrate(system, [0.0, 0.3, 0.5, 0.0], 60.0, 1e-3,
                     record_every=50)
    mu = occupation_measure(traj, (10.0, 50.0))
    c = _parse_floats(resolved["c"])
    bound = pb_plus_estimate(system, mu.points, c,
                             fourier_order=int(resolved["order"]),
                             seed=int(resolved["seed"]))
    report.check_flag("upper bound computed", True, "DERIVED",
                      value=f"pb+ <= {bound.value:.6g} (order "
                            f"{bound.order})")
    if outdir is not None:
        report.write(outdir)
    return report


def build_parser():
    parser = argparse.ArgumentParser(
        prog="matherlab",
        description="Numerical laboratory for invariant measures of "
                    "Hamiltonian flows")
    parser.add_argument("--config", help="TOML/JSON config file")
    parser.add_argument("--out", help="output directory "
                        "(default MATHERLAB_OUT or ./matherlab_out)")
    parser.add_argument("--emit", default="csv,json",
                        help="comma list from csv,json,gnuplot")
    parser.add_argument("--threads", type=int, default=None,
                        help="cap batch parallelism")
    parser.add_argument("--dry-run", action="store_true",
                        help="validate configuration without computing")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("channel", help="superconductivity-channel scenario")
    p.add_argument("--eps", type=float)
    p.add_argument("--K", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--n-orbits", type=int, dest="n_orbits")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("annulus", help="planar annulus scenario")
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float)

    p = sub.add_parser("pendulum-alpha", help="alpha-function scan")
    p.add_argument("--c-min", type=float, dest="c_min")
    p.add_argument("--c-max", type=float, dest="c_max")
    p.add_argument("--n-classes", type=int, dest="n_classes")
    p.add_argument("--N", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("pathological", help="flat integrable profile")
    p.add_argument("--p0")
    p.add_argument("--r", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("flux", help="Lagrange flux quadrature")
    p.add_argument("--r-start", type=float, dest="r_start")
    p.add_argument("--r-end", type=float, dest="r_end")
    p.add_argument("--graph-c", dest="graph_c")

    p = sub.add_parser("gamma", help="period-group generator")
    p.add_argument("--generators")

    p = sub.add_parser("kappa", help="kappa upper bound")
    p.add_argument("--family", choices=["circle", "graph"])
    p.add_argument("--r-start", type=float, dest="r_start")
    p.add_argument("--flux")
    p.add_argument("--c")
    p.add_argument("--order", type=int)
    p.add_argument("--system")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("pbplus", help="pb+ upper bound on a channel segment")
    p.add_argument("--eps", type=float)
    p.add_argument("--K", type=float)
    p.add_argument("--c")
    p.add_argument("--order", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("subdiff", help="subdifferential demo suite")
    p.add_argument("--radius", type=float)
    p.add_argument("--n-samples", type=int, dest="n_samples")
    p.add_argument("--seed", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        resolved = _resolve(args.command, args, config)
    except (KeyError, OSError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    if args.command in STOCHASTIC and resolved.get("seed") is None:
        print(f"configuration error: --seed is mandatory for "
              f"{args.command!r}", file=sys.stderr)
        return 2

    outdir = args.out or os.environ.get("MATHERLAB_OUT") or "matherlab_out"
    emit_flags = tuple(t.strip() for t in args.emit.split(",") if t.strip())
    bad = [t for t in emit_flags if t not in ("csv", "json", "gnuplot")]
    if bad:
        print(f"configuration error: unknown emit flags {bad}",
              file=sys.stderr)
        return 2

    if args.dry_run:
        print(f"{args.command}: configuration valid")
        for key in sorted(resolved):
            print(f"  {key} = {resolved[key]}")
        return 0

    try:
        if args.command == "channel":
            report = scenarios.run_channel(
                eps=float(resolved["eps"]), K=float(resolved["K"]),
                T=float(resolved["T"]), dt=float(resolved["dt"]),
                n_orbits=int(resolved["n_orbits"]),
                seed=int(resolved["seed"]), outdir=outdir,
                emit_flags=emit_flags, threads=args.threads)
        elif args.command == "annulus":
            report = scenarios.run_annulus(
                T=float(resolved["T"]), dt=float(resolved["dt"]),
                outdir=outdir, emit_flags=emit_flags, threads=args.threads)
        elif args.command == "pendulum-alpha":
            report = scenarios.run_pendulum_alpha(
                c_min=float(resolved["c_min"]),
                c_max=float(resolved["c_max"]),
                n_classes=int(resolved["n_classes"]), N=int(resolved["N"]),
                seed=int(resolved["seed"]), outdir=outdir,
                emit_flags=emit_flags, threads=args.threads)
        elif args.command == "pathological":
            report = scenarios.run_pathological(
                p0=_parse_floats(resolved["p0"]), r=float(resolved["r"]),
                seed=int(resolved["seed"]), T=float(resolved["T"]),
                dt=float(resolved["dt"]), outdir=outdir,
                emit_flags=emit_flags, threads=args.threads)
        elif args.command == "flux":
            report = _run_flux(resolved, outdir, emit_flags)
        elif args.command == "gamma":
            report = _run_gamma(resolved, outdir, emit_flags)
        elif args.command == "kappa":
            report = _run_kappa(resolved, outdir, emit_flags)
        elif args.command == "pbplus":
            report = _run_pbplus(resolved, outdir, emit_flags)
        else:
            report = _run_subdiff_suite(
                radius=float(resolved["radius"]),
                n_samples=int(resolved["n_samples"]),
                seed=int(resolved["seed"]), outdir=outdir,
                emit_flags=emit_flags)
    except Exception as exc:  # numerical failure
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3

    print(report.table())
    if not report.all_passed:
        path = os.path.join(outdir, f"{report.scenario}_report.json")
        print(f"failing rows; report at {path}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
