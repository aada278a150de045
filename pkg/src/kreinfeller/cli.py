"""Command-line pipeline: measures, dimension profiles, condition checks,
embedding criteria, spectra, the string oracle, and geometry probes.

Exit codes: 0 success, 2 validation failure, 3 budget exceeded, 4 numeric
failure.  Failures emit a machine-readable JSON object
{"code", "message", "context"} on stderr.  Identical configuration and seed
produce byte-identical CSV/JSON outputs; SVG output differs only in a
creation-date comment, suppressed by --no-meta.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dimension import (
    RadiusLadder,
    ball_profile,
    check_conditions,
    estimate_linf_dim,
)
from .embedding import embedding_verdict, mazja_small_scale, mazja_tail, poincare_probe_line
from .errors import (
    AssemblyError,
    BudgetExceeded,
    DomainError,
    NumericalError,
    ToolkitError,
    ValidationError,
)
from .galerkin import (
    build_mesh,
    build_system,
    discrete_string_oracle,
    export_matrix_coo,
    solve_spectrum,
    weyl_counting,
)
from .geometry import ConeAnnulus, annulus_chord_bracket, inclusion_probe
from .ifs import IFSystem, MeasureApprox, discretize, pushforward

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BUDGET = 3
EXIT_NUMERIC = 4


def _fail(code: int, message: str, context: dict | None = None) -> int:
    doc = {"code": code, "message": message, "context": context or {}}
    sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")
    return code


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _load_ifs(args) -> IFSystem:
    with open(args.ifs, encoding="utf-8") as f:
        return IFSystem.from_json(json.load(f))


def _load_measure(args) -> MeasureApprox:
    """Measure from --atoms CSV if given, else discretize the --ifs system."""
    if getattr(args, "atoms", None):
        meta_path = Path(args.atoms).with_suffix(".meta.json")
        resolution = 0.0
        if meta_path.exists():
            resolution = json.loads(meta_path.read_text()).get("resolution", 0.0)
        return MeasureApprox.from_csv(args.atoms, resolution=resolution)
    ifs = _load_ifs(args)
    return discretize(ifs, args.level, representative=args.representative)


def _parse_h(spec: str):
    """'triadic:L' or a float element size."""
    if spec.startswith("triadic:"):
        return {"triadic_level": int(spec.split(":", 1)[1])}
    return {"h": float(spec)}


def _mpl():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "kreinfeller"
    import matplotlib.pyplot as plt

    return plt


def _save_svg(fig, path: Path, no_meta: bool) -> None:
    meta = {"Date": None} if no_meta else None
    fig.savefig(path, format="svg", metadata=meta)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_measure(args) -> int:
    ifs = _load_ifs(args)
    mu = discretize(ifs, args.level, representative=args.representative)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    mu.to_csv(out / "atoms.csv")

    invariance = None
    if args.level >= 1:
        prev = discretize(ifs, args.level - 1, representative=args.representative)
        pushed = pushforward(ifs, prev)
        pos_dev = float(np.abs(np.sort(pushed.atoms, axis=0) - np.sort(mu.atoms, axis=0)).max())
        w_dev = float(np.abs(np.sort(pushed.weights) - np.sort(mu.weights)).max())
        invariance = {
            "max_position_deviation": pos_dev,
            "max_weight_deviation": w_dev,
            "cylinder_diameter_bound": mu.resolution,
        }
    osc = ifs.verify_osc(seed=args.seed) if ifs.osc_declared else None
    meta = {
        "level": args.level,
        "n": ifs.ambient_dim,
        "atom_count": mu.atom_count,
        "weight_sum": float(mu.weights.sum()),
        "dropped_mass": mu.dropped_mass,
        "resolution": mu.resolution,
        "representative": args.representative,
        "invariance_check": invariance,
        "osc_check": osc,
    }
    _write_json(out / "meta.json", meta)
    return EXIT_OK


def cmd_dim(args) -> int:
    mu = _load_measure(args)
    ladder = RadiusLadder.parse(args.ladder)
    profile = ball_profile(mu, ladder, seed=args.seed)
    est = estimate_linf_dim(profile)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    profile.to_csv(out / "profile.csv")
    doc = est.to_json()
    doc["probe_centers"] = profile.centers
    doc["reliable"] = profile.reliable
    _write_json(out / "dim.json", doc)
    if args.plot:
        plt = _mpl()
        fig, ax = plt.subplots()
        ax.loglog(profile.radii, profile.sup_mass, "o-")
        ax.set_xlabel("r")
        ax.set_ylabel("sup ball mass")
        _save_svg(fig, out / "profile.svg", args.no_meta)
        plt.close(fig)
    return EXIT_OK


def cmd_conditions(args) -> int:
    ifs = _load_ifs(args)
    profile = None
    if args.level > 0:
        mu = discretize(ifs, args.level, representative=args.representative)
        ladder = RadiusLadder.parse(args.ladder)
        profile = ball_profile(mu, ladder, seed=args.seed)
    report = check_conditions(ifs, args.n, profile)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if profile is not None:
        profile.to_csv(out / "profile.csv")
    _write_json(out / "conditions.json", report.to_json())
    return EXIT_OK


def cmd_embed(args) -> int:
    mu = _load_measure(args)
    if mu.dim < args.n:
        mu = mu.embedded(args.n)
    ladder = RadiusLadder.parse(args.ladder)
    scan = mazja_small_scale(mu, args.q, args.n, ladder, seed=args.seed)
    profile = ball_profile(mu, RadiusLadder(ladder.r_max, 0.5, max(ladder.count, 6)),
                           seed=args.seed)
    est = estimate_linf_dim(profile)
    tail = None
    if args.tail:
        Rs = np.array([float(t) for t in args.tail.split(",")])
        tail = mazja_tail(mu, args.q, args.n, Rs, seed=args.seed)
    report = embedding_verdict(scan, est, args.n, args.q, tail=tail)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scan.to_csv(out / "smallscale.csv")
    if tail is not None:
        tail.to_csv(out / "tail.csv")
    _write_json(out / "mazja.json", report.to_json())
    if args.plot:
        plt = _mpl()
        fig, ax = plt.subplots()
        ax.loglog(scan.deltas, scan.running_sup, "o-", label="running sup")
        ax.loglog(scan.deltas, scan.windowed_sup, "s--", label="windowed sup")
        ax.set_xlabel("delta")
        ax.legend()
        _save_svg(fig, out / "smallscale.svg", args.no_meta)
        plt.close(fig)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    mu = _load_measure(args)
    if mu.dim != 1:
        return _fail(EXIT_VALIDATION, "spectrum command currently drives 1D meshes",
                     {"dim": mu.dim})
    lo = float(mu.atoms.min())
    hi = float(mu.atoms.max())
    domain = (min(0.0, lo), max(1.0, hi))
    mesh = build_mesh(domain, **_parse_h(args.h))
    sys_ = build_system(mesh, mu)
    spec = solve_spectrum(sys_, args.k)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec.to_csv(out / "spectrum.csv")
    meta = {
        "k": spec.count,
        "lambda1": float(spec.eigenvalues[0]),
        "method": spec.method,
        "rank_note": spec.rank_note,
        "deflation_size": int(len(sys_.deflation)),
        "dropped_mass": sys_.dropped_mass,
        "mesh_nodes": mesh.n_nodes,
    }
    if spec.count >= 20:
        fit = weyl_counting(spec)
        meta["weyl_exponent"] = fit.exponent
        fit.to_csv(out / "counting.csv")
    _write_json(out / "spectrum.json", meta)

    traces = min(spec.count, args.trace_count)
    xs_nodes = mesh.node_coords()[:, 0]
    with open(out / "eigenfunctions.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("x," + ",".join(f"u{j + 1}" for j in range(traces)) + "\n")
        for i in range(mesh.n_nodes):
            row = [spec.coefficients[i, j] for j in range(traces)]
            f.write("%.17g," % xs_nodes[i]
                    + ",".join("%.17g" % v for v in row) + "\n")
    if args.export_matrices:
        export_matrix_coo(out / "K.txt", sys_.K)
        export_matrix_coo(out / "M.txt", sys_.M)
    if args.plot:
        plt = _mpl()
        fig, ax = plt.subplots()
        xs = mesh.node_coords()[:, 0]
        for j in range(traces):
            ax.plot(xs, spec.coefficients[:, j], label=f"u{j + 1}")
        ax.set_xlabel("x")
        ax.legend(loc="upper right", fontsize="small")
        _save_svg(fig, out / "eigenfunctions.svg", args.no_meta)
        plt.close(fig)
        if spec.count >= 20:
            fit = weyl_counting(spec)
            fig, ax = plt.subplots()
            ax.loglog(fit.lambdas, fit.counts, ".", label="N(lambda)")
            lo_i, hi_i = fit.window
            xs_fit = fit.lambdas[lo_i:hi_i]
            c0 = fit.counts[lo_i] / fit.lambdas[lo_i] ** fit.exponent
            ax.loglog(xs_fit, c0 * xs_fit**fit.exponent, "-",
                      label=f"slope {fit.exponent:.3f}")
            ax.set_xlabel("lambda")
            ax.legend()
            _save_svg(fig, out / "counting.svg", args.no_meta)
            plt.close(fig)
    return EXIT_OK


def cmd_oracle(args) -> int:
    mu = _load_measure(args)
    spec = discrete_string_oracle(mu, args.k if args.k > 0 else None)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec.to_csv(out / "oracle.csv")
    _write_json(out / "oracle.json", {
        "k": spec.count,
        "lambda1": float(spec.eigenvalues[0]),
        "method": spec.method,
    })
    return EXIT_OK


def cmd_geometry_probe(args) -> int:
    cone = ConeAnnulus(
        vertex=np.zeros(args.n),
        axis=np.eye(args.n)[0],
        rho=args.rho,
        delta=args.delta,
    )
    probe = inclusion_probe(cone, args.samples, seed=args.seed)
    control = inclusion_probe(cone, args.samples, seed=args.seed, widen_beta=6.0)
    brackets = {
        branch: dict(zip(("cmin", "cmax"),
                         annulus_chord_bracket(branch, args.rho, args.radius,
                                               delta_points=50, lambda_points=50)))
        for branch in ("flat", "hyperbolic", "spherical")
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "geometry.json", {
        "cone": {"rho": args.rho, "delta": args.delta, "n": args.n,
                 "beta": cone.beta, "solid_angle": cone.solid_angle},
        "inclusion": probe,
        "widened_control": control,
        "chord_over_delta": brackets,
    })
    return EXIT_OK


def cmd_poincare(args) -> int:
    mu = _load_measure(args)
    scales = np.array([float(t) for t in args.scales.split(",")])
    probe = poincare_probe_line(mu, scales, family=args.family)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "poincare.json", probe.to_json())
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _add_common(p, *, needs_measure=False):
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=0,
                   help="worker hint (results are thread-count independent)")
    p.add_argument("--plot", action="store_true")
    p.add_argument("--no-meta", action="store_true",
                   help="suppress the SVG creation-date comment")
    if needs_measure:
        p.add_argument("--ifs", help="IFS JSON document")
        p.add_argument("--atoms", help="re-ingest a previously written atoms.csv")
        p.add_argument("--level", type=int, default=6)
        p.add_argument("--representative", default="fixed_point",
                       choices=("fixed_point", "left_endpoint", "centroid"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kreinfeller",
        description="fractal-measure Laplacians: measures, dimensions, embeddings, spectra",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="discretize an IFS invariant measure")
    _add_common(p, needs_measure=True)

    p = sub.add_parser("dim", help="ball profile and dimension estimate")
    _add_common(p, needs_measure=True)
    p.add_argument("--ladder", default="0.3:0.5:8", help="rMax:factor:count")

    p = sub.add_parser("conditions", help="compactness condition checks")
    _add_common(p, needs_measure=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ladder", default="0.3:0.5:8")

    p = sub.add_parser("embed", help="compact-embedding criteria")
    _add_common(p, needs_measure=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--ladder", default="0.3:0.05:3")
    p.add_argument("--tail", default=None, help="comma-separated R ladder")

    p = sub.add_parser("spectrum", help="Galerkin Dirichlet spectrum")
    _add_common(p, needs_measure=True)
    p.add_argument("--h", default="triadic:6", help="element size or triadic:L")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--trace-count", type=int, default=5)
    p.add_argument("--export-matrices", action="store_true")

    p = sub.add_parser("oracle", help="vibrating-string oracle eigenvalues")
    _add_common(p, needs_measure=True)
    p.add_argument("--k", type=int, default=0, help="0 = all")

    p = sub.add_parser("geometry-probe", help="cone-annulus inclusion and chord brackets")
    _add_common(p)
    p.add_argument("--n", type=int, default=2, choices=(2, 3))
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--radius", type=float, default=1.0, help="model radius R")
    p.add_argument("--samples", type=int, default=100_000)

    p = sub.add_parser("poincare", help="Poincare test-family ratios on the line")
    _add_common(p, needs_measure=True)
    p.add_argument("--family", default="plateau_ramps",
                   choices=("plateau_ramps", "tent_growing"))
    p.add_argument("--scales", default="10,100,1000,10000,100000,1000000")
    return parser


_DISPATCH = {
    "measure": cmd_measure,
    "dim": cmd_dim,
    "conditions": cmd_conditions,
    "embed": cmd_embed,
    "spectrum": cmd_spectrum,
    "oracle": cmd_oracle,
    "geometry-probe": cmd_geometry_probe,
    "poincare": cmd_poincare,
}


_NEEDS_IFS = {"measure", "conditions"}
_NEEDS_MEASURE = {"dim", "embed", "spectrum", "oracle", "poincare"}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command in _NEEDS_IFS and not getattr(args, "ifs", None):
        return _fail(EXIT_VALIDATION, f"{args.command} needs --ifs")
    if args.command in _NEEDS_MEASURE and not getattr(args, "ifs", None) \
            and not getattr(args, "atoms", None):
        return _fail(EXIT_VALIDATION, "need --ifs or --atoms")
    try:
        return _DISPATCH[args.command](args)
    except BudgetExceeded as exc:
        return _fail(EXIT_BUDGET, str(exc))
    except (ValidationError, DomainError) as exc:
        return _fail(EXIT_VALIDATION, str(exc))
    except (AssemblyError, NumericalError) as exc:
        return _fail(EXIT_NUMERIC, str(exc))
    except ToolkitError as exc:
        return _fail(EXIT_NUMERIC, str(exc))
    except FileNotFoundError as exc:
        return _fail(EXIT_VALIDATION, f"input not found: {exc.filename}")


if __name__ == "__main__":
    sys.exit(main())
