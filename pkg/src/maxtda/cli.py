"""Command-line front end.

Every file-producing run writes a manifest JSON alongside its primary output
with the resolved parameters, seed, paths, version, and wall time, enough to
replay the run bit-exactly. Exit codes: 0 success, 1 usage error, 2 runtime
error; diagnostics go to stderr as a single line.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .datagen import gen_ellipses3d, gen_rv_series, gen_two_circles
from .density import smooth_subsample
from .filtration import load_diagram, save_diagram
from .geometry import mean_knn_distance, read_point_cloud, write_point_cloud
from .inference import (
    ParameterGrid,
    bootstrap_talpha,
    classify_features,
    load_band,
    save_band,
    select_parameters,
)
from .metrics import bottleneck, max_persistence
from .pipelines import PipelineSpec, pipeline_diagram
from .plotting import plot_point_cloud, plot_time_series, render_diagram_svg
from .rng import derive_seed
from .timeseries import (
    EmbeddingConfig,
    TimeSeries,
    ami_profile,
    cao_dimension,
    delay_embed,
    pca_project,
    periodicity_score,
    read_time_series,
    write_time_series,
)

_SUBSAMPLE_STREAM = 7  # fixed stream index for the one-off `sample` command


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems must exit 1, not argparse's 2
        raise UsageError(message)


def fmt(x: float) -> str:
    """Floating output with 17 significant digits (determinism auditable)."""
    return format(float(x), ".17g")


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    version: str = __version__
    wall_time_s: float = 0.0

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2, default=str)
            fh.write("\n")


def _manifest_path(primary_output: str) -> str:
    return str(primary_output) + ".manifest.json"


def _env_seed() -> int:
    return int(os.environ.get("MAXTDA_SEED", "0"))


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _int_range(text: str) -> list[int]:
    if ":" in text:
        a, b = text.split(":")
        return list(range(int(a), int(b) + 1))
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _pipeline_from_args(args, bandwidth_fallback: float | None = None) -> PipelineSpec:
    return PipelineSpec(
        kind=args.pipeline,
        bandwidth=getattr(args, "filter_sigma", None)
        or getattr(args, "sigma", None)
        or bandwidth_fallback,
        dtm_m=getattr(args, "m", 0.1),
        grid_res=getattr(args, "grid_res", None),
        delta_max=getattr(args, "delta_max", None),
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="maxtda", description="Maximal-persistence TDA toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seed=True, jobs=False):
        p.add_argument("--config", help="JSON file mirroring the flags; flags win")
        if seed:
            p.add_argument("--seed", type=int, default=None, help="default: $MAXTDA_SEED or 0")
        if jobs:
            p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("gen", help="generate benchmark data")
    p.add_argument("dataset", choices=["two-circles", "ellipses3d", "rv"])
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--which", choices=["planet", "spot", "combined"], default="combined")
    p.add_argument("--out", required=True)
    add_common(p)

    p = sub.add_parser("sample", help="level-set rejection subsample of a cloud")
    p.add_argument("--input", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--B", dest="size", type=int, required=True)
    p.add_argument("--out", required=True)
    add_common(p)

    p = sub.add_parser("diagram", help="persistence diagram of a cloud")
    p.add_argument("--input", required=True)
    p.add_argument("--pipeline", choices=["vr", "dtm", "kde"], default="vr")
    p.add_argument("--grid-res", type=int, default=None)
    p.add_argument("--delta-max", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None, help="kde filtration bandwidth")
    p.add_argument("--m", type=float, default=0.1, help="dtm resolution")
    p.add_argument("--max-hom-dim", type=int, default=1)
    p.add_argument("--out", required=True)
    add_common(p, seed=False)

    p = sub.add_parser("bottleneck", help="bottleneck distance of two diagrams")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--dim", type=int, default=1)
    add_common(p, seed=False)

    p = sub.add_parser("mp", help="maximal persistence of a diagram")
    p.add_argument("diagram")
    p.add_argument("--dim", type=int, default=1)
    add_common(p, seed=False)

    p = sub.add_parser("select-params", help="pick (lambda*, sigma*) on a grid")
    p.add_argument("--input", required=True)
    p.add_argument("--pipeline", choices=["vr", "dtm", "kde"], default="kde")
    p.add_argument("--lambdas", type=_float_list, required=True)
    p.add_argument("--sigmas", type=_float_list, default=None)
    p.add_argument("--knn", type=_int_range, default=None, help="k-NN bandwidth grid, e.g. 1:10")
    p.add_argument("--T", dest="top_features", type=int, default=1)
    p.add_argument("--B", dest="size", type=int, default=None)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--grid-res", type=int, default=None)
    p.add_argument("--delta-max", type=float, default=None)
    p.add_argument("--m", type=float, default=0.1)
    p.add_argument("--out", required=True, help="C_T table CSV")
    add_common(p, jobs=True)

    p = sub.add_parser("infer", help="bootstrap rejection band")
    p.add_argument("--input", required=True)
    p.add_argument("--pipeline", choices=["vr", "dtm", "kde"], default="kde")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True, help="subsample bandwidth")
    p.add_argument("--filter-sigma", type=float, default=None, help="kde filtration bandwidth")
    p.add_argument("--m", type=float, default=0.1)
    p.add_argument("--grid-res", type=int, default=None)
    p.add_argument("--delta-max", type=float, default=None)
    p.add_argument("--N", dest="n_boot", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--B", dest="size", type=int, default=None)
    p.add_argument("--no-subsample", action="store_true", help="plain bootstrap of the raw cloud")
    p.add_argument("--out", required=True)
    add_common(p, jobs=True)

    p = sub.add_parser("tde", help="time-delay embedding of a series")
    p.add_argument("--input", required=True)
    p.add_argument("--tau", default="auto")
    p.add_argument("--dim", default="auto", help="embedding dimension M+1")
    p.add_argument("--pca", type=int, default=None)
    p.add_argument("--bins", type=int, default=16)
    p.add_argument("--out", required=True)
    add_common(p, seed=False)

    p = sub.add_parser("score", help="periodicity score of a diagram")
    p.add_argument("diagram")
    p.add_argument("--normalized", action="store_true")
    add_common(p, seed=False)

    p = sub.add_parser("plot", help="render a diagram to SVG")
    p.add_argument("--diagram", required=True)
    p.add_argument("--band", default=None)
    p.add_argument("--title", default=None)
    p.add_argument("--out", required=True)
    add_common(p, seed=False)

    p = sub.add_parser("reproduce", help="run a full experiment preset")
    p.add_argument("experiment", choices=["annulus", "ellipses", "rv"])
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--N", dest="n_boot", type=int, default=None,
                   help="bootstrap replicates (default 200 annulus, 50 ellipses, 100 rv)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--grid-res", type=int, default=None)
    p.add_argument("--outdir", required=True)
    add_common(p, jobs=True)

    return parser


def _cmd_gen(args) -> list[str]:
    if args.dataset == "two-circles":
        cloud, labels = gen_two_circles(args.seed, args.scale)
        write_point_cloud(args.out, cloud, labels)
    elif args.dataset == "ellipses3d":
        cloud, labels = gen_ellipses3d(args.seed, args.scale)
        write_point_cloud(args.out, cloud, labels)
    else:
        series = gen_rv_series(args.seed, args.which)
        write_time_series(args.out, series)
    return [args.out]


def _cmd_sample(args) -> list[str]:
    cloud, _ = read_point_cloud(args.input)
    pts = smooth_subsample(
        cloud, args.lam, args.sigma, args.size, derive_seed(args.seed, _SUBSAMPLE_STREAM)
    )
    write_point_cloud(args.out, pts)
    return [args.out]


def _cmd_diagram(args) -> list[str]:
    cloud, _ = read_point_cloud(args.input)
    spec = _pipeline_from_args(args)
    if spec.kind == "kde" and spec.bandwidth is None:
        raise UsageError("--sigma is required for the kde pipeline")
    diagram = pipeline_diagram(cloud, spec, max_hom_dim=args.max_hom_dim)
    save_diagram(diagram, args.out)
    return [args.out]


def _cmd_bottleneck(args) -> list[str]:
    d1 = load_diagram(args.first)
    d2 = load_diagram(args.second)
    print(fmt(bottleneck(d1, d2, args.dim)))
    return []


def _cmd_mp(args) -> list[str]:
    print(fmt(max_persistence(load_diagram(args.diagram), args.dim)))
    return []


def _cmd_select_params(args) -> list[str]:
    cloud, _ = read_point_cloud(args.input)
    if args.sigmas is not None:
        sigmas = args.sigmas
    else:
        ks = args.knn if args.knn is not None else list(range(1, 11))
        sigmas = [mean_knn_distance(cloud, k) for k in ks]
    grid = ParameterGrid(args.lambdas, sigmas, top_features=args.top_features)
    size = args.size if args.size is not None else cloud.shape[0]
    spec = _pipeline_from_args(args)
    lam, sigma, table = select_parameters(
        cloud, grid, spec, args.dim, size, args.seed, jobs=args.jobs
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("# lambda,sigma,score,ok\n")
        for row in table:
            score = fmt(row[2]) if math.isfinite(row[2]) else "-inf"
            fh.write(f"{fmt(row[0])},{fmt(row[1])},{score},{int(row[3])}\n")
    print(f"lambda*={fmt(lam)} sigma*={fmt(sigma)}")
    return [args.out]


def _cmd_infer(args) -> list[str]:
    cloud, _ = read_point_cloud(args.input)
    spec = _pipeline_from_args(args)
    band, records = bootstrap_talpha(
        cloud,
        args.lam,
        args.sigma,
        spec,
        args.dim,
        args.n_boot,
        args.alpha,
        args.seed,
        subsample_size=args.size,
        use_subsample=not args.no_subsample,
        jobs=args.jobs,
    )
    save_band(band, records, args.out)
    print(f"t_alpha={fmt(band.t_alpha)}")
    return [args.out]


def _cmd_tde(args) -> list[str]:
    series = read_time_series(args.input)
    n = len(series)
    if args.tau == "auto":
        tau = ami_profile(series, max(2, min(n // 2 - 1, n // 4)), bins=args.bins).selected_tau
    else:
        tau = int(args.tau)
    if args.dim == "auto":
        d_max = max(2, min(12, (n - 2) // max(tau, 1) - 1))
        edim = cao_dimension(series, tau, d_max)
    else:
        edim = int(args.dim)
    cloud = delay_embed(series, EmbeddingConfig(tau=tau, m=edim - 1))
    if args.pca is not None:
        cloud = pca_project(cloud, args.pca)
    write_point_cloud(args.out, cloud)
    print(f"tau={tau} dim={edim} rows={cloud.shape[0]}")
    return [args.out]


def _cmd_score(args) -> list[str]:
    diagram = load_diagram(args.diagram)
    print(fmt(periodicity_score(diagram, normalized=args.normalized)))
    return []


def _cmd_plot(args) -> list[str]:
    diagram = load_diagram(args.diagram)
    band = load_band(args.band)[0] if args.band else None
    render_diagram_svg(diagram, band, args.out, title=args.title)
    return [args.out]


def _reproduce_annulus(args, outdir: str) -> list[str]:
    outputs = []

    def path(name):
        p = os.path.join(outdir, name)
        outputs.append(p)
        return p

    cloud, labels = gen_two_circles(args.seed, args.scale)
    write_point_cloud(path("points.csv"), cloud, labels)
    plot_point_cloud(cloud, path("points.svg"), labels=labels, title="two circles")

    lambdas = [round(0.1 * i, 1) for i in range(1, 11)]
    sigmas = [mean_knn_distance(cloud, k) for k in range(1, 11)]
    grid = ParameterGrid(lambdas, sigmas, top_features=1)
    spec = PipelineSpec(kind="kde", grid_res=args.grid_res)
    lam, sigma, table = select_parameters(
        cloud, grid, spec, dim=1, subsample_size=cloud.shape[0], seed=args.seed, jobs=args.jobs
    )
    with open(path("selection.csv"), "w", encoding="utf-8") as fh:
        fh.write("# lambda,sigma,score,ok\n")
        for row in table:
            score = fmt(row[2]) if math.isfinite(row[2]) else "-inf"
            fh.write(f"{fmt(row[0])},{fmt(row[1])},{score},{int(row[3])}\n")

    subsample = smooth_subsample(
        cloud, lam, sigma, cloud.shape[0], derive_seed(args.seed, _SUBSAMPLE_STREAM)
    )
    write_point_cloud(path("subsample.csv"), subsample)
    plot_point_cloud(subsample, path("subsample.svg"), title="smooth subsample")

    final_spec = PipelineSpec(kind="kde", bandwidth=sigma, grid_res=args.grid_res)
    raw_diagram = pipeline_diagram(cloud, final_spec)
    sub_diagram = pipeline_diagram(subsample, final_spec)
    save_diagram(raw_diagram, path("diagram_raw.json"))
    save_diagram(sub_diagram, path("diagram_subsample.json"))

    band, records = bootstrap_talpha(
        cloud,
        lam,
        sigma,
        final_spec,
        dim=1,
        n_boot=args.n_boot,
        alpha=args.alpha,
        seed=args.seed,
        jobs=args.jobs,
    )
    save_band(band, records, path("band.json"))
    significant, rejected = classify_features(sub_diagram, band)
    with open(path("classification.json"), "w", encoding="utf-8") as fh:
        json.dump(
            {
                "lambda": lam,
                "sigma": sigma,
                "significant": significant,
                "rejected": rejected,
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    render_diagram_svg(raw_diagram, None, path("diagram_raw.svg"), title="raw KDE diagram")
    render_diagram_svg(
        sub_diagram, band, path("diagram_subsample.svg"), title="subsample KDE diagram"
    )
    return outputs


def _reproduce_ellipses(args, outdir: str) -> list[str]:
    outputs = []

    def path(name):
        p = os.path.join(outdir, name)
        outputs.append(p)
        return p

    cloud, labels = gen_ellipses3d(args.seed, args.scale)
    write_point_cloud(path("points.csv"), cloud, labels)
    plot_point_cloud(cloud, path("points.svg"), labels=labels, title="four ellipses")

    grid_res = args.grid_res if args.grid_res is not None else 20
    sigma = mean_knn_distance(cloud, 1)
    from .density import KdeModel, kde_eval

    dens = kde_eval(KdeModel(cloud, sigma), cloud)
    lambdas = [float(np.quantile(dens, q)) for q in (0.1, 0.25, 0.5, 0.75)]
    grid = ParameterGrid(lambdas, [sigma], top_features=1)
    spec = PipelineSpec(kind="kde", grid_res=grid_res)
    lam, sigma, table = select_parameters(
        cloud, grid, spec, dim=1, subsample_size=cloud.shape[0], seed=args.seed, jobs=args.jobs
    )
    with open(path("selection.csv"), "w", encoding="utf-8") as fh:
        fh.write("# lambda,sigma,score,ok\n")
        for row in table:
            score = fmt(row[2]) if math.isfinite(row[2]) else "-inf"
            fh.write(f"{fmt(row[0])},{fmt(row[1])},{score},{int(row[3])}\n")

    subsample = smooth_subsample(
        cloud, lam, sigma, cloud.shape[0], derive_seed(args.seed, _SUBSAMPLE_STREAM)
    )
    write_point_cloud(path("subsample.csv"), subsample)

    final_spec = PipelineSpec(kind="kde", bandwidth=sigma, grid_res=grid_res)
    raw_diagram = pipeline_diagram(cloud, final_spec)
    sub_diagram = pipeline_diagram(subsample, final_spec)
    save_diagram(raw_diagram, path("diagram_raw.json"))
    save_diagram(sub_diagram, path("diagram_subsample.json"))

    band_raw, rec_raw = bootstrap_talpha(
        cloud, lam, sigma, final_spec, 1, args.n_boot, args.alpha, args.seed,
        use_subsample=False, jobs=args.jobs,
    )
    band_sub, rec_sub = bootstrap_talpha(
        cloud, lam, sigma, final_spec, 1, args.n_boot, args.alpha, args.seed, jobs=args.jobs
    )
    save_band(band_raw, rec_raw, path("band_raw.json"))
    save_band(band_sub, rec_sub, path("band_subsample.json"))
    render_diagram_svg(raw_diagram, band_raw, path("diagram_raw.svg"), title="raw KDE diagram")
    render_diagram_svg(
        sub_diagram, band_sub, path("diagram_subsample.svg"), title="subsample KDE diagram"
    )
    mp_raw = max_persistence(raw_diagram, 1)
    mp_sub = max_persistence(sub_diagram, 1)
    with open(path("summary.json"), "w", encoding="utf-8") as fh:
        json.dump(
            {
                "lambda": lam,
                "sigma": sigma,
                "mp_raw": mp_raw,
                "mp_subsample": mp_sub,
                "t_alpha_raw": band_raw.t_alpha,
                "t_alpha_subsample": band_sub.t_alpha,
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    return outputs


def _reproduce_rv(args, outdir: str) -> list[str]:
    outputs = []

    def path(name):
        p = os.path.join(outdir, name)
        outputs.append(p)
        return p

    series = {name: gen_rv_series(args.seed, name) for name in ("planet", "spot", "combined")}
    for name, ts in series.items():
        write_time_series(path(f"rv_{name}.csv"), ts)
    plot_time_series(
        {name: ts.values for name, ts in series.items()}, path("rv_signals.svg")
    )

    planet_cfg = EmbeddingConfig(tau=4, m=15)
    spot_cfg = EmbeddingConfig(tau=12, m=7)
    embeddings = [
        ("planet", series["planet"], planet_cfg, 0.01),
        ("spot", series["spot"], spot_cfg, 0.05),
        ("combined_planet_params", series["combined"], planet_cfg, 0.01),
        ("combined_spot_params", series["combined"], spot_cfg, 0.01),
    ]

    scores = {}
    for index, (name, ts, cfg, dtm_m) in enumerate(embeddings):
        cloud = pca_project(delay_embed(ts, cfg), 2)
        write_point_cloud(path(f"embed_{name}.csv"), cloud)
        spec = PipelineSpec(kind="dtm", dtm_m=dtm_m, grid_res=args.grid_res)
        diagram = pipeline_diagram(cloud, spec)
        save_diagram(diagram, path(f"diagram_{name}.json"))
        sigma = mean_knn_distance(cloud, 1)
        band, records = bootstrap_talpha(
            cloud,
            0.0,
            sigma,
            spec,
            1,
            args.n_boot,
            args.alpha,
            derive_seed(args.seed, 100 + index),
            use_subsample=False,
            jobs=args.jobs,
        )
        save_band(band, records, path(f"band_{name}.json"))
        render_diagram_svg(diagram, band, path(f"diagram_{name}.svg"), title=name)
        scores[name] = periodicity_score(diagram)

        if name.startswith("combined"):
            from .density import KdeModel, kde_eval

            lam = float(np.quantile(kde_eval(KdeModel(cloud, sigma), cloud), 0.25))
            smooth = smooth_subsample(
                cloud, lam, sigma, cloud.shape[0], derive_seed(args.seed, 200 + index)
            )
            sdiagram = pipeline_diagram(smooth, spec)
            save_diagram(sdiagram, path(f"diagram_smooth_{name}.json"))
            render_diagram_svg(sdiagram, band, path(f"diagram_smooth_{name}.svg"),
                               title=f"smoothed {name}")
            scores[f"smooth_{name}"] = periodicity_score(sdiagram)

    with open(path("scores.csv"), "w", encoding="utf-8") as fh:
        fh.write("# embedding,score,normalized\n")
        for name, value in scores.items():
            fh.write(f"{name},{fmt(value)},{fmt(value / math.sqrt(3.0))}\n")
    return outputs


def _cmd_reproduce(args) -> list[str]:
    os.makedirs(args.outdir, exist_ok=True)
    if args.n_boot is None:
        args.n_boot = {"annulus": 200, "ellipses": 50, "rv": 100}[args.experiment]
    if args.experiment == "annulus":
        return _reproduce_annulus(args, args.outdir)
    if args.experiment == "ellipses":
        return _reproduce_ellipses(args, args.outdir)
    return _reproduce_rv(args, args.outdir)


_HANDLERS = {
    "gen": _cmd_gen,
    "sample": _cmd_sample,
    "diagram": _cmd_diagram,
    "bottleneck": _cmd_bottleneck,
    "mp": _cmd_mp,
    "select-params": _cmd_select_params,
    "infer": _cmd_infer,
    "tde": _cmd_tde,
    "score": _cmd_score,
    "plot": _cmd_plot,
    "reproduce": _cmd_reproduce,
}


def _apply_config(argv: list[str], parser: _Parser) -> list[str]:
    """Expand --config JSON into flags placed before the explicit ones."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config requires a path")
    with open(argv[i + 1], "r", encoding="utf-8") as fh:
        config = json.load(fh)
    rest = argv[:i] + argv[i + 2 :]
    if not rest:
        raise UsageError("missing subcommand")
    injected: list[str] = []
    for key, value in config.items():
        flag = "--" + str(key).replace("_", "-")
        if isinstance(value, bool):
            if value:
                injected.append(flag)
        else:
            injected.extend([flag, str(value)])
    # flags win on conflict: explicit argv comes last
    return rest[:1] + injected + rest[1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(argv, parser)
        args = parser.parse_args(argv)
        if getattr(args, "seed", None) is None and hasattr(args, "seed"):
            args.seed = _env_seed()
        start = time.monotonic()
        outputs = _HANDLERS[args.command](args)
        wall = time.monotonic() - start
        if outputs:
            params = {
                k: v
                for k, v in vars(args).items()
                if k not in ("command", "config") and not callable(v)
            }
            manifest = RunManifest(
                command=args.command,
                parameters=params,
                seed=int(getattr(args, "seed", 0) or 0),
                inputs=[v for k, v in vars(args).items() if k in ("input", "first", "second")],
                outputs=outputs,
                wall_time_s=wall,
            )
            manifest.write(_manifest_path(outputs[0]))
        return 0
    except UsageError as exc:
        print(f"maxtda: usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, RuntimeError, KeyError, json.JSONDecodeError) as exc:
        print(f"maxtda: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
