"""Command-line entry point.

Exit status: 0 on success, 1 on usage or validation errors, 2 on runtime errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path


from .analysis import clt_check, oracle_bound_profile, wireless_min_n
from .config import ConfigError, RunConfig, build_model, build_plan, build_schemes, load_config
from .estimator import estimate_trace, scheme_label
from .experiments import (
    ExperimentConfig,
    run_design_benchmark,
    run_mccv_stability,
    run_mccv_study,
    run_mse_study,
    run_wireless_study,
)
from .graph import bfs_annuli, read_edge_list, write_edge_list
from .mccv import split_residuals
from .model import RcmSpec, SbmSpec, model_truth, sample_graph, true_connection_probability
from .rng import child_seed, substream
from .svg import ChartSpec, render_svg

STUDIES = ("mse", "mccv", "stability", "wireless", "design")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="localdeg", description="Local connection-probability estimation on random graphs.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def cmd(name: str, help: str, config_required: bool = True) -> argparse.ArgumentParser:
        c = sub.add_parser(name, help=help)
        c.add_argument("--config", required=config_required, help="run configuration file")
        c.add_argument("--seed", type=int, help="master seed (overrides [run] seed)")
        c.add_argument("--origin-coords", help="comma-separated origin feature, overrides the config")
        c.add_argument("--origin-from-data", help="take the origin from the named data point")
        return c

    c = cmd("sample", "sample one graph and write its edge list")
    c.add_argument("--out", help="edge-list CSV (default: stdout)")

    c = cmd("estimate", "estimate trace for a graph")
    c.add_argument("--graph", help="edge-list CSV; sampled from the model when omitted")
    c.add_argument("--n-other", type=int, help="non-origin vertex count of --graph (default: from the model)")
    c.add_argument("--scheme", help="scheme name (default: first configured)")
    c.add_argument("--out", help="trace CSV (default: stdout)")

    c = cmd("mccv", "MCCV risk curves and selected m")
    c.add_argument("--graph", help="edge-list CSV; sampled from the model when omitted")
    c.add_argument("--n-other", type=int, help="non-origin vertex count of --graph (default: from the model)")
    c.add_argument("--out-dir", help="directory for risk-curve CSVs")

    c = cmd("truth", "local connection probability of the model")
    c.add_argument("--method", help="closed-form | numeric-integration | monte-carlo | empirical-exact")
    c.add_argument("--samples", type=int)

    c = cmd("study", "run a simulation study")
    c.add_argument("kind", choices=STUDIES)
    c.add_argument("--out-dir")
    c.add_argument("--replicates", type=int)

    c = cmd("clt", "normal approximation check of the empirical estimator", config_required=False)
    c.add_argument("--p", type=float, help="connection probability (instead of a model)")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--replicates", type=int, default=10_000)
    c.add_argument("--full-graph", action="store_true")

    c = cmd("wireless-size", "vertices needed for the origin to connect with probability q", config_required=False)
    c.add_argument("--p", type=float, required=True)
    c.add_argument("--q", type=float, default=0.9)

    c = cmd("bound", "oracle bound next to simulated MSE")
    c.add_argument("--k-max", type=int, default=5)
    c.add_argument("--k0", type=int, default=0)
    c.add_argument("--replicates", type=int, default=1000)
    c.add_argument("--scheme", help="scheme name (default: first configured)")
    c.add_argument("--out", help="CSV output (default: stdout)")

    c = sub.add_parser("render", help="render a result CSV as SVG")
    c.add_argument("csv")
    c.add_argument("--kind", choices=("line", "box", "bar"), required=True)
    c.add_argument("--x", required=True)
    c.add_argument("--y", required=True)
    c.add_argument("--group")
    c.add_argument("--where", action="append", default=[], help="column=value filter, repeatable")
    c.add_argument("--title", default="")
    c.add_argument("--out", required=True)
    return p


# ---------------------------------------------------------------------------


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    model = cfg.sections.setdefault("model", {}) if (args.origin_coords or args.origin_from_data) else None
    if args.origin_coords:
        try:
            model["origin"] = tuple(float(v) for v in args.origin_coords.split(","))
        except ValueError:
            raise ConfigError(f"bad --origin-coords {args.origin_coords!r}") from None
        model.pop("origin_from_data", None)
    if args.origin_from_data:
        model["origin_from_data"] = args.origin_from_data
    return cfg


def _seed(args, cfg: RunConfig) -> int:
    seed = args.seed if args.seed is not None else cfg.get("run", "seed", 0)
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return seed


def _n(cfg: RunConfig, model) -> int | None:
    if isinstance(model, SbmSpec):
        return model.n
    return cfg.require("model", "n")


def _graph_source(args, cfg, model, seed):
    """Reads a supplied edge list now (so bad files count as invalid input); sampling is deferred."""
    if getattr(args, "graph", None):
        # Edge lists omit isolated trailing vertices, so take the size from the model.
        directed = isinstance(model, RcmSpec) and model.edge_mode == "directed"
        if args.n_other is not None:
            nv = args.n_other + 1
        elif isinstance(model, SbmSpec):
            nv = model.n
        elif isinstance(model, RcmSpec) and cfg.get("model", "n") is not None:
            nv = cfg.get("model", "n") + 1
        else:
            nv = None
        g = read_edge_list(args.graph, nv, directed=directed)
        if isinstance(model, SbmSpec) and args.n_other is None:
            g = dataclasses.replace(g, degree_norm=model.n)
        return lambda: g
    if model == "growing-sbm":
        raise ConfigError("sampling needs a concrete model, not a family")
    n = _n(cfg, model)
    return lambda: sample_graph(model, n, substream(seed, 0))


def _pick_scheme(schemes, name):
    if name is None:
        return schemes[0]
    for s in schemes:
        if s.name == name or scheme_label(s) == name:
            return s
    raise ConfigError(f"scheme {name!r} is not configured")


def _experiment(cfg: RunConfig, model, seed: int, out_dir, replicates) -> ExperimentConfig:
    exp = cfg.sections.get("experiment", {})
    if isinstance(model, SbmSpec):
        grid = exp.get("n_grid", (model.n,))
    else:
        grid = exp.get("n_grid") or ((cfg.require("model", "n"),) if model != "growing-sbm" else None)
        if grid is None:
            raise ConfigError("[experiment] n_grid is required")
    return ExperimentConfig(
        model=model,
        schemes=build_schemes(cfg),
        n_grid=tuple(grid),
        replicates=replicates if replicates is not None else exp.get("replicates", 1000),
        plan=build_plan(cfg, child_seed(substream(seed, 99))),
        seed=seed,
        out_dir=out_dir,
        truth_samples=exp.get("truth_samples", 10**6),
        m_max=exp.get("m_max"),
        q=exp.get("q", 0.9),
        verify_replicates=exp.get("verify_replicates", 10**5),
    )


def _prepare(args):
    """Validate inputs; returns a zero-argument callable doing the work."""
    cmd = args.command

    if cmd == "wireless-size":
        if not (0 < args.p < 1 and 0 < args.q < 1):
            raise ConfigError("--p and --q must lie in (0, 1)")
        return lambda: print(wireless_min_n(args.p, args.q))

    if cmd == "render":
        where = []
        for w in args.where:
            if "=" not in w:
                raise ConfigError(f"--where expects column=value, got {w!r}")
            where.append(tuple(w.split("=", 1)))
        spec = ChartSpec(args.kind, args.x, args.y, args.group, args.title, tuple(where))
        if not Path(args.csv).is_file():
            raise ConfigError(f"no such file: {args.csv}")
        return lambda: render_svg(args.csv, spec, args.out)

    cfg = _config(args)
    seed = _seed(args, cfg)

    if cmd == "clt":
        if args.p is not None:
            target = args.p
        elif args.config:
            target = build_model(cfg)
        else:
            raise ConfigError("clt needs --p or --config")
        if args.n < 1 or args.replicates < 1:
            raise ConfigError("--n and --replicates must be positive")

        def run_clt():
            _, ks = clt_check(target, args.n, args.replicates, substream(seed, 0), args.full_graph)
            print(f"ks_distance {ks:.6g}")

        return run_clt

    if cmd == "study" and args.kind == "design" and "model" not in cfg.sections:
        model = "growing-sbm"  # placeholder, design cells build their own models
    else:
        model = build_model(cfg)

    if cmd == "truth":
        if model == "growing-sbm":
            raise ConfigError("truth needs a concrete model")
        method = args.method or cfg.get("truth", "method", "auto")
        samples = args.samples or cfg.get("truth", "samples", 10**6)

        def run_truth():
            if method == "auto" or method == "closed-form" or isinstance(model, SbmSpec):
                tv = model_truth(model, substream(seed, 0), samples)
            else:
                tv = true_connection_probability(model.dist, model.cf, model.origin, method, samples,
                                                 substream(seed, 0), model.metric)
            print(f"{tv.value:.6g}")
            se = "" if tv.stderr is None else f" stderr={tv.stderr:.3g}"
            print(f"# method={tv.method}{se}", file=sys.stderr)

        return run_truth

    if cmd in ("sample", "estimate", "mccv") or (cmd == "study" and args.kind == "stability"):
        graph = _graph_source(args, cfg, model, seed)

    if cmd == "sample":
        def run_sample():
            g = graph()
            text = write_edge_list(g, args.out)
            if not args.out:
                sys.stdout.write(text)

        return run_sample

    schemes = build_schemes(cfg)

    if cmd == "estimate":
        scheme = _pick_scheme(schemes, args.scheme)

        def run_estimate():
            g = graph()
            text = estimate_trace(g, scheme).to_csv(args.out)
            if not args.out:
                sys.stdout.write(text)

        return run_estimate

    if cmd == "mccv":
        plan = build_plan(cfg, child_seed(substream(seed, 99)))

        def run_mccv():
            g = graph()
            res = split_residuals(g, schemes, plan)
            ann = bfs_annuli(g)
            print("scheme,m_hat,min_risk,estimate")
            for s, scheme in enumerate(schemes):
                curve = res.curve(s)
                est = estimate_trace(g, scheme, ann).at(curve.m_hat)
                print(f"{curve.scheme},{curve.m_hat},{float(curve.risk[curve.m_hat])!r},{float(est)!r}")
                if args.out_dir:
                    Path(args.out_dir).mkdir(parents=True, exist_ok=True)
                    curve.to_csv(Path(args.out_dir) / f"risk_{curve.scheme}.csv")

        return run_mccv

    if cmd == "bound":
        scheme = _pick_scheme(schemes, args.scheme)
        if model == "growing-sbm":
            raise ConfigError("bound needs a concrete model")
        n = _n(cfg, model)

        def run_bound():
            df = oracle_bound_profile(model, scheme, n, args.k_max, args.replicates, substream(seed, 0), args.k0)
            text = df.to_csv(index=False)
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stdout.write(text)
            dominated = bool((df["rhs"] >= df["mse"]).all())
            print(f"# bound (constant 1) dominates simulated MSE at every k: {dominated}", file=sys.stderr)

        return run_bound

    if cmd == "study":
        out_dir = args.out_dir or cfg.get("run", "out_dir") or "results"
        if args.kind == "stability":
            M_grid = cfg.get("experiment", "M_grid", tuple(10 * 2**i for i in range(8)))
            scheme_list = schemes

            def run_stability():
                g = graph()
                Path(out_dir).mkdir(parents=True, exist_ok=True)
                for i, scheme in enumerate(scheme_list):
                    res = run_mccv_stability(g, scheme, M_grid, child_seed(substream(seed, 99)),
                                             cfg.get("mccv", "fraction", 0.5))
                    res.to_csv(Path(out_dir) / f"stability_{scheme_label(scheme)}.csv")
                    print(f"{scheme_label(scheme)} minimizers {res.minimizers} last_change_index {res.last_change}")

            return run_stability
        exp = _experiment(cfg, model, seed, out_dir, args.replicates)
        runner = {"mse": run_mse_study, "mccv": run_mccv_study, "wireless": run_wireless_study}.get(args.kind)
        if args.kind == "design":
            dists = cfg.get("experiment", "distributions", ("beta", "gaussian-mixture", "uniform"))

            def run_design():
                res = run_design_benchmark(exp, dists)
                print(f"wrote {len(res.records)} records to {out_dir}")

            return run_design

        def run_study():
            res = runner(exp)
            print(f"wrote {len(res.records)} records to {out_dir}")

        return run_study

    raise UsageError(f"unknown command {cmd!r}")


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_help())
        work = _prepare(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ConfigError, ValueError, OSError) as exc:
        print(f"localdeg: invalid input: {exc}", file=sys.stderr)
        return 1
    try:
        work()
    except Exception as exc:  # noqa: BLE001 - any failure after validation is a runtime error
        print(f"localdeg: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


def cli_dispatch(argv: list[str]) -> int:
    return main(argv)


if __name__ == "__main__":
    raise SystemExit(main())
