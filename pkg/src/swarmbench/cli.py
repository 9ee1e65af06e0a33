"""Command line interface: run one trial, sweep a design, analyze results.

``analyze`` reads a results CSV, groups one metric by one or two factor
columns, runs the matching ANOVA (plus Fisher's LSD with --posthoc), prints a
text report, and with --out writes the same summary as CSV next to a boxplot
figure (PNG).
"""

from __future__ import annotations

import argparse
import sys
from collections import OrderedDict

from . import config as cfgmod
from .dynamics import RadiiConfig
from .harness import (TrialConfig, mix_seed, read_results_csv, run_sweep,
                      run_trial)
from .stats import SampleGroup, anova_oneway, anova_twoway_balanced, fisher_lsd

METRIC_CODES = ("PF", "NCC", "PR", "L", "SCC", "D", "I", "DINF", "INF",
                "ASTK", "SSTK")
FACTOR_COLUMNS = ("task", "model", "n_top", "N", "r_r", "r_o", "r_a",
                  "task_factor_1", "task_factor_2")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmbench",
        description="Deterministic 2D swarm-coordination simulator and "
                    "factorial benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a single trial")
    run_p.add_argument("--task", required=True,
                       choices=["targets", "goal", "rally", "disperse", "avoid",
                                "follow"])
    run_p.add_argument("--model", required=True,
                       choices=["metric", "topological", "visual"])
    run_p.add_argument("--n", type=int, default=100, help="swarm size")
    run_p.add_argument("--rr", type=float, default=10.0, help="repulsion radius")
    run_p.add_argument("--ro-mult", type=float, default=1.5,
                       help="orientation radius multiplier over rr")
    run_p.add_argument("--ra-mult", type=float, default=2.0,
                       help="attraction radius multiplier over ro")
    run_p.add_argument("--iters", type=int, default=None,
                       help="iterations (default: task standard)")
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--n-top", type=int, default=None,
                       help="neighbor count for the topological model")
    run_p.add_argument("--trace", default=None, metavar="PATH",
                       help="write a per-iteration trace CSV")
    run_p.add_argument("--config", default=None, metavar="FILE")

    sweep_p = sub.add_parser("sweep", help="run a factorial design")
    sweep_p.add_argument("--spec", default=None, metavar="FILE",
                         help="config file with a [sweep] section")
    sweep_p.add_argument("--task", default=None,
                         help="task for a default paper-faithful design")
    sweep_p.add_argument("--scale", type=float, default=None,
                         help="replicate scale factor")
    sweep_p.add_argument("--replicates", type=int, default=None)
    sweep_p.add_argument("--jobs", type=int, default=1)
    sweep_p.add_argument("--out", default="results.csv")
    sweep_p.add_argument("--seed", type=int, default=None, help="base seed")
    sweep_p.add_argument("--progress", type=int, default=0, metavar="EVERY",
                         help="print progress every EVERY trials")

    an_p = sub.add_parser("analyze", help="summarize a results CSV")
    an_p.add_argument("--in", dest="infile", required=True, metavar="FILE")
    an_p.add_argument("--metric", required=True, choices=METRIC_CODES)
    an_p.add_argument("--by", required=True,
                      help="factor column, or two comma-separated columns")
    an_p.add_argument("--posthoc", action="store_true",
                      help="pairwise Fisher LSD comparisons")
    an_p.add_argument("--alpha", type=float, default=0.05)
    an_p.add_argument("--out", default=None, metavar="PREFIX",
                      help="write PREFIX.csv and PREFIX.png")
    return parser


def _cmd_run(args) -> int:
    cfg = cfgmod.load_config(args.config) if args.config else {}
    world = cfgmod.world_from_config(cfg)
    motion = cfgmod.motion_from_config(cfg)
    radii = RadiiConfig(args.rr, args.ro_mult * args.rr,
                        args.ra_mult * args.ro_mult * args.rr)
    task = cfgmod.task_from_config(cfg, args.task)
    model = cfgmod.model_from_config(cfg, args.model, radii, world, args.n_top)
    iters = args.iters
    if iters is None:
        from .harness import TABLE1_ITERATIONS
        iters = TABLE1_ITERATIONS[args.task]
    trial = TrialConfig(task=task, model=model, n_agents=args.n, radii=radii,
                        iterations=iters, seed=mix_seed(args.seed, 0),
                        trial_index=0, world=world, motion=motion)
    result = run_trial(trial, trace_path=args.trace)
    print(f"status={result.status}" + (
        f" reason={result.abort_reason}" if result.abort_reason else ""))
    for code in METRIC_CODES:
        value = result.metrics.get(code)
        if value is not None:
            print(f"{code}={value:.6g}")
    print(f"overshoot={result.overshoot}")
    print(f"coincident={result.coincident}")
    print(f"wall_clock={result.wall_clock:.3f}s")
    return 0 if result.status == "ok" else 1


def _cmd_sweep(args) -> int:
    cfg = cfgmod.load_config(args.spec) if args.spec else {}
    overrides = {}
    if args.task:
        overrides["task"] = args.task
    if args.scale is not None:
        overrides["scale"] = args.scale
    if args.replicates is not None:
        overrides["replicates"] = args.replicates
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    spec = cfgmod.design_from_config(cfg, **overrides)
    summary = run_sweep(spec, workers=args.jobs, out=args.out,
                        progress=args.progress or None)
    print(f"trials={summary['trials']} ok={summary['ok']} "
          f"aborted={summary['aborted']} out={summary['out']} "
          f"elapsed={summary['elapsed']:.1f}s")
    return 0


def _group_rows(rows, metric, factors):
    """OrderedDict mapping factor-value tuples to metric value lists."""
    grouped: "OrderedDict[tuple, list[float]]" = OrderedDict()
    for row in rows:
        if row["status"] != "ok" or row[metric] == "":
            continue
        key = tuple(row[f] for f in factors)
        grouped.setdefault(key, []).append(float(row[metric]))
    return grouped


def _cmd_analyze(args) -> int:
    factors = [f.strip() for f in args.by.split(",") if f.strip()]
    if not 1 <= len(factors) <= 2:
        print("analyze supports one or two factors", file=sys.stderr)
        return 2
    for f in factors:
        if f not in FACTOR_COLUMNS:
            print(f"unknown factor {f!r}; choose from {FACTOR_COLUMNS}",
                  file=sys.stderr)
            return 2
    rows = read_results_csv(args.infile)
    grouped = _group_rows(rows, args.metric, factors)
    if len(grouped) < 2:
        print("need at least two factor levels with data", file=sys.stderr)
        return 2

    lines = []
    csv_rows = [["record", "label", "n", "mean", "sd", "F_or_t", "df1", "df2",
                 "p", "significant"]]
    lines.append(f"{args.metric} by {'/'.join(factors)}  "
                 f"({sum(len(v) for v in grouped.values())} trials)")
    lines.append(f"{'group':<24}{'n':>6}{'mean':>12}{'sd':>12}")
    sample_groups = []
    for key, values in grouped.items():
        label = "/".join(key)
        group = SampleGroup(label, tuple(values))
        sample_groups.append(group)
        from .stats import describe
        mean, sd = describe(group)
        sd_txt = f"{sd:.4f}" if sd is not None else "n/a"
        lines.append(f"{label:<24}{len(values):>6}{mean:>12.4f}{sd_txt:>12}")
        csv_rows.append(["group", label, str(len(values)), f"{mean:.6g}",
                         f"{sd:.6g}" if sd is not None else "", "", "", "", "", ""])

    posthoc_base = None
    if len(factors) == 1:
        result = anova_oneway(sample_groups)
        lines.append(f"one-way ANOVA: F({result.df_between},{result.df_within}) "
                     f"= {result.F:.4f}, p = {result.p:.4g}")
        csv_rows.append(["anova", factors[0], "", "", "", f"{result.F:.6g}",
                         str(result.df_between), str(result.df_within),
                         f"{result.p:.6g}", ""])
        posthoc_base = result
    else:
        a_levels = sorted({k[0] for k in grouped})
        b_levels = sorted({k[1] for k in grouped})
        counts = {len(grouped.get((a, b), [])) for a in a_levels for b in b_levels}
        if len(counts) != 1:
            print("two-way analysis needs a balanced design "
                  "(equal trials per cell)", file=sys.stderr)
            return 2
        table = [[grouped[(a, b)] for b in b_levels] for a in a_levels]
        tw = anova_twoway_balanced(table)
        for effect, name in ((tw.factor_a, factors[0]), (tw.factor_b, factors[1]),
                             (tw.interaction, f"{factors[0]}x{factors[1]}")):
            lines.append(f"{name}: F({effect.df_effect},{effect.df_error}) "
                         f"= {effect.F:.4f}, p = {effect.p:.4g}")
            csv_rows.append(["anova", name, "", "", "", f"{effect.F:.6g}",
                             str(effect.df_effect), str(effect.df_error),
                             f"{effect.p:.6g}", ""])

    if args.posthoc:
        if posthoc_base is None:
            marginal = _group_rows(rows, args.metric, factors[:1])
            base_groups = [SampleGroup("/".join(k), tuple(v))
                           for k, v in marginal.items()]
            posthoc_base = anova_oneway(base_groups)
            comparisons = fisher_lsd(posthoc_base, base_groups, alpha=args.alpha)
        else:
            comparisons = fisher_lsd(posthoc_base, sample_groups, alpha=args.alpha)
        lines.append(f"Fisher LSD (alpha={args.alpha:g}):")
        for comp in comparisons:
            flag = "*" if comp.significant else " "
            lines.append(f"  {comp.label_a} vs {comp.label_b}: "
                         f"diff = {comp.mean_diff:+.4f}, t = {comp.t:.4f}, "
                         f"p = {comp.p:.4g} {flag}")
            csv_rows.append(["lsd", f"{comp.label_a}|{comp.label_b}", "",
                             f"{comp.mean_diff:.6g}", "", f"{comp.t:.6g}", "",
                             str(posthoc_base.df_within), f"{comp.p:.6g}",
                             str(comp.significant).lower()])

    print("\n".join(lines))
    if args.out:
        import csv as _csv

        with open(f"{args.out}.csv", "w", newline="") as fh:
            _csv.writer(fh, lineterminator="\n").writerows(csv_rows)
        from . import plots
        if len(factors) == 1:
            plots.boxplot_by_group(
                args.metric,
                {"/".join(k): v for k, v in grouped.items()},
                f"{args.out}.png", title=f"{args.metric} by {factors[0]}")
        else:
            nested: dict[str, dict[str, list[float]]] = {}
            for (a, b), v in grouped.items():
                nested.setdefault(a, {})[b] = v
            plots.grouped_boxplot(args.metric, nested, f"{args.out}.png",
                                  title=f"{args.metric} by {'/'.join(factors)}")
        print(f"wrote {args.out}.csv and {args.out}.png")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "sweep":
        return _cmd_sweep(args)
    return _cmd_analyze(args)


if __name__ == "__main__":
    sys.exit(main())
