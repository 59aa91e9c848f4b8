"""Command-line entry point: sweeps, theory reports, bound validation,
figure presets, and instance dumps.

Exit status: 0 success, 1 usage error, 2 validation-suite failure.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
from pathlib import Path

from . import graph as graphmod
from . import montecarlo as mc
from . import theory
from .channels import ChannelParams, sample_er
from .scheme import SchemeParams, k_adjacency_graph, sample_pairing

PRESET_K_GRID = tuple(range(1, 26))
PRESET_P_GRID = (0.2, 0.4, 0.6, 0.8, 1.0)
PRESET_TRIALS = 500
PRESET_N = 200

FIGURE_PRESETS = ("fig2", "fig3", "fig4", "fig-intersection")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def parse_k_values(text: str) -> tuple[int, ...]:
    """Accepts comma lists and inclusive "a..b" ranges, e.g. "1..25" or "2,5,9"."""
    out: list[int] = []
    for item in text.split(","):
        item = item.strip()
        if ".." in item:
            lo, hi = item.split("..")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise _UsageError(f"empty K range {item!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(item))
    if not out:
        raise _UsageError("no K values given")
    return tuple(out)


def parse_p_values(text: str) -> tuple[float, ...]:
    try:
        out = tuple(float(x) for x in text.split(","))
    except ValueError as e:
        raise _UsageError(f"bad p list {text!r}: {e}")
    if not out:
        raise _UsageError("no p values given")
    return out


def _default_workers() -> int:
    env = os.environ.get("PAIRKEY_WORKERS")
    if env:
        return int(env)
    return os.cpu_count() or 1


def _effective_seed(seed: int) -> int:
    """seed 0 means: derive one from entropy (it is printed either way)."""
    if seed == 0:
        seed = secrets.randbits(63) or 1
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def write_outputs(obj, path: str, fmt: str) -> None:
    """Write an EstimateTable or report dict as csv or json.

    CSV probabilities carry 6 significant digits; JSON keeps full precision
    so a round trip reproduces the value exactly. Output is bit-stable for
    fixed inputs (fixed column order, LF line endings).
    """
    try:
        if fmt == "csv":
            if not isinstance(obj, mc.EstimateTable):
                raise ValueError("csv format is only defined for sweep tables")
            text = obj.to_csv_text()
        elif fmt == "json":
            payload = obj.to_json_obj() if isinstance(obj, mc.EstimateTable) else obj
            text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        else:
            raise ValueError(f"unknown format {fmt!r}")
        with open(path, "w", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e}") from e


def figure_preset(name: str, seed: int, trials: int = PRESET_TRIALS):
    """Canned experiment configs for the standard figure grids.

    fig2/fig3 share one on/off sweep (connectivity and isolation columns of
    the same table); fig4 is the disk-model run on the same grid with the
    forced-range matching. fig-intersection is an instance-dump plan.
    """
    if name in ("fig2", "fig3"):
        return mc.ExperimentConfig(n=PRESET_N, K_grid=PRESET_K_GRID,
                                   p_grid=PRESET_P_GRID, trials=trials,
                                   seed=seed, channel="on_off")
    if name == "fig4":
        return mc.ExperimentConfig(n=PRESET_N, K_grid=PRESET_K_GRID,
                                   p_grid=PRESET_P_GRID, trials=trials,
                                   seed=seed, channel="disk_forced")
    if name == "fig-intersection":
        return {"n": 50, "K": 5, "p": 0.2, "seed": seed}
    raise _UsageError(f"unknown figure preset {name!r}; choose from {FIGURE_PRESETS}")


def dump_instance(n: int, K: int, p: float, seed: int, outdir: str) -> None:
    """Write edge lists for one channel graph, one key-sharing graph, and
    their intersection, plus the intersection's component labels."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    rng = mc.rng_from_entropy((seed, 201, n, K))
    pt = sample_pairing(SchemeParams(n=n, K=K), rng)
    h = k_adjacency_graph(pt)
    g = sample_er(n, ChannelParams(p=p), rng)
    hg = graphmod.intersect(h, g)
    graphmod.write_edge_list(g, out / "channel.edges")
    graphmod.write_edge_list(h, out / "pairwise.edges")
    graphmod.write_edge_list(hg, out / "intersection.edges")
    labeling = graphmod.connected_components(hg)
    with open(out / "intersection.components", "w", newline="\n") as f:
        f.write(f"# components: {labeling.component_count}\n")
        for i, lab in enumerate(labeling.labels, start=1):
            f.write(f"{i} {lab}\n")
    with open(out / "pairing.txt", "w", newline="\n") as f:
        f.write(pt.to_text())


def _build_parser() -> _Parser:
    parser = _Parser(prog="pairkey")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo sweep")
    sim.add_argument("--n", type=int, default=None)
    sim.add_argument("--K", type=str, default=None,
                     help='K grid, e.g. "1..25" or "2,5,9"')
    sim.add_argument("--p", type=str, default=None, help='p list, e.g. "0.2,0.4"')
    sim.add_argument("--trials", type=int, default=None)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--channel", choices=mc.CHANNELS, default=None)
    sim.add_argument("--allow-large-rho", action="store_true",
                     help="force rho=sqrt(p/pi) even when rho >= 0.5")
    sim.add_argument("--workers", type=int, default=None)
    sim.add_argument("--out", type=str, required=True)
    sim.add_argument("--format", choices=("csv", "json"), default="csv")
    sim.add_argument("--config", type=str, default=None,
                     help="JSON config file; explicit flags override it")

    th = sub.add_parser("theory", help="print a theory report as JSON")
    th.add_argument("--n", type=int, required=True)
    th.add_argument("--K", type=int, required=True)
    th.add_argument("--p", type=float, required=True)

    val = sub.add_parser("validate", help="run the 3-sigma bound suite")
    val.add_argument("--n", type=int, default=5)
    val.add_argument("--K", type=int, default=2)
    val.add_argument("--p", type=float, default=0.5)
    val.add_argument("--samples", type=int, default=100_000)
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--out", type=str, default=None)

    fig = sub.add_parser("figure", help="run a figure preset")
    fig.add_argument("name", choices=FIGURE_PRESETS)
    fig.add_argument("--seed", type=int, default=0)
    fig.add_argument("--trials", type=int, default=PRESET_TRIALS)
    fig.add_argument("--workers", type=int, default=None)
    fig.add_argument("--out", type=str, required=True,
                     help="csv path (sweeps) or directory (fig-intersection)")

    dmp = sub.add_parser("dump-instance", help="dump one sampled instance")
    dmp.add_argument("--n", type=int, default=50)
    dmp.add_argument("--K", type=int, default=5)
    dmp.add_argument("--p", type=float, default=0.2)
    dmp.add_argument("--seed", type=int, default=0)
    dmp.add_argument("--outdir", type=str, required=True)

    return parser


_SIM_DEFAULTS = {
    "n": PRESET_N, "K": "1..25", "p": "0.2,0.4,0.6,0.8,1.0",
    "trials": PRESET_TRIALS, "seed": 0, "channel": "on_off",
}


def _simulate_config(args) -> tuple[mc.ExperimentConfig, int]:
    values = dict(_SIM_DEFAULTS)
    if args.config:
        with open(args.config) as f:
            values.update(json.load(f))
    for key in ("n", "K", "p", "trials", "seed", "channel"):
        flag = getattr(args, key)
        if flag is not None:
            values[key] = flag
    k_grid = parse_k_values(str(values["K"]))
    p_grid = parse_p_values(str(values["p"])) if isinstance(values["p"], str) \
        else tuple(float(x) for x in values["p"])
    channel = values["channel"]
    if channel == "disk" and args.allow_large_rho:
        channel = "disk_forced"
    seed = _effective_seed(int(values["seed"]))
    try:
        config = mc.ExperimentConfig(
            n=int(values["n"]), K_grid=k_grid, p_grid=p_grid,
            trials=int(values["trials"]), seed=seed, channel=channel)
    except ValueError as e:
        raise _UsageError(str(e))
    workers = args.workers if args.workers is not None else _default_workers()
    return config, workers


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)

        if args.command == "simulate":
            config, workers = _simulate_config(args)
            table = mc.sweep(config, workers=workers)
            write_outputs(table, args.out, args.format)
            return 0

        if args.command == "theory":
            report = theory.theory_report(args.n, args.K, args.p)
            print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
            return 0

        if args.command == "validate":
            seed = _effective_seed(args.seed)
            report = mc.validate_bounds(args.n, args.K, args.p,
                                        samples=args.samples, seed=seed)
            for c in report.checks:
                line = (f"{c.name}: empirical={c.empirical:.6g} "
                        f"reference={c.reference:.6g} sigma={c.sigma:.6g} "
                        f"[{c.kind}] {'PASS' if c.passed else 'FAIL'}")
                if c.status != "checked":
                    line = f"{c.name}: {c.status}"
                print(line)
            if args.out:
                write_outputs(report.to_dict(), args.out, "json")
            return 0 if report.all_passed else 2

        if args.command == "figure":
            seed = _effective_seed(args.seed)
            preset = figure_preset(args.name, seed=seed, trials=args.trials)
            if args.name == "fig-intersection":
                dump_instance(preset["n"], preset["K"], preset["p"],
                              seed=seed, outdir=args.out)
                return 0
            workers = args.workers if args.workers is not None else _default_workers()
            table = mc.sweep(preset, workers=workers)
            write_outputs(table, args.out, "csv")
            return 0

        if args.command == "dump-instance":
            seed = _effective_seed(args.seed)
            dump_instance(args.n, args.K, args.p, seed=seed, outdir=args.outdir)
            return 0

        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
