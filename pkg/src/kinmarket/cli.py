"""Command line interface.

    kinmarket run      --preset test1 --out results/ --fast
    kinmarket ensemble --preset test1 --ensemble 50 --out results/
    kinmarket sweep    --preset test1 --alpha 0.05,0.5,0.95 --out sweep/
    kinmarket fp       --out fp/                (limit-equation oracle)
    kinmarket presets list
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .core import ConstantBackground, ModelParams, Scenario
from .experiments import RunConfig, load_config, run_and_emit, sweep
from .presets import PRESET_NAMES, preset


def _fp_default_config() -> RunConfig:
    # the limit-equation oracle runs on the kinetic clock (tau = 1);
    # collision presets use tau = dt, which would shrink the stable
    # explicit step by orders of magnitude
    return RunConfig(
        model=ModelParams(),
        scenario=Scenario(background=ConstantBackground(0.5),
                          horizon=1.0, dt=1e-3, ensemble=1),
        mode="fokker-planck",
        cadence=10,
    )


def _add_common(ap):
    ap.add_argument("--config", help="JSON run configuration file")
    ap.add_argument("--preset", help="named experiment configuration")
    ap.add_argument("--seed", type=int, help="base RNG seed")
    ap.add_argument("--ensemble", type=int, help="number of independent runs")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--fast", action="store_true",
                    help="desk-scale: 35x35 grid, dt = 1e-4, small ensembles")
    ap.add_argument("--emit-bands", action="store_true",
                    help="also write Bollinger bands (bands.csv)")
    ap.add_argument("--mode", choices=("boltzmann", "fp"),
                    help="simulation backend")
    ap.add_argument("--cadence", type=int, help="record every k-th step")
    ap.add_argument("--workers", type=int, help="parallel ensemble workers")


def _build_config(args) -> RunConfig:
    if args.config and args.preset:
        raise SystemExit("use either --config or --preset, not both")
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = preset(args.preset, fast=args.fast)
    elif args.cmd == "fp":
        cfg = _fp_default_config()
    else:
        cfg = preset("test1", fast=args.fast)
    if args.seed is not None:
        cfg = cfg.with_(scenario=replace(cfg.scenario, seed=args.seed))
    if args.ensemble is not None:
        cfg = cfg.with_(scenario=replace(cfg.scenario, ensemble=args.ensemble))
    if args.out:
        cfg = cfg.with_(out_dir=args.out)
    if args.emit_bands:
        cfg = cfg.with_(emit_bands=True)
    if args.mode:
        cfg = cfg.with_(mode="fokker-planck" if args.mode == "fp"
                        else "boltzmann")
    if args.cadence:
        cfg = cfg.with_(cadence=args.cadence)
    if args.workers:
        cfg = cfg.with_(workers=args.workers)
    return cfg


def _cmd_run(args):
    cfg = _build_config(args)
    if args.cmd == "run" and args.ensemble is None:
        cfg = cfg.with_(scenario=replace(cfg.scenario, ensemble=1))
    if args.cmd == "fp":
        cfg = cfg.with_(mode="fokker-planck",
                        scenario=replace(cfg.scenario, ensemble=1))
    res = run_and_emit(cfg)
    print(f"runs: {len(res.seeds)}  "
          f"bubble%: {res.pct_bubble:.3f}  crash%: {res.pct_crash:.3f}")
    if cfg.out_dir:
        print(f"results in {cfg.out_dir}")
    return 0


def _cmd_sweep(args):
    cfg = _build_config(args)
    alphas = [float(x) for x in args.alpha.split(",")] if args.alpha \
        else [cfg.model.alpha]
    betas = [float(x) for x in args.beta.split(",")] if args.beta \
        else [cfg.model.beta]
    rows = sweep(cfg, alphas, betas)
    for row in rows:
        print(f"alpha={row['alpha']:g} beta={row['beta']:g}  "
              f"bubble%={row['pct_bubble']:.3f} crash%={row['pct_crash']:.3f}")
    return 0


def _cmd_presets(args):
    if args.action != "list":
        raise SystemExit(f"unknown presets action {args.action!r}")
    for name in PRESET_NAMES:
        print(name)
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="kinmarket",
        description="kinetic market-agent simulations")
    sub = parser.add_subparsers(dest="cmd", required=True)

    for name, help_ in (("run", "single simulation"),
                        ("ensemble", "ensemble of simulations"),
                        ("fp", "limit-equation (Fokker-Planck) oracle run")):
        ap = sub.add_parser(name, help=help_)
        _add_common(ap)
        ap.set_defaults(func=_cmd_run)

    ap = sub.add_parser("sweep", help="parameter grid over alpha/beta")
    _add_common(ap)
    ap.add_argument("--alpha", help="comma-separated alpha values")
    ap.add_argument("--beta", help="comma-separated beta values")
    ap.set_defaults(func=_cmd_sweep)

    ap = sub.add_parser("presets", help="preset utilities")
    ap.add_argument("action", choices=("list",))
    ap.set_defaults(func=_cmd_presets)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
