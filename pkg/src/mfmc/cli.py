"""Command line: ``mfmc <scenario> [options]``.

Each run writes one CSV per signal group, a manifest.json echoing the
configuration, and checks.txt with a PASS/FAIL line per declared check.
Exit status: 0 ok, 1 configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .circuits import and_gate, is_and, thl_level, thl_window, truth_table
from .config import (SCENARIOS, VALIDATE_TARGETS, ScenarioConfig, build, dump_defaults,
                     from_dict, list_scenarios, load, parse_profile)
from .errors import ConfigError, NumericError
from .oracle import compare, fd_convection_diffusion, fd_reaction
from .qcsk import receive, selected_unit, tx_modulate, tx_output
from .reactions import thresholding_channel
from .signals import generate, to_csv, zeros
from .transfer import apply_channel

OUT_ENV = "MFMC_OUT"
TABLE2 = {0: (0, 0), 1: (0, 1), 2: (1, 0), 3: (1, 1)}  # input level -> (Y2, Y1)

__all__ = ["list_scenarios", "dump_defaults", "run", "main"]


def _bits_text(bits) -> str:
    return "".join(str(b) for b in bits)


def _run_and_gate(cfg: ScenarioConfig, grid, params):
    table = truth_table(params)
    hi = params.high_level
    win = thl_window(params)
    groups = {}
    for bits in table:
        q = params.with_(I1=params.I1 if bits[0] else zeros(grid, "I1"),
                         I2=params.I2 if bits[1] else zeros(grid, "I2"))
        groups[f"and_{_bits_text(bits)}"] = [q.I1, q.I2, and_gate(q)]
    lo, up = win.injected
    ok = is_and(table, hi)
    checks = [("truth table is AND", ok,
               ", ".join(f"{_bits_text(b)}:{v:.4g}" for b, v in table.items())),
              ("ThL inside window", win.contains(params.ThL0),
               f"ThL={params.ThL0:g}, window=({lo:.4g}, {up:.4g})")]
    report = {"peaks": {_bits_text(b): v for b, v in table.items()}, "high_level": hi,
              "thl_window": [lo, up], "thl_at_junction": thl_level(params)}
    return groups, checks, report


def _run_tx(cfg, grid, tx):
    outs = tx_modulate(tx)
    sel = selected_unit(tx.bits)
    peaks = {u: s.peak() for u, s in outs.items()}
    checks = []
    for u, pk in peaks.items():
        hi = tx.high_level(u)
        if u == sel and hi > 0:
            checks.append((f"unit {u} HIGH", pk > 0.25 * hi, f"peak {pk:.4g} vs plateau {hi:.4g}"))
        else:
            ref = max(tx.high_level(4), 1e-300)
            checks.append((f"unit {u} LOW", pk < 0.05 * ref, f"peak {pk:.4g}"))
    groups = {"tx_units": [outs[u] for u in (1, 2, 3, 4)]}
    report = {"bits": _bits_text(tx.bits), "selected_unit": sel,
              "peaks": {str(u): v for u, v in peaks.items()}}
    return groups, checks, report


def _run_rx(cfg, grid, obj):
    rx, levels = obj
    shape = parse_profile(cfg.params["input"], "input")
    groups, checks, decoded = {}, [], {}
    for i in levels:
        o = generate(shape, grid, "O") if i else zeros(grid, "O")
        o = o * float(i) if i else o
        res = receive(o.renamed("O"), rx)
        groups[f"rx_level{i}"] = [o.renamed("O"), *res.B, res.Y2, res.Y1]
        decoded[str(i)] = _bits_text(res.bits)
        want = TABLE2[i]
        checks.append((f"level {i} -> Y2Y1={_bits_text(want)}", res.bits == want,
                       f"got {_bits_text(res.bits)}"))
    return groups, checks, {"decoded": decoded}


def _run_link(cfg, grid, obj):
    tx, rx = obj
    o = tx_output(tx)
    res = receive(o, rx)
    groups = {"link": [o, *res.B, res.Y2, res.Y1]}
    sent, got = _bits_text(tx.bits), _bits_text(res.bits)
    return groups, [(f"loopback {sent}", sent == got, f"decoded {got}")], \
        {"transmitted": sent, "decoded": got}


def _run_validate(cfg, grid, s):
    p, L = s["p"], s["L"]
    ci0 = generate(s["input"], grid, "input")
    if s["target"] == "cd-channel":
        an = apply_channel(ci0, L, p).renamed("analytical")
        fd = fd_convection_diffusion(ci0, L, p, s["fd"]).renamed("oracle")
        rep = compare(an, fd)
        groups = {"cd_channel": [ci0, an, fd]}
        name = "CD channel max error"
    else:
        cj0 = generate(s["partner"], grid, "partner")
        ai, aj, ak = thresholding_channel(ci0, cj0, L, p)
        fi, fj, fk = fd_reaction(ci0, cj0, L, p, s["k"], s["fd"])
        rep = compare(ai, fi)
        groups = {"reaction": [ci0, cj0, ai.renamed("Ci_analytical"),
                               ak.renamed("Ck_analytical"), fi, fk]}
        name = "reaction channel max error"
    checks = [(name, rep.max_error <= s["tolerance"],
               f"{rep.max_error:.4g} <= {s['tolerance']:g}")]
    return groups, checks, {"max_error": rep.max_error, "l2_error": rep.l2_error,
                            "delay": rep.delay}


_RUNNERS = {"and-gate": _run_and_gate, "qcsk-tx": _run_tx, "qcsk-rx": _run_rx,
            "link": _run_link, "validate": _run_validate}


def _plot(groups, out: Path):
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; skipping plots", file=sys.stderr)
        return
    for name, sigs in groups.items():
        fig, ax = plt.subplots(figsize=(6, 3.5))
        for s in sigs:
            ax.plot(s.t, s.samples, label=s.name)
        ax.set_xlabel("t (s)")
        ax.set_ylabel("concentration (mol/m$^3$)")
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(out / f"{name}.png", dpi=120)
        plt.close(fig)


def _json_safe(x):
    if isinstance(x, dict):
        return {str(k): _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def out_dir(cfg: ScenarioConfig) -> Path:
    root = cfg.out or os.environ.get(OUT_ENV) or "mfmc-out"
    return Path(root) / cfg.scenario


def run(cfg: ScenarioConfig, plot: bool = False, quiet: bool = False) -> int:
    """Run a scenario, write artifacts and return the exit status."""
    try:
        grid, obj = build(cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    try:
        groups, checks, report = _RUNNERS[cfg.scenario](cfg, grid, obj)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except NumericError as e:
        diag = ", ".join(f"{k}={v}" for k, v in getattr(e, "diagnostics", {}).items())
        print(f"numeric failure: {e}" + (f" ({diag})" if diag else ""), file=sys.stderr)
        return 2
    out = out_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for name, sigs in groups.items():
        (out / f"{name}.csv").write_text(to_csv(sigs), encoding="utf-8")
        files.append(f"{name}.csv")
    lines = [f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})" for name, ok, detail in checks]
    (out / "checks.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    manifest = {"config": cfg.to_dict(), "grid": {"t0": grid.t0, "dt": grid.dt, "n": grid.n},
                "versions": {"mfmc": __version__, "numpy": np.__version__,
                             "python": platform.python_version()},
                "files": files, "report": _json_safe(report),
                "checks": [{"name": n, "pass": bool(ok), "detail": d} for n, ok, d in checks]}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")
    if plot:
        _plot(groups, out)
    if not quiet:
        print("\n".join(lines))
        print(f"artifacts in {out}")
    return 0


def _parser():
    ap = argparse.ArgumentParser(prog="mfmc", description="Microfluidic molecular-communication "
                                 "circuit simulations.")
    ap.add_argument("scenario", nargs="?", choices=SCENARIOS)
    ap.add_argument("target", nargs="?", help="validate target: " + ", ".join(VALIDATE_TARGETS))
    ap.add_argument("--config", help="JSON configuration file")
    ap.add_argument("--out", help=f"output root (default ${OUT_ENV} or ./mfmc-out)")
    ap.add_argument("--plot", action="store_true", help="also write PNG line charts")
    ap.add_argument("--seed", type=int, help="recorded in the manifest; runs are deterministic")
    ap.add_argument("--thl", type=float, help="and-gate: injected ThL level")
    ap.add_argument("--bits", help="qcsk-tx / link: bit pair b2b1, e.g. 10")
    ap.add_argument("--dump-defaults", action="store_true",
                    help="print the default configuration and exit")
    ap.add_argument("--list", action="store_true", help="list scenarios and exit")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_intermixed_args(argv)
    if args.list:
        print("\n".join(list_scenarios()))
        return 0
    if not args.scenario:
        _parser().print_usage(sys.stderr)
        return 1
    if args.dump_defaults:
        print(dump_defaults(args.scenario).to_json(), end="")
        return 0
    try:
        if args.config:
            cfg = load(args.config)
            if cfg.scenario != args.scenario:
                raise ConfigError(f"config is for {cfg.scenario!r}, not {args.scenario!r}")
        else:
            cfg = dump_defaults(args.scenario)
        d = cfg.to_dict()
        p = d["params"]
        if args.target:
            if args.scenario != "validate":
                raise ConfigError("only validate takes a target")
            p["target"] = args.target
        if args.thl is not None:
            if args.scenario != "and-gate":
                raise ConfigError("--thl applies to and-gate")
            p["ThL"] = f"{args.thl:g}u(t)"
        if args.bits is not None:
            if args.scenario not in ("qcsk-tx", "link"):
                raise ConfigError("--bits applies to qcsk-tx and link")
            p["bits"] = args.bits
        if args.out:
            d["out"] = args.out
        if args.seed is not None:
            d["seed"] = args.seed
        cfg = from_dict(d)
    except (ConfigError, OSError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    return run(cfg, plot=args.plot)


if __name__ == "__main__":
    sys.exit(main())
