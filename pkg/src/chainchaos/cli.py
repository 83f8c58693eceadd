"""Command-line front end.

Every command writes a plain-text report that starts with the resolved
configuration and the package version, so identical inputs give
byte-identical files.  Exit codes: 0 success, 1 expectation mismatch,
2 configuration error.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .errors import ChainChaosError, ConfigError

OUTPUT_ENV = "CHAINCHAOS_OUTPUT_DIR"

# option name -> (type, default); None defaults mean "example-specific"
OPTIONS = {
    "example": (str, None),
    "system": (str, None),
    "window": (int, None),
    "k_max": (int, None),
    "s_k": (str, None),
    "grid_n": (int, None),
    "delta": (str, None),
    "eps": (str, None),
    "probe_delta": (float, None),
    "tau": (float, None),
    "pairs": (int, 100),
    "N": (int, 5000),
    "seed": (int, None),
    "sampler": (str, None),
    "eta": (float, 0.05),
    "thresholds": (str, None),
    "map": (str, "fullshift"),
    "len": (int, 500),
    "trials": (int, 100),
    "lemma41": (bool, False),
    "gaps": (str, "triangular"),
    "out": (str, None),
}


def _floats(text: str, name: str) -> list:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{name}: expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chainchaos", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"chainchaos {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key = value file; flags override it")
        sp.add_argument("--example", help="ex41 | ex42 | ex43 | ex44 | ex45 | fullshift")
        sp.add_argument("--out", help=f"report path (default: ${OUTPUT_ENV}/<command>-<name>.txt or stdout)")
        sp.add_argument("--window", type=int)
        sp.add_argument("--k-max", dest="k_max", type=int)
        sp.add_argument("--s", dest="s_k", help="comma-separated s_k values")
        sp.add_argument("--grid-n", dest="grid_n", type=int)
        sp.add_argument("--seed", type=int)

    sp = sub.add_parser("chains", help="chain classes, stability and periods over a delta scan")
    common(sp)
    sp.add_argument("--system", help="edge-list file instead of --example")
    sp.add_argument("--delta", help="comma-separated deltas (required)")
    sp.add_argument("--eps", help="comma-separated eps values")
    sp.add_argument("--probe-delta", dest="probe_delta", type=float)

    sp = sub.add_parser("verdict", help="evaluate both routes of the chaos characterizations")
    common(sp)
    sp.add_argument("--system", help="edge-list file instead of --example")
    sp.add_argument("--delta")
    sp.add_argument("--eps")
    sp.add_argument("--tau", type=float)

    sp = sub.add_parser("orbit", help="sampled scrambled-pair densities")
    common(sp)
    sp.add_argument("--pairs", type=int)
    sp.add_argument("--N", type=int)
    sp.add_argument("--sampler", choices=("uniform", "zk"))
    sp.add_argument("--delta")
    sp.add_argument("--eta", type=float)
    sp.add_argument("--thresholds", help="comma-separated ascending t values")

    sp = sub.add_parser("shadow", help="pseudo-orbit shadowing and density checks")
    common(sp)
    sp.add_argument("--map")
    sp.add_argument("--delta")
    sp.add_argument("--len", type=int)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--lemma41", action="store_true", default=None)
    sp.add_argument("--gaps")
    sp.add_argument("--N", type=int)
    sp.add_argument("--eps")

    sp = sub.add_parser("all", help="check every golden fact of an example (all examples by default)")
    common(sp)

    sp = sub.add_parser("catalog", help="list the examples and their expected facts")
    sp.add_argument("--out")
    return p


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags over the config file over defaults."""
    cfg = {}
    path = getattr(args, "config", None)
    if path:
        from .system import parse_config

        try:
            cfg = parse_config(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
        except ValueError as exc:
            raise ConfigError(f"config: {exc}") from None
        unknown = sorted(set(cfg) - set(OPTIONS))
        if unknown:
            raise ConfigError(f"config: unknown key(s) {', '.join(unknown)}")
    out = {}
    for key, (kind, default) in OPTIONS.items():
        val = getattr(args, key, None)
        if val is None and key in cfg:
            raw = cfg[key]
            try:
                val = raw.lower() in ("1", "true", "yes") if kind is bool else kind(raw)
            except ValueError:
                raise ConfigError(f"{key}: cannot parse {raw!r}") from None
        out[key] = default if val is None else val
    out["command"] = args.command
    return out


def _bundle(cfg: dict):
    from .catalog import EXAMPLE_IDS, build_example, params_from_config

    ex = cfg["example"]
    if ex not in EXAMPLE_IDS:
        raise ConfigError(f"example: unknown id {ex!r} (choose from {', '.join(EXAMPLE_IDS)})")
    try:
        params = params_from_config(ex, {k: cfg[k] for k in ("window", "k_max", "s_k", "grid_n") if cfg[k] is not None})
        return build_example(ex, params)
    except (ValueError, ChainChaosError) as exc:
        raise ConfigError(f"example parameters: {exc}") from None


def _target_system(cfg: dict):
    """``(system, default delta, default eps, name)``."""
    if cfg["system"]:
        from .system import load_edge_list

        try:
            sysm = load_edge_list(Path(cfg["system"]).read_text())
        except OSError as exc:
            raise ConfigError(f"system: cannot read {cfg['system']}: {exc.strerror}") from None
        except (ValueError, ChainChaosError) as exc:
            raise ConfigError(f"system: {exc}") from None
        return sysm, None, None, Path(cfg["system"]).stem
    if not cfg["example"]:
        raise ConfigError("example: one of --example or --system is required")
    b = _bundle(cfg)
    return b.system, b.probe_delta, b.probe_eps, b.id


def _header(cfg: dict) -> list:
    lines = [f"# chainchaos {__version__}", "[config]"]
    lines += [f"{k} = {cfg[k]}" for k in ["command"] + sorted(k for k in cfg if k not in ("command", "out"))]
    lines.append("[result]")
    return lines


def cmd_chains(cfg: dict):
    from .graph import chain_stable_components, format_structure

    system, _, d_eps, name = _target_system(cfg)
    if cfg["delta"] is None:
        raise ConfigError("delta: required (comma-separated list allowed)")
    deltas = _floats(cfg["delta"], "delta")
    if any(d < 0 for d in deltas):
        raise ConfigError("delta: must be nonnegative")
    if cfg["eps"] is not None:
        epss = _floats(cfg["eps"], "eps")
    elif d_eps is not None:
        epss = [d_eps]
    else:
        raise ConfigError("eps: required for --system inputs")
    body = [f"system = {system!r}"]
    import warnings

    for d in deltas:
        for e in epss:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                res = chain_stable_components(system, d, e, cfg["probe_delta"])
            body.append(f"--- delta={d!r} eps={e!r}")
            body.append(format_structure(res).rstrip("\n"))
    return name, body, 0


def cmd_verdict(cfg: dict):
    from .chaos import format_verdict, theorem_verdict

    system, d0, e0, name = _target_system(cfg)
    delta = _floats(cfg["delta"], "delta")[0] if cfg["delta"] is not None else d0
    eps = _floats(cfg["eps"], "eps")[0] if cfg["eps"] is not None else e0
    if delta is None or eps is None:
        raise ConfigError("delta/eps: required for --system inputs")
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v = theorem_verdict(system, delta, eps, cfg["tau"])
    return name, [f"system = {system!r}", format_verdict(v, system).rstrip("\n")], 0


def cmd_orbit(cfg: dict):
    from .scramble import format_density, sample_pair_density

    if not cfg["example"]:
        raise ConfigError("example: required")
    if cfg["pairs"] < 1:
        raise ConfigError("pairs: must be at least 1")
    if cfg["N"] < 1:
        raise ConfigError("N: must be at least 1")
    if cfg["seed"] is None:
        raise ConfigError("seed: required for sampling commands")
    b = _bundle(cfg)
    sampler = cfg["sampler"] or ("uniform" if b.id in ("ex41", "ex42") else "zk")
    delta = _floats(cfg["delta"], "delta")[0] if cfg["delta"] is not None else b.scramble_delta
    t_list = _floats(cfg["thresholds"], "thresholds") if cfg["thresholds"] else None
    try:
        rep = sample_pair_density(b.id, b.params, sampler, cfg["pairs"], cfg["N"], delta, t_list, cfg["eta"], cfg["seed"])
    except (ValueError, ChainChaosError) as exc:
        raise ConfigError(f"thresholds: {exc}") from None
    return b.id, [format_density(rep).rstrip("\n")], 0


def cmd_shadow(cfg: dict):
    from .shadowing import lemma41_density, shadow_batch

    if cfg["lemma41"]:
        if cfg["eps"] is None:
            raise ConfigError("eps: required with --lemma41")
        eps = _floats(cfg["eps"], "eps")[0]
        if cfg["gaps"] not in ("triangular", "squares", "none", "all"):
            raise ConfigError(f"gaps: unknown rule {cfg['gaps']!r}")
        frac = lemma41_density(cfg["gaps"], cfg["N"], eps)
        return "lemma41", [f"gaps = {cfg['gaps']}", f"N = {cfg['N']}", f"eps = {eps!r}", f"density = {frac!r}"], 0
    if cfg["map"] not in ("fullshift", "shift"):
        raise ConfigError(f"map: {cfg['map']!r} has no shadow constructor (use fullshift)")
    if cfg["delta"] is None:
        raise ConfigError("delta: required")
    delta = _floats(cfg["delta"], "delta")[0]
    if not 0 < delta <= 0.25:
        raise ConfigError("delta: must lie in (0, 1/4]")
    if cfg["seed"] is None:
        raise ConfigError("seed: required for sampling commands")
    if cfg["len"] < 1 or cfg["trials"] < 1:
        raise ConfigError("len/trials: must be at least 1")
    rows = shadow_batch(delta, cfg["len"], cfg["trials"], cfg["seed"])
    good = sum(1 for _, ok, _ in rows if ok)
    body = [f"eps = {4 * delta!r}", f"shadowed = {good}/{len(rows)}",
            f"max_deviation = {max(r[2] for r in rows)!r}", "trial\tok\tmax_deviation"]
    body += [f"{t}\t{int(ok)}\t{dev!r}" for t, ok, dev in rows]
    return cfg["map"], body, 0


def cmd_all(cfg: dict):
    from .catalog import EXAMPLE_IDS, evaluate_facts

    seed = 1 if cfg["seed"] is None else cfg["seed"]
    ids = [cfg["example"]] if cfg["example"] else list(EXAMPLE_IDS)
    body, status = [], 0
    for ex in ids:
        b = _bundle({**cfg, "example": ex}) if cfg["example"] else None
        params = b.params if b else None
        for r in evaluate_facts(ex, params, seed):
            body.append(f"{ex}\t{r.claim}\texpected={r.expected!r}\tobserved={r.observed!r}\t{'PASS' if r.ok else 'FAIL'}")
            if not r.ok:
                status = 1
    body.append(f"status = {'ok' if status == 0 else 'mismatch'}")
    return cfg["example"] or "catalog", body, status


def cmd_catalog(cfg: dict):
    from .catalog import DEFAULTS, EXAMPLE_IDS, PROBES, golden_facts

    body = []
    for ex in EXAMPLE_IDS:
        p = DEFAULTS[ex]
        d, e, sd = PROBES[ex]
        s = ",".join(str(v) for v in p.s)
        body.append(f"[{ex}] window={p.window} k_max={p.k_max} s={s} probe_delta={d!r} probe_eps={e!r} scramble_delta={sd!r}")
        body += [f"  {f.claim} = {f.expected!r}  # {f.statement}" for f in golden_facts(ex)]
    return "catalog", body, 0


COMMANDS = {"chains": cmd_chains, "verdict": cmd_verdict, "orbit": cmd_orbit, "shadow": cmd_shadow,
            "all": cmd_all, "catalog": cmd_catalog}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve(args)
        name, body, status = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"chainchaos: config error: {exc}", file=sys.stderr)
        return 2
    text = "\n".join(_header(cfg) + body) + "\n"
    target = cfg["out"]
    if target is None and os.environ.get(OUTPUT_ENV):
        target = str(Path(os.environ[OUTPUT_ENV]) / f"{args.command}-{name}.txt")
    if target:
        Path(target).parent.mkdir(parents=True, exist_ok=True)
        Path(target).write_text(text)
        print(f"{args.command}: wrote {target} (status {status})")
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
