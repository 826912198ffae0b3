"""Command-line front end: one subcommand per analysis, CSV/JSON output plus a manifest.

Every output file ``X`` gets a sibling ``X.manifest.json`` and CSV files open
with a ``#`` block summarising the same manifest.  Floats are written with 12
significant digits so identical parameters give byte-identical files.

Exit codes: 0 success, 2 invalid arguments or parameters, 1 internal error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__, dynamics, many_particle, number_theory, resonance_gap, sequences, single_particle
from ._accel import backend
from .sequences import SequenceError, Variant
from .single_particle import ChainConfig

FLOAT_FMT = "{:.12g}"


class UsageError(Exception):
    """Bad parameter value; reported with exit code 2."""


@dataclass
class RunManifest:
    command: str
    parameters: dict
    code_version: str = __version__
    seed_registry: list = field(default_factory=list)
    outputs: list = field(default_factory=list)

    def to_dict(self):
        return {
            "command": self.command,
            "parameters": self.parameters,
            "code_version": self.code_version,
            "backend": backend(),
            "seed_registry": self.seed_registry,
            "outputs": self.outputs,
        }

    def header_lines(self):
        lines = [f"locchain {self.command} (version {self.code_version})"]
        for k in sorted(self.parameters):
            lines.append(f"{k} = {json.dumps(self.parameters[k], sort_keys=True)}")
        if self.seed_registry:
            lines.append(f"seeds = {json.dumps(self.seed_registry)}")
        return ["# " + s for s in lines]


# ---------------------------------------------------------------------------
# argument parsing helpers
# ---------------------------------------------------------------------------

def parse_grid(text):
    """``start:stop:step`` (inclusive stop) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid {text!r} must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise UsageError(f"grid {text!r} needs step > 0 and stop >= start")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    return [float(x) for x in text.split(",") if x.strip()]


def parse_int_range(text, sep=".."):
    """``a..b`` (inclusive) or a single integer."""
    if sep in text:
        a, b = text.split(sep, 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise UsageError(f"range {text!r} is empty")
        return lo, hi
    v = int(text)
    return v, v


def parse_int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def resolve_jobs(flag):
    if flag is not None:
        jobs = flag
    elif os.environ.get("LOCCHAIN_JOBS"):
        try:
            jobs = int(os.environ["LOCCHAIN_JOBS"])
        except ValueError:
            raise UsageError("LOCCHAIN_JOBS must be an integer")
    else:
        jobs = os.cpu_count() or 1
    if jobs < 1:
        raise UsageError("--jobs must be >= 1")
    return jobs


def pmap(func, items, jobs):
    """Ordered map, in worker processes when ``jobs > 1``."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as ex:
        return list(ex.map(func, items))


def fmt(v):
    if v is None:
        return "NA"
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "NA" if not np.isfinite(v) else FLOAT_FMT.format(float(v))
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(FLOAT_FMT.format(float(obj))) if np.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_manifest(path, manifest):
    mpath = Path(str(path) + ".manifest.json")
    mpath.write_text(json.dumps(_jsonable(manifest.to_dict()), indent=2, sort_keys=True) + "\n")
    return mpath


def write_csv(path, manifest, columns, rows):
    path = Path(path)
    manifest.outputs.append(str(path))
    lines = manifest.header_lines()
    lines.append(",".join(columns))
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")
    write_manifest(path, manifest)


def write_json(path, manifest, payload):
    path = Path(path)
    manifest.outputs.append(str(path))
    path.write_text(json.dumps(_jsonable(payload), indent=1, sort_keys=True) + "\n")
    write_manifest(path, manifest)


# ---------------------------------------------------------------------------
# sequence options shared by many subcommands
# ---------------------------------------------------------------------------

def add_sequence_args(p, variant="base", alpha=None, alphap=None, beta=None):
    g = p.add_argument_group("sequence")
    g.add_argument("--variant", default=variant, choices=[v.value for v in Variant if v is not Variant.PERTURBED])
    g.add_argument("--alpha", type=float, default=alpha)
    g.add_argument("--alphap", type=float, default=alphap, help="mod6 shift alpha'")
    g.add_argument("--beta", type=float, default=beta, help="mod3 shift beta")
    g.add_argument("--W", type=float, default=None, help="random bandwidth, units of J")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--D", type=float, default=None, help="perturbation amplitude added to eps/h")
    g.add_argument("--D-seed", type=int, default=0)


def build_spec(args, alpha=None):
    """Validated :class:`SequenceSpec` from parsed options (``alpha`` overrides ``--alpha``)."""
    v = Variant(args.variant)
    a = args.alpha if alpha is None else alpha
    if v is Variant.BASE:
        spec = sequences.base(a)
    elif v is Variant.MOD6:
        spec = sequences.mod6(a, args.alphap)
    elif v is Variant.MOD3:
        spec = sequences.mod3(a, args.beta)
    elif v is Variant.PDC:
        spec = sequences.pdc(a)
    else:
        spec = sequences.random_sequence(args.W, args.seed)
    if args.D is not None:
        if v is Variant.RANDOM:
            raise UsageError("--D applies to deterministic variants only")
        spec = sequences.perturb(spec, args.D, args.D_seed)
    return spec


def seeds_of(args):
    out = []
    if args.variant == Variant.RANDOM.value:
        out.append({"stream": "random", "seed": args.seed})
    if getattr(args, "D", None) is not None:
        out.append({"stream": "perturb", "seed": args.D_seed})
    return out


def params_of(args, skip=("func", "jobs", "out", "command", "config")):
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def positive_grid(args, text):
    """Alpha grid with nonpositive points dropped (alpha = 0 is not a valid sequence)."""
    grid = parse_grid(text)
    kept = [a for a in grid if a > 0.0]
    if not kept:
        raise UsageError("alpha grid has no point with alpha > 0")
    for a in kept:
        build_spec(args, alpha=a)
    return kept, len(grid) - len(kept)


# ---------------------------------------------------------------------------
# workers (top level so they pickle)
# ---------------------------------------------------------------------------

def _ipr1_point(config, alpha):
    st = single_particle.ipr_stats(single_particle.diagonalize(config.with_alpha(alpha)))
    return alpha, st["mean"], st["max"], st["argmax_site"]


def _iprN_point(config, basis, alpha):
    spec = many_particle.diagonalize(config.with_alpha(alpha), basis)
    iprs = spec.iprs
    return alpha, float(iprs.mean()), float(iprs.max()), int(spec.degenerate.sum())


def _hist_chunk(config, basis, specs):
    out = []
    for s in specs:
        cfg = ChainConfig(s, config.n0, config.length_l, config.h_over_j, config.delta)
        out.append(many_particle.diagonalize(cfg, basis).iprs)
    return np.concatenate(out)


def _scaling_point(target, length_l, alpha_max, points, hj):
    try:
        roots = single_particle.alpha_at_fixed_ipr(target, hj, length_l, alpha_max=alpha_max, points=points)
    except ValueError:
        roots = [None]
    return [(target, hj, r, i) for i, r in enumerate(roots)]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_seq(args, jobs):
    spec = build_spec(args)
    lo, hi = parse_int_range(args.n)
    if lo < 1:
        raise UsageError("--n must start at 1 or above")
    if args.poly and spec.variant is not Variant.BASE:
        raise UsageError("--poly is defined for the base variant only")
    m = RunManifest("seq", params_of(args), seed_registry=seeds_of(args))
    n = np.arange(lo, hi + 1)
    eps = sequences.energy(spec, n)
    col = "eps_over_j" if spec.units == "J" else "eps_over_h"
    write_csv(args.out, m, ["n", col], zip(n.tolist(), eps.tolist()))
    if args.poly:
        polys = {str(k): sequences.alpha_polynomial(int(k)).to_list() for k in n}
        write_json(args.poly, RunManifest("seq", params_of(args)), polys)


def cmd_nu(args, jobs):
    lo, hi = parse_int_range(args.n)
    ms = parse_int_list(args.m)
    if lo < 1 or any(v < 1 for v in ms):
        raise UsageError("need n >= 1 and m >= 1")
    m = RunManifest("nu", params_of(args))
    rows, hc = [], {}
    for n in range(lo, hi + 1):
        for mm in ms:
            prof = number_theory.profile(n, mm, i_max=args.i_max)
            rows.append((n, mm, prof.lowdeg_q, prof.nu_float))
            hc[f"{n},{mm}"] = prof.h_counts.tolist()
    write_csv(args.out, m, ["n", "m", "lowdeg", "nu"], rows)
    if args.hcounts:
        write_json(args.hcounts, RunManifest("nu", params_of(args)), hc)


def _chain(args, spec):
    return ChainConfig(spec, n0=args.n0, length_l=args.L, h_over_j=args.hoverj, delta=getattr(args, "delta", 0.0))


def cmd_ipr1(args, jobs):
    grid, dropped = positive_grid(args, args.alpha_grid)
    config = _chain(args, build_spec(args, alpha=grid[0]))
    m = RunManifest("ipr1", dict(params_of(args), dropped_grid_points=dropped), seed_registry=seeds_of(args))
    rows = pmap(partial(_ipr1_point, config), grid, jobs)
    write_csv(args.out, m, ["alpha", "mean_ipr", "max_ipr", "argmax_site"], rows)


def cmd_iprN(args, jobs):
    grid, dropped = positive_grid(args, args.alpha_grid)
    config = _chain(args, build_spec(args, alpha=grid[0]))
    basis = many_particle.build_basis(args.L, args.N)
    m = RunManifest("iprN", dict(params_of(args), dropped_grid_points=dropped), seed_registry=seeds_of(args))
    rows = pmap(partial(_iprN_point, config, basis), grid, jobs)
    write_csv(args.out, m, ["alpha", "mean_ipr", "max_ipr", "n_degenerate"], rows)
    if args.report is not None:
        spec = many_particle.diagonalize(config.with_alpha(args.report), basis)
        rep = many_particle.hybridization_report(spec, ipr_threshold=args.report_threshold)
        write_json(str(args.out) + ".report.json", RunManifest("iprN", params_of(args)), rep)


def cmd_gap(args, jobs):
    spec = build_spec(args)
    if args.nmin < 1 or args.nmax < args.nmin:
        raise UsageError("need 1 <= nmin <= nmax")
    rep = resonance_gap.min_gap(spec, (args.nmin, args.nmax), min_site=args.min_site)
    params = dict(params_of(args), min_gap_over_h=rep.min_gap_over_h,
                  min_by_class={str(k): v for k, v in rep.min_by_class.items()}, skipped=rep.skipped)
    m = RunManifest("gap", params, seed_registry=seeds_of(args))
    rows = [(r.n, r.k1, r.k2, r.k3, r.k4, r.kappa, r.energy_class, r.delta_eps_over_h) for r in rep.records]
    write_csv(args.out, m, ["n", "k1", "k2", "k3", "k4", "kappa", "class", "deps_over_h"], rows)


def _gap_noise_point(spec, d_exp, n_range, min_site, seeds):
    a = spec.param_alpha
    res = resonance_gap.gap_ratio(spec, a**d_exp, seeds, n_range=n_range, min_site=min_site)
    return [(d_exp, a**d_exp, s, r) for s, r in zip(seeds, res["R"])]


def cmd_gap_noise(args, jobs):
    spec = build_spec(args)
    if spec.variant is Variant.PERTURBED:
        raise UsageError("gap-noise perturbs the sequence itself; drop --D")
    exps = parse_grid(args.D_exp)
    if args.seeds < 2:
        raise UsageError("--seeds must be >= 2")
    seeds = list(range(args.seed0, args.seed0 + args.seeds))
    m = RunManifest("gap-noise", params_of(args), seed_registry=[{"stream": "perturb", "seed": s} for s in seeds])
    work = partial(_gap_noise_point, spec, n_range=(args.nmin, args.nmax), min_site=args.min_site, seeds=seeds)
    rows = [r for chunk in pmap(work, exps, jobs) for r in chunk]
    write_csv(args.out, m, ["D_exp", "D", "seed", "R"], rows)


def cmd_broadband(args, jobs):
    spec = build_spec(args)
    threshold = args.threshold if args.threshold is not None else spec.param_alpha ** 4
    if threshold <= 0:
        raise UsageError("--threshold must be > 0")
    if args.nmax < 12:
        raise UsageError("--nmax must be >= 12")
    m = RunManifest("broadband", dict(params_of(args), threshold_used=threshold), seed_registry=seeds_of(args))
    rows = resonance_gap.broadband_scan(spec, args.nmax, threshold)
    write_csv(args.out, m, ["n", "deps_over_h", "n_mod6_is_5"], rows)


def cmd_evolve(args, jobs):
    lo, hi = parse_int_range(args.section, sep=":")
    register = parse_int_list(args.register)
    spec = build_spec(args)
    config = ChainConfig(spec, n0=lo, length_l=hi - lo + 1, h_over_j=args.hoverj, delta=args.delta)
    if not all(lo <= s <= hi for s in register) or len(set(register)) != len(register):
        raise UsageError(f"register must be distinct sites inside [{lo}, {hi}]")
    if args.tmax <= 0:
        raise UsageError("--tmax must be > 0")
    many_particle.build_basis(config.length_l, len(register))
    m = RunManifest("evolve", params_of(args), seed_registry=seeds_of(args))
    times = dynamics.log_times(args.tmax, t_min=args.tmin, points_per_decade=args.ppd)
    trace = dynamics.evolve_amplitude(config, register, times)
    write_csv(args.out, m, ["t", "amp_sq"], zip(trace.times.tolist(), trace.amp_sq.tolist()))


def cmd_hist(args, jobs):
    v = Variant(args.variant)
    if v is Variant.RANDOM:
        if args.realizations < 2:
            raise UsageError("random histograms need --realizations >= 2")
        specs = [sequences.random_sequence(args.W, args.seed + i) for i in range(args.realizations)]
        seeds = [{"stream": "random", "seed": args.seed + i} for i in range(args.realizations)]
    else:
        specs = [build_spec(args)]
        seeds = seeds_of(args)
    config = ChainConfig(specs[0], n0=args.n0, length_l=args.L, h_over_j=args.hoverj, delta=args.delta)
    basis = many_particle.build_basis(args.L, args.N)
    m = RunManifest("hist", params_of(args), seed_registry=seeds)
    chunks = [specs[i::jobs] for i in range(min(jobs, len(specs)))]
    parts = pmap(partial(_hist_chunk, config, basis), chunks, jobs)
    # undo the round-robin split so the pooled order matches the realisation order
    per = [np.split(p, len(c)) for p, c in zip(parts, chunks)]
    iprs = np.concatenate([per[i % len(chunks)][i // len(chunks)] for i in range(len(specs))])
    hi = args.max_ipr if args.max_ipr is not None else max(float(iprs.max()), 1.0 + 1e-9)
    density, edges = np.histogram(iprs, bins=args.bins, range=(1.0, hi), density=True)
    centres, logp = many_particle.log_tail({"bin_edges": edges, "density": density})
    payload = {
        "bin_edges": edges,
        "density": density,
        "log_tail": {"ipr": centres, "log_density": logp},
        "n_states": int(iprs.size),
        "fraction_above_2": float(np.mean(iprs > 2.0)),
        "max_ipr": float(iprs.max()),
    }
    write_json(args.out, m, payload)


def cmd_scaling(args, jobs):
    targets = parse_grid(args.targets)
    hjs = parse_grid(args.hoverj_grid)
    if any(h <= 0 for h in hjs):
        raise UsageError("h/J grid must be > 0")
    if args.L < 2 or args.points < 2:
        raise UsageError("need --L >= 2 and --points >= 2")
    m = RunManifest("scaling", params_of(args))
    rows = []
    for t in targets:
        work = partial(_scaling_point, t, args.L, args.alpha_max, args.points)
        rows.extend(r for chunk in pmap(work, hjs, jobs) for r in chunk)
    write_csv(args.out, m, ["target", "h_over_j", "alpha", "root_index"], rows)


def cmd_audit(args, jobs):
    spec = build_spec(args)
    if spec.variant not in (Variant.MOD6, Variant.MOD3):
        raise UsageError("audit needs --variant mod6 or mod3")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rows = resonance_gap.new_resonance_audit(spec, floor=args.floor)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    m = RunManifest("audit", params_of(args))
    write_csv(args.out, m, ["combination", "value", "ok"], rows)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_chain(p, L, hoverj=20.0):
    p.add_argument("--L", type=int, default=L, help="number of sites")
    p.add_argument("--n0", type=int, default=1, help="first site label")
    p.add_argument("--hoverj", type=float, default=hoverj, help="h/J")


def build_parser():
    parser = argparse.ArgumentParser(prog="locchain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"locchain {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--out", default=None, help="output path (default: <command>.csv / .json)")
        p.add_argument("--jobs", type=int, default=None, help="worker processes (env LOCCHAIN_JOBS; default all cores)")
        p.set_defaults(func=func)
        return p

    p = add("seq", cmd_seq, "dump eps_n over a site range")
    add_sequence_args(p, alpha=0.3)
    p.add_argument("--n", default="1..2000", help="site range a..b")
    p.add_argument("--poly", default=None, help="also write exact integer polynomials to this JSON file")

    p = add("nu", cmd_nu, "exact lowdeg Q_n(m) and nu")
    p.add_argument("--n", default="1..50")
    p.add_argument("--m", default="1000")
    p.add_argument("--i-max", type=int, default=None)
    p.add_argument("--hcounts", default=None, help="write h(i) counts to this JSON file")

    p = add("ipr1", cmd_ipr1, "single-particle IPR over an alpha grid")
    add_sequence_args(p)
    _add_chain(p, 300)
    p.add_argument("--alpha-grid", default="0:0.5:0.001")

    p = add("iprN", cmd_iprN, "many-particle IPR over an alpha grid")
    add_sequence_args(p)
    _add_chain(p, 12)
    p.add_argument("--N", type=int, default=6)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--alpha-grid", default="0:0.5:0.002")
    p.add_argument("--report", type=float, default=None, help="write a hybridisation report at this alpha")
    p.add_argument("--report-threshold", type=float, default=1.5)

    p = add("gap", cmd_gap, "detuning of every transition family")
    add_sequence_args(p, variant="mod6", alpha=0.25, alphap=0.22, beta=0.1725)
    p.add_argument("--nmin", type=int, default=resonance_gap.DEFAULT_N_RANGE[0])
    p.add_argument("--nmax", type=int, default=resonance_gap.DEFAULT_N_RANGE[1])
    p.add_argument("--min-site", type=int, default=resonance_gap.DEFAULT_MIN_SITE)

    p = add("gap-noise", cmd_gap_noise, "minimal-gap ratio under random perturbation alpha**D_exp")
    add_sequence_args(p, variant="mod6", alpha=0.25, alphap=0.22, beta=0.1725)
    p.add_argument("--D-exp", default="3,4,5")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--seed0", type=int, default=0)
    p.add_argument("--nmin", type=int, default=resonance_gap.DEFAULT_N_RANGE[0])
    p.add_argument("--nmax", type=int, default=resonance_gap.DEFAULT_N_RANGE[1])
    p.add_argument("--min-site", type=int, default=resonance_gap.DEFAULT_MIN_SITE)

    p = add("broadband", cmd_broadband, "scan the (n,n+1)<->(n-1,n+2) family")
    add_sequence_args(p, alpha=0.25, alphap=0.22, beta=0.1725)
    p.add_argument("--nmax", type=int, default=842)
    p.add_argument("--threshold", type=float, default=None, help="default alpha**4")

    p = add("evolve", cmd_evolve, "return probability of an on-site register")
    add_sequence_args(p, alpha=0.25, alphap=0.22, beta=0.1725)
    p.add_argument("--hoverj", type=float, default=20.0)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--section", default="415:426", help="first:last site")
    p.add_argument("--register", default="416,419,420,422,423,424")
    p.add_argument("--tmax", type=float, default=1e6)
    p.add_argument("--tmin", type=float, default=1e-2)
    p.add_argument("--ppd", type=int, default=dynamics.POINTS_PER_DECADE, help="samples per decade")

    p = add("hist", cmd_hist, "IPR distribution over an ensemble")
    add_sequence_args(p, variant="random", alpha=0.274)
    p.set_defaults(W=26.0)
    _add_chain(p, 12)
    p.add_argument("--N", type=int, default=6)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--realizations", type=int, default=2000)
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--max-ipr", type=float, default=None)

    p = add("scaling", cmd_scaling, "alpha(h/J) at fixed mean IPR")
    p.add_argument("--targets", default="95,50,10,2,1.2")
    p.add_argument("--hoverj-grid", default="20:100:10")
    p.add_argument("--L", type=int, default=300)
    p.add_argument("--alpha-max", type=float, default=0.4)
    p.add_argument("--points", type=int, default=400)

    p = add("audit", cmd_audit, "check alpha-terms against the site shifts")
    add_sequence_args(p, variant="mod6", alpha=0.25, alphap=0.22, beta=0.1725)
    p.add_argument("--floor", type=float, default=None, help="default alpha**3")

    p = sub.add_parser("run", help="run jobs from a TOML campaign file")
    p.add_argument("config")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=None)
    return parser


_JSON_COMMANDS = {"hist"}


def campaign_argv(config_path):
    """Translate a TOML campaign into one argv list per job.

    The file holds ``[[job]]`` tables (or one top-level table) with a
    ``command`` key; every other key is the flag name without dashes
    (underscores allowed).  Booleans become bare flags.
    """
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    with open(config_path, "rb") as fh:
        data = tomllib.load(fh)
    jobs = data.get("job", [data] if "command" in data else [])
    if not jobs:
        raise UsageError(f"{config_path}: no [[job]] tables with a 'command' key")
    out = []
    for i, job in enumerate(jobs):
        job = dict(job)
        cmd = job.pop("command", None)
        if cmd is None:
            raise UsageError(f"{config_path}: job {i} lacks 'command'")
        argv = [cmd]
        for key, val in job.items():
            flag = "--" + key.replace("_", "-")
            if isinstance(val, bool):
                if val:
                    argv.append(flag)
            elif isinstance(val, list):
                argv += [flag, ",".join(str(v) for v in val)]
            else:
                argv += [flag, str(val)]
        out.append(argv)
    return out


def _dispatch(parser, argv, jobs_override=None):
    args = parser.parse_args(argv)
    if args.command == "run":
        jobs = resolve_jobs(args.jobs)
        for sub_argv in campaign_argv(args.config):
            if "--jobs" not in sub_argv:
                sub_argv += ["--jobs", str(jobs)]
            _dispatch(parser, sub_argv)
        return
    jobs = resolve_jobs(args.jobs)
    if args.out is None:
        args.out = f"{args.command}.{'json' if args.command in _JSON_COMMANDS else 'csv'}"
    args.func(args, jobs)


def main(argv=None):
    parser = build_parser()
    try:
        _dispatch(parser, sys.argv[1:] if argv is None else list(argv))
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    except (UsageError, ValueError, many_particle.SectorTooLarge, FileNotFoundError) as exc:
        print(f"locchain: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"locchain: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
