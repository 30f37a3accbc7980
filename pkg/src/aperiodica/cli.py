"""Command-line front end.

Exit status: 0 on success, 1 for an invalid configuration, 2 when a
computation fails (the message names the failing operation).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .autocorrelation import ESTIMATORS, autocorr
from .conventions import ball_volume
from .cps import SchemeError, builtin, load_scheme, model_set_points
from .diffraction import (
    grid_candidates,
    module_scan,
    peak_scan,
    refine_peak,
    symmetry_check,
)
from .hull import Cocycle, TorusSystem, TrigPolynomial, hull_metric, omega_grid, ww_uniform_test
from .io import read_points, write_csv, write_points
from .patches import entropy_estimate, patch_census
from .pointset import fibonacci_word, random_tiling, seq_to_delone
from .svg import write_peak_svg


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _add_source(sp, required: bool = True):
    g = sp.add_argument_group("scheme source (exactly one)")
    g.add_argument("--scheme", help="scheme JSON file")
    g.add_argument("--builtin", choices=["fibonacci", "octagonal"])
    g.add_argument("--sequence", help="'fibonacci:N', 'random:N' (needs --seed) or a word like 'ab|ab'")
    g.add_argument("--points", help="point file written by 'gen'")
    sp.add_argument("--lengths", help="letter lengths for --sequence, e.g. 'a=1,b=sqrt2' "
                    "(defaults: fibonacci a=tau,b=1; random a=1,b=sqrt2)")
    sp.set_defaults(_source_required=required)


def _add_common(sp):
    sp.add_argument("--radius", type=float, help="sampling radius")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", required=True, help="output file (CSV, or point file for gen)")
    sp.add_argument("--reproducible", action="store_true", help="omit the timestamp comment")
    sp.add_argument("--threads", type=int, help="worker threads (fallback: APERIODICA_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="aperiodica", description="Aperiodic point sets: patches, autocorrelation, diffraction.")
    ap.add_argument("--version", action="version", version=f"aperiodica {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("gen", help="generate a point set")
    _add_source(sp)
    _add_common(sp)

    sp = sub.add_parser("patches", help="patch census with frequencies")
    _add_source(sp)
    _add_common(sp)
    sp.add_argument("--s", type=float, required=True, help="patch radius")
    sp.add_argument("--s-avg", type=float, help="averaging radius for frequencies")

    sp = sub.add_parser("entropy", help="ln N(S) / |B_S| over a list of S")
    _add_source(sp)
    _add_common(sp)
    sp.add_argument("--s-list", type=_floats, required=True)

    sp = sub.add_parser("autocorr", help="autocorrelation coefficients")
    _add_source(sp)
    _add_common(sp)
    sp.add_argument("--n", type=float, required=True, help="averaging radius")
    sp.add_argument("--smax", type=float, required=True, help="largest |z|")
    sp.add_argument("--estimator", choices=ESTIMATORS, default="anchored")

    sp = sub.add_parser("diffract", help="Bragg intensities on Fourier-module or grid candidates")
    _add_source(sp)
    _add_common(sp)
    sp.add_argument("--kmax", type=float, help="physical cutoff of the Fourier module")
    sp.add_argument("--kintmax", type=float, help="internal cutoff of the Fourier module")
    sp.add_argument("--grid-step", type=float, help="scan a uniform grid instead of the module")
    sp.add_argument("--xi-max", type=float, help="grid half-width (default: --kmax)")
    sp.add_argument("--s-list", type=_floats, help="averaging radii (default: the sampling radius)")
    sp.add_argument("--cesaro", action="store_true", help="report the tail mean over the s sequence")
    sp.add_argument("--refine", action="store_true", help="refine 1D grid maxima (bounded scalar search)")
    sp.add_argument("--svg")

    sp = sub.add_parser("symmetry", help="intensity discrepancy under an orthogonal map")
    _add_source(sp)
    _add_common(sp)
    sp.add_argument("--kmax", type=float, required=True)
    sp.add_argument("--kintmax", type=float, required=True)
    sp.add_argument("--angle", type=float, help="rotation angle in degrees (2D)")
    sp.add_argument("--reflect", action="store_true", help="use V = -I")
    sp.add_argument("--top", type=int, default=20)

    sp = sub.add_parser("hulldist", help="hull distance between two point files")
    sp.add_argument("first")
    sp.add_argument("second")
    sp.add_argument("--eps-grid", type=float, default=1e-3)
    sp.add_argument("--out", required=True)
    sp.add_argument("--reproducible", action="store_true")

    sp = sub.add_parser("ww", help="uniform convergence of Wiener/Wintner averages")
    _add_source(sp)
    sp.add_argument("--xi", type=_floats, required=True)
    sp.add_argument("--terms", required=True, help='JSON list like [{"q":[1,0],"re":1.0,"im":0.0}], inline or a file path')
    sp.add_argument("--nmax", type=float, required=True, help="largest n; n runs over powers of 10")
    sp.add_argument("--omega-points", type=int, default=100)
    sp.add_argument("--method", choices=["auto", "closed", "quadrature"], default="auto")
    sp.add_argument("--out", required=True)
    sp.add_argument("--reproducible", action="store_true")
    return ap


# ------------------------------------------------------------------ helpers


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if not k.startswith("_") and k != "reproducible"}


def _threads(args) -> int:
    t = getattr(args, "threads", None)
    if t is None:
        env = os.environ.get("APERIODICA_THREADS")
        try:
            t = int(env) if env else 1
        except ValueError as exc:
            raise ConfigError("APERIODICA_THREADS must be an integer") from exc
    if t < 1:
        raise ConfigError("--threads must be positive")
    return t


def _lengths(text: str) -> dict:
    out = {}
    for part in text.split(","):
        key, _, val = part.partition("=")
        if not key.strip() or not val.strip():
            raise ConfigError(f"bad --lengths entry {part!r}")
        out[key.strip()] = _number(val)
    return out


def _number(text: str) -> float:
    t = text.strip()
    try:
        if t == "tau":
            return (1 + math.sqrt(5)) / 2
        if t.startswith("sqrt"):
            return math.sqrt(float(t[4:].strip("()")))
        return float(t)
    except ValueError as exc:
        raise ConfigError(f"bad length {text!r}") from exc


def _scheme(args):
    try:
        if args.scheme:
            return load_scheme(args.scheme)
        if args.builtin:
            return builtin(args.builtin)
    except (OSError, json.JSONDecodeError, SchemeError, ValueError) as exc:
        raise ConfigError(f"scheme: {exc}") from exc
    return None


def _source(args):
    """(scheme or None, point set or None)."""
    chosen = [s for s in ("scheme", "builtin", "sequence", "points") if getattr(args, s, None)]
    if len(chosen) != 1:
        raise ConfigError("give exactly one of --scheme, --builtin, --sequence, --points")
    if args.points:
        try:
            return None, read_points(args.points)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"points: {exc}") from exc
    if args.sequence:
        return None, _sequence(args)
    return _scheme(args), None


def _sequence(args):
    spec = args.sequence
    kind, _, count = spec.partition(":")
    if kind == "random":
        if args.seed is None:
            raise ConfigError("random sequences need --seed")
        try:
            n = int(count)
        except ValueError as exc:
            raise ConfigError("use --sequence random:N") from exc
        return random_tiling(n, args.seed, _lengths(args.lengths) if args.lengths else None)
    if kind == "fibonacci":
        lengths = _lengths(args.lengths or "a=tau,b=1")
        try:
            n = int(count)
        except ValueError as exc:
            raise ConfigError("use --sequence fibonacci:N") from exc
        w = fibonacci_word(n)
        rev = w[::-1]
        return seq_to_delone((rev, w), lengths, exact_labels=True)
    if "|" in spec:
        if not args.lengths:
            raise ConfigError("literal words need --lengths")
        return seq_to_delone(spec, _lengths(args.lengths))
    raise ConfigError(f"unknown sequence spec {spec!r}")


def _sample(args, default_margin: float = 0.0):
    cps, p = _source(args)
    if p is not None:
        if args.radius is not None:
            p = p.restrict(args.radius)
        return cps, p
    if args.radius is None:
        raise ConfigError("--radius is required for schemes")
    if not args.radius > 0:
        raise ConfigError("--radius must be positive")
    return cps, model_set_points(cps, args.radius + default_margin)


def _xi_cols(dim: int) -> list[str]:
    return [f"xi_{k + 1}" for k in range(dim)]


# ------------------------------------------------------------------ commands


def cmd_gen(args):
    _, p = _sample(args)
    write_points(p, args.out)
    return f"{len(p)} points"


def cmd_patches(args):
    _, p = _sample(args)
    census = patch_census(p, args.s)
    s_avg = args.s_avg if args.s_avg is not None else p.region.inner_radius - args.s
    if s_avg + args.s > p.region.inner_radius * (1 + 1e-12) or s_avg <= 0:
        raise ConfigError("--s-avg + --s must fit inside the sampling region")
    vol = ball_volume(s_avg, p.dim)
    rows = []
    for cid, cls in enumerate(census.classes.values()):
        inside = np.count_nonzero(p.norms[np.array(cls.centers)] <= s_avg)
        rows.append((args.s, cid, cls.count, inside / vol))
    write_csv(args.out, ["S", "class_id", "count", "frequency"], rows, _config(args), args.reproducible)
    return f"N({args.s:g}) = {census.n_classes}"


def cmd_entropy(args):
    _, p = _sample(args)
    pts = entropy_estimate(p, args.s_list)
    write_csv(args.out, ["S", "N", "entropy_density"], [(e.s, e.n_patches, e.entropy) for e in pts],
              _config(args), args.reproducible)
    return "; ".join(f"S={e.s:g}: {e.entropy:.4g}" for e in pts)


def cmd_autocorr(args):
    margin = args.smax if args.estimator == "anchored" else 0.0
    if args.radius is None and (args.scheme or args.builtin):
        args.radius = args.n
    _, p = _sample(args, default_margin=margin)
    comb = autocorr(p, args.n, args.smax, args.estimator)
    cols = [f"z_{k + 1}" for k in range(p.dim)] + ["weight", "estimator", "n"]
    rows = [(*z, w, comb.estimator, comb.n) for z, w in zip(comb.support, comb.weights)]
    write_csv(args.out, cols, rows, _config(args), args.reproducible)
    return f"{len(comb)} support points"


def _peak_rows(peaks, dim):
    for e in peaks.entries:
        q = "" if e.q_label is None else " ".join(str(int(v)) for v in e.q_label)
        yield (*e.xi, peaks.s_used, e.intensity_bt, e.intensity_closed, q)


def cmd_diffract(args):
    cps, p = _sample(args)
    s_list = args.s_list or [p.region.inner_radius if args.radius is None else args.radius]
    threads = _threads(args)
    if args.grid_step is not None:
        half = args.xi_max if args.xi_max is not None else args.kmax
        if half is None or not args.grid_step > 0:
            raise ConfigError("grid scans need --grid-step > 0 and --xi-max (or --kmax)")
        cand = grid_candidates([0.0] * p.dim if p.dim == 1 else [-half] * p.dim, [half] * p.dim, args.grid_step)
        peaks = peak_scan(p, cand, s_list, threads=threads, cesaro=args.cesaro,
                          cutoffs={"grid_step": args.grid_step, "xi_max": half})
        if args.refine:
            refined = []
            I = peaks.intensities
            for j in range(1, len(I) - 1):
                if I[j] >= I[j - 1] and I[j] > I[j + 1] and I[j] > 1e-3 * I.max():
                    refined.append(refine_peak(p, float(peaks.xis[j, 0]), args.grid_step, peaks.s_used)[0])
            if refined:
                extra = peak_scan(p, refined, s_list, threads=threads, cesaro=args.cesaro)
                peaks.entries.extend(extra.entries)
    else:
        if cps is None or args.kmax is None or args.kintmax is None:
            raise ConfigError("module scans need a scheme with --kmax and --kintmax (or use --grid-step)")
        peaks = module_scan(p, cps, args.kmax, args.kintmax, s_list, threads=threads, cesaro=args.cesaro)
    cols = _xi_cols(p.dim) + ["s", "intensity_bt", "intensity_closed", "q_label"]
    write_csv(args.out, cols, _peak_rows(peaks, p.dim), _config(args), args.reproducible)
    if args.svg:
        write_peak_svg(args.svg, peaks.xis.reshape(-1, p.dim), peaks.intensities)
    return f"{len(peaks)} candidates"


def cmd_symmetry(args):
    cps, p = _sample(args)
    if cps is None:
        raise ConfigError("symmetry needs a scheme (--builtin or --scheme)")
    if args.reflect == (args.angle is not None):
        raise ConfigError("give exactly one of --angle and --reflect")
    if args.reflect:
        v = -np.eye(p.dim)
    else:
        if p.dim != 2:
            raise ConfigError("--angle needs a 2D scheme")
        a = math.radians(args.angle)
        v = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
    s = args.radius
    peaks = module_scan(p, cps, args.kmax, args.kintmax, [s], threads=_threads(args)).top(args.top)
    disc = symmetry_check(peaks, v, p, tol=1e-6)
    top = float(peaks.intensities.max()) if len(peaks) else 0.0
    write_csv(args.out, ["s", "peaks", "max_intensity", "discrepancy", "relative"],
              [(s, len(peaks), top, disc, disc / top if top else 0.0)], _config(args), args.reproducible)
    return f"discrepancy {disc:.3g}"


def cmd_hulldist(args):
    try:
        a, b = read_points(args.first), read_points(args.second)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    d = hull_metric(a, b, args.eps_grid)
    write_csv(args.out, ["eps_grid", "distance"], [(args.eps_grid, d)], _config(args), args.reproducible)
    return f"d = {d:.6g}"


def cmd_ww(args):
    cps, p = _source(args)
    if cps is None:
        raise ConfigError("ww needs a scheme (--builtin or --scheme)")
    text = args.terms if args.terms.lstrip().startswith("[") else None
    try:
        if text is None:
            text = Path(args.terms).read_text()
        f = TrigPolynomial.from_json(json.loads(text))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"terms: {exc}") from exc
    if len(f) and f.q.shape[1] != cps.total_dim:
        raise ConfigError("term vectors must have length N + m")
    if len(args.xi) != cps.phys_dim:
        raise ConfigError("--xi needs one value per physical dimension")
    if not args.nmax >= 10:
        raise ConfigError("--nmax must be at least 10")
    ts = TorusSystem.from_scheme(cps)
    n_list = [10.0**k for k in range(1, int(math.floor(math.log10(args.nmax) + 1e-9)) + 1)]
    res = ww_uniform_test(ts, f, Cocycle(args.xi), omega_grid(ts, args.omega_points), n_list, method=args.method)
    write_csv(args.out, ["n", "sup_dev", "n_times_sup_dev"], [(n, d, n * d) for n, d in res],
              _config(args), args.reproducible)
    return "; ".join(f"n={n:g}: {d:.3g}" for n, d in res)


COMMANDS = {
    "gen": (cmd_gen, "model_set_points/seq_to_delone"),
    "patches": (cmd_patches, "patch_census"),
    "entropy": (cmd_entropy, "entropy_estimate"),
    "autocorr": (cmd_autocorr, "autocorr"),
    "diffract": (cmd_diffract, "peak_scan"),
    "symmetry": (cmd_symmetry, "symmetry_check"),
    "hulldist": (cmd_hulldist, "hull_metric"),
    "ww": (cmd_ww, "ww_uniform_test"),
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    func, op = COMMANDS[args.command]
    try:
        if getattr(args, "threads", None) is not None:
            _threads(args)
        msg = func(args)
    except ConfigError as exc:
        print(f"aperiodica {args.command}: invalid configuration: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, MemoryError, SchemeError) as exc:
        print(f"aperiodica {args.command}: {op} failed: {exc}", file=sys.stderr)
        return 2
    print(f"aperiodica {args.command}: {msg}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
