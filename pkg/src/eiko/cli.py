"""Command-line front end: solve / compare / plan / sfs / replay.

Every run writes a manifest of fully-resolved parameters (`key = value`
lines) sufficient to re-execute it identically in single-threaded mode;
`eiko replay <manifest>` does exactly that.  Inputs are validated before any
output file is created.

Exit codes: 0 success, 1 usage or input error, 2 solver failure,
3 backtracking failed to reach the source.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, fixtures
from .field import GridSpec, ScalarField, SourceSet, percent_error
from .formats import (
    read_field,
    read_kv,
    read_pgm,
    write_field,
    write_field_csv,
    write_kv,
)
from .kernels import ConvPolicy
from .perturb import PerturbConfig, scaled_solve
from .plan import backtrack, maze_to_forcing
from .report import report_items
from .sfs import LuminanceImage, sfs_reconstruct
from .sparse import CgError, sparse_eikonal
from .sweep import SweepConfig, sweep_solve


class UsageError(Exception):
    pass


class SolverFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract is 1
        raise UsageError(message)


def _parse_index(text: str, what: str) -> tuple[tuple[int, int], float]:
    """'i,j' or 'i,j:h' -> ((i, j), h)."""
    try:
        head, _, tail = text.partition(":")
        i, j = (int(t) for t in head.split(","))
        h = float(tail) if tail else 0.0
        return (i, j), h
    except ValueError:
        raise UsageError(f"bad {what} {text!r}; expected i,j or i,j:h") from None


def _sources_from_args(args, grid: GridSpec, fixture) -> SourceSet:
    if args.source:
        pts, vals = zip(*(_parse_index(s, "--source") for s in args.source))
        src = SourceSet(pts, vals)
    elif fixture is not None and fixture.sources is not None:
        src = fixture.sources
    else:
        raise UsageError("no seed points: pass --source i,j[:h]")
    try:
        src.validate_for(grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return src


def _pick(explicit, fixture_defaults: dict, key: str, fallback):
    if explicit is not None:
        return explicit
    if key in fixture_defaults:
        return fixture_defaults[key]
    return fallback


def _build_fixture(name: str | None, size: int | None):
    if name is None:
        return None
    kwargs = {}
    if size is not None:
        builder = fixtures._BUILDERS.get(name)
        if builder is None:
            raise UsageError(f"unknown fixture {name!r}")
        import inspect

        params = inspect.signature(builder).parameters
        if "n" in params:
            kwargs["n"] = size
        elif "size" in params:
            kwargs["size"] = size
        else:
            raise UsageError(f"fixture {name!r} has no size parameter")
    try:
        return fixtures.build(name, **kwargs)
    except KeyError as exc:
        raise UsageError(str(exc)) from None


def _prepare_out(out: str) -> Path:
    # Directory creation is deferred to the first write so that usage errors
    # leave no artifacts behind.
    return Path(out)


def _write_manifest(out_dir: Path, command: str, params: dict, t0: float) -> None:
    items = {"tool": "eiko", "version": __version__, "command": command}
    for k in sorted(params):
        v = params[k]
        if isinstance(v, tuple):
            v = ";".join(str(x) for x in v)
        items[f"arg.{k}"] = v
    items["wall_time"] = time.perf_counter() - t0
    write_kv(out_dir / "manifest.txt", items)


# ---------------------------------------------------------------------------
# solve


def run_solve(params: dict, out_dir: Path) -> int:
    t0 = time.perf_counter()
    fixture = _build_fixture(params.get("fixture"), params.get("fixture_size"))
    if fixture is not None:
        if fixture.f is None:
            raise UsageError(f"fixture {fixture.name!r} is not a solver fixture")
        f = fixture.f
    elif params.get("forcing"):
        f = read_field(params["forcing"])
    else:
        raise UsageError("pass --fixture NAME or --forcing FILE")
    src_spec = params.get("source") or ()
    if src_spec:
        pts, vals = zip(*(_parse_index(s, "--source") for s in src_spec))
        sources = SourceSet(pts, vals)
    elif fixture is not None and fixture.sources is not None:
        sources = fixture.sources
    else:
        raise UsageError("no seed points: pass --source i,j[:h]")
    try:
        sources.validate_for(f.grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    backend = params["backend"]
    try:
        if backend == "perturb":
            cfg = PerturbConfig(
                hbar=params["hbar"],
                terms=params["terms"],
                ftilde=params.get("ftilde"),
                tau=params["tau"],
                conv_policy=ConvPolicy(
                    mode=params["conv_mode"],
                    origin_regularization=params["origin_reg"],
                    cap_value=params.get("cap_value"),
                ),
                noise_floor_rel=params["noise_floor"],
            )
            rep = scaled_solve(f, sources, cfg)
            s_star, items = rep.s_star, report_items(rep)
        elif backend == "sparse":
            rep = sparse_eikonal(
                f,
                sources,
                hbar=params["hbar"],
                tol=params["tol"],
                max_iter=params.get("max_iter"),
                anchor_sources=not params["no_anchor"],
                reference_correction=params["reference_correction"],
                boundary=params["boundary"],
            )
            s_star, items = rep.s_star, report_items(rep)
        elif backend == "sweep":
            s_star = sweep_solve(f, sources, SweepConfig(sweeps=params["sweeps"]))
            items = {
                "backend": "sweep",
                "sweeps": params["sweeps"],
                "wall_time": time.perf_counter() - t0,
            }
        else:
            raise UsageError(f"unknown backend {backend!r}")
    except UsageError:
        raise
    except (CgError, ValueError) as exc:
        raise SolverFailure(str(exc)) from exc

    if fixture is not None and fixture.reference is not None:
        pe = percent_error(s_star, fixture.reference, exclude=sources)
        items["reference_percent_error"] = pe.percent
        items["reference_max_abs_diff"] = pe.max_abs_diff
        items["reference_excluded_nodes"] = len(sources)

    out_dir.mkdir(parents=True, exist_ok=True)
    write_field(out_dir / "s_star.eikf", s_star)
    if params["csv"]:
        write_field_csv(out_dir / "s_star.csv", s_star)
    write_kv(out_dir / "report.txt", items)
    _write_manifest(out_dir, "solve", params, t0)
    if "reference_percent_error" in items:
        print(
            f"{items['reference_percent_error']:.6f} "
            f"{items['reference_max_abs_diff']:.6f}"
        )
    return 0


# ---------------------------------------------------------------------------
# compare


def run_compare(params: dict) -> int:
    a = read_field(params["field_a"])
    b = read_field(params["field_b"])
    if a.grid != b.grid:
        raise UsageError("fields are on different grids")
    exclude = None
    if params.get("sources"):
        pts = []
        for chunk in params["sources"].split(";"):
            (pt, _h) = _parse_index(chunk.strip(), "--sources")
            pts.append(pt)
        exclude = SourceSet(tuple(pts))
        try:
            exclude.validate_for(a.grid)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    try:
        pe = percent_error(a, b, exclude=exclude)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"{pe.percent:.6f} {pe.max_abs_diff:.6f}")
    return 0


# ---------------------------------------------------------------------------
# plan


def run_plan(params: dict, out_dir: Path) -> int:
    t0 = time.perf_counter()
    fixture = _build_fixture(params.get("fixture"), params.get("fixture_size"))
    if fixture is not None:
        if fixture.maze is None:
            raise UsageError(f"fixture {fixture.name!r} is not a maze fixture")
        image = fixture.maze
        fdef = fixture.defaults
    elif params.get("maze"):
        image, _maxval = read_pgm(params["maze"])
        fdef = {}
    else:
        raise UsageError("pass --fixture NAME or --maze FILE.pgm")

    lo = _pick(params.get("lo"), fdef, "lo", 1.0)
    hi = _pick(params.get("hi"), fdef, "hi", 1000.0)
    hbar = _pick(params.get("hbar"), fdef, "hbar", 2.0)
    try:
        cost = maze_to_forcing(image, lo=lo, hi=hi, threshold=params["threshold"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    if params.get("source"):
        (pt, h) = _parse_index(params["source"], "--source")
        sources = SourceSet((pt,), (h,))
    elif "source" in fdef:
        sources = SourceSet((tuple(fdef["source"]),))
    else:
        raise UsageError("no source pixel: pass --source i,j")
    try:
        sources.validate_for(cost.field.grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    starts = []
    for s in params.get("start") or ():
        (pt, _h) = _parse_index(s, "--start")
        starts.append(pt)
    if not starts and fixture is not None and fixture.start is not None:
        starts.append(fixture.start)
    if not starts:
        raise UsageError("no start pixel: pass --start i,j")
    for pt in starts:
        if not cost.field.grid.contains_index(pt):
            raise UsageError(f"start pixel {pt} outside maze")

    backend = params["backend"]
    try:
        if backend == "sparse":
            rep = sparse_eikonal(
                cost.field,
                sources,
                hbar=hbar,
                tol=params["tol"],
                max_iter=params.get("max_iter"),
            )
            s_star, items = rep.s_star, report_items(rep)
        elif backend == "perturb":
            cfg = PerturbConfig(hbar=hbar, terms=params["terms"], tau=params["tau"])
            rep = scaled_solve(cost.field, sources, cfg)
            s_star, items = rep.s_star, report_items(rep)
        elif backend == "sweep":
            s_star = sweep_solve(cost.field, sources, SweepConfig(sweeps=params["sweeps"]))
            items = {"backend": "sweep", "sweeps": params["sweeps"]}
        else:
            raise UsageError(f"unknown backend {backend!r}")
    except UsageError:
        raise
    except (CgError, ValueError) as exc:
        raise SolverFailure(str(exc)) from exc

    items["lo"] = lo
    items["hi"] = hi
    all_reached = True
    paths = []
    for k, pt in enumerate(starts):
        path = backtrack(
            s_star,
            s_star.grid.world(pt),
            sources,
            step=params.get("step"),
            eps=params.get("eps"),
            max_steps=params["max_steps"],
        )
        paths.append(path)
        items[f"path_{k}_status"] = path.status
        items[f"path_{k}_points"] = len(path.points)
        if path.status != "reached_source":
            all_reached = False

    out_dir.mkdir(parents=True, exist_ok=True)
    write_field(out_dir / "s_star.eikf", s_star)
    for k, path in enumerate(paths):
        with open(out_dir / f"path_{k}.csv", "w", encoding="ascii", newline="\n") as fh:
            fh.write("x,y\n")
            for px, py in path.points:
                fh.write(f"{px:.17g},{py:.17g}\n")
            fh.write(f"# status: {path.status}\n")
    write_kv(out_dir / "report.txt", items)
    _write_manifest(out_dir, "plan", params, t0)
    for k, path in enumerate(paths):
        print(f"path_{k}: {path.status} ({len(path.points)} points)")
    return 0 if all_reached else 3


# ---------------------------------------------------------------------------
# sfs


def run_sfs(params: dict, out_dir: Path) -> int:
    t0 = time.perf_counter()
    fixture = _build_fixture(params.get("fixture"), params.get("fixture_size"))
    truth = None
    if fixture is not None:
        if fixture.luminance is None:
            raise UsageError(f"fixture {fixture.name!r} is not a shading fixture")
        lum_field = fixture.luminance
        truth = fixture.truth
        fdef = fixture.defaults
    elif params.get("image"):
        px, maxval = read_pgm(params["image"])
        grid = GridSpec(px.shape, (0.0, 0.0), (1.0, 1.0))
        lum_field = ScalarField(grid, px.astype(np.float64) / float(maxval))
        fdef = {}
        if params.get("truth"):
            truth = read_field(params["truth"])
            if truth.grid != grid:
                raise UsageError("truth field grid does not match image")
    else:
        raise UsageError("pass --fixture NAME or --image FILE.pgm")

    lum = LuminanceImage(lum_field, p_min=params["p_min"])
    if params.get("seed"):
        pts, vals = zip(*(_parse_index(s, "--seed") for s in params["seed"]))
        seeds = SourceSet(pts, vals)
    elif fixture is not None and fixture.sources is not None:
        seeds = fixture.sources
    else:
        raise UsageError("no seeds: pass --seed i,j:h")
    try:
        seeds.validate_for(lum.P.grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    hbar = _pick(params.get("hbar"), fdef, "hbar", 0.03)
    try:
        rep = sfs_reconstruct(
            lum,
            seeds,
            backend=params["backend"],
            hbar=hbar,
            tol=params["tol"],
            f_floor=params["f_floor"],
            boundary=params["boundary"],
            truth=truth,
        )
    except (CgError, ValueError) as exc:
        raise SolverFailure(str(exc)) from exc

    out_dir.mkdir(parents=True, exist_ok=True)
    write_field(out_dir / "height.eikf", rep.s_star)
    if params["csv"]:
        write_field_csv(out_dir / "height.csv", rep.s_star)
    items = report_items(rep)
    write_kv(out_dir / "report.txt", items)
    _write_manifest(out_dir, "sfs", params, t0)
    if rep.gradient_error is not None:
        print(f"gradient_error: {rep.gradient_error:.6f}")
    return 0


# ---------------------------------------------------------------------------
# replay


_INT_KEYS = {"terms", "sweeps", "max_steps", "max_iter", "fixture_size", "threads", "threshold"}
_FLOAT_KEYS = {
    "hbar",
    "ftilde",
    "tau",
    "tol",
    "noise_floor",
    "cap_value",
    "lo",
    "hi",
    "step",
    "eps",
    "f_floor",
    "p_min",
}
_BOOL_KEYS = {"csv", "no_anchor", "reference_correction"}
# repeatable flags, per command (plan's --source is a scalar pixel)
_LIST_KEYS = {"solve": {"source"}, "plan": {"start"}, "sfs": {"seed"}}


def _decode_param(command: str, key: str, raw: str):
    if raw == "None":
        return None
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    if key in _BOOL_KEYS:
        return raw == "true"
    if key in _LIST_KEYS.get(command, ()):
        return tuple(t for t in raw.split(";") if t) if raw else ()
    return raw


def run_replay(manifest_path: str, out: str) -> int:
    kv = read_kv(manifest_path)
    if kv.get("tool") != "eiko" or "command" not in kv:
        raise UsageError(f"{manifest_path} is not an eiko manifest")
    command = kv["command"]
    params: dict = {}
    for k, v in kv.items():
        if k.startswith("arg."):
            name = k[4:]
            params[name] = _decode_param(command, name, v)
    if command == "solve":
        return run_solve(params, _prepare_out(out))
    if command == "plan":
        return run_plan(params, _prepare_out(out))
    if command == "sfs":
        return run_sfs(params, _prepare_out(out))
    if command == "compare":
        return run_compare(params)
    raise UsageError(f"cannot replay command {command!r}")


# ---------------------------------------------------------------------------
# argument wiring

_SOURCE_ENCODE = {"source", "start", "seed"}


def _params_from_args(args, names: list[str]) -> dict:
    params = {}
    for name in names:
        val = getattr(args, name)
        if name in _SOURCE_ENCODE and isinstance(val, list):
            val = tuple(val)
        params[name] = val
    return params


def build_parser() -> _Parser:
    p = _Parser(prog="eiko", description=__doc__)
    p.add_argument("--version", action="version", version=f"eiko {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    fixture_names = ", ".join(fixtures.available())

    sp = sub.add_parser("solve", help="recover the arrival-cost field S")
    sp.add_argument("--backend", required=True, choices=["perturb", "sparse", "sweep"])
    sp.add_argument("--fixture", help=f"built-in setup: {fixture_names}")
    sp.add_argument("--fixture-size", type=int, dest="fixture_size")
    sp.add_argument("--forcing", help="EIKF file with the forcing field f")
    sp.add_argument(
        "--source", action="append", help="seed node i,j[:value], repeatable"
    )
    sp.add_argument("--hbar", type=float, default=None)
    sp.add_argument("--terms", type=int, default=None, help="series terms T")
    sp.add_argument("--ftilde", type=float, default=None)
    sp.add_argument("--tau", type=float, default=None, help="grid shrink factor")
    sp.add_argument(
        "--conv-mode",
        dest="conv_mode",
        choices=["zero_padded_linear", "circular"],
        default="zero_padded_linear",
    )
    sp.add_argument(
        "--origin-reg",
        dest="origin_reg",
        choices=["half_cell", "finite_cap"],
        default="half_cell",
    )
    sp.add_argument("--cap-value", dest="cap_value", type=float, default=None)
    sp.add_argument(
        "--noise-floor", dest="noise_floor", type=float, default=1e-13,
        help="zero series-term entries below this fraction of the term peak",
    )
    sp.add_argument("--sweeps", type=int, default=None)
    sp.add_argument("--tol", type=float, default=1e-10, help="CG relative residual")
    sp.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    sp.add_argument(
        "--boundary", choices=["dirichlet", "neumann"], default="dirichlet"
    )
    sp.add_argument("--no-anchor", dest="no_anchor", action="store_true")
    sp.add_argument(
        "--reference-correction",
        dest="reference_correction",
        action="store_true",
        help="divide out the lattice point-source prefactor (sparse backend)",
    )
    sp.add_argument("--csv", action="store_true")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--out", required=True)

    cp = sub.add_parser("compare", help="percent error between two fields")
    cp.add_argument("field_a")
    cp.add_argument("field_b")
    cp.add_argument("--sources", help="excluded nodes 'i,j;i,j;...'")

    pp = sub.add_parser("plan", help="maze path planning")
    pp.add_argument("--fixture", help="open-room or spiral-maze")
    pp.add_argument("--fixture-size", type=int, dest="fixture_size")
    pp.add_argument("--maze", help="PGM maze image (bright = wall)")
    pp.add_argument("--source", help="source pixel i,j")
    pp.add_argument("--start", action="append", help="start pixel i,j, repeatable")
    pp.add_argument("--lo", type=float, default=None)
    pp.add_argument("--hi", type=float, default=None)
    pp.add_argument("--threshold", type=int, default=128)
    pp.add_argument("--backend", choices=["sparse", "perturb", "sweep"], default="sparse")
    pp.add_argument("--hbar", type=float, default=None)
    pp.add_argument("--terms", type=int, default=6)
    pp.add_argument("--tau", type=float, default=1.0)
    pp.add_argument("--sweeps", type=int, default=15)
    pp.add_argument("--tol", type=float, default=1e-10)
    pp.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    pp.add_argument("--step", type=float, default=None)
    pp.add_argument("--eps", type=float, default=None)
    pp.add_argument("--max-steps", dest="max_steps", type=int, default=200_000)
    pp.add_argument("--threads", type=int, default=1)
    pp.add_argument("--out", required=True)

    fp = sub.add_parser("sfs", help="height from a Lambertian image")
    fp.add_argument("--fixture", help="plane, cone, or hemisphere")
    fp.add_argument("--fixture-size", type=int, dest="fixture_size")
    fp.add_argument("--image", help="PGM luminance image")
    fp.add_argument("--truth", help="EIKF ground-truth height field (with --image)")
    fp.add_argument("--seed", action="append", help="seed node i,j:height, repeatable")
    fp.add_argument("--backend", choices=["sparse", "perturb"], default="sparse")
    fp.add_argument("--hbar", type=float, default=None)
    fp.add_argument("--tol", type=float, default=1e-10)
    fp.add_argument("--f-floor", dest="f_floor", type=float, default=1e-3)
    fp.add_argument("--p-min", dest="p_min", type=float, default=0.05)
    fp.add_argument(
        "--boundary", choices=["neumann", "dirichlet"], default="neumann"
    )
    fp.add_argument("--csv", action="store_true")
    fp.add_argument("--threads", type=int, default=1)
    fp.add_argument("--out", required=True)

    rp = sub.add_parser("replay", help="re-execute a run from its manifest")
    rp.add_argument("manifest")
    rp.add_argument("--out", required=True)

    sub.add_parser("fixtures", help="list built-in fixtures")

    return p


_SOLVE_PARAMS = [
    "backend", "fixture", "fixture_size", "forcing", "source", "hbar", "terms",
    "ftilde", "tau", "conv_mode", "origin_reg", "cap_value", "noise_floor",
    "sweeps", "tol", "max_iter", "boundary", "no_anchor", "reference_correction",
    "csv", "threads",
]
_PLAN_PARAMS = [
    "fixture", "fixture_size", "maze", "source", "start", "lo", "hi", "threshold",
    "backend", "hbar", "terms", "tau", "sweeps", "tol", "max_iter", "step", "eps",
    "max_steps", "threads",
]
_SFS_PARAMS = [
    "fixture", "fixture_size", "image", "truth", "seed", "backend", "hbar", "tol",
    "f_floor", "p_min", "boundary", "csv", "threads",
]


def _resolve_solve_defaults(params: dict) -> None:
    fdef = {}
    if params.get("fixture"):
        fx = _build_fixture(params["fixture"], params.get("fixture_size"))
        fdef = fx.defaults if fx is not None else {}
    params["hbar"] = _pick(params.get("hbar"), fdef, "hbar", 0.01)
    params["terms"] = _pick(params.get("terms"), fdef, "terms", 6)
    params["tau"] = _pick(params.get("tau"), fdef, "tau", 1.0)
    params["sweeps"] = _pick(params.get("sweeps"), fdef, "sweeps", 15)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "fixtures":
            for name in fixtures.available():
                print(name)
            return 0
        if args.command == "replay":
            return run_replay(args.manifest, args.out)
        if args.command == "compare":
            params = {
                "field_a": args.field_a,
                "field_b": args.field_b,
                "sources": args.sources,
            }
            return run_compare(params)
        if args.command == "solve":
            params = _params_from_args(args, _SOLVE_PARAMS)
            _resolve_solve_defaults(params)
            return run_solve(params, _prepare_out(args.out))
        if args.command == "plan":
            params = _params_from_args(args, _PLAN_PARAMS)
            return run_plan(params, _prepare_out(args.out))
        if args.command == "sfs":
            params = _params_from_args(args, _SFS_PARAMS)
            return run_sfs(params, _prepare_out(args.out))
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"eiko: error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"eiko: error: {exc}", file=sys.stderr)
        return 1
    except SolverFailure as exc:
        print(f"eiko: solver failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
