"""Command-line front end.

    stereohedra bounds --all
    stereohedra bounds --group P2_1_3
    stereohedra bounds --group I4_1_32 --stages S1,S2,S3
    stereohedra oracle --group P2_1_3 --samples 20 --seed 0
    stereohedra export prototile --type A --out A.off

Exit codes: 0 success, 1 usage or export error, 2 reference mismatch,
3 bound or containment violation, 4 data validation failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import __version__
from .bounds import SurvivorCache, build_region, column_plan, compute_group
from .catalog import CatalogError, groups, group, validate_catalog
from .pruning import PruneOptions, StageNotApplicable

log = logging.getLogger("stereohedra")

EXIT_OK, EXIT_USAGE, EXIT_GOLDEN, EXIT_VIOLATION, EXIT_DATA = 0, 1, 2, 3, 4

DEFAULTS = {
    "groups": None,
    "all": False,
    "stages": None,
    "eps": 1e-9,
    "arithmetic": "exact",
    "boundary": "closed",
    "touching_axes": "use",
    "glide_rule": "exact",
    "projection": True,
    "samples": 20,
    "seed": 0,
    "out": "results",
    "cache_dir": ".stereohedra-cache",
    "cache": True,
    "eps_check": True,
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML file with option defaults (keys as the long flags, '_' for '-')")
    p.add_argument("--group", "-g", dest="groups", action="append", help="group name (repeatable)")
    p.add_argument("--all", action="store_true", default=None, help="all eight groups")
    p.add_argument("--eps", type=float, default=None, help="tolerance band for the float backend (default 1e-9)")
    p.add_argument("--arithmetic", choices=["exact", "float"], default=None)
    p.add_argument("--boundary", choices=["closed", "open"], default=None,
                   help="whether tiles touching a forbidden region's boundary are discarded")
    p.add_argument("--touching-axes", choices=["use", "skip"], default=None,
                   help="use rotation axes that touch the prototile (default) or skip them")
    p.add_argument("--glide-rule", choices=["exact", "pseudo"], default=None)
    p.add_argument("--no-projection", dest="projection", action="store_false", default=None)
    p.add_argument("--out", "-o", default=None, help="output directory")
    p.add_argument("--cache-dir", default=None)
    p.add_argument("--no-cache", dest="cache", action="store_false", default=None)
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stereohedra", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="compute facet-count bounds and compare with the reference table")
    _common(b)
    b.add_argument("--stages", default=None, help="comma-separated stage list, e.g. S1,S2,S3")
    b.add_argument("--no-eps-check", dest="eps_check", action="store_false", default=None,
                   help="skip the eps/10 and 10*eps reruns after a mismatch")

    o = sub.add_parser("oracle", help="validate bounds against sampled Voronoi cells")
    _common(o)
    o.add_argument("--samples", type=int, default=None, help="samples per prototile (default 20)")
    o.add_argument("--seed", type=int, default=None)

    e = sub.add_parser("export", help="write OFF/JSON/SVG files")
    _common(e)
    e.add_argument("what", choices=["prototile", "truncated-octahedron", "population", "region", "planar", "cell"])
    e.add_argument("--type", "-t", default="A", choices=list("ABCD"))
    e.add_argument("--format", "-f", choices=["off", "json", "svg"], default=None)
    e.add_argument("--axis", choices=list("xyz"), default="z", help="projection axis for planar audits")
    e.add_argument("--box", default=None, help="restrict exported tiles to a box 'lo,hi'")
    e.add_argument("--point", default=None, help="base point 'x,y,z' for cell export")
    e.add_argument("--separate", action="store_true", help="one OFF file per polytope")
    e.add_argument("--file", default=None, help="output file (default derived from --out)")
    return ap


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config, "rb") as fh:
            data = tomllib.load(fh)
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    if isinstance(cfg["stages"], str):
        cfg["stages"] = [s.strip() for s in cfg["stages"].split(",") if s.strip()]
    return cfg


def selected_groups(cfg: dict):
    if cfg["all"] or not cfg["groups"]:
        return list(groups())
    return [group(name) for name in cfg["groups"]]


def options_from(cfg: dict, **over) -> PruneOptions:
    kw = dict(arithmetic=cfg["arithmetic"], boundary=cfg["boundary"], eps=cfg["eps"],
              touching_axes=cfg["touching_axes"])
    kw.update(over)
    return PruneOptions(**kw)


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _metadata(out: Path, cfg: dict, command: str, started: float) -> None:
    meta = {"command": command, "version": __version__, "config": cfg,
            "started": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(started)),
            "seconds": round(time.time() - started, 2)}
    _write(out, f"{command}-metadata.json", json.dumps(meta, indent=2, sort_keys=True, default=str))


def eps_sensitivity(G, cfg: dict, stages: list[str], projected: bool) -> dict:
    """Recompute one column with the float backend at eps/10, eps and 10*eps."""
    from .influence import neighbor_set
    from .catalog import TILE_TYPES
    out = {}
    for factor in (0.1, 1.0, 10.0):
        eps = cfg["eps"] * factor
        opts = options_from(cfg, arithmetic="float", eps=eps)
        vals = [len(neighbor_set(G, build_region(G, t, stages, projected, opts, cfg["glide_rule"])))
                for t in TILE_TYPES]
        out[f"{eps:.0e}"] = max(vals)
    return out


def cmd_bounds(cfg: dict) -> int:
    from .report import build_report, markdown_table
    started = time.time()
    opts = options_from(cfg)
    cache = SurvivorCache(cfg["cache_dir"]) if cfg["cache"] else None
    results = []
    for G in selected_groups(cfg):
        results.append(compute_group(G, opts, projection=cfg["projection"], glide_rule=cfg["glide_rule"],
                                     stages=cfg["stages"], cache=cache))
    report = build_report(results)
    payload = report.to_json()
    payload["options"] = opts.as_dict()
    if report.hard_failures and cfg["eps_check"]:
        sens = {}
        for chk in report.hard_failures:
            if chk.group == "all":
                continue
            G = group(chk.group)
            plan = {c: (st, pr) for c, st, pr in column_plan(G, cfg["projection"])}
            col = chk.column if chk.column in plan else list(plan)[-1]
            st, pr = plan[col]
            sens[f"{chk.group}:{chk.column}"] = eps_sensitivity(G, cfg, st, pr)
        payload["eps_sensitivity"] = sens
    out = Path(cfg["out"])
    _write(out, "bounds.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")
    md = markdown_table(results)
    _write(out, "bounds.md", md)
    _metadata(out, cfg, "bounds", started)
    print(md)
    for c in report.checks:
        status = "ok" if c.ok else ("MISMATCH" if c.hard else "soft-miss")
        print(f"{status:9s} {c.group:10s} {c.column:9s} computed={c.computed} reference={c.golden} {c.note}".rstrip())
    if "eps_sensitivity" in payload:
        for k, v in payload["eps_sensitivity"].items():
            print(f"eps-check {k}: {v}")
    if report.hard_failures:
        print(json.dumps({"failures": [c.to_json() for c in report.hard_failures]}), file=sys.stderr)
        return EXIT_GOLDEN
    return EXIT_OK


def cmd_oracle(cfg: dict) -> int:
    from .oracle import cell_for, validate
    started = time.time()
    opts = options_from(cfg)
    cache = SurvivorCache(cfg["cache_dir"]) if cfg["cache"] else None
    reports = []
    bad = False
    for G in selected_groups(cfg):
        res = compute_group(G, opts, projection=cfg["projection"], glide_rule=cfg["glide_rule"], cache=cache)
        rep = validate(G, cfg["samples"], cfg["seed"], res.final, res.neighbor_sets, raise_on_violation=False)
        reports.append(rep.to_json())
        bad |= bool(rep.violations)
        print(f"{G.slug:10s} bound={res.final:4d} max_observed={rep.max_facets_observed:3d} "
              f"per_prototile={rep.per_prototile} violations={len(rep.violations)}")
    payload = {"groups": reports}
    if any(G.slug == "NQ" for G in selected_groups(cfg)):
        cell = cell_for(group("NQ"), [0.0, 0.0, 0.0], check_stabilizer=False)
        payload["degenerate_origin_facets"] = cell.n_facets
        print(f"degenerate N(Q) orbit of the origin: {cell.n_facets} facets")
    out = Path(cfg["out"])
    _write(out, "oracle.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _metadata(out, cfg, "oracle", started)
    return EXIT_VIOLATION if bad else EXIT_OK


def _parse_vec(text: str) -> list[float]:
    return [float(eval_fraction(v)) for v in text.split(",")]


def eval_fraction(v: str):
    from fractions import Fraction
    return Fraction(v.strip())


def cmd_export(cfg: dict, args: argparse.Namespace) -> int:
    import numpy as np
    from .export import ExportEmpty, tile_polytopes, tiles_json, write_off
    from .geometry import truncated_octahedron
    from .tessellation import make_tile, tiles_in_box
    from .geometry import Isometry

    fmt = args.format or ("svg" if args.what == "planar" else "off")
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    target = Path(args.file) if args.file else out / f"{args.what}-{args.type}.{fmt}"
    try:
        if args.what == "truncated-octahedron":
            polys = [truncated_octahedron().as_float()]
            tiles = None
        elif args.what == "prototile":
            tiles = [make_tile(args.type, Isometry.identity())]
            polys = tile_polytopes(tiles)
        elif args.what in ("population", "region"):
            from .tessellation import initial_population
            if args.what == "population":
                tiles = list(initial_population())
            else:
                G = selected_groups(cfg)[0]
                _, st, pr = column_plan(G, cfg["projection"])[-1]
                region = build_region(G, args.type, cfg["stages"] or st, pr and not cfg["stages"],
                                      options_from(cfg), cfg["glide_rule"])
                tiles = region.tiles()
            if args.box:
                lo, hi = (eval_fraction(v) for v in args.box.split(","))
                keep = {id(t) for t in tiles_in_box(initial_population(), lo, hi)}
                tiles = [t for t in tiles if id(t) in keep]
            polys = tile_polytopes(tiles)
        elif args.what == "planar":
            from .projection import project_filter, svg_audit
            G = selected_groups(cfg)[0]
            k = "xyz".index(args.axis)
            _, st, _ = column_plan(G, False)[-1]
            before = build_region(G, args.type, st, False, options_from(cfg))
            after = project_filter(before, G, k, cfg["glide_rule"])
            target.write_text(svg_audit(before, after, G, k))
            print(target)
            return EXIT_OK
        else:  # cell
            from .oracle import cell_for
            G = selected_groups(cfg)[0]
            if not args.point:
                raise SystemExit("--point x,y,z is required for cell export")
            cell = cell_for(G, _parse_vec(args.point), check_stabilizer=False)
            polys = [cell.vertices]
            tiles = None
        if fmt == "json":
            if tiles is None:
                if not polys:
                    raise ExportEmpty("nothing to export")
                target.write_text(json.dumps([np.asarray(p).tolist() for p in polys]))
            else:
                target.write_text(tiles_json(tiles))
            paths = [target]
        elif fmt == "off":
            paths = write_off(target, polys, merged=not args.separate)
        else:
            raise SystemExit("svg output is only available for planar audits")
    except ExportEmpty as exc:
        print(f"ExportEmpty: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for p in paths:
        print(p)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        validate_catalog()
    except CatalogError as exc:
        print(f"data validation failed: {exc}", file=sys.stderr)
        return EXIT_DATA
    try:
        cfg = resolve_config(args)
        if args.command == "bounds":
            return cmd_bounds(cfg)
        if args.command == "oracle":
            return cmd_oracle(cfg)
        return cmd_export(cfg, args)
    except (KeyError, StageNotApplicable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
