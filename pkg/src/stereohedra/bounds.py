"""Per-group bound computation in the column layout of the reference table.

Columns are cumulative:

* ``c1`` translations (S1, plus S2 for body-centred groups) and triads (S3);
* ``c2`` adds the coordinate diads (S4) when the group has them;
* ``c3`` adds the diagonal diads (S5, or S6 for P4_132);
* ``c4`` adds the three coordinate projections when the plane group is not p1.
"""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .catalog import TILE_TYPES, QuarterGroup
from .influence import NeighborSet, neighbor_set
from .projection import project_all
from .pruning import DEFAULT_OPTIONS, PruneOptions, Region, run_pipeline, STAGE_ORDER, check_stages
from .tessellation import initial_population

log = logging.getLogger(__name__)

COLUMNS = ("c1", "c2", "c3", "c4")


def column_plan(G: QuarterGroup, projection: bool = True) -> list[tuple[str, list[str], bool]]:
    """(column, cumulative stage list, projected?) for each column the group fills."""
    sets = list(G.transformation_sets)
    plan = [("c1", [s for s in sets if s in ("S1", "S2", "S3")], False)]
    if "S4" in sets:
        plan.append(("c2", plan[-1][1] + ["S4"], False))
    diag = [s for s in sets if s in ("S5", "S6")]
    if diag:
        plan.append(("c3", plan[-1][1] + diag, False))
    if projection and G.plane_subgroup_type != "p1":
        plan.append(("c4", plan[-1][1], True))
    return plan


class SurvivorCache:
    """Survivor sets on disk, keyed by everything that can change them."""

    def __init__(self, directory: str | Path):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(G: QuarterGroup, proto: str, stages: list[str], projected: bool, glide_rule: str,
            opts: PruneOptions) -> str:
        from . import __version__
        blob = json.dumps({"g": G.slug, "p": proto, "s": stages, "proj": projected, "glide": glide_rule,
                           "opts": opts.as_dict(), "v": __version__, "data": data_digest()}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:32]

    def get(self, key: str):
        path = self.dir / f"{key}.json"
        if not path.exists():
            return None
        return json.loads(path.read_text())

    def put(self, key: str, region: Region) -> None:
        path = self.dir / f"{key}.json"
        path.write_text(json.dumps({"survivors": region.survivors, "stages": region.stage_log}))


def data_digest() -> str:
    from importlib import resources
    h = hashlib.sha256()
    root = resources.files("stereohedra").joinpath("data")
    for name in sorted(p.name for p in root.iterdir()):
        h.update(name.encode())
        h.update(root.joinpath(name).read_bytes())
    return h.hexdigest()[:16]


def build_region(G: QuarterGroup, proto: str, stages: list[str], projected: bool = False,
                 opts: PruneOptions = DEFAULT_OPTIONS, glide_rule: str = "exact",
                 cache: SurvivorCache | None = None) -> Region:
    pop = initial_population()
    key = cache.key(G, proto, stages, projected, glide_rule, opts) if cache else None
    if cache:
        hit = cache.get(key)
        if hit is not None:
            alive = np.zeros(len(pop), dtype=bool)
            alive[hit["survivors"]] = True
            return Region(G, proto, alive, [tuple(s) for s in hit["stages"]], opts, pop)
    region = run_pipeline(G, proto, stages, opts, pop)
    if projected:
        region = project_all(region, G, glide_rule)
    if cache:
        cache.put(key, region)
    return region


@dataclass
class GroupResult:
    group: QuarterGroup
    columns: dict = field(default_factory=dict)      # column -> max over prototiles
    per_prototile: dict = field(default_factory=dict)  # column -> {A: n, ...}
    stage_logs: dict = field(default_factory=dict)   # prototile -> [(stage, remaining)]
    neighbor_sets: dict = field(default_factory=dict, repr=False)  # prototile -> NeighborSet (final column)
    regions: dict = field(default_factory=dict, repr=False)
    complete: bool = True  # False when only an explicit stage list was run

    @property
    def final(self) -> int:
        for c in reversed(COLUMNS + ("custom",)):
            if self.columns.get(c) is not None:
                return self.columns[c]
        raise ValueError("no column computed")

    def to_json(self) -> dict:
        g = self.group
        return {
            "group": g.slug,
            "name": g.name,
            "aspects": g.aspects,
            "plane_group": g.plane_subgroup_type,
            "computed": {c: self.columns.get(c) for c in sorted(self.columns)},
            "per_prototile": self.per_prototile,
            "final": self.final,
            "complete": self.complete,
            "golden": {c: g.expected.get(c) for c in COLUMNS + ("final",)},
            "stage_logs": {p: [{"id": s, "remaining": n} for s, n in log_]
                           for p, log_ in self.stage_logs.items()},
        }


def compute_group(G: QuarterGroup, opts: PruneOptions = DEFAULT_OPTIONS, projection: bool = True,
                  glide_rule: str = "exact", stages: list[str] | None = None,
                  cache: SurvivorCache | None = None, keep_regions: bool = False) -> GroupResult:
    """Bounds for every column (or for one explicit stage list, stored as ``custom``)."""
    if stages is not None:
        stages = check_stages(G, sorted(stages, key=STAGE_ORDER.index))
        # an explicit stage list never projects; it is labelled with the
        # matching column when it reproduces one
        col = next((c for c, st, _ in column_plan(G, False) if st == stages), "custom")
        plan = [(col, stages, False)]
    else:
        plan = column_plan(G, projection)
    res = GroupResult(G, complete=stages is None)
    for col, st, projected in plan:
        per = {}
        for t in TILE_TYPES:
            region = build_region(G, t, st, projected, opts, glide_rule, cache)
            ns = neighbor_set(G, region)
            per[t] = len(ns)
            res.neighbor_sets[t] = ns
            res.stage_logs[t] = region.stage_log
            if keep_regions:
                res.regions[t] = region
        res.per_prototile[col] = per
        res.columns[col] = max(per.values())
        log.info("%s %s: %s -> %d", G.slug, col, per, res.columns[col])
    return res


def group_bound(G: QuarterGroup, opts: PruneOptions = DEFAULT_OPTIONS, **kw) -> int:
    return compute_group(G, opts, **kw).final


def neighbor_sets_for(G: QuarterGroup, opts: PruneOptions = DEFAULT_OPTIONS, projection: bool = True,
                      glide_rule: str = "exact", cache: SurvivorCache | None = None) -> dict[str, NeighborSet]:
    plan = column_plan(G, projection)
    _, st, projected = plan[-1]
    return {t: neighbor_set(G, build_region(G, t, st, projected, opts, glide_rule, cache)) for t in TILE_TYPES}
