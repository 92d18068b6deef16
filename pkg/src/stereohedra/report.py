"""Golden comparison and Markdown/JSON rendering of bound tables."""
from __future__ import annotations

from dataclasses import dataclass, field

from .bounds import COLUMNS, GroupResult
from .catalog import golden_table

SOFT_BELOW, SOFT_ABOVE = 10, 5


@dataclass
class Check:
    group: str
    column: str
    computed: int | None
    golden: int | None
    hard: bool
    ok: bool
    note: str = ""

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _preceding(res: GroupResult, col: str) -> int | None:
    i = COLUMNS.index(col)
    for c in reversed(COLUMNS[:i]):
        if res.columns.get(c) is not None:
            return res.columns[c]
    return None


def golden_checks(res: GroupResult) -> list[Check]:
    """Hard checks: columns 1 to 3 wherever a reference value exists, and the final
    value for groups whose plane group is p1.  Soft checks: column 4 must not exceed
    the preceding column and must lie in [ref - 10, ref + 5]."""
    G = res.group
    out = []
    for col in ("c1", "c2", "c3"):
        ref = G.expected.get(col)
        if ref is None or col not in res.columns:
            continue
        got = res.columns[col]
        out.append(Check(G.slug, col, got, ref, True, got == ref))
    if G.plane_subgroup_type == "p1" and res.complete:
        ref = G.expected["final"]
        out.append(Check(G.slug, "final", res.final, ref, True, res.final == ref))
    ref = G.expected.get("c4")
    if ref is not None and "c4" in res.columns:
        got = res.columns["c4"]
        prev = _preceding(res, "c4")
        in_window = ref - SOFT_BELOW <= got <= ref + SOFT_ABOVE
        monotone = prev is None or got <= prev
        note = [] if monotone else [f"exceeds preceding column {prev}"]
        if not in_window:
            note.append(f"outside [{ref - SOFT_BELOW}, {ref + SOFT_ABOVE}]")
        out.append(Check(G.slug, "c4", got, ref, False, in_window and monotone, "; ".join(note)))
    return out


def theorem_check(results: list[GroupResult]) -> Check | None:
    results = [r for r in results if r.complete]
    if not results:
        return None
    limit = golden_table()["theorem_bound"]
    worst = max(r.final for r in results)
    return Check("all", "max_final", worst, limit, True, worst <= limit)


def _cell(res: GroupResult, col: str) -> str:
    got = res.columns.get(col)
    ref = res.group.expected.get(col)
    if got is None and ref is None:
        return ""
    g = "-" if got is None else str(got)
    r = "-" if ref is None else str(ref)
    return f"{g} ({r})"


def markdown_table(results: list[GroupResult]) -> str:
    """Computed values with the reference value in parentheses."""
    lines = [
        "| Aspects | Group | (1) | (2) | (3) | (4) | Final |",
        "|---:|:---|---:|---:|---:|---:|---:|",
    ]
    for res in results:
        G = res.group
        final = f"**{res.final}** ({G.expected.get('final')})"
        if "custom" in res.columns:
            lines.append(f"| {G.aspects} | {G.name} | custom stages: {res.columns['custom']} | | | | {final} |")
            continue
        cells = " | ".join(_cell(res, c) for c in COLUMNS)
        lines.append(f"| {G.aspects} | {G.name} | {cells} | {final} |")
    return "\n".join(lines) + "\n"


@dataclass
class BoundsReport:
    results: list
    checks: list = field(default_factory=list)

    @property
    def hard_failures(self) -> list[Check]:
        return [c for c in self.checks if c.hard and not c.ok]

    @property
    def soft_failures(self) -> list[Check]:
        return [c for c in self.checks if not c.hard and not c.ok]

    def to_json(self) -> dict:
        return {
            "groups": [r.to_json() for r in self.results],
            "checks": [c.to_json() for c in self.checks],
            "hard_failures": [c.to_json() for c in self.hard_failures],
            "soft_failures": [c.to_json() for c in self.soft_failures],
        }


def build_report(results: list[GroupResult], with_theorem: bool = True) -> BoundsReport:
    checks = []
    for r in results:
        checks.extend(golden_checks(r))
    if with_theorem:
        th = theorem_check(results)
        if th is not None:
            checks.append(th)
    return BoundsReport(results, checks)
