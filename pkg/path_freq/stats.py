"""Structure reports for the `stats` and `bench` commands."""

import math
from typing import Any, Dict, List

import attrs
from tabulate import tabulate

from path_freq.blocking import longest_unmarked_path, unmarked_components
from path_freq.frequency_index import PathFrequencyIndex
from path_freq.utils import number_to_human


@attrs.define(frozen=True)
class LevelStats:
    level: int
    t: int
    marked: int
    marked_bound: int
    blocks: int
    max_block_size: int
    max_component: int
    max_gap: int


@attrs.define(frozen=True)
class TableStats:
    g_name: str
    dimensions: Dict[str, List[int]]
    t5_bits: int
    t5_bits_bound: int
    t5_width: int
    t5_window: int
    strata: List[int]
    ops: int
    ops_by_phase: Dict[str, int]
    build_seconds: float


@attrs.define(frozen=True)
class StructureStats:
    n: int
    colors: int
    L: int
    LL: int
    factors: List[int]
    degenerate: bool
    levels: List[LevelStats]
    tables: List[TableStats]

    def get_stats_dict(self) -> Dict[str, Any]:
        return attrs.asdict(self)

    def get_stats_string(self) -> str:
        head = (
            f"n={self.n} colors={self.colors} L={self.L} LL={self.LL} "
            f"t1..t4={tuple(self.factors)}{' (degenerate)' if self.degenerate else ''}"
        )
        level_rows = [
            [s.level, s.t, s.marked, s.marked_bound, s.blocks, s.max_block_size, s.max_component, s.max_gap]
            for s in self.levels
        ]
        headers = ["Level", "t", "|M_t|", "4*ceil(n/t)", "Blocks", "Max block", "Max unmarked", "Max gap"]
        level_table = tabulate(level_rows, headers=headers)
        out = [head, "", level_table]
        if self.tables:
            table_rows = [
                [
                    s.g_name,
                    "x".join(map(str, s.dimensions["T1"])),
                    "x".join(map(str, s.dimensions["T2"])),
                    "x".join(map(str, s.dimensions["T3"])),
                    "x".join(map(str, s.dimensions["T5"])),
                    f"{s.t5_bits} / {s.t5_bits_bound}",
                    "/".join(map(str, s.strata)),
                    number_to_human(s.ops),
                    f"{s.build_seconds:.3f}",
                ]
                for s in self.tables
            ]
            out += [
                "",
                tabulate(
                    table_rows,
                    headers=["g", "T1", "T2", "T3", "T5", "T5 bits / 16(n/t2)^2", "Strata", "Ops", "Seconds"],
                ),
            ]
        return "\n".join(out)


def level_stats(fi: PathFrequencyIndex) -> List[LevelStats]:
    n = fi.tree.n
    out = []
    for lv in fi.hierarchy.levels:
        comps = unmarked_components(fi.tree, fi.index, lv.marked.is_marked)
        out.append(
            LevelStats(
                level=lv.level,
                t=lv.t,
                marked=len(lv.marked),
                marked_bound=4 * math.ceil(n / lv.t),
                blocks=len(lv.partition),
                max_block_size=lv.partition.max_block_size,
                max_component=max(map(len, comps), default=0),
                max_gap=longest_unmarked_path(fi.tree, fi.index, lv.marked.is_marked),
            )
        )
    return out


def table_stats(fi: PathFrequencyIndex) -> List[TableStats]:
    n = fi.tree.n
    t2 = fi.hierarchy.factors[1]
    out = []
    for name, eng in sorted(fi.engines.items()):
        tb = eng.tables
        out.append(
            TableStats(
                g_name=name,
                dimensions={k: list(v) for k, v in tb.dimensions().items()},
                t5_bits=tb.t5_bits,
                t5_bits_bound=16 * math.ceil(n / t2) ** 2,
                t5_width=tb.t5_width,
                t5_window=tb.t5_window,
                strata=list(tb.strata),
                ops=tb.counter.total,
                ops_by_phase=dict(tb.counter.counts),
                build_seconds=tb.build_seconds,
            )
        )
    return out


def structure_stats(fi: PathFrequencyIndex) -> StructureStats:
    h = fi.hierarchy
    return StructureStats(
        n=fi.tree.n,
        colors=fi.tree.color_count,
        L=h.L,
        LL=h.LL,
        factors=list(h.factors),
        degenerate=h.degenerate,
        levels=level_stats(fi),
        tables=table_stats(fi),
    )
