"""Query latency benchmarks."""

import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import attrs
import numpy as np
from tabulate import tabulate

from path_freq.frequency_index import PathFrequencyIndex
from path_freq.minority import LAS_VEGAS, MONTE_CARLO
from path_freq.query_script import Query, QueryKind
from path_freq.tree_core import ColoredTree
from path_freq.utils import getLogger

logger = getLogger(__name__)

BENCH_ALPHA = Fraction(1, 4)


@attrs.define(frozen=True)
class BenchReport:
    trials: int
    threads: int
    build_seconds: List[float]
    table_seconds: Dict[str, float]
    ops: Dict[str, int]
    # query label -> latencies in seconds
    latencies: Dict[str, List[float]]

    def get_stats_dict(self) -> Dict[str, object]:
        return {
            "trials": self.trials,
            "threads": self.threads,
            "build_seconds": self.build_seconds,
            "table_seconds": self.table_seconds,
            "ops": self.ops,
            "latency_us": {
                k: {"count": len(v), "mean": statistics.mean(v) * 1e6, "median": statistics.median(v) * 1e6}
                for k, v in self.latencies.items()
            },
        }

    def get_stats_string(self) -> str:
        build = statistics.mean(self.build_seconds)
        rows = [
            [k, len(v), f"{statistics.mean(v) * 1e6:.1f}", f"{statistics.median(v) * 1e6:.1f}"]
            for k, v in sorted(self.latencies.items())
        ]
        tables = [[g, f"{self.table_seconds[g]:.3f}", self.ops[g]] for g in sorted(self.ops)]
        return "\n".join(
            [
                f"Build time: {build:.3f}s (mean of {self.trials}, {self.threads} thread(s))",
                "",
                tabulate(tables, headers=["g", "Precompute seconds", "Ops"]),
                "",
                tabulate(rows, headers=["Query", "Count", "Mean (us)", "Median (us)"]),
            ]
        )


def random_queries(tree: ColoredTree, count: int, rng: np.random.Generator) -> List[Query]:
    "count random endpoint pairs for every query kind the tree supports."
    kinds = [QueryKind.MODE, QueryKind.LFE] + ([QueryKind.MAXSUM] if tree.has_weights else [])
    out = []
    for _ in range(count):
        i, j = (int(x) for x in rng.integers(1, tree.n + 1, size=2))
        out += [Query(kind, i, j, 0) for kind in kinds]
        out += [Query(QueryKind.MINORITY, i, j, 0, BENCH_ALPHA, v) for v in (LAS_VEGAS, MONTE_CARLO)]
    return out


def _label(q: Query) -> str:
    return f"{q.kind.value} {q.variant}" if q.kind is QueryKind.MINORITY else q.kind.value


def _run_chunk(fi: PathFrequencyIndex, queries: Sequence[Query], rng: np.random.Generator) -> List[tuple]:
    out = []
    for q in queries:
        start = time.perf_counter()
        fi.answer(q, rng)
        out.append((_label(q), time.perf_counter() - start))
    return out


def run_bench(
    tree: ColoredTree,
    queries: Sequence[Query],
    trials: int = 1,
    threads: int = 1,
    seed: int = 0,
    build_kw: Optional[dict] = None,
) -> BenchReport:
    """Builds the index trials times and runs every query once per trial.

    Queries are dealt round-robin to the workers; each worker draws from its own RNG stream spawned from seed.
    """
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    if threads < 1:
        raise ValueError(f"threads must be positive, got {threads}")
    build_kw = build_kw or {}

    build_seconds: List[float] = []
    table_seconds: Dict[str, float] = {}
    ops: Dict[str, int] = {}
    latencies: Dict[str, List[float]] = {}
    streams = np.random.SeedSequence(seed).spawn(trials * threads)
    for trial in range(trials):
        start = time.monotonic()
        fi = PathFrequencyIndex.build(tree, **build_kw)
        fi.prepare()
        build_seconds.append(time.monotonic() - start)
        for g, eng in fi.engines.items():
            table_seconds[g] = eng.tables.build_seconds
            ops[g] = eng.tables.counter.total

        rngs = [np.random.default_rng(s) for s in streams[trial * threads : (trial + 1) * threads]]
        chunks = [queries[w::threads] for w in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_chunk, [fi] * threads, chunks, rngs))
        for res in results:
            for label, seconds in res:
                latencies.setdefault(label, []).append(seconds)
        logger.info(f"Trial {trial + 1}/{trials}: build {build_seconds[-1]:.3f}s, {len(queries)} queries")

    return BenchReport(
        trials=trials,
        threads=threads,
        build_seconds=build_seconds,
        table_seconds=table_seconds,
        ops=ops,
        latencies=latencies,
    )
