import json
import logging
import sys
from typing import Any, Dict, List, Optional, Tuple

import click
import numpy as np
from rich.console import Console
from rich.logging import RichHandler

from path_freq.bench import random_queries, run_bench
from path_freq.config import (
    DEFAULT_MODE,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    DEFAULT_WORD_SIZE,
    MODES,
    ConfigParseError,
    apply_config_from_file,
)
from path_freq.errors import PathFreqError, QueryScriptError, TreeFormatError, VerificationError
from path_freq.frequency_index import PathFrequencyIndex, load_tree
from path_freq.generate import DEFAULT_MAX_WEIGHT, SHAPES, generate_tree
from path_freq.gvalue import LFE, MODE, SUM
from path_freq.minority import MONTE_CARLO
from path_freq.oracle import brute_decompose, brute_gmax, brute_minorities, depths, path_nodes
from path_freq.query_script import Query, QueryKind, parse_query_script
from path_freq.stats import structure_stats
from path_freq.tree_core import ColoredTree, format_tree
from path_freq.version import __version__

EXIT_USAGE = 1
EXIT_FORMAT = 2
EXIT_VERIFY = 3

DEFAULTS = {
    "t1": None,
    "word_size": DEFAULT_WORD_SIZE,
    "seed": DEFAULT_SEED,
    "mode": DEFAULT_MODE,
    "trials": DEFAULT_TRIALS,
    "threads": 1,
}

OK = "OK"
OK_SAMPLED = "OK (sampled)"
UNVERIFIED = "UNVERIFIED"


def _get_log_handlers() -> Dict[str, logging.Handler]:
    handlers = {}
    date_format = "%H:%M:%S"
    log_format_rich = "%(message)s"

    # stdout carries query answers
    rich_handler = RichHandler(rich_tracebacks=True, console=Console(stderr=True))
    rich_handler.setFormatter(logging.Formatter(log_format_rich, datefmt=date_format))
    rich_handler.setLevel(logging.WARN)
    handlers["rich_handler"] = rich_handler
    return handlers


def _setup_logging(debug: bool, verbose: bool) -> None:
    log_handlers = _get_log_handlers()
    if debug:
        log_handlers["rich_handler"].setLevel(logging.DEBUG)
    elif verbose:
        log_handlers["rich_handler"].setLevel(logging.INFO)
    else:
        log_handlers["rich_handler"].setLevel(logging.WARNING)
    logging.basicConfig(level=logging.DEBUG, handlers=list(log_handlers.values()), force=True)


def _resolve(ctx: click.Context, **kw) -> Dict[str, Any]:
    "Merges flags with the run configuration and the built-in defaults, then sets up logging."
    obj = ctx.obj
    kw["debug"] = obj["debug"]
    kw["verbose"] = obj["verbose"]
    if obj["conf"]:
        kw = apply_config_from_file(obj["conf"], obj["run"], kw)
    for k, v in DEFAULTS.items():
        if kw.get(k) is None:
            kw[k] = v
    _setup_logging(kw["debug"], kw["verbose"])
    if kw.get("__conf__"):
        logging.debug(f"Applied run configuration: {kw['__conf__']}")
    for k in ("t1", "word_size", "trials", "threads"):
        if kw[k] is not None and kw[k] < 1:
            raise click.BadParameter(f"must be positive, got {kw[k]}", param_hint=f"--{k.replace('_', '-')}")
    return kw


def _build(tree: ColoredTree, kw: Dict[str, Any]) -> PathFrequencyIndex:
    return PathFrequencyIndex.build(tree, t1=kw["t1"], word_size=kw["word_size"], mode=kw["mode"], check=kw["debug"])


def _read_queries(path: Optional[str], tree: ColoredTree) -> List[Query]:
    if path is None:
        return []
    with open(path) as f:
        return parse_query_script(f.read(), tree)


def _format_answer(tree: ColoredTree, ans: Optional[Tuple[int, int]]) -> str:
    if ans is None:
        return "NONE"
    return f"{tree.label(ans[0])} {ans[1]}"


class PathFreqGroup(click.Group):
    "Maps errors to exit codes: 1 usage, 2 format, 3 verification failure."

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.ClickException as e:
            e.show()
            sys.exit(EXIT_USAGE)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USAGE)
        except (TreeFormatError, QueryScriptError) as e:
            logging.error(e)
            sys.exit(EXIT_FORMAT)
        except VerificationError as e:
            logging.error(e)
            sys.exit(EXIT_VERIFY)
        except (PathFreqError, ConfigParseError, ValueError, OSError) as e:
            logging.error(e)
            sys.exit(EXIT_USAGE)
        sys.exit(rv if isinstance(rv, int) else 0)


def tree_options(f):
    f = click.option("--tree", "tree_path", required=True, type=click.Path(dir_okay=False), help="Tree file")(f)
    f = click.option("--t1", type=int, default=None, help="Smallest blocking factor", metavar="INT")(f)
    f = click.option(
        "--word-size", type=int, default=None, help="Word size for the default t1 (default 64)", metavar="INT"
    )(f)
    f = click.option("--seed", type=int, default=None, help="Random seed", metavar="U64")(f)
    f = click.option("--mode", type=click.Choice(MODES), default=None, help="Search mode for the level-3 class")(f)
    return f


@click.group(cls=PathFreqGroup, context_settings={"help_option_names": ["-h", "--help"]})
@click.option("-d", "--debug", is_flag=True, help="Print debug info and run internal self-checks")
@click.option("-v", "--verbose", is_flag=True, help="Print extra info")
@click.option("--conf", default=None, type=click.Path(dir_okay=False), help="Path to a toml run configuration")
@click.option("--run", default=None, help="Name of the run section to use from --conf")
@click.version_option(__version__, message="v%(version)s")
@click.pass_context
def cli(ctx: click.Context, debug: bool, verbose: bool, conf: Optional[str], run: Optional[str]) -> None:
    """Mode, least-frequent, maximum-sum and minority queries on paths of colored trees."""
    ctx.obj = {"debug": debug, "verbose": verbose, "conf": conf, "run": run}


@cli.command()
@click.option("-n", "n", required=True, type=int, help="Number of nodes")
@click.option("--seed", type=int, default=None, help="Random seed", metavar="U64")
@click.option("--colors", type=int, default=None, help="Number of colors (default ceil(sqrt(n)))")
@click.option("--shape", type=click.Choice(SHAPES), default="random", show_default=True)
@click.option("--weights/--no-weights", default=False, help="Emit a weights line")
@click.option("--max-weight", type=int, default=DEFAULT_MAX_WEIGHT, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output file (default stdout)")
@click.pass_context
def gen(ctx, n, seed, colors, shape, weights, max_weight, out):
    "Generates a random tree file."
    kw = _resolve(ctx, seed=seed)
    if n < 1:
        raise click.BadParameter(f"must be positive, got {n}", param_hint="-n")
    tree = generate_tree(n, kw["seed"], colors, shape, weights, max_weight)
    text = format_tree(tree)
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        click.echo(text, nl=False)


@cli.command()
@tree_options
@click.pass_context
def build(ctx, tree_path, **flags):
    "Builds every structure for a tree and reports the build time."
    kw = _resolve(ctx, **flags)
    fi = _build(load_tree(tree_path), kw)
    fi.prepare()
    h = fi.hierarchy
    blocks = [len(lv.partition) for lv in h.levels]
    click.echo(f"n={fi.tree.n} colors={fi.tree.color_count} t1..t4={h.factors} blocks={blocks}")
    for g, eng in sorted(fi.engines.items()):
        click.echo(f"{g}: {eng.tables.build_seconds:.3f}s ops={eng.tables.counter.total}")
    click.echo(f"index: {fi.build_seconds:.3f}s")


@cli.command()
@tree_options
@click.option("--queries", "queries_path", required=True, type=click.Path(dir_okay=False), help="Query script")
@click.pass_context
def query(ctx, tree_path, queries_path, **flags):
    "Answers a query script, one line per query."
    kw = _resolve(ctx, **flags)
    tree = load_tree(tree_path)
    queries = _read_queries(queries_path, tree)
    for q in queries:
        if q.kind is QueryKind.GMAXCHECK:
            raise QueryScriptError(f"Line {q.lineno}: GMAXCHECK is only valid in verify")
    if not queries:
        return
    fi = _build(tree, kw)
    rng = np.random.default_rng(kw["seed"])
    for q in queries:
        click.echo(_format_answer(tree, fi.answer(q, rng)))


def _oracle_answer(tree: ColoredTree, depth: List[int], q: Query) -> Optional[Tuple[int, int]]:
    view = path_nodes(tree, depth, q.i, q.j)
    if q.kind is QueryKind.MODE:
        c, v, _ = brute_gmax(tree, view, MODE)
        return c, v
    if q.kind is QueryKind.LFE:
        c, v, _ = brute_gmax(tree, view, LFE)
        return c, -v
    c, v, _ = brute_gmax(tree, view, SUM)
    return c, v


def _check_minority(fi: PathFrequencyIndex, depth: List[int], q: Query, rng: np.random.Generator) -> Tuple[str, bool]:
    "(line, fatal) for one MINORITY query."
    tree = fi.tree
    view = path_nodes(tree, depth, q.i, q.j)
    expected = brute_minorities(view, q.alpha)
    ans = fi.answer(q, rng)
    valid = ans is None if not expected else ans is not None and ans[0] in expected
    if q.variant == MONTE_CARLO:
        return (OK_SAMPLED if valid else UNVERIFIED), False
    if valid:
        return OK, False
    want = "NONE" if not expected else " ".join(str(tree.label(c)) for c in sorted(expected))
    return f"MISMATCH {q}: engine {_format_answer(tree, ans)}, oracle {want}", True


def _check_gmax(fi: PathFrequencyIndex, depth: List[int], q: Query) -> Tuple[str, bool]:
    "Checks every g the tree supports and the class decomposition."
    tree = fi.tree
    view = path_nodes(tree, depth, q.i, q.j)
    problems = []
    for g in (MODE, LFE, SUM):
        if g == SUM and not tree.has_weights:
            continue
        got = fi.max_gvalue(g, q.i, q.j)
        c, v, _ = brute_gmax(tree, view, g)
        if got.gvalue != v:
            problems.append(f"{g}: engine {tree.label(got.color)} {got.gvalue}, oracle {tree.label(c)} {v}")
    classes = fi.engine(MODE).decompose_colors(q.i, q.j)
    if classes != brute_decompose(tree, fi.hierarchy, q.i, q.j):
        problems.append("class decomposition differs")
    if problems:
        return f"MISMATCH {q}: {'; '.join(problems)}", True
    return OK, False


@cli.command()
@tree_options
@click.option("--queries", "queries_path", required=True, type=click.Path(dir_okay=False), help="Query script")
@click.pass_context
def verify(ctx, tree_path, queries_path, **flags):
    "Runs a query script through the engine and the brute-force oracle."
    kw = _resolve(ctx, **flags)
    tree = load_tree(tree_path)
    queries = _read_queries(queries_path, tree)
    if not queries:
        return
    fi = _build(tree, kw)
    depth = depths(tree)
    rng = np.random.default_rng(kw["seed"])
    failed = 0
    for q in queries:
        if q.kind is QueryKind.MINORITY:
            line, fatal = _check_minority(fi, depth, q, rng)
        elif q.kind is QueryKind.GMAXCHECK:
            line, fatal = _check_gmax(fi, depth, q)
        else:
            got = fi.answer(q, rng)
            want = _oracle_answer(tree, depth, q)
            # ties may pick another color with the same value
            fatal = got[1] != want[1]
            line = OK
            if fatal:
                line = f"MISMATCH {q}: engine {_format_answer(tree, got)}, oracle {_format_answer(tree, want)}"
        failed += fatal
        click.echo(line)
    if failed:
        raise VerificationError(f"{failed} of {len(queries)} queries disagree with the oracle")


@cli.command()
@tree_options
@click.option("--queries", "queries_path", default=None, type=click.Path(dir_okay=False), help="Query script")
@click.option("--count", type=int, default=100, show_default=True, help="Random endpoint pairs when no script is given")
@click.option("--trials", type=int, default=None, help="Build and query repetitions")
@click.option("-j", "--threads", type=int, default=None, help="Worker threads for the queries")
@click.option("--json", "json_output", is_flag=True, help="Print JSON output for machine readability")
@click.pass_context
def bench(ctx, tree_path, queries_path, count, json_output, **flags):
    "Times index construction and queries."
    kw = _resolve(ctx, **flags)
    tree = load_tree(tree_path)
    if queries_path:
        queries = [q for q in _read_queries(queries_path, tree) if q.kind is not QueryKind.GMAXCHECK]
    else:
        queries = random_queries(tree, count, np.random.default_rng(kw["seed"]))
    build_kw = {"t1": kw["t1"], "word_size": kw["word_size"], "mode": kw["mode"]}
    report = run_bench(tree, queries, kw["trials"], kw["threads"], kw["seed"], build_kw)
    if json_output:
        click.echo(json.dumps(report.get_stats_dict()))
    else:
        click.echo(report.get_stats_string())


@cli.command()
@tree_options
@click.option("--json", "json_output", is_flag=True, help="Print JSON output for machine readability")
@click.pass_context
def stats(ctx, tree_path, json_output, **flags):
    "Reports block sizes and table dimensions."
    kw = _resolve(ctx, **flags)
    fi = _build(load_tree(tree_path), kw)
    fi.prepare()
    st = structure_stats(fi)
    if json_output:
        click.echo(json.dumps(st.get_stats_dict()))
    else:
        click.echo(st.get_stats_string())


def main() -> None:
    cli(prog_name="path-freq")


if __name__ == "__main__":
    main()
