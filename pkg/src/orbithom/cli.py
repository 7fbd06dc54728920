"""Command line interface: ``analyze``, ``count``, ``verify`` and ``bench``.

Exit codes: 0 ok, 1 parse or configuration error, 2 pattern refused by the
dichotomy, 3 arithmetic overflow, 4 verification mismatch.
"""

import argparse
import json
import logging
import os
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import kernels, pattern as pattern_mod
from .decomposition import width1_decomposition
from .engine import aggregate, orbit_homs
from .errors import (
    ArithmeticOverflow,
    BudgetExceeded,
    DichotomyViolation,
    NoWidthOneDecomposition,
    OrbitHomError,
)
from .graph import degeneracy_orientation, random_degenerate_graph, read_graph
from .oracle import DEFAULT_BUDGET, oracle_orbit_homs
from .pattern import LINEAR, acyclic_orientations, analyze, read_pattern

log = logging.getLogger("orbithom")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DICHOTOMY = 2
EXIT_OVERFLOW = 3
EXIT_MISMATCH = 4


def default_threads() -> int:
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# analyze


def _decomposition_dump(h) -> list:
    lines = []
    for i, p in enumerate(acyclic_orientations(h)):
        arcs = " ".join(f"{u}->{v}" for u, v in p.arcs)
        try:
            tree = width1_decomposition(p).render()
        except NoWidthOneDecomposition:
            tree = "(no width-1 decomposition)"
        lines.append(f"  orientation {i}: {arcs}")
        lines.extend("    " + t for t in tree.splitlines())
    return lines


def format_report(info: dict, h=None) -> str:
    out = [f"pattern: k={info['k']} edges={' '.join(f'{u}-{v}' for u, v in info['edges'])}"]
    out.append("orbits: " + " ".join("{" + ",".join(map(str, o)) + "}" for o in info["orbits"]))
    out.append(f"LICL: {info['licl']}")
    out.append(f"LIPCO: {info['lipco']}")
    out.append("independent sets and merged patterns:")
    for orb in info["independent_sets"]:
        out.append(f"  orbit {{{','.join(map(str, orb['orbit']))}}}:")
        for m in orb["merged"]:
            sign = "+" if m["sign"] > 0 else "-"
            edges = " ".join(f"{u}-{v}" for u, v in m["edges"])
            out.append(
                f"    S={{{','.join(map(str, m['set']))}}} {sign} merged_vertex={m['merged_vertex']}"
                f" k={m['k']} licl={m['licl']} edges={edges}"
            )
    if info["verdict"] == LINEAR:
        out.append(f"verdict: {LINEAR} (LIPCO <= 5: orbit counts in near-linear time)")
    else:
        out.append(
            f"verdict: {info['verdict']} (LIPCO > 5: no near-linear algorithm expected under the dichotomy)"
        )
    if h is not None and info["licl"] <= 5:
        out.append("width-1 decompositions per acyclic orientation:")
        out.extend(_decomposition_dump(h))
    return "\n".join(out)


def cmd_analyze(args) -> int:
    h = read_pattern(args.pattern)
    info = analyze(h)
    if args.json:
        print(json.dumps(info, indent=2))
    else:
        print(format_report(info, h))
    return EXIT_OK


# ---------------------------------------------------------------------------
# count


def count_summary(table, kappa, seconds) -> str:
    lines = [f"Hom(H, G) = {table.hom_total}"]
    for orb in table.orbits.orbits:
        lines.append(f"Agg orbit {{{','.join(map(str, orb))}}} = {aggregate(table, orb)}")
    lines.append(f"kappa = {kappa}")
    lines.append(f"wall time = {seconds:.3f} s")
    return "\n".join(lines)


def cmd_count(args) -> int:
    h = read_pattern(args.pattern)
    g = read_graph(args.graph)
    t0 = time.perf_counter()
    og = degeneracy_orientation(g)
    table = orbit_homs(h, g, threads=args.threads, oriented=og)
    seconds = time.perf_counter() - t0
    Path(args.out).write_text(table.to_tsv(g.labels))
    print(count_summary(table, og.max_outdegree, seconds))
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _first_mismatch(a: np.ndarray, b: np.ndarray, reps):
    diff = np.argwhere(a != b)
    if diff.size == 0:
        return None
    i, v = diff[0]
    return f"orbit_rep={reps[i]} vertex={v}: engine={a[i, v]} reference={b[i, v]}"


def _parse_tsv(text: str, reps, n):
    counts = np.zeros((len(reps), n), dtype=np.int64)
    where = {r: i for i, r in enumerate(reps)}
    for line in text.splitlines()[1:]:
        if not line.strip():
            continue
        v, rep, c = line.split("\t")
        counts[where[int(rep)], int(v)] = int(c)
    return counts


def verify_fixture(stem: Path, budget: int, threads: int):
    """Return ``(status, message)`` for one fixture; status is PASS, FAIL or SKIP."""
    h = read_pattern(stem.with_suffix(".pattern"))
    g = read_graph(stem.with_suffix(".graph"))
    try:
        seq = orbit_homs(h, g, threads=1)
    except DichotomyViolation as exc:
        return "SKIP", str(exc)
    par = orbit_homs(h, g, threads=max(threads, 2))
    if seq.to_tsv() != par.to_tsv():
        return "FAIL", "sequential and parallel runs differ: " + str(
            _first_mismatch(par.counts, seq.counts, seq.orbits.representatives)
        )
    reps = seq.orbits.representatives
    expected = stem.parent / (stem.name + ".expected.tsv")
    if expected.exists():
        ref = _parse_tsv(expected.read_text(), reps, g.n)
        bad = _first_mismatch(seq.counts, ref, reps)
        if bad:
            return "FAIL", f"expected.tsv mismatch at {bad}"
    try:
        ref = oracle_orbit_homs(h, g, budget=budget)
    except BudgetExceeded as exc:
        return "SKIP", f"oracle budget exceeded ({exc})"
    bad = _first_mismatch(seq.counts, ref, reps)
    if bad:
        return "FAIL", f"oracle mismatch at {bad}"
    return "PASS", f"n={g.n} m={g.m} orbits={len(reps)}"


def cmd_verify(args) -> int:
    corpus = Path(args.corpus)
    if not corpus.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {corpus}")
    stems = sorted(p.with_suffix("") for p in corpus.glob("*.pattern"))
    stems = [s for s in stems if s.with_suffix(".graph").exists()]
    if not stems:
        print("WARNING: corpus is empty")
        print("PASS (0 fixtures)")
        return EXIT_OK
    failures = 0
    for stem in stems:
        status, message = verify_fixture(stem, args.budget, args.threads)
        print(f"{status} {stem.name}: {message}")
        if status == "FAIL":
            failures += 1
            if failures == 1:
                first = stem.name
    if failures:
        print(f"FAIL ({failures} of {len(stems)} fixtures; first mismatch in {first})")
        return EXIT_MISMATCH
    print(f"PASS ({len(stems)} fixtures)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench


def bench_rows(h, sizes, kappa, seed, repeats=5, threads=1):
    """Time orbit counting on seeded generated graphs; yields one dict per size."""
    prev = None
    orbit_homs(h, random_degenerate_graph(64, kappa, seed), threads=threads)  # warm up jit
    for n in sizes:
        g = random_degenerate_graph(n, kappa, seed)
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            orbit_homs(h, g, threads=threads)
            times.append(time.perf_counter() - t0)
        med = statistics.median(times)
        yield {
            "n": n,
            "m": g.m,
            "kappa": degeneracy_orientation(g).max_outdegree,
            "seconds": med,
            "ratio": None if prev is None else med / prev,
        }
        prev = med


def cmd_bench(args) -> int:
    h = read_pattern(args.pattern)
    if pattern_mod.lipco(h) > 5:
        raise DichotomyViolation(f"LIPCO(H) = {pattern_mod.lipco(h)} > 5; refusing to benchmark")
    sizes = [int(x) for x in args.sizes.split(",") if x.strip()]
    print(f"seed = {args.seed}  backend = {kernels.get_backend()}  repeats = {args.repeats}")
    print(f"{'n':>10} {'m':>10} {'kappa':>6} {'seconds':>10} {'ratio':>7}")
    for row in bench_rows(h, sizes, args.kappa, args.seed, args.repeats, args.threads):
        ratio = "-" if row["ratio"] is None else f"{row['ratio']:.2f}"
        print(f"{row['n']:>10} {row['m']:>10} {row['kappa']:>6} {row['seconds']:>10.3f} {ratio:>7}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orbithom", description=__doc__.splitlines()[0])
    parser.add_argument("--k-max", type=_positive, help="override the pattern size limit (default 8)")
    parser.add_argument("--backend", choices=["numba", "numpy"], help="kernel backend")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="orbits, LICL, LIPCO, merged patterns and verdict")
    p.add_argument("--pattern", required=True)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("count", help="per-vertex orbit counts as TSV")
    p.add_argument("--pattern", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=_positive, default=default_threads())
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("verify", help="check the engine against the oracle on a fixture corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--threads", type=_positive, default=default_threads())
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="scaling on generated bounded-degeneracy graphs")
    p.add_argument("--pattern", required=True)
    p.add_argument("--sizes", default="10000,20000,40000,80000")
    p.add_argument("--kappa", type=_positive, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=_positive, default=5)
    p.add_argument("--threads", type=_positive, default=1)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.k_max is not None:
            pattern_mod.set_k_max(args.k_max)
        if args.backend is not None:
            kernels.set_backend(args.backend)
        return args.func(args)
    except DichotomyViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DICHOTOMY
    except ArithmeticOverflow as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except (OrbitHomError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
