"""Command line: ``simulate``, ``verify-lemmas`` and ``compare``.

Exit codes: 0 success, 1 invariant violation or failed check, 2 bad config
or usage. Output files are written to a temporary name and renamed, so a
failed invocation never leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path
from typing import Optional, Sequence

from . import analysis as an
from . import graph as gr
from .config import ConfigError, SimConfig, build_scenario
from .engine import SimTrace, check_convergence, run, validity_violations

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_config(path: str) -> SimConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return SimConfig.from_json(text)


def signature_gate(trace: SimTrace) -> bool:
    """Every forged entry was rejected and no stale honest entry reached a trimmed mean."""
    a = trace.audits.get("relay")
    if a is None:
        return True
    return a.rejections == a.forged_sent and a.stale_at_boundary == 0


def render_svg(trace: SimTrace, width: int = 640, height: int = 360) -> str:
    """Minimal line chart of honest-state standard deviation per iteration."""
    pad = 40
    algs = trace.algorithms()
    series = {a: [r.stddev for r in trace.rows_for(a)] for a in algs}
    ymax = max((max(v) for v in series.values() if v), default=1.0) or 1.0
    n = max(len(v) for v in series.values())
    sx = (width - 2 * pad) / max(n - 1, 1)
    sy = (height - 2 * pad) / ymax
    colours = {"relay": "#1f77b4", "baseline": "#d62728"}
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
             f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
             f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle" font-size="12">iteration</text>',
             f'<text x="8" y="{pad - 10}" font-size="12">stddev (max {ymax:.3g})</text>']
    for k, (alg, ys) in enumerate(series.items()):
        pts = " ".join(f"{pad + i * sx:.2f},{height - pad - y * sy:.2f}" for i, y in enumerate(ys))
        c = colours.get(alg, "black")
        parts.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{pts}"/>')
        parts.append(f'<text x="{width - pad - 80}" y="{pad + 14 * (k + 1)}" fill="{c}" font-size="12">{alg}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_simulate(args) -> int:
    try:
        cfg = load_config(args.config)
        sc = build_scenario(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(args.out_dir)
    want_matrices = args.emit_matrices and cfg.algorithm in ("relay", "both")
    trace = run(cfg, record_phases=want_matrices, scenario=sc)
    checks: dict[str, bool] = {}
    for alg in trace.algorithms():
        bad = validity_violations(trace, alg)
        checks[f"validity_{alg}"] = not bad
        for a, t in bad[:5]:
            print(f"validity violated: {a} iteration {t}", file=sys.stderr)
    if "relay" in trace.audits:
        checks["signature_gate"] = signature_gate(trace)
        if not checks["signature_gate"]:
            print(f"signature gate failed: {trace.audits['relay']}", file=sys.stderr)

    outputs = {"trace": str(out / "trace.csv"), "manifest": str(out / "manifest.json")}
    if want_matrices:
        part = sc.partition
        try:
            mats = an.extract_all(trace.phases["relay"], part)
            checks["matrices_row_stochastic"] = all(M.is_row_stochastic() for M in mats)
            checks["matrices_consistent"] = all(
                an.state_consistency_check(M, r.before, r.after)
                for M, r in zip(mats, trace.phases["relay"]))
        except an.ExtractionError as exc:
            print(f"matrix extraction failed: {exc}", file=sys.stderr)
            checks["matrices_row_stochastic"] = checks["matrices_consistent"] = False
            mats = []
        outputs["matrices"] = str(out / "matrices.json")
        _atomic_write(out / "matrices.json",
                      an.dump_matrices(mats, part.h, part.b, an.beta_for(cfg.m, cfg.b)))
    if args.svg:
        outputs["svg"] = str(out / "trace.svg")
        _atomic_write(out / "trace.svg", render_svg(trace))

    _atomic_write(out / "trace.csv", trace.to_csv())
    manifest = {
        "config_hash": cfg.config_hash(),
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "graph_seed": sc.graph_seed,
        "graph_retries": sc.retries,
        "D": sc.D,
        "diameter": sc.diameter,
        "byzantine_ids": sorted(sc.partition.byzantine),
        "convergence": {a: check_convergence(trace, cfg.epsilon, a) for a in trace.algorithms()},
        "outputs": outputs,
        "checks": checks,
    }
    _atomic_write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    ok = all(checks.values())
    print(f"{'ok' if ok else 'FAILED'}: {len(trace.rows)} rows -> {outputs['trace']}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify_lemmas(args) -> int:
    n = args.b
    if n < 0:
        print("--b must be non-negative", file=sys.stderr)
        return EXIT_CONFIG
    if args.samples is None:
        if n > gr.MAX_EXHAUSTIVE_N:
            print(f"--b {n} needs --samples (exhaustive mode is limited to b <= "
                  f"{gr.MAX_EXHAUSTIVE_N})", file=sys.stderr)
            return EXIT_CONFIG
        graphs = gr.enumerate_reduced_graphs(n)
    else:
        if args.samples < 1:
            print("--samples must be >= 1", file=sys.stderr)
            return EXIT_CONFIG
        graphs = gr.sample_reduced_graphs(n, args.samples, args.seed)

    start = time.perf_counter()
    total = passed = 0
    for rg in graphs:
        total += 1
        g = rg.graph
        if gr.find_source_components(g) and gr.max_outdegree(g)[1] >= n:
            passed += 1
            continue
        print(f"counterexample: {g.to_json()}", file=sys.stderr)
        print(f"{passed}/{total} pass before counterexample")
        return EXIT_FAIL
    elapsed = time.perf_counter() - start
    line = f"{passed}/{total} pass"
    if args.samples is None:
        line += f", tau={total}"
    print(f"{line} ({elapsed:.2f}s)")
    return EXIT_OK


def compare_rows(cfg: SimConfig, seeds: int, epsilon: Optional[float] = None) -> list[dict]:
    """Iterations until honest stddev < epsilon for both algorithms, one row per seed."""
    eps = cfg.epsilon if epsilon is None else epsilon
    rows = []
    for k in range(seeds):
        c = cfg.with_seed(k)
        tr = run(c)
        r = check_convergence(tr, eps, "relay", "stddev")
        b = check_convergence(tr, eps, "baseline", "stddev")
        if r is None and b is None:
            winner = "none"
        elif b is None or (r is not None and r < b):
            winner = "relay"
        elif r is None or b < r:
            winner = "baseline"
        else:
            winner = "tie"
        rows.append({"seed": c.seed, "relay": r, "baseline": b, "winner": winner})
    return rows


def cmd_compare(args) -> int:
    try:
        cfg = load_config(args.config)
        if cfg.algorithm != "both":
            raise ConfigError("compare needs algorithm 'both'")
        build_scenario(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seeds < 1:
        print("--seeds must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rows = compare_rows(cfg, args.seeds)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    fmt = lambda v: "none" if v is None else str(v)
    lines = ["seed,relay_iters_to_eps,baseline_iters_to_eps,winner"]
    lines += [f"{r['seed']},{fmt(r['relay'])},{fmt(r['baseline'])},{r['winner']}" for r in rows]
    _atomic_write(Path(args.out), "\n".join(lines) + "\n")
    wins = sum(r["winner"] == "relay" for r in rows)
    print(f"relay win rate: {wins}/{len(rows)} = {wins / len(rows):.2f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relay-iabc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one configured experiment")
    s.add_argument("config")
    s.add_argument("--out-dir", default=".")
    s.add_argument("--emit-matrices", action="store_true",
                   help="also write per-phase transition matrices (relay)")
    s.add_argument("--svg", action="store_true", help="also draw stddev per iteration")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify-lemmas", help="check source components of reduced graphs")
    v.add_argument("--b", type=int, required=True)
    v.add_argument("--samples", type=int)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify_lemmas)

    c = sub.add_parser("compare", help="relay vs baseline over several seeds")
    c.add_argument("config")
    c.add_argument("--seeds", type=int, default=20)
    c.add_argument("--out", default="compare.csv")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
