"""Command-line front end: build sketches from a stream and query or evaluate them.

Every subcommand prints a JSON document with a ``schema`` field to stdout
(or ``--output``).  The default seed comes from ``$GSS_SEED`` (else 0).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path
from typing import Any, Sequence

from . import analytic
from .experiment import SCHEMA, QueryPlan, TcmConfig, reports_csv_rows, reports_json, run_experiment
from .hashing import ConfigError, SketchConfig
from .oracle import ExactGraph
from .queries import node_out_weight, reachable
from .sketch import GSS
from .stream import StreamItem, StreamParseError, SynthSpec, parse_stream, synthesize, write_stream
from .tcm import TCM, side_for_memory

SEED_ENV = "GSS_SEED"


class CliError(Exception):
    """Runtime failure reported as ``gss: error: ...`` with exit status 1."""


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"${SEED_ENV} must be an integer, got {raw!r}") from None


# ---------------------------------------------------------------- arguments

def _add_synth(p: argparse.ArgumentParser, required: bool = False) -> None:
    g = p.add_argument_group("synthetic stream")
    g.add_argument("--synth-edges", type=int, required=required, metavar="N",
                   help="distinct edges to generate")
    g.add_argument("--synth-nodes", type=int, metavar="N",
                   help="node count (default: derived from --synth-edges)")
    g.add_argument("--zipf", type=float, default=1.0, help="edge repeat skew")
    g.add_argument("--skew", type=float, default=0.8, help="node popularity skew")
    g.add_argument("--repeat", type=float, default=1.0,
                   help="extra repeated arrivals per distinct edge")


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", "-i", type=Path, help="edge-list file (.gz allowed)")
    _add_synth(p)


def _add_sketch(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("sketch")
    g.add_argument("--m", type=int, help="matrix side (default: ceil(sqrt(distinct edges / l)))")
    g.add_argument("--fbits", type=int, default=16)
    g.add_argument("--r", type=int, default=None, help="address sequence length (default 16)")
    g.add_argument("--k", type=int, default=None, help="candidate buckets (default 16)")
    g.add_argument("--l", type=int, default=2, help="rooms per bucket")
    g.add_argument("--small", action="store_true", help="use r=8, k=8 for small streams")
    g.add_argument("--lcg", type=int, nargs=3, metavar=("A", "B", "P"),
                   help="explicit address-sequence generator parameters")


def _add_tcm(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("tcm baseline")
    g.add_argument("--tcm-d", type=int, default=4)
    g.add_argument("--tcm-memory-ratio", type=float, default=8.0,
                   help="TCM memory as a multiple of the GSS memory")
    g.add_argument("--tcm-m", type=int, help="explicit TCM matrix side")


def _add_output(p: argparse.ArgumentParser, csv_ok: bool = True) -> None:
    p.add_argument("--output", "-o", type=Path, help="write here instead of stdout")
    if csv_ok:
        p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--seed", type=int, help=f"rng and hash seed (default ${SEED_ENV} or 0)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gss", description="Graph stream sketch toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build a sketch and report buffer stats")
    _add_input(p); _add_sketch(p); _add_output(p)

    for name, helptext in (("edge", "edge weight"), ("reach", "reachability")):
        p = sub.add_parser(name, help=f"single {helptext} query")
        _add_input(p); _add_sketch(p); _add_tcm(p); _add_output(p)
        p.add_argument("--src", required=True)
        p.add_argument("--dst", required=True)
        p.add_argument("--structure", choices=("gss", "tcm", "exact"), default="gss")

    for name, helptext in (("node", "node out-weight"), ("succ", "successor"),
                           ("pred", "precursor")):
        p = sub.add_parser(name, help=f"single {helptext} query")
        _add_input(p); _add_sketch(p); _add_tcm(p); _add_output(p)
        p.add_argument("--node", required=True)
        p.add_argument("--structure", choices=("gss", "tcm", "exact"), default="gss")

    p = sub.add_parser("eval", help="score GSS and TCM against the exact graph")
    _add_input(p); _add_sketch(p); _add_tcm(p); _add_output(p)
    p.add_argument("--edge-queries", type=int, help="sample this many edges (default all)")
    p.add_argument("--node-queries", type=int, help="sample this many nodes (default all)")
    p.add_argument("--unreachable", type=int, default=100)
    p.add_argument("--reachable", type=int, default=100)
    p.add_argument("--no-tcm", action="store_true")
    p.add_argument("--include-exact", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="include throughput (non-deterministic)")

    p = sub.add_parser("analytic", help="closed-form calculators")
    asub = p.add_subparsers(dest="formula", required=True)
    q = asub.add_parser("collision", help="probability an edge query is exact")
    q.add_argument("--edges", type=float, required=True)
    q.add_argument("--adj", type=float, required=True)
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--fbits", type=int, default=0, help="0 models a plain m-sided matrix")
    _add_output(q, csv_ok=False)
    q = asub.add_parser("failure", help="upper bound on left-over probability")
    q.add_argument("--n", type=float, required=True)
    q.add_argument("--adj", type=float, required=True)
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--r", type=int, default=8)
    q.add_argument("--l", type=int, default=3)
    q.add_argument("--k", type=int, default=8)
    _add_output(q, csv_ok=False)

    p = sub.add_parser("synth", help="write a synthetic stream file")
    _add_synth(p, required=True)
    p.add_argument("--output", "-o", type=Path, required=True, help="destination ('-' for stdout)")
    p.add_argument("--seed", type=int)

    # usage errors should show the subcommand's own usage line
    for sp in list(sub.choices.values()) + list(asub.choices.values()):
        sp.set_defaults(_parser=sp)
    return ap


# ---------------------------------------------------------------- plumbing

def _synth_spec(args, seed: int) -> SynthSpec:
    n_edges = args.synth_edges
    n_nodes = args.synth_nodes
    if n_nodes is None:
        n_nodes = max(math.ceil(n_edges / 5), math.isqrt(2 * n_edges) + 2, 2)
    return SynthSpec(n_nodes=n_nodes, n_edges=n_edges, zipf_exponent=args.zipf,
                     degree_skew=args.skew, rng_seed=seed, repeat_ratio=args.repeat)


def _load_items(args, ap: argparse.ArgumentParser, seed: int) -> tuple[list[StreamItem], dict]:
    if (args.input is None) == (args.synth_edges is None):
        ap.error("give exactly one input: --input PATH or --synth-edges N")
    if args.input is not None:
        try:
            items = parse_stream(args.input)
        except FileNotFoundError:
            raise CliError(f"input file not found: {args.input}") from None
        except IsADirectoryError:
            raise CliError(f"input is a directory: {args.input}") from None
        except PermissionError:
            raise CliError(f"cannot read input: {args.input}") from None
        except (StreamParseError, UnicodeDecodeError, OSError) as e:
            raise CliError(f"bad input {args.input}: {e}") from None
        return items, {"path": str(args.input)}
    spec = _synth_spec(args, seed)
    return synthesize(spec), {"synth": asdict(spec)}


def _distinct_edges(items: list[StreamItem]) -> int:
    return len({(it.s, it.d) for it in items})


def _sketch_config(args, ap: argparse.ArgumentParser, items: list[StreamItem], seed: int) -> SketchConfig:
    r = args.r if args.r is not None else (8 if args.small else 16)
    k = args.k if args.k is not None else (8 if args.small else 16)
    if args.l < 1:
        ap.error("--l must be >= 1")
    m = args.m
    if m is None:
        m = max(1, math.ceil(math.sqrt(_distinct_edges(items) / args.l)))
    a = b = p = None
    if args.lcg:
        a, b, p = args.lcg
    try:
        return SketchConfig.create(m, fbits=args.fbits, r=r, k=k, l=args.l,
                                   a=a, b=b, p=p, hash_seed=seed)
    except ConfigError as e:
        ap.error(str(e))
        raise  # unreachable


def _tcm_config(args, seed: int) -> TcmConfig:
    return TcmConfig(d=args.tcm_d, memory_ratio=args.tcm_memory_ratio, seed=seed, m=args.tcm_m)


def _build_tcm(tc: TcmConfig, gss_bytes: int, items: list[StreamItem]) -> TCM:
    m_t = tc.m or side_for_memory(tc.memory_ratio * gss_bytes, tc.d)
    t = TCM(m_t, tc.d, tc.seed)
    t.ingest(items)
    return t


def _emit(text: str, out: Path | None) -> None:
    if out is None or str(out) == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    try:
        out.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot write {out}: {e.strerror or e}") from None


def _flat(d: dict, prefix: str = "") -> dict:
    row: dict[str, Any] = {}
    for key, v in d.items():
        name = f"{prefix}{key}"
        if isinstance(v, dict):
            row.update(_flat(v, name + "_"))
        elif isinstance(v, list):
            row[name] = " ".join(map(str, v))
        else:
            row[name] = v
    return row


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    fields: list[str] = []
    for row in rows:
        fields.extend(k for k in row if k not in fields)
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _doc(command: str, body: dict, fmt: str = "json") -> str:
    doc = {"schema": SCHEMA, "command": command, **body}
    if fmt == "csv":
        return _csv([_flat(doc)])
    return json.dumps(doc, indent=2, sort_keys=True)


def _text(b: bytes) -> str:
    return b.decode("utf-8", "backslashreplace")


# ---------------------------------------------------------------- commands

def _cmd_ingest(args, ap) -> str:
    seed = args.seed
    items, source = _load_items(args, ap, seed)
    cfg = _sketch_config(args, ap, items, seed)
    g = GSS(cfg)
    t0 = time.perf_counter()
    g.ingest(items)
    dt = time.perf_counter() - t0
    left, total, pct = g.buffer_stats()
    body = dict(
        input=source, config=asdict(cfg), items=len(items), sketch_edges=total,
        buffer_edges=left, buffer_pct=pct, memory_bytes=g.memory_bytes(),
        throughput=(len(items) / dt) if dt > 0 and items else 0.0,
    )
    return _doc("ingest", body, args.format)


def _structures(args, ap):
    seed = args.seed
    items, source = _load_items(args, ap, seed)
    cfg = _sketch_config(args, ap, items, seed)
    g = GSS(cfg)
    g.ingest(items)
    body: dict[str, Any] = {"input": source, "structure": args.structure, "config": asdict(cfg)}
    if args.structure == "tcm":
        tc = _tcm_config(args, seed)
        t = _build_tcm(tc, g.memory_bytes(), items)
        body["tcm"] = dict(asdict(tc), m=t.m)
        return body, g, t, None
    if args.structure == "exact":
        return body, g, None, ExactGraph.from_stream(items)
    return body, g, None, None


def _cmd_edge(args, ap) -> str:
    body, g, t, ex = _structures(args, ap)
    s, d = args.src.encode(), args.dst.encode()
    if t is not None:
        w = t.edge_weight(s, d)
    elif ex is not None:
        w = ex.edge_weight(s, d) or 0
    else:
        w = g.edge_weight(s, d) or 0
    body.update(src=args.src, dst=args.dst, weight=w)
    return _doc("edge", body, args.format)


def _cmd_node(args, ap) -> str:
    body, g, t, ex = _structures(args, ap)
    v = args.node.encode()
    if t is not None:
        w = t.node_out_weight(v)
    elif ex is not None:
        w = ex.out_weight(v)
    else:
        w = node_out_weight(v, g)
    body.update(node=args.node, out_weight=w)
    return _doc("node", body, args.format)


def _neighbours(args, ap, forward: bool) -> str:
    body, g, t, ex = _structures(args, ap)
    v = args.node.encode()
    if t is not None:
        found = t.successors(v) if forward else t.precursors(v)
    elif ex is not None:
        found = ex.successors(v) if forward else ex.precursors(v)
    else:
        groups = g.successors(v) if forward else g.precursors(v)
        found = set().union(*groups.values()) if groups else set()
        body["hash_groups"] = len(groups)
    key = "successors" if forward else "precursors"
    body.update(node=args.node, count=len(found), **{key: sorted(_text(x) for x in found)})
    return _doc("succ" if forward else "pred", body, args.format)


def _cmd_reach(args, ap) -> str:
    body, g, t, ex = _structures(args, ap)
    s, d = args.src.encode(), args.dst.encode()
    if t is not None:
        ok = t.reachable(s, d)
    elif ex is not None:
        ok = ex.reachable(s, d)
    else:
        res = reachable(s, d, g)
        ok = res.reachable
        body["visited"] = res.visited_count
    body.update(src=args.src, dst=args.dst, reachable=bool(ok))
    return _doc("reach", body, args.format)


def _cmd_eval(args, ap) -> str:
    seed = args.seed
    if args.threads < 1:
        ap.error("--threads must be >= 1")
    items, source = _load_items(args, ap, seed)
    cfg = _sketch_config(args, ap, items, seed)
    plan = QueryPlan(n_edges=args.edge_queries, n_nodes=args.node_queries,
                     n_unreachable=args.unreachable, n_reachable=args.reachable,
                     seed=seed, threads=args.threads)
    tc = None if args.no_tcm else _tcm_config(args, seed)
    reports = run_experiment(items, cfg, tc, plan, include_exact=args.include_exact)
    if args.format == "csv":
        return _csv(reports_csv_rows(reports, include_timing=args.timing))
    meta = dict(command="eval", input=source, items=len(items),
                plan={k: v for k, v in asdict(plan).items() if k != "threads"})
    if "gss" in reports and "tcm" in reports:
        meta["are_gss"] = reports["gss"].edge_are
        meta["are_tcm"] = reports["tcm"].edge_are
    return reports_json(reports, include_timing=args.timing, **meta)


def _cmd_analytic(args, ap) -> str:
    try:
        if args.formula == "collision":
            if args.fbits < 0 or args.fbits > 32:
                ap.error("--fbits must be in [0, 32]")
            M = args.m * (1 << args.fbits)
            val = analytic.collision_free_rate(args.edges, args.adj, M)
            body = dict(formula="collision", edges=args.edges, adj=args.adj, m=args.m,
                        fbits=args.fbits, M=M, value=round(val, 4), exact=val)
        else:
            val = analytic.insertion_failure(args.n, args.adj, args.m, args.r, args.l, args.k)
            body = dict(formula="failure", n=args.n, adj=args.adj, m=args.m, r=args.r,
                        l=args.l, k=args.k, value=round(val, 4), exact=val)
    except ValueError as e:
        ap.error(str(e))
    return _doc("analytic", body)


def _cmd_synth(args, ap) -> str | None:
    if args.synth_edges < 0:
        ap.error("--synth-edges must be >= 0")
    spec = _synth_spec(args, args.seed)
    items = synthesize(spec)
    if str(args.output) == "-":
        write_stream(items, sys.stdout)
        return None
    try:
        write_stream(items, args.output)
    except OSError as e:
        raise CliError(f"cannot write {args.output}: {e.strerror or e}") from None
    return _doc("synth", dict(output=str(args.output), items=len(items), synth=asdict(spec)))


_COMMANDS = {
    "ingest": _cmd_ingest, "edge": _cmd_edge, "node": _cmd_node,
    "succ": lambda a, p: _neighbours(a, p, True), "pred": lambda a, p: _neighbours(a, p, False),
    "reach": _cmd_reach, "eval": _cmd_eval, "analytic": _cmd_analytic, "synth": _cmd_synth,
}


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if getattr(args, "seed", None) is None:
            args.seed = _default_seed()
        if not hasattr(args, "format"):
            args.format = "json"
        out = _COMMANDS[args.command](args, getattr(args, "_parser", ap))
        if out is not None:
            _emit(out, getattr(args, "output", None) if args.command != "synth" else None)
    except CliError as e:
        print(f"gss: error: {e}", file=sys.stderr)
        return 1
    except (ValueError, ConfigError) as e:
        print(f"gss: error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
