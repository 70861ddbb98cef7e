"""Run a stream through GSS, TCM and an exact graph and score the answers."""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import metrics
from .analytic import collision_free_rate
from .hashing import SketchConfig
from .oracle import ExactGraph
from .queries import node_out_weight, reachable
from .sketch import GSS
from .stream import StreamItem
from .tcm import TCM, side_for_memory

SCHEMA = "gss-eval/1"


@dataclass(frozen=True)
class TcmConfig:
    d: int = 4
    memory_ratio: float = 8.0
    seed: int = 0
    m: int | None = None  # overrides memory_ratio when set


@dataclass(frozen=True)
class QueryPlan:
    """Which queries to run.  ``None`` for edges/nodes means all of them."""

    n_edges: int | None = None
    n_nodes: int | None = None
    n_unreachable: int = 100
    n_reachable: int = 100
    seed: int = 0
    threads: int = 1


@dataclass
class EvalReport:
    structure: str
    config: dict[str, Any]
    memory_bytes: int
    edge_are: float
    edge_aae: float
    node_are: float
    node_aae: float
    succ_precision: float
    pred_precision: float
    tnr: float
    reach_false_negatives: int
    buffer_pct: float | None = None
    throughput: float | None = None
    counts: dict[str, int] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        d = asdict(self)
        if not include_timing:
            d.pop("throughput")
        return d


def _pmap(fn: Callable, xs: Sequence, threads: int) -> list:
    if threads <= 1 or len(xs) < 2:
        return [fn(x) for x in xs]
    with ThreadPoolExecutor(threads) as ex:
        return list(ex.map(fn, xs, chunksize=max(1, len(xs) // (4 * threads))))


# Uniform query surface over the three structures.

class _ExactView:
    name = "exact"

    def __init__(self, g: ExactGraph):
        self.g = g

    def edges(self, pairs):
        return [self.g.edge_weight(s, d) or 0 for s, d in pairs]

    def node(self, v):
        return self.g.out_weight(v)

    def succ(self, v):
        return self.g.successors(v)

    def pred(self, v):
        return self.g.precursors(v)

    def reach(self, s, d):
        return self.g.reachable(s, d)


class _GssView:
    name = "gss"

    def __init__(self, g: GSS):
        self.g = g

    def edges(self, pairs):
        Hs = np.array([self.g.node_hash(s) for s, _ in pairs], dtype=np.int64)
        Hd = np.array([self.g.node_hash(d) for _, d in pairs], dtype=np.int64)
        return [w or 0 for w in self.g.edge_weights_h(Hs, Hd)]

    def node(self, v):
        return node_out_weight(v, self.g)

    def succ(self, v):
        out: set[bytes] = set()
        for ids in self.g.successors(v).values():
            out |= ids
        return out

    def pred(self, v):
        out: set[bytes] = set()
        for ids in self.g.precursors(v).values():
            out |= ids
        return out

    def reach(self, s, d):
        return reachable(s, d, self.g).reachable


class _TcmView:
    name = "tcm"

    def __init__(self, t: TCM):
        self.t = t

    def edges(self, pairs):
        return [self.t.edge_weight(s, d) for s, d in pairs]

    def node(self, v):
        return self.t.node_out_weight(v)

    def succ(self, v):
        return self.t.successors(v)

    def pred(self, v):
        return self.t.precursors(v)

    def reach(self, s, d):
        return self.t.reachable(s, d)


def _sample(rng: np.random.Generator, xs: list, n: int | None) -> list:
    if n is None or n >= len(xs):
        return xs
    return [xs[i] for i in sorted(rng.choice(len(xs), size=n, replace=False).tolist())]


def _csr(g: ExactGraph, nodes: list[bytes]):
    from scipy.sparse import csr_matrix

    pos = {v: i for i, v in enumerate(nodes)}
    rows: list[int] = []
    cols: list[int] = []
    for s, d, _ in g.edges():
        rows.append(pos[s])
        cols.append(pos[d])
    n = len(nodes)
    return csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))


def reach_pairs(g: ExactGraph, n_unreach: int, n_reach: int, seed: int,
                max_tries: int = 200_000) -> tuple[list, list]:
    """Random (s, d) node pairs, s != d, split by exact reachability."""
    from scipy.sparse.csgraph import breadth_first_order

    rng = np.random.default_rng([seed, 7])
    nodes = sorted(g.nodes)
    adj = _csr(g, nodes) if len(nodes) > 1 else None
    unreach: list[tuple[bytes, bytes]] = []
    reach: list[tuple[bytes, bytes]] = []
    cache: dict[int, np.ndarray] = {}
    seen: set[tuple[int, int]] = set()
    tries = 0
    while (len(unreach) < n_unreach or len(reach) < n_reach) and tries < max_tries and len(nodes) > 1:
        tries += 1
        i, j = rng.integers(len(nodes), size=2).tolist()
        if i == j or (i, j) in seen:
            continue
        seen.add((i, j))
        rs = cache.get(i)
        if rs is None:
            rs = cache[i] = np.zeros(len(nodes), dtype=bool)
            rs[breadth_first_order(adj, i, directed=True, return_predecessors=False)] = True
        if rs[j]:
            if len(reach) < n_reach:
                reach.append((nodes[i], nodes[j]))
        elif len(unreach) < n_unreach:
            unreach.append((nodes[i], nodes[j]))
    return unreach, reach


def _score(view, exact: ExactGraph, edge_q, edge_true, node_q, unreach, reach_ok, threads) -> dict:
    est = view.edges(edge_q)
    edge_pairs = list(zip(edge_true, est))
    node_true = [exact.out_weight(v) for v in node_q]
    node_est = _pmap(view.node, node_q, threads)
    node_pairs = [(t, e) for t, e in zip(node_true, node_est) if t > 0]
    succ = _pmap(view.succ, node_q, threads)
    pred = _pmap(view.pred, node_q, threads)
    ans_unreach = _pmap(lambda p: view.reach(*p), unreach, threads)
    ans_reach = _pmap(lambda p: view.reach(*p), reach_ok, threads)
    return dict(
        edge_are=metrics.are(edge_pairs),
        edge_aae=metrics.aae(edge_pairs),
        node_are=metrics.are(node_pairs),
        node_aae=metrics.aae(node_pairs),
        succ_precision=metrics.avg_precision(zip((exact.successors(v) for v in node_q), succ)),
        pred_precision=metrics.avg_precision(zip((exact.precursors(v) for v in node_q), pred)),
        tnr=metrics.true_negative_recall(ans_unreach),
        reach_false_negatives=sum(1 for a in ans_reach if not a),
        counts=dict(
            edge_queries=len(edge_pairs),
            node_queries=len(node_q),
            node_queries_zero_excluded=len(node_q) - len(node_pairs),
            unreachable_pairs=len(unreach),
            reachable_pairs=len(reach_ok),
            overestimated_edges=sum(1 for t, e in edge_pairs if e > t),
        ),
    )


def collision_check(exact: ExactGraph, gss: GSS) -> dict[str, float]:
    """Empirical over-estimated edge fraction next to the analytic prediction."""
    dsum = exact.degree_sums()
    E = len(dsum)
    M = gss.cfg.M
    pairs = list(dsum)
    Hs = np.array([gss.node_hash(s) for s, _ in pairs], dtype=np.int64)
    Hd = np.array([gss.node_hash(d) for _, d in pairs], dtype=np.int64)
    est = gss.edge_weights_h(Hs, Hd)
    over = sum(1 for (s, d), w in zip(pairs, est) if w is not None and w > exact.edge_weight(s, d))
    p_ok = np.array([collision_free_rate(E, dsum[e], M) for e in pairs])
    pred = float(np.mean(1.0 - p_ok)) if E else 0.0
    se = math.sqrt(float(np.sum(p_ok * (1.0 - p_ok)))) / E if E else 0.0
    D = np.array([dsum[e] for e in pairs]) if E else np.zeros(1)
    return dict(
        empirical=over / E if E else 0.0,
        predicted=pred,
        std_err=se,
        n_edges=E,
        D_mean=float(D.mean()),
        D_p50=float(np.percentile(D, 50)),
        D_p99=float(np.percentile(D, 99)),
        D_max=float(D.max()),
    )


def _cfg_dict(cfg: SketchConfig) -> dict[str, int]:
    return asdict(cfg)


def run_experiment(
    stream: Iterable[StreamItem],
    gss_cfg: SketchConfig,
    tcm_cfg: TcmConfig | None = TcmConfig(),
    plan: QueryPlan = QueryPlan(),
    include_exact: bool = False,
) -> dict[str, EvalReport]:
    """Ingest ``stream`` into every structure and evaluate the query plan."""
    items = list(stream)
    exact = ExactGraph.from_stream(items)

    gss = GSS(gss_cfg)
    t0 = time.perf_counter()
    gss.ingest(items)
    dt = time.perf_counter() - t0

    views: list[tuple[Any, dict, int, float | None, float | None]] = [
        (_GssView(gss), _cfg_dict(gss_cfg), gss.memory_bytes(), gss.buffer_stats()[2],
         len(items) / dt if dt > 0 else math.inf),
    ]
    if tcm_cfg is not None:
        m_t = tcm_cfg.m or side_for_memory(tcm_cfg.memory_ratio * gss.memory_bytes(), tcm_cfg.d)
        tcm = TCM(m_t, tcm_cfg.d, tcm_cfg.seed)
        t0 = time.perf_counter()
        tcm.ingest(items)
        dt = time.perf_counter() - t0
        views.append((_TcmView(tcm), dict(asdict(tcm_cfg), m=m_t), tcm.memory_bytes(), None,
                      len(items) / dt if dt > 0 else math.inf))
    if include_exact:
        views.append((_ExactView(exact), {}, 0, None, None))

    rng = np.random.default_rng([plan.seed, 3])
    all_edges = sorted((s, d) for s, d, _ in exact.edges())
    edge_q = _sample(rng, all_edges, plan.n_edges)
    edge_true = [exact.edge_weight(s, d) for s, d in edge_q]
    node_q = _sample(rng, sorted(exact.nodes), plan.n_nodes)
    unreach, reach_ok = reach_pairs(exact, plan.n_unreachable, plan.n_reachable, plan.seed)

    reports: dict[str, EvalReport] = {}
    for view, cfg, mem, buf, thr in views:
        scores = _score(view, exact, edge_q, edge_true, node_q, unreach, reach_ok, plan.threads)
        extra = {}
        if view.name == "gss":
            extra["collision"] = collision_check(exact, gss)
            left, total, _ = gss.buffer_stats()
            extra["buffer"] = dict(left_over=left, sketch_edges=total)
        reports[view.name] = EvalReport(
            structure=view.name, config=cfg, memory_bytes=mem, buffer_pct=buf,
            throughput=thr, extra=extra, **scores,
        )
    return reports


def reports_json(reports: dict[str, EvalReport], include_timing: bool = False, **meta) -> str:
    doc = {"schema": SCHEMA, **meta,
           "reports": {k: r.to_dict(include_timing) for k, r in reports.items()}}
    return json.dumps(doc, indent=2, sort_keys=True)


CSV_FIELDS = ("structure", "memory_bytes", "edge_are", "edge_aae", "node_are", "node_aae",
              "succ_precision", "pred_precision", "tnr", "reach_false_negatives", "buffer_pct",
              "throughput")


def reports_csv_rows(reports: dict[str, EvalReport], include_timing: bool = False) -> list[dict]:
    rows = []
    for r in reports.values():
        d = r.to_dict(include_timing=True)
        row = {k: d.get(k) for k in CSV_FIELDS}
        row.update({f"cfg_{k}": v for k, v in r.config.items()})
        if not include_timing:
            row.pop("throughput")
        rows.append(row)
    return rows
