"""Acceptance suite: one PASS/FAIL line per criterion, each at its stated tolerance."""

import itertools
import math
import random
import time

import numpy as np
import pytest

from conftest import random_stream
from gss import analytic
from gss.experiment import QueryPlan, TcmConfig, collision_check, reports_json, run_experiment
from gss.hashing import SketchConfig, address_sequence, combined_hash, decompose, recover_hash
from gss.oracle import ExactGraph, HashedGraph
from gss.queries import node_out_weight
from gss.sketch import GSS
from gss.stream import SynthSpec, synthesize


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nacceptance {n}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok
    return emit


def _gss(cfg, items):
    g = GSS(cfg)
    g.ingest(items)
    return g


def _side(n_edges, l):
    return math.ceil(math.sqrt(n_edges / l))


# -- 1 ---------------------------------------------------------------------------

ORACLE_CFGS = [
    dict(m=32, fbits=3, r=4, k=8, l=1),
    dict(m=32, fbits=3, r=8, k=8, l=2),
    dict(m=100, fbits=8, r=8, k=8, l=2),
    dict(m=64, fbits=16, r=16, k=16, l=2),
    dict(m=200, fbits=12, r=4, k=16, l=3),
]


def _oracle_mismatches(cfg, items):
    g = _gss(cfg, items)
    gh = HashedGraph.from_stream(items, lambda x: combined_hash(x, cfg))
    bad = 0
    for Hs, Hd, w in gh.edges():
        bad += g.edge_weight_h(Hs, Hd) != w
    ids = {it.s for it in items} | {it.d for it in items}
    for v in ids:
        Hv = gh.H(v)
        bad += set(g.successors(v)) != gh.successors(Hv)
        bad += set(g.precursors(v)) != gh.precursors(Hv)
        bad += node_out_weight(v, g) != gh.out_weight(Hv)
    rng = random.Random(len(items))
    nodes = sorted(gh.nodes)
    for _ in range(500):
        Hs, Hd = rng.choice(nodes), rng.choice(nodes)
        bad += g.edge_weight_h(Hs, Hd) != gh.edge_weight(Hs, Hd)
    return bad


def test_criterion_1_oracle_equivalence(report):
    t0 = time.perf_counter()
    bad = 0
    for i in range(50):
        kw = ORACLE_CFGS[i % len(ORACLE_CFGS)]
        cfg = SketchConfig.create(kw["m"], fbits=kw["fbits"], r=kw["r"], k=kw["k"], l=kw["l"], hash_seed=i)
        bad += _oracle_mismatches(cfg, random_stream(1000 + i, 2000, 10_000))
    dt = time.perf_counter() - t0
    ok = report(1, bad == 0 and dt < 60, f"mismatches={bad} runtime={dt:.1f}s")
    assert ok


# -- 2 ---------------------------------------------------------------------------


def _round_trip_failures(cfg, Hs):
    bad = 0
    for H in Hs:
        node = decompose(int(H), cfg)
        for idx, pos in enumerate(address_sequence(node, cfg).addrs):
            bad += recover_hash(node.f, idx, pos, cfg) != H
    return bad


def test_criterion_2_round_trip(report):
    bad = 0
    checked = 0
    for m, F in itertools.product((4, 64, 1000), (8, 256)):
        cfg = SketchConfig.create(m, fbits=int(math.log2(F)), r=8, k=8)
        M = m * F
        Hs = range(M) if M <= 10**6 else np.random.default_rng(M).integers(0, M, 10**6)
        bad += _round_trip_failures(cfg, Hs)
        checked += min(M, 10**6)
    ok = report(2, bad == 0, f"hashes={checked} failures={bad}")
    assert ok


# -- 3 ---------------------------------------------------------------------------


def test_criterion_3_analytic(report):
    c1 = analytic.collision_free_rate(5e5, 200, 256_000)
    c2 = analytic.collision_free_rate(5e5, 200, 1000)
    f = analytic.insertion_failure(1e6, 1e4, 1000, 8, 3, 8)
    checks = [abs(c1 - 0.9992) <= 0.0002, abs(c2 - 0.497) <= 0.002, abs(f - 0.002) <= 0.0005]
    ok = report(3, all(checks), f"collision(M=256000)={c1:.5f} collision(M=1000)={c2:.5f} "
                                f"failure={f:.6f} (target 0.002) per-clause={checks}")
    assert ok


# -- 4 ---------------------------------------------------------------------------


def test_criterion_4_collision_empirical(report):
    t0 = time.perf_counter()
    items = synthesize(SynthSpec(10_000, 50_000, rng_seed=4))
    cfg = SketchConfig.create(64, fbits=4, r=8, k=8, l=2)
    res = collision_check(ExactGraph.from_stream(items), _gss(cfg, items))
    dt = time.perf_counter() - t0
    gap = abs(res["empirical"] - res["predicted"])
    ok = report(4, gap <= 3 * res["std_err"] and dt < 120,
                f"empirical={res['empirical']:.5f} predicted={res['predicted']:.5f} "
                f"3se={3 * res['std_err']:.5f} runtime={dt:.1f}s")
    assert ok


# -- 5 ---------------------------------------------------------------------------


def test_criterion_5_buffer(report):
    n = 100_000
    items = synthesize(SynthSpec(20_000, n, rng_seed=5))
    m = _side(n, 2)
    sq = _gss(SketchConfig.create(m, fbits=16, r=8, k=8, l=2), items).buffer_stats()[2]
    flat = _gss(SketchConfig.create(m, fbits=16, r=1, k=1, l=2), items).buffer_stats()[2]
    checks = [sq < 1e-3, flat > sq]
    ok = report(5, all(checks), f"m={m} buffer(r=8,k=8)={sq:.5f} buffer(r=1,k=1)={flat:.5f} "
                                f"per-clause={checks}")
    assert ok


# -- 6 ---------------------------------------------------------------------------


def test_criterion_6_reachability(report):
    n = 25_000
    items = synthesize(SynthSpec(5000, n, rng_seed=6))
    cfg = SketchConfig.create(_side(n, 2), fbits=16, r=8, k=8, l=2)
    plan = QueryPlan(n_edges=1000, n_nodes=50, n_unreachable=100, n_reachable=100, seed=6)
    reps = run_experiment(items, cfg, TcmConfig(memory_ratio=8.0), plan)
    g, t = reps["gss"], reps["tcm"]
    pairs = g.counts["unreachable_pairs"] == 100 and g.counts["reachable_pairs"] == 100
    checks = [pairs, g.tnr >= 0.95, g.tnr >= t.tnr,
              g.reach_false_negatives == 0 and t.reach_false_negatives == 0]
    ok = report(6, all(checks), f"tnr_gss={g.tnr:.3f} tnr_tcm={t.tnr:.3f} "
                                f"fn_gss={g.reach_false_negatives} fn_tcm={t.reach_false_negatives} "
                                f"mem_ratio={t.memory_bytes / g.memory_bytes:.2f}")
    assert ok


# -- 7 ---------------------------------------------------------------------------


def test_criterion_7_equal_memory(report):
    n = 100_000
    items = synthesize(SynthSpec(20_000, n, rng_seed=7))
    cfg = SketchConfig.create(_side(n, 2), fbits=16, r=8, k=8, l=2)
    plan = QueryPlan(n_edges=20_000, n_nodes=300, n_unreachable=0, n_reachable=0, seed=7)
    reps = run_experiment(items, cfg, TcmConfig(memory_ratio=1.0), plan)
    g, t = reps["gss"], reps["tcm"]
    checks = [g.edge_are * 10 <= t.edge_are, g.succ_precision > t.succ_precision]
    ok = report(7, all(checks), f"are_gss={g.edge_are:.4g} are_tcm={t.edge_are:.4g} "
                                f"succ_gss={g.succ_precision:.4f} succ_tcm={t.succ_precision:.4f} "
                                f"mem_ratio={t.memory_bytes / g.memory_bytes:.3f}")
    assert ok


# -- 8 ---------------------------------------------------------------------------


def test_criterion_8_determinism_throughput(report):
    items = synthesize(SynthSpec(2000, 8000, rng_seed=8))
    cfg = SketchConfig.create(_side(8000, 2), fbits=16, r=8, k=8, l=2)
    plan = QueryPlan(n_edges=2000, n_nodes=100, n_unreachable=30, n_reachable=30, seed=8)
    runs = [reports_json(run_experiment(items, cfg, TcmConfig(), plan)) for _ in range(2)]
    same = runs[0] == runs[1]

    big = synthesize(SynthSpec(50_000, 250_000, rng_seed=9))
    big_cfg = SketchConfig.create(_side(250_000, 2), fbits=16, r=16, k=16, l=2)
    _gss(big_cfg, big[:1000])  # compile kernels
    g = GSS(big_cfg)
    t0 = time.perf_counter()
    g.ingest(big)
    thr = len(big) / (time.perf_counter() - t0)
    ok = report(8, same and thr >= 2e5, f"byte_identical={same} throughput={thr:,.0f} items/s")
    assert ok
