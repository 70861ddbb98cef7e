import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ids_with_hash, random_stream
from gss.hashing import SketchConfig, combined_hash
from gss.oracle import ExactGraph, HashedGraph
from gss.queries import node_out_weight, reachable, reachable_h, reachable_h_py
from gss.sketch import GSS
from gss.stream import StreamItem


def _build(cfg, items):
    g = GSS(cfg)
    g.ingest(items)
    return g


def test_node_out_weight_example(tiny_cfg):
    a, c, g_ = ids_with_hash(tiny_cfg, [2, 5, 5])
    sk = _build(tiny_cfg, [StreamItem(a, c, 2), StreamItem(a, g_, 4)])
    assert node_out_weight(a, sk) == 6
    (other,) = ids_with_hash(tiny_cfg, [7], prefix="w")
    assert node_out_weight(other, sk) == 0


def test_node_out_weight_unknown():
    cfg = SketchConfig.create(64, fbits=16, r=4, k=4)
    sk = _build(cfg, [StreamItem(b"a", b"b", 3)])
    assert node_out_weight("zzz", sk) == 0
    assert node_out_weight("a", sk) == 3


def test_reach_chain():
    cfg = SketchConfig.create(64, fbits=16, r=4, k=4)
    sk = _build(cfg, [StreamItem(b"a", b"b"), StreamItem(b"b", b"c")])
    assert len({sk.node_hash(x) for x in "abc"}) == 3
    assert reachable("a", "c", sk).reachable
    assert not reachable("c", "a", sk).reachable
    assert reachable("a", "a", sk) == (True, 1)
    assert not reachable("q", "q", sk).reachable


def test_reach_through_buffer():
    # one candidate bucket, one room: most edges overflow into the buffer
    cfg = SketchConfig.create(2, fbits=8, r=1, k=1, l=1)
    chain = [StreamItem(f"c{i}".encode(), f"c{i + 1}".encode()) for i in range(30)]
    sk = _build(cfg, chain)
    assert sk.buffer_edges > 0
    assert reachable("c0", "c30", sk).reachable


def _gh_reach(gh, Hs, Hd):
    if Hs == Hd:
        return Hs in gh.nodes
    return Hd in gh.reach_set(Hs)


@pytest.mark.parametrize("m,fbits,l", [(40, 10, 2), (8, 2, 1), (3, 4, 2)])
def test_reach_matches_gh_bfs(m, fbits, l):
    cfg = SketchConfig.create(m, fbits=fbits, r=4, k=8, l=l)
    items = random_stream(m, 400, 500)
    sk = _build(cfg, items)
    gh = HashedGraph.from_stream(items, lambda x: combined_hash(x, cfg))
    nodes = sorted(gh.nodes)
    rng = random.Random(0)
    for _ in range(150):
        Hs, Hd = rng.choice(nodes), rng.choice(nodes)
        res = reachable_h(Hs, Hd, sk)
        assert res.reachable == _gh_reach(gh, Hs, Hd)
        assert res == reachable_h_py(Hs, Hd, sk)
        assert res.visited_count <= len(gh.nodes)


def test_node_out_weight_matches_gh():
    cfg = SketchConfig.create(10, fbits=4, r=4, k=4, l=2)
    items = random_stream(11, 300, 2000)
    sk = _build(cfg, items)
    gh = HashedGraph.from_stream(items, lambda x: combined_hash(x, cfg))
    for v in {it.s for it in items}:
        assert node_out_weight(v, sk) == gh.out_weight(combined_hash(v, cfg))


@settings(max_examples=40, deadline=None)
@given(
    raw=st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)), min_size=1, max_size=120),
    m=st.integers(1, 10),
    fbits=st.integers(1, 6),
    data=st.data(),
)
def test_no_false_negatives_property(raw, m, fbits, data):
    cfg = SketchConfig.create(m, fbits=fbits, r=3, k=5, l=1)
    items = [StreamItem(f"n{s}".encode(), f"n{d}".encode()) for s, d in raw]
    sk = _build(cfg, items)
    exact = ExactGraph.from_stream(items)
    nodes = sorted(exact.nodes)
    s = data.draw(st.sampled_from(nodes))
    for d in exact.reach_set(s):
        assert reachable(s, d, sk).reachable
