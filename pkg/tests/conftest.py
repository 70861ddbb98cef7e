import itertools
import random

import pytest

from gss.hashing import SketchConfig, combined_hash
from gss.stream import StreamItem


# Didactic generator: full-period LCG mod 8, so any r <= 8 has no repeats.
@pytest.fixture
def tiny_cfg():
    return SketchConfig(m=4, F=8, r=2, k=4, l=2, a=5, b=3, p=8)


def ids_with_hash(cfg, targets, prefix="v"):
    """First node IDs (in counting order) whose combined hash is each target, in order."""
    want = list(targets)
    found = []
    used = set()
    for i in itertools.count():
        name = f"{prefix}{i}".encode()
        H = combined_hash(name, cfg)
        for slot, t in enumerate(want):
            if t == H and slot == len(found) and name not in used:
                found.append(name)
                used.add(name)
                break
        if len(found) == len(want):
            return found
        if i > 10_000_000:
            raise RuntimeError("no ids found")


def random_stream(seed, n_nodes, n_items, wmax=5):
    rng = random.Random(seed)
    out = []
    for _ in range(n_items):
        s = rng.randrange(n_nodes)
        d = rng.randrange(n_nodes)
        out.append(StreamItem(f"x{s}".encode(), f"x{d}".encode(), rng.randint(1, wmax)))
    return out
