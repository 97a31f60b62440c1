"""Counter-keyed random streams shared by the Monte-Carlo and hybrid estimators.

Draws are cut into fixed-size blocks.  Block ``i`` of purpose ``tag`` always
uses ``SeedSequence(master_seed, spawn_key=(tag, i))``, so a block's draws do
not depend on which worker runs it.  Workers take contiguous block ranges
and results are folded in block order, making pooled estimates independent
of the worker layout.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BLOCK_SIZE",
    "TAG_CONDITIONAL",
    "TAG_OUTER",
    "TAG_PIPELINE",
    "TAG_ESTIMATE",
    "StreamBlock",
    "WorkerStreams",
    "block_stream",
    "plan_blocks",
    "run_blocks",
    "split_streams",
]

BLOCK_SIZE = 10_000
TAG_PIPELINE = 1
TAG_CONDITIONAL = 2
TAG_OUTER = 3
TAG_ESTIMATE = 4


@dataclass(frozen=True)
class StreamBlock:
    index: int
    start: int
    size: int
    master_seed: int
    tag: int

    def rng(self) -> np.random.Generator:
        return block_stream(self.master_seed, self.tag, self.index)


@dataclass(frozen=True)
class WorkerStreams:
    worker: int
    blocks: tuple

    @property
    def n(self) -> int:
        return sum(b.size for b in self.blocks)


def block_stream(master_seed: int, tag: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(tag), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


def plan_blocks(n: int, master_seed: int, tag: int, block_size: int = BLOCK_SIZE) -> list[StreamBlock]:
    n = int(n)
    if n < 0:
        raise ValueError("sample count must be >= 0")
    out = []
    start = 0
    i = 0
    while start < n:
        size = min(block_size, n - start)
        out.append(StreamBlock(i, start, size, int(master_seed), int(tag)))
        start += size
        i += 1
    return out


def split_streams(master_seed: int, workers: int, draws_per_worker: int, tag: int = TAG_PIPELINE) -> list[WorkerStreams]:
    """Assign the blocks covering ``workers * draws_per_worker`` draws to workers.

    Parameters
    ----------
    master_seed : int
    workers : int
        At least 1.
    draws_per_worker : int
        Nominal share; the block grid depends only on the total.
    """
    workers = int(workers)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    blocks = plan_blocks(workers * int(draws_per_worker), master_seed, tag)
    bounds = np.linspace(0, len(blocks), workers + 1).round().astype(int)
    return [WorkerStreams(w, tuple(blocks[bounds[w] : bounds[w + 1]])) for w in range(workers)]


def run_blocks(fn, n: int, master_seed: int, tag: int, workers: int = 1) -> list:
    """Evaluate ``fn(rng, size, start)`` on every block; results come back in block order."""
    workers = max(1, int(workers))
    blocks = plan_blocks(n, master_seed, tag)
    bounds = np.linspace(0, len(blocks), workers + 1).round().astype(int)
    plan = [blocks[bounds[w] : bounds[w + 1]] for w in range(workers)]

    def work(chunk):
        return [fn(b.rng(), b.size, b.start) for b in chunk]

    if workers == 1:
        parts = [work(plan[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, plan))
    return [r for part in parts for r in part]
